// Copyright 2026 The moocxfer Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "moocxfer/meta_features.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <random>

#include "json.hpp"

#include "moocxfer/common.hpp"

namespace moocxfer::meta {
namespace {

constexpr std::array<std::string_view, kSliceCount> kSliceNames = {
    "duration", "level", "language", "title", "short_description", "long_description"};

// Splits UTF-8 into code points; invalid bytes pass through one at a time.
std::vector<std::string> code_points(const std::string& s) {
  std::vector<std::string> out;
  for (size_t i = 0; i < s.size();) {
    const unsigned char c = static_cast<unsigned char>(s[i]);
    size_t n = 1;
    if ((c & 0xE0) == 0xC0) n = 2;
    else if ((c & 0xF0) == 0xE0) n = 3;
    else if ((c & 0xF8) == 0xF0) n = 4;
    if (i + n > s.size()) n = 1;
    out.push_back(s.substr(i, n));
    i += n;
  }
  return out;
}

std::vector<double> to_vector(const nlohmann::json& j, size_t dim, const std::string& course,
                              const char* key) {
  if (!j.contains(key) || !j[key].is_array()) {
    throw DataError("embeddings for " + course + ": missing '" + key + "' vector");
  }
  const auto& arr = j[key];
  if (arr.size() != dim) {
    throw DataError("embeddings for " + course + ": '" + key + "' has " +
                    std::to_string(arr.size()) + " values, expected " + std::to_string(dim));
  }
  std::vector<double> v;
  for (const auto& x : arr) {
    if (!x.is_number()) throw DataError("embeddings for " + course + ": non-numeric value");
    v.push_back(x.get<double>());
  }
  return v;
}

}  // namespace

std::string_view slice_name(Slice s) { return kSliceNames[static_cast<size_t>(s)]; }

std::optional<Slice> parse_slice(std::string_view name) {
  for (int i = 0; i < kSliceCount; ++i) {
    if (kSliceNames[i] == name) return static_cast<Slice>(i);
  }
  return std::nullopt;
}

int MetaConfig::slice_dim(Slice s) const {
  switch (s) {
    case Slice::kDuration: return 1;
    case Slice::kLevel: return 3;
    case Slice::kLanguage: return 2;
    case Slice::kTitle: return title_dim;
    case Slice::kShortDescription: return short_dim;
    case Slice::kLongDescription: return long_dim;
  }
  return 0;
}

int MetaConfig::total_dim() const {
  int total = 0;
  for (int i = 0; i < kSliceCount; ++i) {
    if (enabled[i]) total += slice_dim(static_cast<Slice>(i));
  }
  return total;
}

void MetaConfig::validate() const {
  const int full = 6 + title_dim + short_dim + long_dim;
  auto fail = [&](const std::string& what) {
    throw ConfigError("meta dims: " + what + " (title " + std::to_string(title_dim) + " + short " +
                      std::to_string(short_dim) + " + long " + std::to_string(long_dim) +
                      " + 6 = " + std::to_string(full) + "; defaults give " +
                      std::to_string(kDefaultMetaDim) + ")");
  };
  if (title_dim < 1) fail("title dim must be positive");
  if (short_dim < 30 || short_dim > 60) fail("short description dim must be in [30, 60]");
  if (long_dim < 30 || long_dim > 60) fail("long description dim must be in [30, 60]");
  bool any = false;
  for (bool e : enabled) any = any || e;
  if (!any) fail("no meta slice enabled");
}

std::vector<SliceRange> layout(const MetaConfig& config) {
  std::vector<SliceRange> out;
  int offset = 0;
  for (int i = 0; i < kSliceCount; ++i) {
    if (!config.enabled[i]) continue;
    const Slice s = static_cast<Slice>(i);
    out.push_back({s, offset, config.slice_dim(s)});
    offset += config.slice_dim(s);
  }
  return out;
}

Categorical encode_categorical(const CourseMetaRaw& meta) {
  Categorical c;
  c.duration = meta.duration_weeks;
  c.level[static_cast<size_t>(meta.level)] = 1.0;
  c.language[static_cast<size_t>(meta.language)] = 1.0;
  return c;
}

TextEmbedder::TextEmbedder(int dim, uint64_t seed) : dim_(dim), seed_(seed) {
  if (dim < 1) throw ArgumentError("embedding dim must be positive");
}

std::vector<std::string> TextEmbedder::tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char ch : text) {
    const unsigned char c = static_cast<unsigned char>(ch);
    if (c < 0x80 && (std::isspace(c) || std::ispunct(c))) {
      if (!cur.empty()) tokens.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

std::vector<uint64_t> TextEmbedder::token_buckets(const std::string& token) {
  const auto cps = code_points(token);
  std::vector<uint64_t> out;
  if (cps.size() < static_cast<size_t>(kMinGram)) {
    out.push_back(fnv1a64(token) % kBuckets);
    return out;
  }
  for (int n = kMinGram; n <= kMaxGram; ++n) {
    for (size_t i = 0; i + n <= cps.size(); ++i) {
      std::string gram;
      for (int k = 0; k < n; ++k) gram += cps[i + k];
      out.push_back(fnv1a64(gram) % kBuckets);
    }
  }
  return out;
}

void TextEmbedder::add_bucket_vector(uint64_t bucket, std::vector<double>& acc) const {
  Rng rng(splitmix64(seed_ ^ splitmix64(bucket + 1)));
  std::normal_distribution<double> normal;
  std::vector<double> v(static_cast<size_t>(dim_));
  double sq = 0.0;
  for (double& x : v) {
    x = normal(rng);
    sq += x * x;
  }
  const double norm = std::sqrt(sq);
  for (size_t i = 0; i < v.size(); ++i) acc[i] += v[i] / norm;
}

std::vector<double> TextEmbedder::embed(std::string_view text) const {
  std::vector<double> out(static_cast<size_t>(dim_), 0.0);
  const auto tokens = tokenize(text);
  if (tokens.empty()) return out;
  for (const auto& tok : tokens) {
    const auto buckets = token_buckets(tok);
    std::vector<double> tv(out.size(), 0.0);
    for (uint64_t b : buckets) add_bucket_vector(b, tv);
    for (size_t i = 0; i < out.size(); ++i) out[i] += tv[i] / static_cast<double>(buckets.size());
  }
  for (double& x : out) x /= static_cast<double>(tokens.size());
  return out;
}

ExternalEmbeddings load_external_embeddings(const std::string& path, const MetaConfig& config) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw DataError("embeddings file " + path + ": " + e.what());
  }
  if (!j.is_object()) throw DataError("embeddings file " + path + ": expected an object");
  ExternalEmbeddings out;
  for (const auto& [course, entry] : j.items()) {
    if (!entry.is_object()) throw DataError("embeddings for " + course + ": expected an object");
    TextVectors v;
    v.title = to_vector(entry, static_cast<size_t>(config.title_dim), course, "title");
    v.short_description = to_vector(entry, static_cast<size_t>(config.short_dim), course, "short");
    v.long_description = to_vector(entry, static_cast<size_t>(config.long_dim), course, "long");
    out.emplace(course, std::move(v));
  }
  return out;
}

void require_embeddings(const ExternalEmbeddings& ext, const std::vector<std::string>& ids) {
  for (const auto& id : ids) {
    if (!ext.count(id)) throw DataError("embeddings file has no entry for course " + id);
  }
}

std::vector<double> raw_meta(const CourseMetaRaw& meta, const std::string& course_id,
                             const MetaConfig& config, const ExternalEmbeddings* ext) {
  config.validate();
  const TextVectors* override_vectors = nullptr;
  if (ext != nullptr) {
    auto it = ext->find(course_id);
    if (it == ext->end()) throw DataError("embeddings file has no entry for course " + course_id);
    override_vectors = &it->second;
  }
  const Categorical cat = encode_categorical(meta);
  std::vector<double> out;
  out.reserve(static_cast<size_t>(config.total_dim()));
  auto text = [&](Slice s, const std::string& t, const std::vector<double>* given) {
    if (given != nullptr) {
      out.insert(out.end(), given->begin(), given->end());
      return;
    }
    // Each slice gets its own embedding table.
    const TextEmbedder emb(config.slice_dim(s),
                           derive_seed(config.embed_seed, std::string(slice_name(s))));
    const auto v = emb.embed(t);
    out.insert(out.end(), v.begin(), v.end());
  };
  for (const auto& r : layout(config)) {
    switch (r.slice) {
      case Slice::kDuration: out.push_back(cat.duration); break;
      case Slice::kLevel: out.insert(out.end(), cat.level.begin(), cat.level.end()); break;
      case Slice::kLanguage: out.insert(out.end(), cat.language.begin(), cat.language.end()); break;
      case Slice::kTitle:
        text(r.slice, meta.title, override_vectors ? &override_vectors->title : nullptr);
        break;
      case Slice::kShortDescription:
        text(r.slice, meta.short_description,
             override_vectors ? &override_vectors->short_description : nullptr);
        break;
      case Slice::kLongDescription:
        text(r.slice, meta.long_description,
             override_vectors ? &override_vectors->long_description : nullptr);
        break;
    }
  }
  return out;
}

MetaNormStats fit_meta_stats(const std::vector<std::vector<double>>& raw, const MetaConfig& config) {
  if (raw.empty()) throw DataError("no courses to fit meta statistics on");
  const size_t d = static_cast<size_t>(config.total_dim());
  MetaNormStats st;
  st.min.assign(d, std::numeric_limits<double>::infinity());
  st.max.assign(d, -std::numeric_limits<double>::infinity());
  st.scaled.assign(d, true);
  for (const auto& r : layout(config)) {
    if (r.slice == Slice::kLevel || r.slice == Slice::kLanguage) {
      for (int k = 0; k < r.dim; ++k) st.scaled[r.offset + k] = false;
    }
  }
  for (const auto& v : raw) {
    if (v.size() != d) {
      throw DataError("meta vector has " + std::to_string(v.size()) + " values, expected " +
                      std::to_string(d));
    }
    for (size_t i = 0; i < d; ++i) {
      st.min[i] = std::min(st.min[i], v[i]);
      st.max[i] = std::max(st.max[i], v[i]);
    }
  }
  return st;
}

std::vector<double> apply_meta_stats(const std::vector<double>& raw, const MetaNormStats& stats) {
  if (raw.size() != stats.min.size()) {
    throw DataError("meta statistics cover " + std::to_string(stats.min.size()) +
                    " dims, vector has " + std::to_string(raw.size()));
  }
  std::vector<double> out(raw.size());
  for (size_t i = 0; i < raw.size(); ++i) {
    if (!stats.scaled[i]) {
      out[i] = raw[i];
    } else if (!(stats.max[i] > stats.min[i])) {
      out[i] = 0.0;
    } else {
      out[i] = std::clamp((raw[i] - stats.min[i]) / (stats.max[i] - stats.min[i]), 0.0, 1.0);
    }
  }
  return out;
}

MetaVector assemble_meta(const CourseMetaRaw& meta, const std::string& course_id,
                         const MetaConfig& config, const std::optional<MetaNormStats>& stats,
                         const ExternalEmbeddings* ext) {
  const auto raw = raw_meta(meta, course_id, config, ext);
  MetaVector v;
  v.slices = layout(config);
  v.values = apply_meta_stats(raw, stats ? *stats : fit_meta_stats({raw}, config));
  return v;
}

}  // namespace moocxfer::meta
