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

#ifndef MOOCXFER_META_FEATURES_HPP_
#define MOOCXFER_META_FEATURES_HPP_

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "moocxfer/datamodel.hpp"

namespace moocxfer::meta {

// F1..F6 in concatenation order.
enum class Slice { kDuration, kLevel, kLanguage, kTitle, kShortDescription, kLongDescription };
inline constexpr int kSliceCount = 6;
inline constexpr int kDefaultMetaDim = 124;

std::string_view slice_name(Slice s);  // "duration", "level", ... "long_description"
std::optional<Slice> parse_slice(std::string_view name);

struct MetaConfig {
  int title_dim = 30;
  int short_dim = 30;
  int long_dim = 58;
  uint64_t embed_seed = 0x6d6f6f63;
  std::array<bool, kSliceCount> enabled = {true, true, true, true, true, true};

  int slice_dim(Slice s) const;
  int total_dim() const;  // enabled slices only
  // Throws ConfigError for non-positive dims, description dims outside
  // [30, 60] or no enabled slice; the message names the resulting total.
  void validate() const;
};

struct SliceRange {
  Slice slice;
  int offset;
  int dim;
};

// Enabled slices with their position in the concatenated vector.
std::vector<SliceRange> layout(const MetaConfig& config);

struct Categorical {
  double duration = 0.0;
  std::array<double, 3> level{};     // Bachelor, Master, Propedeutic
  std::array<double, 2> language{};  // French, English
};

Categorical encode_categorical(const CourseMetaRaw& meta);

// Hashed character n-gram embedder. Text is lowercased, punctuation becomes
// whitespace, and each token is the mean of random unit vectors indexed by
// the hashes of its 3..5 code-point n-grams (tokens shorter than three code
// points hash whole). The text vector is the mean over tokens; empty text
// gives zeros.
class TextEmbedder {
 public:
  static constexpr int kMinGram = 3;
  static constexpr int kMaxGram = 5;
  static constexpr uint64_t kBuckets = 1u << 20;

  TextEmbedder(int dim, uint64_t seed);

  std::vector<double> embed(std::string_view text) const;
  static std::vector<std::string> tokenize(std::string_view text);
  // Buckets a token contributes, in n-gram order.
  static std::vector<uint64_t> token_buckets(const std::string& token);

  int dim() const { return dim_; }

 private:
  void add_bucket_vector(uint64_t bucket, std::vector<double>& acc) const;

  int dim_;
  uint64_t seed_;
};

struct TextVectors {
  std::vector<double> title;
  std::vector<double> short_description;
  std::vector<double> long_description;
};

// course_id -> vectors that replace the hashed embedder's output.
using ExternalEmbeddings = std::map<std::string, TextVectors>;

// JSON {course_id: {"title": [...], "short": [...], "long": [...]}}. Throws
// DataError naming the course when a vector has the wrong length, IoError
// when the file cannot be read.
ExternalEmbeddings load_external_embeddings(const std::string& path, const MetaConfig& config);

// Checks that every course in `ids` has an entry.
void require_embeddings(const ExternalEmbeddings& ext, const std::vector<std::string>& ids);

// Unnormalised concatenation of the enabled slices.
std::vector<double> raw_meta(const CourseMetaRaw& meta, const std::string& course_id,
                             const MetaConfig& config, const ExternalEmbeddings* ext = nullptr);

// Per-dimension min/max over training courses. One-hot dimensions (level,
// language) are recorded but never rescaled.
struct MetaNormStats {
  std::vector<double> min;
  std::vector<double> max;
  std::vector<bool> scaled;
};

MetaNormStats fit_meta_stats(const std::vector<std::vector<double>>& raw, const MetaConfig& config);
std::vector<double> apply_meta_stats(const std::vector<double>& raw, const MetaNormStats& stats);

struct MetaVector {
  std::vector<double> values;
  std::vector<SliceRange> slices;
};

MetaVector assemble_meta(const CourseMetaRaw& meta, const std::string& course_id,
                         const MetaConfig& config, const std::optional<MetaNormStats>& stats,
                         const ExternalEmbeddings* ext = nullptr);

}  // namespace moocxfer::meta

#endif  // MOOCXFER_META_FEATURES_HPP_
