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

#include "moocxfer/models.hpp"

#include <algorithm>

#include "moocxfer/common.hpp"

namespace moocxfer::model {

using nlohmann::json;

std::string_view arch_name(ArchKind k) {
  switch (k) {
    case ArchKind::kBO: return "bo";
    case ArchKind::kBTM: return "btm";
    case ArchKind::kBSM: return "bsm";
  }
  return "bo";
}

ArchKind parse_arch(std::string_view s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "bo") return ArchKind::kBO;
  if (lower == "btm") return ArchKind::kBTM;
  if (lower == "bsm") return ArchKind::kBSM;
  throw ArgumentError("unknown architecture '" + std::string(s) + "' (expected bo, btm or bsm)");
}

void ArchitectureSpec::validate() const {
  auto positive = [](int v, const char* what) {
    if (v < 1) throw ConfigError(std::string(what) + " must be positive");
  };
  positive(behavior_dim, "behavior_dim");
  positive(bilstm_layers, "bilstm_layers");
  positive(bilstm_units, "bilstm_units");
  if (truncation_window < 0) throw ConfigError("truncation_window must be >= 0");
  if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("dropout must be in [0, 1)");
  if (kind != ArchKind::kBO) {
    meta.validate();
    if (meta_dim() == 0) throw ConfigError(std::string(arch_name(kind)) + " needs meta features");
  }
  if (kind == ArchKind::kBSM) {
    positive(projection_dim, "projection_dim");
    positive(attention_hidden, "attention_hidden");
    for (int w : head_dense) positive(w, "head_dense width");
  }
}

std::string ArchitectureSpec::describe() const {
  std::string s = std::string(arch_name(kind)) + " layers=" + std::to_string(bilstm_layers) +
                  " units=" + std::to_string(bilstm_units);
  if (kind == ArchKind::kBSM) {
    s += " head=";
    for (size_t i = 0; i < head_dense.size(); ++i) s += (i ? "x" : "") + std::to_string(head_dense[i]);
  }
  if (kind != ArchKind::kBO) {
    s += " meta=";
    bool first = true;
    for (int i = 0; i < meta::kSliceCount; ++i) {
      if (!meta.enabled[i]) continue;
      s += (first ? "" : "+") + std::string(meta::slice_name(static_cast<meta::Slice>(i)));
      first = false;
    }
    s += " title_dim=" + std::to_string(meta.title_dim);
  }
  return s;
}

json spec_to_json(const ArchitectureSpec& s) {
  json enabled = json::array();
  for (bool e : s.meta.enabled) enabled.push_back(e);
  return json{{"kind", arch_name(s.kind)},
              {"behavior_dim", s.behavior_dim},
              {"bilstm_layers", s.bilstm_layers},
              {"bilstm_units", s.bilstm_units},
              {"head_dense", s.head_dense},
              {"meta",
               {{"title_dim", s.meta.title_dim},
                {"short_dim", s.meta.short_dim},
                {"long_dim", s.meta.long_dim},
                {"embed_seed", s.meta.embed_seed},
                {"enabled", enabled}}},
              {"dropout", s.dropout},
              {"projection_dim", s.projection_dim},
              {"attention_hidden", s.attention_hidden},
              {"truncation_window", s.truncation_window},
              {"seed", s.seed}};
}

ArchitectureSpec spec_from_json(const json& j) {
  try {
    ArchitectureSpec s;
    s.kind = parse_arch(j.at("kind").get<std::string>());
    s.behavior_dim = j.at("behavior_dim").get<int>();
    s.bilstm_layers = j.at("bilstm_layers").get<int>();
    s.bilstm_units = j.at("bilstm_units").get<int>();
    s.head_dense = j.at("head_dense").get<std::vector<int>>();
    const json& m = j.at("meta");
    s.meta.title_dim = m.at("title_dim").get<int>();
    s.meta.short_dim = m.at("short_dim").get<int>();
    s.meta.long_dim = m.at("long_dim").get<int>();
    s.meta.embed_seed = m.at("embed_seed").get<uint64_t>();
    const auto enabled = m.at("enabled").get<std::vector<bool>>();
    if (enabled.size() != meta::kSliceCount) throw DataError("meta.enabled needs 6 flags");
    for (int i = 0; i < meta::kSliceCount; ++i) s.meta.enabled[i] = enabled[i];
    s.dropout = j.at("dropout").get<double>();
    s.projection_dim = j.at("projection_dim").get<int>();
    s.attention_hidden = j.at("attention_hidden").get<int>();
    s.truncation_window = j.at("truncation_window").get<int>();
    s.seed = j.at("seed").get<uint64_t>();
    return s;
  } catch (const json::exception& e) {
    throw DataError(std::string("architecture spec: ") + e.what());
  }
}

Model::Model(const ArchitectureSpec& spec) : spec_(spec) {
  spec_.validate();
  const int m = spec_.meta_dim();
  widths_.input = spec_.input_width();
  lstm_ = nn::BiLstmStack(store_, "lstm", widths_.input, spec_.bilstm_layers, spec_.bilstm_units,
                          spec_.truncation_window);
  const int h = lstm_.output_dim();
  if (spec_.kind != ArchKind::kBSM) {
    out_ = nn::Dense(store_, "out", h, 1, nn::Activation::kLinear);
  } else {
    const int p = spec_.projection_dim;
    widths_.meta_concat = 2 * m;
    widths_.latent_concat = 2 * p;
    widths_.head_input = 2 * widths_.latent_concat;
    proj_b_ = nn::ProjectionBlock(store_, "proj_behavior", h, p, spec_.dropout);
    att1_ = nn::Attention(store_, "attention_meta", 1, spec_.attention_hidden);
    proj_m_ = nn::ProjectionBlock(store_, "proj_meta", widths_.meta_concat, p, spec_.dropout);
    att2_ = nn::Attention(store_, "attention_latent", 1, spec_.attention_hidden);
    int in = widths_.head_input;
    for (size_t i = 0; i < spec_.head_dense.size(); ++i) {
      head_.emplace_back(store_, "head" + std::to_string(i), in, spec_.head_dense[i],
                         nn::Activation::kGelu);
      in = spec_.head_dense[i];
    }
    out_ = nn::Dense(store_, "out", in, 1, nn::Activation::kLinear);
  }
  store_.initialize(spec_.seed);
}

void Model::check_sample(const Sample& s) const {
  const size_t want = static_cast<size_t>(s.weeks) * spec_.behavior_dim;
  if (s.behavior.size() != want) {
    throw ArgumentError("behavior input: shape mismatch [" + std::to_string(s.behavior.size()) +
                        "] vs [" + std::to_string(s.weeks) + "x" +
                        std::to_string(spec_.behavior_dim) + "]");
  }
  if (spec_.kind != ArchKind::kBO && s.meta.size() != static_cast<size_t>(spec_.meta_dim())) {
    throw ArgumentError("meta input: shape mismatch [" + std::to_string(s.meta.size()) + "] vs [" +
                        std::to_string(spec_.meta_dim()) + "]");
  }
}

double Model::forward(const Sample& s, bool training, Rng* rng, Trace& t) const {
  check_sample(s);
  t.steps = s.weeks;
  std::span<const double> seq = s.behavior;
  if (spec_.kind == ArchKind::kBTM) {
    const int bw = spec_.behavior_dim;
    const int w = widths_.input;
    t.seq.assign(static_cast<size_t>(s.weeks) * w, nn::kMaskValue);
    const auto active = nn::unmasked_steps(s.behavior, s.weeks, bw);
    for (int step : active) {
      double* row = t.seq.data() + static_cast<size_t>(step) * w;
      std::copy_n(s.behavior.data() + static_cast<size_t>(step) * bw, bw, row);
      std::copy(s.meta.begin(), s.meta.end(), row + bw);
    }
    seq = t.seq;
  }
  lstm_.forward(seq, s.weeks, t.lstm);
  const auto& hb = t.lstm.final();

  if (spec_.kind != ArchKind::kBSM) {
    out_.forward(hb, t.out);
    t.logit = t.out.y[0];
    return t.logit;
  }

  const size_t m = s.meta.size();
  const size_t p = static_cast<size_t>(spec_.projection_dim);
  proj_b_.forward(hb, training, rng, t.proj_b);
  att1_.forward(s.meta, static_cast<int>(m), t.att1);
  t.meta_concat.assign(s.meta.begin(), s.meta.end());
  t.meta_concat.insert(t.meta_concat.end(), t.att1.y.begin(), t.att1.y.end());
  proj_m_.forward(t.meta_concat, training, rng, t.proj_m);
  t.latent.assign(t.proj_b.y().begin(), t.proj_b.y().end());
  t.latent.insert(t.latent.end(), t.proj_m.y().begin(), t.proj_m.y().end());
  att2_.forward(t.latent, static_cast<int>(2 * p), t.att2);
  t.head_in = t.latent;
  t.head_in.insert(t.head_in.end(), t.att2.y.begin(), t.att2.y.end());
  t.head.resize(head_.size());
  std::span<const double> x = t.head_in;
  for (size_t i = 0; i < head_.size(); ++i) {
    head_[i].forward(x, t.head[i]);
    x = t.head[i].y;
  }
  out_.forward(x, t.out);
  t.logit = t.out.y[0];
  return t.logit;
}

void Model::backward(const Trace& t, double dlogit) {
  const double dy[1] = {dlogit};
  std::vector<double> dh(static_cast<size_t>(lstm_.output_dim()));
  if (spec_.kind != ArchKind::kBSM) {
    out_.backward(t.out, dy, dh);
    lstm_.backward(t.lstm, dh);
    return;
  }
  const size_t p = static_cast<size_t>(spec_.projection_dim);
  std::vector<double> dx(head_.empty() ? t.head_in.size() : t.head.back().y.size());
  out_.backward(t.out, dy, dx);
  for (size_t i = head_.size(); i-- > 0;) {
    std::vector<double> dprev(i == 0 ? t.head_in.size() : t.head[i - 1].y.size());
    head_[i].backward(t.head[i], dx, dprev);
    dx = std::move(dprev);
  }
  // dx is d head_in = [d latent (direct), d attention weights]
  std::vector<double> dlatent(dx.begin(), dx.begin() + 2 * p);
  std::vector<double> datt(2 * p);
  att2_.backward(t.att2, std::span<const double>(dx).subspan(2 * p), datt);
  for (size_t i = 0; i < 2 * p; ++i) dlatent[i] += datt[i];

  std::vector<double> dmeta_concat(t.meta_concat.size());
  proj_m_.backward(t.proj_m, std::span<const double>(dlatent).subspan(p, p), dmeta_concat);
  const size_t m = t.att1.y.size();
  att1_.backward(t.att1, std::span<const double>(dmeta_concat).subspan(m), {});

  proj_b_.backward(t.proj_b, std::span<const double>(dlatent).subspan(0, p), dh);
  lstm_.backward(t.lstm, dh);
}

double Model::predict(const Sample& s) const {
  Trace t;
  return nn::sigmoid(forward(s, false, nullptr, t));
}

AttentionWeights Model::attention(const Sample& s) const {
  if (spec_.kind != ArchKind::kBSM) {
    throw ArgumentError("attention weights exist only for bsm models, not " +
                        std::string(arch_name(spec_.kind)));
  }
  Trace t;
  forward(s, false, nullptr, t);
  AttentionWeights a;
  a.meta_weights = t.att1.y;
  for (const auto& r : meta::layout(spec_.meta)) {
    double sum = 0.0;
    for (int k = 0; k < r.dim; ++k) sum += a.meta_weights[static_cast<size_t>(r.offset + k)];
    a.slice_sums[static_cast<size_t>(r.slice)] = sum;
  }
  a.latent_weights = t.att2.y;
  const size_t p = static_cast<size_t>(spec_.projection_dim);
  for (size_t i = 0; i < p; ++i) a.behavior_mass += a.latent_weights[i];
  for (size_t i = p; i < 2 * p; ++i) a.meta_mass += a.latent_weights[i];
  return a;
}

std::unique_ptr<Model> Model::clone() const {
  auto m = std::make_unique<Model>(spec_);
  m->store_.restore(store_.snapshot());
  return m;
}

}  // namespace moocxfer::model
