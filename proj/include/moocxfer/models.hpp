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

#ifndef MOOCXFER_MODELS_HPP_
#define MOOCXFER_MODELS_HPP_

#include <array>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "moocxfer/behavior_features.hpp"
#include "moocxfer/bilstm.hpp"
#include "moocxfer/layers.hpp"
#include "moocxfer/meta_features.hpp"

namespace moocxfer::model {

enum class ArchKind { kBO, kBTM, kBSM };

std::string_view arch_name(ArchKind k);  // "bo", "btm", "bsm"
ArchKind parse_arch(std::string_view s);

struct ArchitectureSpec {
  ArchKind kind = ArchKind::kBO;
  int behavior_dim = features::kBehaviorFeatureCount;
  int bilstm_layers = 1;
  int bilstm_units = 64;
  std::vector<int> head_dense = {256, 64};  // BSM dense cascade
  meta::MetaConfig meta;
  double dropout = 0.1;
  int projection_dim = nn::ProjectionBlock::kDefaultDim;
  int attention_hidden = nn::Attention::kDefaultHidden;
  int truncation_window = 0;  // 0 = full backpropagation through time
  uint64_t seed = 1;

  int meta_dim() const { return kind == ArchKind::kBO ? 0 : meta.total_dim(); }
  int input_width() const {
    return kind == ArchKind::kBTM ? behavior_dim + meta_dim() : behavior_dim;
  }
  // Throws ConfigError on non-positive sizes or an empty meta subset.
  void validate() const;
  std::string describe() const;
};

nlohmann::json spec_to_json(const ArchitectureSpec& spec);
ArchitectureSpec spec_from_json(const nlohmann::json& j);

// One student: weeks x behavior_dim behaviour rows (padding rows all -1)
// and the course's meta vector (ignored by BO).
struct Sample {
  std::span<const double> behavior;
  int weeks = 0;
  std::span<const double> meta;
};

struct AttentionWeights {
  std::vector<double> meta_weights;                 // first layer, one per meta dim
  std::array<double, meta::kSliceCount> slice_sums{};  // disabled slices stay 0
  std::vector<double> latent_weights;               // second layer, 2 x projection_dim
  double behavior_mass = 0.0;                       // first half of latent_weights
  double meta_mass = 0.0;
};

struct Widths {
  int input = 0;          // BiLSTM input width
  int meta_concat = 0;    // BSM: 2 |F|
  int latent_concat = 0;  // BSM: 2 x projection
  int head_input = 0;     // BSM: 2 x latent_concat
};

class Model {
 public:
  struct Trace {
    std::vector<double> seq;
    int steps = 0;
    nn::BiLstmStack::Cache lstm;
    nn::Dense::Cache out;
    nn::ProjectionBlock::Cache proj_b, proj_m;
    nn::Attention::Cache att1, att2;
    std::vector<double> meta_concat, latent, head_in;
    std::vector<nn::Dense::Cache> head;
    double logit = 0.0;
  };

  explicit Model(const ArchitectureSpec& spec);
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;

  const ArchitectureSpec& spec() const { return spec_; }
  nn::ParamStore& params() { return store_; }
  const nn::ParamStore& params() const { return store_; }
  Widths widths() const { return widths_; }

  // Returns the logit of P(fail). `rng` drives dropout and is only needed
  // when training.
  double forward(const Sample& s, bool training, Rng* rng, Trace& trace) const;
  // Accumulates parameter gradients for dLoss/dlogit.
  void backward(const Trace& trace, double dlogit);

  double predict(const Sample& s) const;
  // BSM only; throws ArgumentError otherwise.
  AttentionWeights attention(const Sample& s) const;

  // Same spec and parameter values.
  std::unique_ptr<Model> clone() const;

 private:
  void check_sample(const Sample& s) const;

  ArchitectureSpec spec_;
  nn::ParamStore store_;
  Widths widths_;
  nn::BiLstmStack lstm_;
  nn::Dense out_;
  // BSM
  nn::ProjectionBlock proj_b_, proj_m_;
  nn::Attention att1_, att2_;
  std::vector<nn::Dense> head_;
};

}  // namespace moocxfer::model

#endif  // MOOCXFER_MODELS_HPP_
