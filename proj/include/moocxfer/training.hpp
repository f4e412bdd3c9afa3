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

#ifndef MOOCXFER_TRAINING_HPP_
#define MOOCXFER_TRAINING_HPP_

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "moocxfer/dataset.hpp"
#include "moocxfer/models.hpp"

namespace moocxfer::model {

struct TrainConfig {
  int batch_size = 64;
  double lr = 1e-3;
  int max_epochs = 200;
  int patience = 10;  // epochs without a validation improvement
  uint64_t seed = 1;
  bool track_train_bac = false;
  // Stop as soon as the training BAC reaches this value (needs tracking).
  std::optional<double> stop_at_train_bac;
  bool verbose = false;

  void validate() const;
};

struct EpochLog {
  int epoch = 0;           // 0 = before any update
  double loss = 0.0;       // mean training BCE over the epoch
  double val_score = 0.0;  // validation BAC (or -loss when BAC is undefined)
  double train_bac = -1.0;
};

struct TrainResult {
  std::vector<EpochLog> log;
  int best_epoch = 0;
  double best_val_score = 0.0;
};

// Validation criterion: BAC when both classes are present, otherwise minus
// the mean BCE.
double validation_score(const Model& model, const Dataset& val);

std::vector<double> predict(const Model& model, const Dataset& data);

// Mini-batch Adam on mean BCE with early stopping on the validation score;
// leaves the model at the best epoch (ties keep the earliest). Throws
// TrainingError on a non-finite loss.
TrainResult train(Model& model, const Dataset& train, const Dataset& val, const TrainConfig& config);

inline constexpr double kFineTuneLr = 1e-3;

// Continues training every parameter on `data` with fresh Adam moments;
// early stopping uses a stratified 10% slice of `data`.
TrainResult fine_tune(Model& model, const Dataset& data, TrainConfig config);

struct Grid {
  std::vector<int> bilstm_layers = {1, 2};
  std::vector<int> bilstm_units = {32, 64, 128};
  std::vector<std::vector<int>> head_dense = {{256, 64}, {128, 32}};  // BSM only
  std::vector<int> title_dims = {30, 60};                             // BTM/BSM only
  std::vector<std::array<bool, meta::kSliceCount>> meta_subsets = {
      {true, true, true, true, true, true}};

  // Candidate specs in deterministic order, derived from `base`.
  std::vector<ArchitectureSpec> expand(const ArchitectureSpec& base) const;
};

nlohmann::json grid_to_json(const Grid& g);
Grid grid_from_json(const nlohmann::json& j);  // missing keys keep defaults

// Datasets for one meta configuration (the layout changes the input).
struct SplitData {
  Dataset train;
  Dataset val;
};
using DataProvider = std::function<SplitData(const meta::MetaConfig&)>;

struct Candidate {
  ArchitectureSpec spec;
  double val_score = 0.0;
  int best_epoch = 0;
};

struct GridResult {
  std::unique_ptr<Model> model;
  ArchitectureSpec spec;
  TrainResult train;
  std::vector<Candidate> candidates;
};

// Trains every candidate; the best validation score wins, ties going to
// the earlier candidate. `jobs` > 1 trains candidates concurrently.
GridResult grid_search(const ArchitectureSpec& base, const Grid& grid, const DataProvider& data,
                       const TrainConfig& config, int jobs = 1);

}  // namespace moocxfer::model

#endif  // MOOCXFER_TRAINING_HPP_
