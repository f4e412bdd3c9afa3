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

#ifndef MOOCXFER_CHECKPOINT_HPP_
#define MOOCXFER_CHECKPOINT_HPP_

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "moocxfer/behavior_features.hpp"
#include "moocxfer/meta_features.hpp"
#include "moocxfer/models.hpp"
#include "moocxfer/training.hpp"

namespace moocxfer::model {

inline constexpr const char* kCheckpointFormat = "moocxfer.checkpoint/1";

// A trained predictor plus everything needed to featurise a new course.
struct TrainedModel {
  std::unique_ptr<Model> model;
  features::NormStats behavior_stats;
  std::optional<meta::MetaNormStats> meta_stats;  // absent for BO
  int max_weeks = 0;
  double level = 0.4;
  std::vector<EpochLog> log;
};

nlohmann::json norm_stats_to_json(const features::NormStats& s);
features::NormStats norm_stats_from_json(const nlohmann::json& j);
nlohmann::json meta_stats_to_json(const meta::MetaNormStats& s);
meta::MetaNormStats meta_stats_from_json(const nlohmann::json& j);

// JSON with 17-significant-digit doubles, so values round-trip exactly.
std::string checkpoint_to_string(const TrainedModel& m);
TrainedModel checkpoint_from_string(const std::string& text);

void save_checkpoint(const TrainedModel& m, const std::string& path);
// Throws IoError when unreadable, DataError when malformed.
TrainedModel load_checkpoint(const std::string& path);

}  // namespace moocxfer::model

#endif  // MOOCXFER_CHECKPOINT_HPP_
