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

#ifndef MOOCXFER_SYNTHGEN_HPP_
#define MOOCXFER_SYNTHGEN_HPP_

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "moocxfer/datamodel.hpp"

namespace moocxfer::synth {

enum class Archetype { kEngaged, kDisengaged, kEarlyDropout, kErratic };
std::string_view archetype_name(Archetype a);

struct ArchetypeMix {
  double engaged = 0.35;
  double disengaged = 0.25;
  double early_dropout = 0.15;
  double erratic = 0.25;
};

// One course set (all iterations of the same course).
struct CourseSetSpec {
  std::string name;
  int iterations = 1;
  std::optional<Level> level;        // default: cycles over the set index
  std::optional<Language> language;  // default: alternates
  // The last iteration goes to the transfer set. When the set has a single
  // iteration the whole set is a new, never-seen course.
  bool transfer_last = false;
  // Overrides the level-conditioned pass probability of erratic students.
  std::optional<double> erratic_pass_override;
  // Inverts pass/fail for every iteration except the last one.
  bool flip_prior_labels = false;
};

struct ScenarioConfig {
  std::string name = "custom";
  std::vector<CourseSetSpec> course_sets;
  int students_total = 2000;  // spread evenly over all iterations
  int duration_min = 8;
  int duration_max = 12;
  ArchetypeMix mix;
  double engaged_pass = 0.92;
  double disengaged_pass = 0.08;
  double erratic_pass = 0.5;
  // Strength in [0,1] of the level -> erratic-outcome dependency. At 1 the
  // erratic pass probability is erratic_pass +/- 0.45 depending on level.
  double coupling = 1.0;
  uint64_t seed = 1;
};

// Bundled scenarios: "small" (3 courses, 200 students in total) and
// "medium" (10 courses, 2000 students in total).
ScenarioConfig bundled_scenario(const std::string& name);
ScenarioConfig scenario_from_json(const std::string& json_text);
std::string scenario_to_json(const ScenarioConfig& config);
void validate_scenario(const ScenarioConfig& config);

struct StudentTruth {
  Archetype archetype = Archetype::kEngaged;
  Outcome label = Outcome::kPass;
  bool early_dropout = false;
};

struct GroundTruth {
  // course id -> student id -> truth
  std::map<std::string, std::map<std::string, StudentTruth>> students;
  // course id -> planted dependency, e.g. "level=master;erratic_pass=0.05"
  std::map<std::string, std::string> course_descriptor;
  std::string to_json() const;
};

struct Generated {
  Corpus corpus;
  GroundTruth truth;
};

// Deterministic per config (including seed). Throws ConfigError on an
// infeasible configuration.
Generated generate_corpus(const ScenarioConfig& config);

// Level-conditioned pass probability for erratic students.
double erratic_pass_probability(const ScenarioConfig& config, Level level);

}  // namespace moocxfer::synth

#endif  // MOOCXFER_SYNTHGEN_HPP_
