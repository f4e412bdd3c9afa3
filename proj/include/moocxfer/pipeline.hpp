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

#ifndef MOOCXFER_PIPELINE_HPP_
#define MOOCXFER_PIPELINE_HPP_

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "moocxfer/experiments.hpp"
#include "moocxfer/synthgen.hpp"

namespace moocxfer::pipeline {

inline constexpr const char* kManifestFormat = "moocxfer.manifest/1";

struct PipelineConfig {
  std::string corpus;              // corpus directory; empty synthesises `scenario`
  std::string scenario = "small";  // bundled name or scenario JSON file
  std::string work_dir = "work";
  std::vector<double> levels = {0.4, 0.6};
  std::vector<model::ArchKind> archs = {model::ArchKind::kBO, model::ArchKind::kBTM,
                                        model::ArchKind::kBSM};
  std::vector<experiments::Setting> settings = {
      experiments::Setting::kOneOneSame, experiments::Setting::kNOneSame,
      experiments::Setting::kOneOneDiff, experiments::Setting::kNOneDiff,
      experiments::Setting::kNCDiff,     experiments::Setting::kNCDiffFT};
  bool ablation = true;
  bool attention = true;
  std::string embeddings;  // optional external embeddings JSON
  // Template for every run; level, arch and seeds are filled in per run.
  experiments::ExperimentConfig experiment;

  uint64_t seed() const { return experiment.seed; }
};

// "key = value" lines, '#' comments. Values are JSON; anything that does not
// parse as JSON is taken as a plain string. Unknown keys throw ConfigError.
PipelineConfig parse_config(const std::string& text);
PipelineConfig load_config(const std::string& path);
void apply_setting(PipelineConfig& config, const std::string& key, const nlohmann::json& value);
std::vector<std::string> config_keys();

// The scenario to synthesise (seeded with the config seed when bundled), or
// nullopt when `corpus` names a directory.
std::optional<synth::ScenarioConfig> scenario_of(const PipelineConfig& config);

// The experiment template at `level`; arch and seeds are set per run.
experiments::ExperimentConfig experiment_at(const PipelineConfig& config, double level,
                                            const meta::ExternalEmbeddings* embeddings);

// Every result-relevant field; work_dir and jobs are left out.
nlohmann::json config_to_json(const PipelineConfig& config);
std::string config_hash(const PipelineConfig& config);

// Stage artifacts.
nlohmann::json filter_to_json(const std::map<std::string, experiments::FilterOutcome>& f);
std::map<std::string, experiments::FilterOutcome> filter_from_json(const nlohmann::json& j);
nlohmann::json features_to_json(const std::map<std::string, features::FeatureBlock>& blocks);
std::map<std::string, features::FeatureBlock> features_from_json(const nlohmann::json& j);

struct StageStatus {
  std::string name;
  bool skipped = false;
};

struct PipelineResult {
  std::vector<StageStatus> stages;
  std::string report_path;
};

using Logger = std::function<void(const std::string&)>;

// ingest -> filter -> features -> train -> evaluate. A stage whose manifest
// matches the config hash and current input hashes is skipped after its
// outputs are checked against the manifest. Errors name the stage.
PipelineResult run_pipeline(const PipelineConfig& config, const Logger& log = nullptr);

inline const std::vector<std::string> kStages = {"ingest", "filter", "features", "train",
                                                 "evaluate"};

}  // namespace moocxfer::pipeline

#endif  // MOOCXFER_PIPELINE_HPP_
