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

#ifndef MOOCXFER_EXPERIMENTS_HPP_
#define MOOCXFER_EXPERIMENTS_HPP_

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "moocxfer/behavior_features.hpp"
#include "moocxfer/checkpoint.hpp"
#include "moocxfer/datamodel.hpp"
#include "moocxfer/dataset.hpp"
#include "moocxfer/dropout_filter.hpp"
#include "moocxfer/meta_features.hpp"
#include "moocxfer/metrics.hpp"
#include "moocxfer/models.hpp"
#include "moocxfer/training.hpp"

namespace moocxfer::experiments {

inline constexpr const char* kReportFormat = "moocxfer.report/1";

enum class Setting { kOneOneSame, kNOneSame, kOneOneDiff, kNOneDiff, kNCDiff, kNCDiffFT };
inline constexpr int kSettingCount = 6;

std::string_view setting_name(Setting s);
std::optional<Setting> parse_setting(std::string_view name);

enum class Population { kFiltered, kFull };
std::string_view population_name(Population p);

struct ExperimentConfig {
  double level = 0.4;
  model::ArchitectureSpec spec;  // spec.kind selects the architecture
  model::TrainConfig train;
  double fine_tune_lr = model::kFineTuneLr;
  int fine_tune_patience = 20;
  std::optional<model::Grid> grid;  // when absent `spec` is trained as is
  filter::FilterConfig filter;
  bool filter_enabled = true;
  features::FeatureConfig features;
  double validation_fraction = 0.1;
  int folds = 10;
  // Course set held out by the N-C settings. Empty picks the first set with
  // at least two iterations whose last iteration is a transfer course.
  std::string held_out;
  bool evaluate_full = true;
  uint64_t seed = 1;
  int jobs = 1;
  const meta::ExternalEmbeddings* embeddings = nullptr;

  void validate() const;
};

// One course at one early level: filter outcome and raw features of every
// labelled student.
struct PreparedCourse {
  std::string id;
  std::string course_set;
  int iteration = 1;
  int weeks = 0;
  const CourseIteration* course = nullptr;
  features::FeatureBlock raw;
  std::set<std::string> kept;
  std::set<std::string> removed;
};

struct FilterOutcome {
  std::set<std::string> kept;
  std::set<std::string> removed;
  double threshold = 1.0;
};

// Per course; with `enabled` false every labelled student is kept.
std::map<std::string, FilterOutcome> filter_corpus(const Corpus& corpus,
                                                   const filter::FilterConfig& config, bool enabled);

// Raw features of every course truncated at `level`.
std::map<std::string, features::FeatureBlock> corpus_features(const Corpus& corpus, double level,
                                                              const features::FeatureConfig& config,
                                                              int jobs = 1);

class PreparedCorpus {
 public:
  PreparedCorpus(const Corpus& corpus, const ExperimentConfig& config);
  // From precomputed filter outcomes and raw features; both must cover
  // every course.
  PreparedCorpus(const Corpus& corpus, const ExperimentConfig& config,
                 const std::map<std::string, FilterOutcome>& filtered,
                 std::map<std::string, features::FeatureBlock> raw);

  const Corpus& corpus() const { return *corpus_; }
  double level() const { return level_; }
  int max_weeks() const { return max_weeks_; }
  const meta::ExternalEmbeddings* embeddings() const { return embeddings_; }
  const PreparedCourse& course(const std::string& id) const;
  std::vector<std::string> course_ids() const;

  // Fitted on filtered students of `ids` only.
  features::NormStats fit_behavior(const std::vector<std::string>& ids) const;
  meta::MetaNormStats fit_meta(const std::vector<std::string>& ids, const meta::MetaConfig& cfg) const;

  // Students of `ids` featurised with the given statistics.
  Dataset dataset(const std::vector<std::string>& ids, const model::ArchitectureSpec& spec,
                  const features::NormStats& behavior,
                  const std::optional<meta::MetaNormStats>& meta, Population population) const;
  Dataset dataset(const std::vector<std::string>& ids, const model::TrainedModel& m,
                  Population population) const;

 private:
  const Corpus* corpus_;
  double level_;
  int max_weeks_ = 0;
  const meta::ExternalEmbeddings* embeddings_;
  std::map<std::string, PreparedCourse> courses_;
};

struct Prediction {
  std::string student;
  double p_fail = 0.0;
  int label = 0;  // 1 = fail
};

struct EvalRow {
  std::string setting;
  std::string arch;
  double level = 0.0;
  std::string course;
  std::string population;
  // Training source of a per-model row ("fold3", a course id); "mean" for
  // the average of those rows; empty for single-model settings.
  std::string source;
  std::string status = "ok";  // ok | inapplicable | undefined
  std::string note;
  Confusion confusion;
  double bac = 0.0;
  double accuracy = 0.0;
  int evaluated = 0;
  std::vector<Prediction> predictions;  // empty on mean and inapplicable rows
};

struct AblationRow {
  double level = 0.0;
  std::string feature;  // slice name, or "behavior_only"
  double bac = 0.0;
  double accuracy = 0.0;
  int evaluated = 0;
};

struct AttentionRow {
  double level = 0.0;
  std::string component;  // slice name, "behavior" or "meta"
  double mean = 0.0;
  double q1 = 0.0;
  double q2 = 0.0;
  double q3 = 0.0;
};

struct Report {
  uint64_t seed = 0;
  std::string config_hash;
  std::vector<EvalRow> rows;
  std::vector<AblationRow> ablation;
  std::vector<AttentionRow> attention;
};

// Trains on the filtered students of `ids`, holding out a stratified
// validation part per course. `tag` feeds the seed derivation.
model::TrainedModel train_on(const PreparedCorpus& data, const std::vector<std::string>& ids,
                             const ExperimentConfig& config, const std::string& tag);

// Predictions plus confusion on one course.
EvalRow evaluate(const model::TrainedModel& m, const PreparedCorpus& data,
                 const std::string& course_id, Population population);
EvalRow evaluate(const model::Model& m, const Dataset& data);

// k-fold CV within one course: per fold 8 parts train, 1 validation, 1 test.
// Returns one row per fold and population plus the "mean" rows.
std::vector<EvalRow> run_one_one_same(const PreparedCorpus& data, const std::string& course_id,
                                      const ExperimentConfig& config);

// All rows of one setting. Transfer settings evaluate every transfer course;
// N-C settings evaluate the last iteration of the held-out set. kNCDiffFT
// also emits the kNCDiff rows of the model it starts from.
std::vector<EvalRow> run_transfer(Setting setting, const PreparedCorpus& data,
                                  const ExperimentConfig& config);

// N-1 Diff rows of an already trained model.
std::vector<EvalRow> evaluate_transfer(const model::TrainedModel& m, const PreparedCorpus& data,
                                       const ExperimentConfig& config);

// BTM with one meta slice at a time plus a BO baseline, 80/10/10 over the
// training courses.
std::vector<AblationRow> run_ablation(const PreparedCorpus& data, const ExperimentConfig& config);

// Mean and quartiles of the BSM attention weights over the students of
// `course_ids`. Throws ArgumentError for other architectures.
std::vector<AttentionRow> attention_report(const model::TrainedModel& m, const PreparedCorpus& data,
                                           const std::vector<std::string>& course_ids);

// "<setting>/<arch>/<level>": prefix of every seed tag of a run.
std::string run_tag(Setting setting, model::ArchKind arch, double level);

std::string held_out_set(const Corpus& corpus, const std::string& requested);

std::string report_to_json(const Report& r);
Report report_from_json(const std::string& text);
std::string table_csv(const Report& r);
std::string attention_csv(const std::vector<AttentionRow>& rows);
std::string ablation_csv(const std::vector<AblationRow>& rows);

}  // namespace moocxfer::experiments

#endif  // MOOCXFER_EXPERIMENTS_HPP_
