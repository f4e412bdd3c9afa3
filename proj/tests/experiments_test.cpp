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

#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "moocxfer/experiments.hpp"
#include "moocxfer/synthgen.hpp"

namespace moocxfer::experiments {
namespace {

ExperimentConfig quick_config(model::ArchKind kind = model::ArchKind::kBO) {
  ExperimentConfig c;
  c.level = 0.6;
  c.spec.kind = kind;
  c.spec.bilstm_units = 8;
  c.spec.head_dense = {16};
  c.spec.projection_dim = 8;
  c.spec.attention_hidden = 8;
  c.train.max_epochs = 40;
  c.train.patience = 8;
  c.train.lr = 5e-3;
  c.filter_enabled = false;
  c.seed = 11;
  return c;
}

synth::ScenarioConfig separable_scenario(int students) {
  synth::ScenarioConfig s;
  s.course_sets = {{"sep", 1, std::nullopt, std::nullopt, false, std::nullopt, false}};
  s.students_total = students;
  s.duration_min = 6;
  s.duration_max = 6;
  s.mix = {.engaged = 0.5, .disengaged = 0.5, .early_dropout = 0.0, .erratic = 0.0};
  s.engaged_pass = 0.99;
  s.disengaged_pass = 0.01;
  s.seed = 4;
  return s;
}

const EvalRow& find_row(const std::vector<EvalRow>& rows, const std::string& course,
                        const std::string& source, const std::string& population = "filtered") {
  for (const auto& r : rows) {
    if (r.course == course && r.source == source && r.population == population) return r;
  }
  throw std::runtime_error("row not found: " + course + "/" + source);
}

TEST(SettingTest, NamesRoundTrip) {
  for (int i = 0; i < kSettingCount; ++i) {
    const auto s = static_cast<Setting>(i);
    EXPECT_EQ(parse_setting(setting_name(s)), s);
  }
  EXPECT_FALSE(parse_setting("NDiff").has_value());
  EXPECT_EQ(run_tag(Setting::kNOneDiff, model::ArchKind::kBSM, 0.4).substr(0, 9), "NOneDiff/");
}

TEST(OneOneSameTest, FoldsPartitionTheCourseAndLearnSeparableData) {
  const auto gen = synth::generate_corpus(separable_scenario(200));
  auto cfg = quick_config();
  const PreparedCorpus data(gen.corpus, cfg);
  const std::string id = data.course_ids().front();
  const auto rows = run_one_one_same(data, id, cfg);

  std::set<std::string> seen;
  size_t total = 0;
  for (int f = 0; f < cfg.folds; ++f) {
    const auto& r = find_row(rows, id, "fold" + std::to_string(f));
    for (const auto& p : r.predictions) seen.insert(p.student);
    total += r.predictions.size();
  }
  EXPECT_EQ(total, seen.size());  // test folds are disjoint
  EXPECT_EQ(seen.size(), gen.corpus.course(id).labels.size());

  const auto& m = find_row(rows, id, "mean");
  EXPECT_EQ(m.status, "ok");
  EXPECT_GE(m.bac, 0.95);

  const auto again = run_one_one_same(data, id, cfg);
  ASSERT_EQ(again.size(), rows.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(again[i].bac, rows[i].bac);
    ASSERT_EQ(again[i].predictions.size(), rows[i].predictions.size());
    for (size_t k = 0; k < rows[i].predictions.size(); ++k) {
      EXPECT_EQ(again[i].predictions[k].p_fail, rows[i].predictions[k].p_fail);
    }
  }
}

class TransferTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    synth::ScenarioConfig s;
    s.course_sets = {{"alg", 2, std::nullopt, std::nullopt, true, std::nullopt, false},
                     {"bio", 1, std::nullopt, std::nullopt, false, std::nullopt, false},
                     {"new", 1, std::nullopt, std::nullopt, true, std::nullopt, false}};
    s.students_total = 240;
    s.duration_min = 5;
    s.duration_max = 6;
    s.seed = 9;
    gen_ = new synth::Generated(synth::generate_corpus(s));
  }
  static void TearDownTestSuite() { delete gen_; }
  static synth::Generated* gen_;
};

synth::Generated* TransferTest::gen_ = nullptr;

TEST_F(TransferTest, NOneSameIsInapplicableWithoutPriorIterations) {
  auto cfg = quick_config();
  const PreparedCorpus data(gen_->corpus, cfg);
  const auto rows = run_transfer(Setting::kNOneSame, data, cfg);
  bool saw_new = false, saw_alg = false;
  for (const auto& r : rows) {
    if (r.course == "new-1") {
      saw_new = true;
      EXPECT_EQ(r.status, "inapplicable");
      EXPECT_TRUE(r.predictions.empty());
    }
    if (r.course == "alg-2") {
      saw_alg = true;
      EXPECT_NE(r.status, "inapplicable");
    }
  }
  EXPECT_TRUE(saw_new);
  EXPECT_TRUE(saw_alg);
}

TEST_F(TransferTest, NOneDiffGivesFiniteScoresOnEveryTransferCourse) {
  auto cfg = quick_config(model::ArchKind::kBSM);
  cfg.filter_enabled = true;
  const PreparedCorpus data(gen_->corpus, cfg);
  const auto rows = run_transfer(Setting::kNOneDiff, data, cfg);
  std::set<std::string> courses;
  for (const auto& r : rows) {
    courses.insert(r.course);
    if (r.status == "ok") {
      EXPECT_TRUE(std::isfinite(r.bac));
      EXPECT_GE(r.bac, 0.0);
      EXPECT_LE(r.bac, 1.0);
      EXPECT_EQ(r.confusion.tp + r.confusion.fn + r.confusion.tn + r.confusion.fp, r.evaluated);
    }
  }
  EXPECT_EQ(courses, (std::set<std::string>{"alg-2", "new-1"}));
}

TEST_F(TransferTest, AttentionReportIsNormalised) {
  auto cfg = quick_config(model::ArchKind::kBSM);
  const PreparedCorpus data(gen_->corpus, cfg);
  const std::vector<std::string> train(gen_->corpus.train_ids.begin(), gen_->corpus.train_ids.end());
  const auto m = train_on(data, train, cfg, "test/attention");
  const auto rows = attention_report(m, data, {"alg-2", "new-1"});
  ASSERT_EQ(rows.size(), static_cast<size_t>(meta::kSliceCount + 2));
  EXPECT_EQ(rows[meta::kSliceCount].component, "behavior");
  EXPECT_EQ(rows[meta::kSliceCount + 1].component, "meta");
  double slices = 0;
  for (int s = 0; s < meta::kSliceCount; ++s) slices += rows[s].mean;
  EXPECT_NEAR(slices, 1.0, 1e-9);
  EXPECT_NEAR(rows[meta::kSliceCount].mean + rows[meta::kSliceCount + 1].mean, 1.0, 1e-9);
  for (const auto& r : rows) {
    EXPECT_LE(r.q1, r.q2);
    EXPECT_LE(r.q2, r.q3);
    EXPECT_GE(r.q1, 0.0);
    EXPECT_LE(r.q3, 1.0);
  }

  auto bo = quick_config();
  const auto mb = train_on(data, train, bo, "test/attention-bo");
  EXPECT_THROW(attention_report(mb, data, {"alg-2"}), ArgumentError);
}

TEST(AblationTest, LevelSliceCarriesLevelDependentLabels) {
  // Every student is erratic; the outcome depends on the course level only.
  synth::ScenarioConfig s;
  for (int i = 0; i < 4; ++i) {
    synth::CourseSetSpec set;
    set.name = "c" + std::to_string(i);
    set.level = i % 2 ? Level::kMaster : Level::kBachelor;
    set.erratic_pass_override = i % 2 ? 0.95 : 0.05;
    s.course_sets.push_back(set);
  }
  s.course_sets.push_back({"t", 1, std::nullopt, std::nullopt, true, std::nullopt, false});
  s.students_total = 500;
  s.mix = {.engaged = 0.0, .disengaged = 0.0, .early_dropout = 0.0, .erratic = 1.0};
  s.duration_min = 5;
  s.duration_max = 5;
  s.seed = 21;
  const auto gen = synth::generate_corpus(s);
  auto cfg = quick_config();
  const PreparedCorpus data(gen.corpus, cfg);
  const auto rows = run_ablation(data, cfg);
  ASSERT_EQ(rows.size(), 7u);
  std::map<std::string, double> bac;
  for (const auto& r : rows) {
    bac[r.feature] = r.bac;
    EXPECT_GT(r.evaluated, 0);
  }
  EXPECT_EQ(rows.back().feature, "behavior_only");
  EXPECT_GE(bac.at("level"), 0.85);
  for (const auto& [name, v] : bac) EXPECT_TRUE(std::isfinite(v)) << name;
}

TEST(ReportTest, JsonRoundTripAndTable) {
  Report r;
  r.seed = 7;
  r.config_hash = "abc";
  EvalRow e;
  e.setting = "NOneDiff";
  e.arch = "BSM";
  e.level = 0.4;
  e.course = "x-2";
  e.population = "filtered";
  e.confusion = {3, 1, 2, 2};
  e.bac = 0.625;
  e.accuracy = 0.625;
  e.evaluated = 8;
  e.predictions = {{"s1", 0.75, 1}, {"s2", 0.125, 0}};
  r.rows.push_back(e);
  EvalRow na = e;
  na.setting = "NOneSame";
  na.status = "inapplicable";
  na.predictions.clear();
  r.rows.push_back(na);
  r.ablation.push_back({0.4, "Level", 0.9, 0.8, 10});
  r.attention.push_back({0.4, "behavior", 0.6, 0.5, 0.6, 0.7});

  const std::string text = report_to_json(r);
  const Report back = report_from_json(text);
  EXPECT_EQ(report_to_json(back), text);
  ASSERT_EQ(back.rows.size(), 2u);
  EXPECT_EQ(back.rows[0].predictions[1].p_fail, 0.125);
  EXPECT_EQ(back.rows[1].status, "inapplicable");

  const std::string csv = table_csv(r);
  EXPECT_NE(csv.find("course,level,population,BSM NOneDiff,BSM NOneSame"), std::string::npos) << csv;
  EXPECT_NE(csv.find("0.6250,-"), std::string::npos) << csv;
  EXPECT_NE(ablation_csv(r.ablation).find("Level"), std::string::npos);
  EXPECT_THROW(report_from_json("{\"format\": \"other\"}"), DataError);
}

}  // namespace
}  // namespace moocxfer::experiments
