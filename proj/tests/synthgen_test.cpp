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

#include <filesystem>

#include <gtest/gtest.h>

#include "moocxfer/common.hpp"
#include "moocxfer/course_io.hpp"
#include "moocxfer/synthgen.hpp"
#include "test_util.hpp"

namespace moocxfer::synth {
namespace {

namespace fs = std::filesystem;

const Generated& small() {
  static const Generated g = generate_corpus(bundled_scenario("small"));
  return g;
}

size_t student_count(const Corpus& c) {
  size_t n = 0;
  for (const auto& course : c.courses) n += course.labels.size();
  return n;
}

TEST(SynthTest, BundledScenarioSizes) {
  EXPECT_EQ(small().corpus.courses.size(), 3u);
  EXPECT_EQ(student_count(small().corpus), 200u);
  const auto medium = bundled_scenario("medium");
  int courses = 0;
  for (const auto& s : medium.course_sets) courses += s.iterations;
  EXPECT_EQ(courses, 10);
  EXPECT_EQ(medium.students_total, 2000);
  EXPECT_THROW(bundled_scenario("huge"), ConfigError);
}

TEST(SynthTest, SameSeedSameCorpus) {
  const auto again = generate_corpus(bundled_scenario("small"));
  ASSERT_EQ(again.corpus.courses.size(), small().corpus.courses.size());
  for (size_t i = 0; i < again.corpus.courses.size(); ++i) {
    EXPECT_EQ(again.corpus.courses[i], small().corpus.courses[i]);
  }
  EXPECT_EQ(again.truth.to_json(), small().truth.to_json());
  auto other = bundled_scenario("small");
  other.seed = 2;
  EXPECT_NE(generate_corpus(other).corpus.courses[0], small().corpus.courses[0]);
}

TEST(SynthTest, EarlyDropoutsAreSilentFromWeekTwo) {
  int dropouts = 0;
  for (const auto& c : small().corpus.courses) {
    for (const auto& [sid, t] : small().truth.students.at(c.id())) {
      if (!t.early_dropout) continue;
      ++dropouts;
      EXPECT_EQ(t.label, Outcome::kFail);
      auto it = c.logs.find(sid);
      if (it == c.logs.end()) continue;
      for (const auto& e : it->second) EXPECT_LT(e.timestamp, c.week_start(2)) << sid;
    }
  }
  EXPECT_GT(dropouts, 0);
}

TEST(SynthTest, OtherStudentsSubmitEarlyGradedQuizzes) {
  for (const auto& c : small().corpus.courses) {
    const ScheduleIndex index(c.schedule);
    for (const auto& [sid, t] : small().truth.students.at(c.id())) {
      if (t.early_dropout) continue;
      bool week[2] = {false, false};
      for (const auto& e : c.logs.at(sid)) {
        const auto* o = index.find(e.object_id);
        if (e.grade && o->graded && o->release_week < 2 && e.timestamp < c.week_start(2)) {
          week[o->release_week] = true;
        }
      }
      EXPECT_TRUE(week[0] && week[1]) << c.id() << " " << sid;
    }
  }
}

TEST(SynthTest, LabelsAgreeWithTruthAndCorpusValidates) {
  EXPECT_NO_THROW(validate_corpus(small().corpus));
  for (const auto& c : small().corpus.courses) {
    EXPECT_NO_THROW(validate_course(c));
    const auto& truth = small().truth.students.at(c.id());
    ASSERT_EQ(truth.size(), c.labels.size());
    for (const auto& [sid, label] : c.labels) EXPECT_EQ(truth.at(sid).label, label);
    EXPECT_FALSE(small().truth.course_descriptor.at(c.id()).empty());
  }
}

TEST(SynthTest, ScheduleReleasesWithinDuration) {
  for (const auto& c : small().corpus.courses) {
    bool graded = false;
    for (const auto& o : c.schedule) {
      EXPECT_GE(o.release_week, 0);
      EXPECT_LT(o.release_week, c.duration_weeks);
      graded |= o.graded;
    }
    EXPECT_TRUE(graded);
  }
}

std::map<std::string, std::string> files_of(const std::string& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).generic_string()] = read_file(e.path().string());
  }
  return out;
}

TEST(SynthTest, ExportLoadExportIsByteIdentical) {
  testing::TempDir a, b;
  save_corpus(small().corpus, a.path());
  save_corpus(load_corpus(a.path()), b.path());
  const auto fa = files_of(a.path());
  EXPECT_EQ(fa, files_of(b.path()));
  size_t rows = 0;
  for (const auto& [rel, text] : fa) {
    if (rel.ends_with("labels.csv")) rows += std::count(text.begin(), text.end(), '\n') - 1;
  }
  EXPECT_EQ(rows, student_count(small().corpus));
}

TEST(SynthTest, InfeasibleConfigurations) {
  auto c = bundled_scenario("small");
  c.mix.engaged = 0.9;
  EXPECT_THROW(generate_corpus(c), ConfigError);
  c = bundled_scenario("small");
  c.engaged_pass = 1.0;
  EXPECT_THROW(validate_scenario(c), ConfigError);
  c = bundled_scenario("small");
  c.course_sets.push_back(c.course_sets[0]);
  EXPECT_THROW(validate_scenario(c), ConfigError);
  EXPECT_THROW(scenario_from_json(R"({"bogus": 1})"), ConfigError);
}

TEST(SynthTest, ScenarioJsonRoundTrip) {
  auto c = bundled_scenario("medium");
  c.coupling = 0.0;
  c.seed = 99;
  const auto back = scenario_from_json(scenario_to_json(c));
  EXPECT_EQ(scenario_to_json(back), scenario_to_json(c));
  EXPECT_EQ(back.seed, 99u);
  const auto based = scenario_from_json(R"({"base": "small", "coupling": 0.5})");
  EXPECT_EQ(based.course_sets.size(), bundled_scenario("small").course_sets.size());
  EXPECT_DOUBLE_EQ(based.coupling, 0.5);
}

TEST(SynthTest, CouplingShiftsErraticPassByLevel) {
  auto c = bundled_scenario("small");
  c.coupling = 0.0;
  EXPECT_DOUBLE_EQ(erratic_pass_probability(c, Level::kBachelor),
                   erratic_pass_probability(c, Level::kMaster));
  c.coupling = 1.0;
  EXPECT_GT(std::abs(erratic_pass_probability(c, Level::kBachelor) -
                     erratic_pass_probability(c, Level::kMaster)),
            0.5);
}

}  // namespace
}  // namespace moocxfer::synth
