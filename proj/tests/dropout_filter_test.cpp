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

#include <gtest/gtest.h>

#include "moocxfer/dropout_filter.hpp"
#include "moocxfer/synthgen.hpp"
#include "test_util.hpp"

namespace moocxfer::filter {
namespace {

using testing::event;
using testing::tiny_course;

InteractionEvent submit(const std::string& s, int64_t t, const std::string& quiz, double grade) {
  InteractionEvent e = event(s, t, Action::kQuizSubmit, quiz);
  e.grade = grade;
  return e;
}

// Week 0 of tiny_course has one graded quiz; add two more.
CourseIteration three_quiz_course() {
  CourseIteration c = tiny_course(4);
  for (const char* id : {"qa", "qb"}) {
    LearningObject q;
    q.object_id = id;
    q.kind = ObjectKind::kQuiz;
    q.release_week = 0;
    q.release_time = c.start_time;
    q.graded = true;
    c.schedule.push_back(q);
  }
  return c;
}

// Independent re-aggregation: best grade per graded quiz of `week`, summed
// over those quizzes and divided by their number.
double oracle_cell(const CourseIteration& c, const std::string& s, int week, int weeks) {
  std::map<std::string, double> best;
  int n = 0;
  for (const auto& o : c.schedule) n += o.graded && o.release_week == week;
  auto it = c.logs.find(s);
  if (it != c.logs.end()) {
    for (const auto& e : it->second) {
      if (!e.grade || e.timestamp >= c.week_start(weeks)) continue;
      for (const auto& o : c.schedule) {
        if (o.object_id == e.object_id && o.graded && o.release_week == week) {
          best[o.object_id] = std::max(best[o.object_id], *e.grade);
        }
      }
    }
  }
  double sum = 0;
  for (const auto& [_, g] : best) sum += g;
  return n ? sum / n : 0.0;
}

TEST(GradeMatrixTest, UnattemptedQuizzesScoreZero) {
  CourseIteration c = three_quiz_course();
  c.labels["s"] = Outcome::kFail;
  c.logs["s"] = {event("s", c.start_time + 5, Action::kVideoPlay, "v0_0")};
  const auto g = build_grade_matrix(c, 2);
  EXPECT_EQ(g.at(0, 0), 0.0);
  EXPECT_EQ(g.at(0, 1), 0.0);
}

TEST(GradeMatrixTest, SingleQuizSingleSubmission) {
  CourseIteration c = tiny_course(4);
  c.labels["s"] = Outcome::kPass;
  c.logs["s"] = {submit("s", c.week_start(1) + 60, "q1", 0.8)};
  const auto g = build_grade_matrix(c, 2);
  EXPECT_DOUBLE_EQ(g.at(0, 1), 0.8);
}

TEST(GradeMatrixTest, BestGradesAveragedOverAllGradedQuizzes) {
  CourseIteration c = three_quiz_course();
  c.labels["s"] = Outcome::kPass;
  const int64_t t = c.start_time;
  c.logs["s"] = {submit("s", t + 10, "q0", 0.4), submit("s", t + 20, "qa", 0.5),
                 submit("s", t + 30, "q0", 1.0), submit("s", t + 40, "qa", 0.2),
                 submit("s", c.week_start(2) + 1, "qb", 1.0)};  // after the window
  const auto g = build_grade_matrix(c, 2);
  EXPECT_DOUBLE_EQ(g.at(0, 0), (1.0 + 0.5 + 0.0) / 3.0);
  EXPECT_DOUBLE_EQ(g.at(0, 0), oracle_cell(c, "s", 0, 2));
}

TEST(GradeMatrixTest, MatchesBruteForceOnGeneratedCourses) {
  const auto gen = synth::generate_corpus(synth::bundled_scenario("small"));
  for (const auto& c : gen.corpus.courses) {
    const auto g = build_grade_matrix(c, 2);
    for (size_t i = 0; i < g.students.size(); ++i) {
      for (int w = 0; w < 2; ++w) ASSERT_DOUBLE_EQ(g.at(i, w), oracle_cell(c, g.students[i], w, 2));
    }
  }
}

GradeMatrix matrix(const std::vector<std::vector<double>>& rows, std::map<std::string, Outcome>* labels,
                   const std::vector<int>& fail) {
  GradeMatrix g;
  g.weeks = static_cast<int>(rows[0].size());
  for (size_t i = 0; i < rows.size(); ++i) {
    g.students.push_back("s" + std::to_string(i));
    g.values.insert(g.values.end(), rows[i].begin(), rows[i].end());
    (*labels)[g.students.back()] = fail[i] ? Outcome::kFail : Outcome::kPass;
  }
  return g;
}

double sigma(double z) { return 1.0 / (1.0 + std::exp(-z)); }

TEST(LogisticTest, SeparatedToySet) {
  std::map<std::string, Outcome> labels;
  std::vector<std::vector<double>> rows;
  std::vector<int> fail;
  for (int i = 0; i < 20; ++i) {
    rows.push_back(i < 8 ? std::vector<double>{0, 0} : std::vector<double>{1, 1});
    fail.push_back(i < 8);
  }
  const auto g = matrix(rows, &labels, fail);
  const auto m = fit_logistic(g, labels);
  const std::vector<double> zeros = {0, 0}, ones = {1, 1};
  // Closed form of the fitted model at the two grade profiles.
  EXPECT_NEAR(m.predict(zeros), sigma(m.bias), 1e-15);
  EXPECT_NEAR(m.predict(ones), sigma(m.bias + m.weights[0] + m.weights[1]), 1e-15);
  EXPECT_GT(m.predict(zeros), 0.9);
  EXPECT_LT(m.predict(ones), 0.1);
}

TEST(LogisticTest, IdenticalRowsGiveBaseRate) {
  std::map<std::string, Outcome> labels;
  std::vector<std::vector<double>> rows(10, {0.3, 0.7});
  std::vector<int> fail = {1, 1, 1, 0, 0, 0, 0, 0, 0, 0};
  const auto g = matrix(rows, &labels, fail);
  LogisticOptions opt;
  opt.tolerance = 1e-12;
  const auto m = fit_logistic(g, labels, opt);
  EXPECT_NEAR(m.weights[0], 0.0, 1e-9);
  EXPECT_NEAR(m.weights[1], 0.0, 1e-9);
  EXPECT_NEAR(m.bias, std::log(0.3 / 0.7), 1e-9);
}

TEST(LogisticTest, StationaryPointOfRegularisedLoss) {
  Rng rng(5);
  std::uniform_real_distribution<double> u(0, 1);
  std::map<std::string, Outcome> labels;
  std::vector<std::vector<double>> rows;
  std::vector<int> fail;
  for (int i = 0; i < 200; ++i) {
    rows.push_back({u(rng), u(rng)});
    fail.push_back(u(rng) < sigma(2.0 - 3.0 * rows.back()[0] - 2.0 * rows.back()[1]));
  }
  const auto g = matrix(rows, &labels, fail);
  LogisticOptions opt;
  FitTrace trace;
  const auto m = fit_logistic(g, labels, opt, &trace);
  // Independent gradient of mean log-loss + (l2/2)|w|^2 in raw coordinates.
  double gb = 0, gw0 = 0, gw1 = 0;
  for (int i = 0; i < 200; ++i) {
    const double r = sigma(m.bias + m.weights[0] * rows[i][0] + m.weights[1] * rows[i][1]) - fail[i];
    gb += r / 200;
    gw0 += r * rows[i][0] / 200;
    gw1 += r * rows[i][1] / 200;
  }
  gw0 += opt.l2 * m.weights[0];
  gw1 += opt.l2 * m.weights[1];
  EXPECT_LT(std::abs(gb), 1e-5);
  EXPECT_LT(std::abs(gw0), 1e-5);
  EXPECT_LT(std::abs(gw1), 1e-5);
  for (size_t k = 1; k < trace.losses.size(); ++k) EXPECT_LE(trace.losses[k], trace.losses[k - 1] + 1e-15);
}

TEST(LogisticTest, SingleClassIsAnError) {
  std::map<std::string, Outcome> labels;
  const auto g = matrix({{0.1}, {0.9}}, &labels, {0, 0});
  EXPECT_THROW(fit_logistic(g, labels), DataError);
}

// Scores p_i via weight 1 and bias 0 on a one-week matrix of logits.
GradeMatrix scored(const std::vector<double>& p, const std::vector<int>& fail,
                   std::map<std::string, Outcome>* labels) {
  std::vector<std::vector<double>> rows;
  for (double x : p) rows.push_back({std::log(x / (1 - x))});
  return matrix(rows, labels, fail);
}

double oracle_bac(const LogisticModel& m, const GradeMatrix& g, const std::map<std::string, Outcome>& labels,
                  double t) {
  double tp = 0, fn = 0, tn = 0, fp = 0;
  for (size_t i = 0; i < g.students.size(); ++i) {
    const bool removed = m.predict(g.row(i)) > t;
    const bool failed = labels.at(g.students[i]) == Outcome::kFail;
    (failed ? (removed ? tp : fn) : (removed ? fp : tn)) += 1;
  }
  return 0.5 * (tp / (tp + fn) + tn / (tn + fp));
}

TEST(ThresholdTest, TiesGoToTheLargestGridValue) {
  std::map<std::string, Outcome> labels;
  const auto g = scored({0.2, 0.3, 0.4, 0.5}, {1, 0, 1, 0}, &labels);
  const LogisticModel m{{1.0}, 0.0};
  EXPECT_DOUBLE_EQ(select_threshold(m, g, labels), 0.999);
}

TEST(ThresholdTest, PlantedDropoutsAboveNinetyNinePercent) {
  std::map<std::string, Outcome> labels;
  // Dropouts at 0.995, passers just below the 0.99 cut, other failers low.
  const auto g = scored({0.995, 0.995, 0.995, 0.985, 0.985, 0.2, 0.3, 0.6, 0.1, 0.05},
                        {1, 1, 1, 0, 0, 0, 0, 1, 0, 1}, &labels);
  const LogisticModel m{{1.0}, 0.0};
  const double t = select_threshold(m, g, labels);
  EXPECT_DOUBLE_EQ(t, 0.99);
  double best = -1, arg = 0;
  for (double x : kThresholdGrid) {
    const double b = oracle_bac(m, g, labels, x);
    if (b >= best) {
      best = b;
      arg = x;
    }
  }
  EXPECT_DOUBLE_EQ(t, arg);
}

TEST(FilterTest, ThresholdOneRemovesNobodyAndEqualityIsKept) {
  CourseIteration c = tiny_course(4);
  for (int i = 0; i < 6; ++i) {
    const std::string s = "s" + std::to_string(i);
    c.labels[s] = i < 3 ? Outcome::kFail : Outcome::kPass;
    if (i >= 3) c.logs[s] = {submit(s, c.start_time + 100, "q0", 0.2 * i)};
  }
  const LogisticModel m{{-4.0, -4.0}, 2.0};
  const auto none = filter_early_dropouts(c, m, 1.0);
  EXPECT_TRUE(none.removed.empty());
  EXPECT_EQ(none.kept.size(), 6u);
  const double p0 = m.predict(std::vector<double>{0.0, 0.0});
  const auto at = filter_early_dropouts(c, m, p0);
  EXPECT_TRUE(at.removed.empty());  // p == threshold stays
  const auto below = filter_early_dropouts(c, m, std::nextafter(p0, 0.0));
  EXPECT_EQ(below.removed, (std::set<std::string>{"s0", "s1", "s2"}));
  EXPECT_EQ(below.kept.size() + below.removed.size(), c.labels.size());
}

TEST(FilterTest, RemovesPlantedDropoutsOfAGeneratedCourse) {
  synth::ScenarioConfig sc;
  sc.course_sets = {{"calc", 1, Level::kBachelor, Language::kEnglish, false, std::nullopt, false}};
  sc.students_total = 600;
  sc.seed = 3;
  const auto gen = synth::generate_corpus(sc);
  const auto& c = gen.corpus.courses[0];
  const auto r = run_filter(c, FilterConfig{});
  int planted = 0, caught = 0, engaged = 0, engaged_removed = 0;
  for (const auto& [s, t] : gen.truth.students.at(c.id())) {
    if (t.early_dropout) {
      ++planted;
      caught += r.removed.count(s) > 0;
    }
    if (t.archetype == synth::Archetype::kEngaged && t.label == Outcome::kPass) {
      ++engaged;
      engaged_removed += r.removed.count(s) > 0;
    }
  }
  ASSERT_GT(planted, 0);
  EXPECT_GE(caught, 0.95 * planted);
  EXPECT_LE(engaged_removed, 0.05 * engaged);
}

TEST(FilterTest, KeepStudentsRestrictsLogsAndLabels) {
  CourseIteration c = tiny_course(3);
  c.labels = {{"a", Outcome::kPass}, {"b", Outcome::kFail}};
  c.logs["a"] = {event("a", c.start_time + 1, Action::kVideoPlay, "v0_0")};
  c.logs["b"] = {event("b", c.start_time + 1, Action::kVideoPlay, "v0_0")};
  const auto k = keep_students(c, {"a"});
  EXPECT_EQ(k.labels.size(), 1u);
  EXPECT_EQ(k.logs.count("b"), 0u);
}

}  // namespace
}  // namespace moocxfer::filter
