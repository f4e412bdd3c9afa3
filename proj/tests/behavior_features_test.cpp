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

#include "moocxfer/behavior_features.hpp"
#include "moocxfer/synthgen.hpp"
#include "test_util.hpp"

namespace moocxfer::features {
namespace {

using testing::event;
using testing::tiny_course;

// Column of `name`; `nth` picks among duplicated names.
int col(std::string_view name, int nth = 0) {
  const auto& names = feature_names();
  for (int i = 0; i < kBehaviorFeatureCount; ++i) {
    if (names[i] == name && nth-- == 0) return i;
  }
  ADD_FAILURE() << "no feature " << name;
  return 0;
}

// Course with one student `s` holding `events`.
CourseIteration with_student(CourseIteration c, std::vector<InteractionEvent> events) {
  c.labels["s"] = Outcome::kPass;
  if (!events.empty()) c.logs["s"] = std::move(events);
  return c;
}

double value(const CourseIteration& c, int weeks, int week, int feature) {
  const auto b = compute_raw(c, weeks);
  return b.at(0, week, feature);
}

TEST(NamesTest, FortyFiveInFourSets) {
  EXPECT_EQ(kBehaviorFeatureCount, 45);
  EXPECT_EQ(feature_names()[0], "DelayLecture");
  EXPECT_EQ(feature_names()[44], "StudentShape");
  EXPECT_EQ(col("TotalClicksVideo", 0), 11);
  EXPECT_EQ(col("TotalClicksVideo", 1), 17);
}

TEST(SessionTest, GapsAndDuration) {
  const std::vector<InteractionEvent> three = {event("s", 0, Action::kVideoPlay, "v"),
                                               event("s", 600, Action::kVideoPause, "v"),
                                               event("s", 1200, Action::kVideoPlay, "v")};
  const auto one = sessionize(three);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].duration(), 1200 - 0 + 60);
  EXPECT_EQ(one[0].n_events, 3);
  const std::vector<InteractionEvent> apart = {event("s", 0, Action::kVideoPlay, "v"),
                                               event("s", 1800, Action::kVideoPlay, "v")};
  EXPECT_EQ(sessionize(apart).size(), 2u);
  EXPECT_TRUE(sessionize({}).empty());
}

TEST(RegularityTest, PeakHourEntropy) {
  CourseIteration c = tiny_course(2);
  const int64_t t0 = c.start_time;
  std::vector<InteractionEvent> same_hour;
  for (int k = 0; k < 5; ++k) same_hour.push_back(event("s", t0 + 3 * 3600 + 60 * k, Action::kVideoPlay, "v0_0"));
  EXPECT_DOUBLE_EQ(value(with_student(c, same_hour), 1, 0, col("RegPeakTimeDayHour")), 1.0);

  std::vector<InteractionEvent> uniform;
  for (int h = 0; h < 24; ++h) uniform.push_back(event("s", t0 + h * 3600 + 10, Action::kVideoPlay, "v0_0"));
  EXPECT_NEAR(value(with_student(c, uniform), 1, 0, col("RegPeakTimeDayHour")), 0.0, 1e-12);
}

TEST(RegularityTest, IdenticalDailyProfilesArePeriodic) {
  CourseIteration c = tiny_course(2);
  std::vector<InteractionEvent> ev;
  for (int day = 0; day < 2; ++day) {
    const int64_t d = c.start_time + day * kSecondsPerDay;
    ev.push_back(event("s", d + 9 * 3600, Action::kVideoPlay, "v0_0"));
    ev.push_back(event("s", d + 9 * 3600 + 100, Action::kVideoPause, "v0_0"));
    ev.push_back(event("s", d + 20 * 3600, Action::kVideoPlay, "v0_1"));
  }
  EXPECT_NEAR(value(with_student(c, ev), 1, 0, col("RegPeriodicityDayHour")), 1.0, 1e-12);
}

TEST(EngagementTest, SessionsAccumulateOverWeeks) {
  CourseIteration c = tiny_course(4);
  std::vector<InteractionEvent> ev = {event("s", c.week_start(0) + 100, Action::kVideoPlay, "v0_0"),
                                      event("s", c.week_start(1) + 100, Action::kVideoPlay, "v1_0"),
                                      event("s", c.week_start(2) + 100, Action::kVideoPlay, "v2_0"),
                                      event("s", c.week_start(3) + 100, Action::kVideoPlay, "v3_0")};
  const auto b = compute_raw(with_student(c, ev), 4);
  EXPECT_DOUBLE_EQ(b.at(0, 2, col("NumberOfSessions")), 3.0);
  EXPECT_DOUBLE_EQ(b.at(0, 3, col("NumberOfSessions")), 4.0);
}

TEST(EngagementTest, WeekendRatioIsGuarded) {
  CourseIteration c = tiny_course(2);
  std::vector<InteractionEvent> weekday, weekend;
  for (int k = 0; k < 10; ++k) weekday.push_back(event("s", c.start_time + 3600 + k, Action::kVideoPlay, "v0_0"));
  const int64_t saturday = c.start_time + 5 * kSecondsPerDay;
  for (int k = 0; k < 5; ++k) weekend.push_back(event("s", saturday + 3600 + k, Action::kVideoPlay, "v0_0"));
  EXPECT_DOUBLE_EQ(value(with_student(c, weekday), 1, 0, col("RatioClicksWeekendDay")), 0.0);
  EXPECT_DOUBLE_EQ(value(with_student(c, weekend), 1, 0, col("RatioClicksWeekendDay")), 0.0);
  EXPECT_DOUBLE_EQ(value(with_student(c, weekend), 1, 0, col("TotalClicksWeekend")), 5.0);
}

// Event-walk oracle: each event is credited the gap to the next event when it
// is shorter than the session gap, else the terminal credit.
std::pair<double, double> walk_times(const std::vector<InteractionEvent>& ev, const FeatureConfig& cfg) {
  double video = 0, problem = 0;
  for (size_t i = 0; i < ev.size(); ++i) {
    double dt = static_cast<double>(cfg.terminal_credit);
    if (i + 1 < ev.size() && ev[i + 1].timestamp - ev[i].timestamp < cfg.session_gap) {
      dt = static_cast<double>(std::min(ev[i + 1].timestamp - ev[i].timestamp, cfg.gap_cap));
    }
    (ev[i].action == Action::kQuizSubmit ? problem : video) += dt;
  }
  return {video, problem};
}

TEST(EngagementTest, TimeGoesToTheEventBeforeTheGap) {
  CourseIteration c = tiny_course(2);
  InteractionEvent sub = event("s", c.start_time + 300, Action::kQuizSubmit, "q0");
  sub.grade = 0.5;
  const std::vector<InteractionEvent> ev = {event("s", c.start_time, Action::kVideoPlay, "v0_0"), sub};
  const auto b = compute_raw(with_student(c, ev), 1);
  EXPECT_DOUBLE_EQ(b.at(0, 0, col("TotalTimeVideo")), 300.0);
  const auto [video, problem] = walk_times(ev, FeatureConfig{});
  EXPECT_DOUBLE_EQ(b.at(0, 0, col("TotalTimeVideo")), video);
  EXPECT_DOUBLE_EQ(b.at(0, 0, col("TotalTimeProblem")), problem);
}

TEST(EngagementTest, TimesMatchEventWalkOnGeneratedStudents) {
  const auto gen = synth::generate_corpus(synth::bundled_scenario("small"));
  const auto& c = gen.corpus.courses[0];
  const int weeks = 2;
  const auto b = compute_raw(c, weeks);
  for (size_t s = 0; s < b.students.size(); ++s) {
    std::vector<InteractionEvent> ev;
    auto it = c.logs.find(b.students[s]);
    if (it != c.logs.end()) {
      for (const auto& e : it->second) {
        if (e.timestamp < c.week_start(weeks)) ev.push_back(e);
      }
    }
    const auto [video, problem] = walk_times(ev, FeatureConfig{});
    ASSERT_NEAR(b.at(s, weeks - 1, col("TotalTimeVideo")), video, 1e-9);
    ASSERT_NEAR(b.at(s, weeks - 1, col("TotalTimeProblem")), problem, 1e-9);
    ASSERT_DOUBLE_EQ(b.at(s, weeks - 1, col("TotalClicks")), static_cast<double>(ev.size()));
  }
}

CourseIteration four_video_week() {
  CourseIteration c = tiny_course(2);
  for (const char* id : {"v0_2", "v0_3"}) {
    LearningObject v;
    v.object_id = id;
    v.release_week = 0;
    v.release_time = c.start_time;
    v.video_duration = 300.0;
    c.schedule.push_back(v);
  }
  return c;
}

TEST(ControlTest, WatchedProportionAndNoReplays) {
  CourseIteration c = four_video_week();
  const int64_t t = c.start_time + 100;
  const std::vector<InteractionEvent> ev = {event("s", t, Action::kVideoPlay, "v0_0"),
                                            event("s", t + 50, Action::kVideoPlay, "v0_2")};
  const auto b = compute_raw(with_student(c, ev), 1);
  EXPECT_DOUBLE_EQ(b.at(0, 0, col("AvgWatchedWeeklyProp")), 2.0 / 4.0);
  EXPECT_DOUBLE_EQ(b.at(0, 0, col("AvgReplayedWeeklyProp")), 0.0);
}

TEST(ControlTest, SinglePause) {
  CourseIteration c = tiny_course(2);
  const int64_t t = c.start_time + 100;
  const std::vector<InteractionEvent> ev = {event("s", t, Action::kVideoPlay, "v0_0"),
                                            event("s", t + 30, Action::kVideoPause, "v0_0"),
                                            event("s", t + 150, Action::kVideoPlay, "v0_0")};
  const auto b = compute_raw(with_student(c, ev), 1);
  EXPECT_DOUBLE_EQ(b.at(0, 0, col("AvgPauseDuration")), 120.0);
  EXPECT_DOUBLE_EQ(b.at(0, 0, col("StdPauseDuration")), 0.0);
  EXPECT_DOUBLE_EQ(b.at(0, 0, col("AvgReplayedWeeklyProp")), 0.5);  // v0_0 played twice of 2
}

TEST(ParticipationTest, FirstTryFullMarks) {
  CourseIteration c = tiny_course(2);
  InteractionEvent sub = event("s", c.start_time + 100, Action::kQuizSubmit, "q0");
  sub.grade = 1.0;
  const auto b = compute_raw(with_student(c, {sub}), 1);
  EXPECT_DOUBLE_EQ(b.at(0, 0, col("CompetencyStrength")), 1.0);
  EXPECT_DOUBLE_EQ(b.at(0, 0, col("StudentShape")), 1.0);
  EXPECT_DOUBLE_EQ(b.at(0, 0, col("CompetencyAlignment")), 1.0);
}

TEST(ParticipationTest, WatchingAheadIsAnticipation) {
  CourseIteration c = tiny_course(4);
  const std::vector<InteractionEvent> ev = {event("s", c.week_start(1) + 10, Action::kVideoPlay, "v3_0")};
  const auto b = compute_raw(with_student(c, ev), 2);
  EXPECT_GE(b.at(0, 1, col("ContentAnticipation")), 1.0);
  EXPECT_DOUBLE_EQ(b.at(0, 0, col("ContentAnticipation")), 0.0);
}

TEST(ParticipationTest, SpeedIsMeanGapBetweenAttempts) {
  CourseIteration c = tiny_course(2);
  InteractionEvent a = event("s", c.start_time + 100, Action::kQuizSubmit, "q0");
  InteractionEvent b2 = event("s", c.start_time + 400, Action::kQuizSubmit, "q0");
  a.grade = 0.2;
  b2.grade = 0.9;
  const auto b = compute_raw(with_student(c, {a, b2}), 1);
  EXPECT_DOUBLE_EQ(b.at(0, 0, col("StudentSpeed")), 300.0);
  EXPECT_DOUBLE_EQ(b.at(0, 0, col("CompetencyStrength")), 0.9 / 2);
}

TEST(FeaturesTest, SilentStudentIsAllZero) {
  const auto b = compute_raw(with_student(tiny_course(3), {}), 3);
  for (double v : b.values) EXPECT_EQ(v, 0.0);
}

TEST(FeaturesTest, SetSlicesMatchFullBlock) {
  const auto gen = synth::generate_corpus(synth::bundled_scenario("small"));
  const auto& c = gen.corpus.courses[1];
  const auto all = compute_raw(c, 2);
  const auto ctl = compute_control(c, 2);
  ASSERT_EQ(ctl.width, kControlCount);
  for (size_t s = 0; s < all.students.size(); ++s) {
    for (int f = 0; f < kControlCount; ++f) ASSERT_EQ(ctl.at(s, 1, f), all.at(s, 1, kRegularityCount + kEngagementCount + f));
  }
  EXPECT_EQ(compute_regularity(c, 2).width, kRegularityCount);
  EXPECT_EQ(compute_engagement(c, 2).width, kEngagementCount);
  EXPECT_EQ(compute_participation(c, 2).width, kParticipationCount);
}

TEST(FeaturesTest, ThreadCountDoesNotChangeValues) {
  const auto gen = synth::generate_corpus(synth::bundled_scenario("small"));
  const auto& c = gen.corpus.courses[0];
  EXPECT_EQ(compute_raw(c, 3, {}, 1).values, compute_raw(c, 3, {}, 4).values);
}

TEST(FeaturesTest, LaterEventsNeverChangeEarlierWeeks) {
  const auto gen = synth::generate_corpus(synth::bundled_scenario("small"));
  CourseIteration c = gen.corpus.courses[0];
  const int weeks = c.duration_weeks;
  const auto before = compute_raw(c, weeks);
  // Inject a burst into week 3 for every student.
  for (auto& [s, log] : c.logs) {
    for (int k = 0; k < 5; ++k) log.push_back(event(s, c.week_start(3) + 1000 * k, Action::kVideoPlay, "v0_0"));
    std::stable_sort(log.begin(), log.end(), [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
  }
  const auto after = compute_raw(c, weeks);
  for (size_t s = 0; s < before.students.size(); ++s) {
    for (int w = 0; w < 3; ++w) {
      for (int f = 0; f < kBehaviorFeatureCount; ++f) ASSERT_EQ(before.at(s, w, f), after.at(s, w, f));
    }
  }
}

TEST(NormalizeTest, MinMaxClampAndConstantColumn) {
  EXPECT_DOUBLE_EQ(normalize_value(6, 2, 10), 0.5);
  EXPECT_DOUBLE_EQ(normalize_value(3, 3, 3), 0.0);
  EXPECT_DOUBLE_EQ(normalize_value(15, 2, 10), 1.0);
  EXPECT_DOUBLE_EQ(normalize_value(-1, 2, 10), 0.0);
}

TEST(NormalizeTest, ShortCourseIsPaddedWithMask) {
  const auto gen = synth::generate_corpus(synth::bundled_scenario("small"));
  const auto& c = gen.corpus.courses[0];
  auto [t, stats] = assemble_behavior(c, 1.0, std::nullopt, 12);
  ASSERT_EQ(t.weeks, 12);
  ASSERT_EQ(t.weeks_kept, c.duration_weeks);
  for (size_t s = 0; s < t.students.size(); ++s) {
    const auto row = t.student(s);
    for (int w = 0; w < 12; ++w) {
      for (size_t f = 0; f < t.width(); ++f) {
        const double v = row[w * t.width() + f];
        if (w >= t.weeks_kept) {
          ASSERT_EQ(v, -1.0);
        } else {
          ASSERT_GE(v, 0.0);
          ASSERT_LE(v, 1.0);
        }
      }
    }
  }
  // Reusing the stats reproduces the tensor; foreign names are rejected.
  EXPECT_EQ(assemble_behavior(c, 1.0, stats, 12).first.values, t.values);
  stats.names[0] = "Other";
  EXPECT_THROW(assemble_behavior(c, 1.0, stats, 12), DataError);
}

}  // namespace
}  // namespace moocxfer::features
