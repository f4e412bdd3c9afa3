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

#include "moocxfer/behavior_features.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <thread>

#include "moocxfer/common.hpp"

namespace moocxfer::features {
namespace {

constexpr std::array<std::string_view, kBehaviorFeatureCount> kNames = {
    // Regularity
    "DelayLecture", "RegPeakTimeDayHour", "RegPeriodicityDayHour",
    // Engagement
    "NumberOfSessions", "RatioClicksWeekendDay", "AvgTimeSessions", "TotalTimeSessions",
    "StdTimeSessions", "StdTimeBetweenSessions", "TotalClicks", "TotalClicksProblem",
    "TotalClicksVideo", "TotalClicksWeekday", "TotalClicksWeekend", "TotalTimeProblem",
    "TotalTimeVideo",
    // Control
    "TotalClicksVideoLoad", "TotalClicksVideo", "AvgWatchedWeeklyProp", "StdWatchedWeeklyProp",
    "AvgReplayedWeeklyProp", "StdReplayedWeeklyProp", "AvgInterruptedWeeklyProp",
    "StdInterruptedWeeklyProp", "FrequencyEventVideo", "FrequencyEventLoad",
    "FrequencyEventPlay", "FrequencyEventPause", "FrequencyEventStop",
    "FrequencyEventSeekBackward", "FrequencyEventSeekForward", "FrequencyEventSpeedChange",
    "AvgSeekLength", "StdSeekLength", "AvgPauseDuration", "StdPauseDuration",
    "AvgTimeSpeedingUp", "StdTimeSpeedingUp",
    // Participation
    "CompetencyStrength", "CompetencyAlignment", "CompetencyAnticipation", "ContentAlignment",
    "ContentAnticipation", "StudentSpeed", "StudentShape"};

constexpr int kRegularityOffset = 0;
constexpr int kEngagementOffset = kRegularityOffset + kRegularityCount;
constexpr int kControlOffset = kEngagementOffset + kEngagementCount;
constexpr int kParticipationOffset = kControlOffset + kControlCount;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Event with its learning object resolved to a schedule index.
struct Ev {
  int64_t t;
  Action action;
  int obj;  // -1 when not in the schedule
  double grade;
  double seek;
};

struct Ctx {
  const CourseIteration* course;
  const FeatureConfig* config;
  int weeks;
  std::vector<int> video_release_week;  // per object, -1 for quizzes
  std::vector<int> quiz_release_week;   // per object, -1 for videos
  std::vector<bool> graded;
  std::vector<int64_t> release_time;
  std::vector<int> videos_scheduled_by;  // [k] = videos released in weeks <= k
};

Ctx make_ctx(const CourseIteration& course, int weeks, const FeatureConfig& config) {
  Ctx c{&course, &config, weeks, {}, {}, {}, {}, {}};
  const size_t n = course.schedule.size();
  c.video_release_week.assign(n, -1);
  c.quiz_release_week.assign(n, -1);
  c.graded.assign(n, false);
  c.release_time.assign(n, 0);
  c.videos_scheduled_by.assign(static_cast<size_t>(std::max(weeks, 0)), 0);
  for (size_t i = 0; i < n; ++i) {
    const auto& o = course.schedule[i];
    c.release_time[i] = o.release_time;
    if (o.kind == ObjectKind::kVideo) {
      c.video_release_week[i] = o.release_week;
      for (int k = std::max(o.release_week, 0); k < weeks; ++k) ++c.videos_scheduled_by[k];
    } else {
      c.quiz_release_week[i] = o.release_week;
      c.graded[i] = o.graded;
    }
  }
  return c;
}

std::vector<Ev> resolve(const std::vector<InteractionEvent>& events, const ScheduleIndex& index) {
  std::vector<Ev> out;
  out.reserve(events.size());
  for (const auto& e : events) {
    out.push_back({e.timestamp, e.action, index.index_of(e.object_id), e.grade.value_or(kNaN),
                   e.seek_seconds.value_or(kNaN)});
  }
  return out;
}

bool is_weekend(int64_t t) {
  const int64_t day = t >= 0 ? t / kSecondsPerDay : (t - kSecondsPerDay + 1) / kSecondsPerDay;
  const int64_t dow = ((day + 4) % 7 + 7) % 7;  // 1970-01-01 was a Thursday; 0 = Sunday
  return dow == 0 || dow == 6;
}

int hour_of_day(int64_t t) {
  const int64_t s = ((t % kSecondsPerDay) + kSecondsPerDay) % kSecondsPerDay;
  return static_cast<int>(s / 3600);
}

int64_t day_index(int64_t t) {
  return t >= 0 ? t / kSecondsPerDay : (t - kSecondsPerDay + 1) / kSecondsPerDay;
}

double ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

// Time credited to ev[i] when the log is cut after `end` events.
double event_time(const std::vector<Ev>& ev, size_t i, size_t end, const FeatureConfig& cfg) {
  if (i + 1 < end) {
    const int64_t gap = ev[i + 1].t - ev[i].t;
    if (gap < cfg.session_gap) return static_cast<double>(std::min(gap, cfg.gap_cap));
  }
  return static_cast<double>(cfg.terminal_credit);
}

std::vector<Session> sessions_of(const std::vector<Ev>& ev, size_t end, const FeatureConfig& cfg) {
  std::vector<Session> out;
  for (size_t i = 0; i < end; ++i) {
    if (out.empty() || ev[i].t - (out.back().end - cfg.terminal_credit) >= cfg.session_gap) {
      out.push_back({ev[i].t, ev[i].t + cfg.terminal_credit, 1});
    } else {
      out.back().end = ev[i].t + cfg.terminal_credit;
      ++out.back().n_events;
    }
  }
  return out;
}

void regularity(const Ctx& c, const std::vector<Ev>& ev, size_t end, double* out) {
  // DelayLecture
  std::map<int, int64_t> first_view;
  for (size_t i = 0; i < end; ++i) {
    const Ev& e = ev[i];
    if (e.obj < 0 || c.video_release_week[e.obj] < 0) continue;
    if (e.action != Action::kVideoLoad && e.action != Action::kVideoPlay) continue;
    first_view.emplace(e.obj, e.t);
  }
  double delay = 0.0;
  for (const auto& [obj, t] : first_view) delay += (t - c.release_time[obj]) / 3600.0;
  out[0] = first_view.empty() ? 0.0 : delay / first_view.size();

  // RegPeakTimeDayHour
  std::array<double, 24> hours{};
  for (size_t i = 0; i < end; ++i) hours[hour_of_day(ev[i].t)] += 1.0;
  if (end == 0) {
    out[1] = 0.0;
  } else {
    double h = 0.0;
    for (double n : hours) {
      if (n > 0) {
        const double p = n / static_cast<double>(end);
        h -= p * std::log(p);
      }
    }
    out[1] = 1.0 - h / std::log(24.0);
  }

  // RegPeriodicityDayHour
  std::map<int64_t, std::array<double, 24>> days;
  for (size_t i = 0; i < end; ++i) days[day_index(ev[i].t)][hour_of_day(ev[i].t)] += 1.0;
  if (days.size() < 2) {
    out[2] = 0.0;
  } else {
    std::vector<const std::array<double, 24>*> profiles;
    std::vector<double> norms;
    for (const auto& [_, hist] : days) {
      profiles.push_back(&hist);
      double sq = 0.0;
      for (double v : hist) sq += v * v;
      norms.push_back(std::sqrt(sq));
    }
    double sum = 0.0;
    size_t pairs = 0;
    for (size_t a = 0; a < profiles.size(); ++a) {
      for (size_t b = a + 1; b < profiles.size(); ++b, ++pairs) {
        double dot = 0.0;
        for (int k = 0; k < 24; ++k) dot += (*profiles[a])[k] * (*profiles[b])[k];
        sum += dot / (norms[a] * norms[b]);
      }
    }
    out[2] = sum / static_cast<double>(pairs);
  }
}

void engagement(const Ctx& c, const std::vector<Ev>& ev, size_t begin, size_t end, double* out) {
  const FeatureConfig& cfg = *c.config;
  const auto sessions = sessions_of(ev, end, cfg);
  std::vector<double> durations, between;
  for (size_t k = 0; k < sessions.size(); ++k) {
    durations.push_back(static_cast<double>(sessions[k].duration()));
    if (k > 0) between.push_back(static_cast<double>(sessions[k].start - sessions[k - 1].end));
  }
  double weekend = 0, weekday = 0, time_problem = 0, time_video = 0;
  double week_problem = 0, week_video = 0;
  for (size_t i = 0; i < end; ++i) {
    (is_weekend(ev[i].t) ? weekend : weekday) += 1.0;
    const double dt = event_time(ev, i, end, cfg);
    if (ev[i].action == Action::kQuizSubmit) {
      time_problem += dt;
      if (i >= begin) week_problem += 1.0;
    } else {
      time_video += dt;
      if (i >= begin) week_video += 1.0;
    }
  }
  double total_time = 0.0;
  for (double d : durations) total_time += d;
  out[0] = static_cast<double>(sessions.size());
  out[1] = ratio(weekend, weekday);
  out[2] = mean(durations);
  out[3] = total_time;
  out[4] = pstdev(durations);
  out[5] = pstdev(between);
  out[6] = static_cast<double>(end);
  out[7] = week_problem;
  out[8] = week_video;
  out[9] = weekday;
  out[10] = weekend;
  out[11] = time_problem;
  out[12] = time_video;
}

void control(const Ctx& c, const std::vector<Ev>& ev, const std::vector<size_t>& week_begin,
             int j, double* out) {
  const FeatureConfig& cfg = *c.config;
  const size_t end = week_begin[j + 1];
  std::array<double, kNumActions> counts{};
  double video_clicks = 0;
  std::vector<double> seeks, pauses, speedups;
  for (size_t i = 0; i < end; ++i) {
    const Ev& e = ev[i];
    counts[static_cast<size_t>(e.action)] += 1.0;
    if (!is_video_action(e.action)) continue;
    video_clicks += 1.0;
    if (is_seek(e.action) && !std::isnan(e.seek)) seeks.push_back(std::abs(e.seek));
    if (e.action == Action::kVideoSeekForward) speedups.push_back(event_time(ev, i, end, cfg));
    if (e.action == Action::kVideoPause) {
      for (size_t k = i + 1; k < end; ++k) {
        if (ev[k].obj == e.obj && is_video_action(ev[k].action)) {
          pauses.push_back(static_cast<double>(std::min(ev[k].t - e.t, cfg.gap_cap)));
          break;
        }
      }
    }
  }

  std::vector<double> watched, replayed, interrupted;
  for (int k = 0; k <= j; ++k) {
    std::map<int, int> plays;
    std::map<int, bool> open;  // pause/stop not yet followed by a play
    for (size_t i = week_begin[k]; i < week_begin[k + 1]; ++i) {
      const Ev& e = ev[i];
      if (e.obj < 0 || c.video_release_week[e.obj] < 0) continue;
      if (e.action == Action::kVideoPlay) {
        ++plays[e.obj];
        open[e.obj] = false;
      } else if (e.action == Action::kVideoPause || e.action == Action::kVideoStop) {
        open[e.obj] = true;
      }
    }
    const double n = c.videos_scheduled_by[k];
    double rep = 0, intr = 0;
    for (const auto& [_, p] : plays) rep += p >= 2 ? 1.0 : 0.0;
    for (const auto& [_, o] : open) intr += o ? 1.0 : 0.0;
    watched.push_back(ratio(static_cast<double>(plays.size()), n));
    replayed.push_back(ratio(rep, n));
    interrupted.push_back(ratio(intr, n));
  }

  const double elapsed = j + 1.0;
  auto count = [&](Action a) { return counts[static_cast<size_t>(a)]; };
  out[0] = count(Action::kVideoLoad);
  out[1] = video_clicks;
  out[2] = mean(watched);
  out[3] = pstdev(watched);
  out[4] = mean(replayed);
  out[5] = pstdev(replayed);
  out[6] = mean(interrupted);
  out[7] = pstdev(interrupted);
  out[8] = video_clicks / elapsed;
  out[9] = count(Action::kVideoLoad) / elapsed;
  out[10] = count(Action::kVideoPlay) / elapsed;
  out[11] = count(Action::kVideoPause) / elapsed;
  out[12] = count(Action::kVideoStop) / elapsed;
  out[13] = count(Action::kVideoSeekBackward) / elapsed;
  out[14] = count(Action::kVideoSeekForward) / elapsed;
  out[15] = count(Action::kVideoSpeedChange) / elapsed;
  out[16] = mean(seeks);
  out[17] = pstdev(seeks);
  out[18] = mean(pauses);
  out[19] = pstdev(pauses);
  out[20] = mean(speedups);
  out[21] = pstdev(speedups);
}

void participation(const Ctx& c, const std::vector<Ev>& ev, size_t end, int j, double* out) {
  const double pass = c.config->pass_threshold;
  struct QuizState {
    int attempts = 0;
    double best = -1.0;
    double first = -1.0;
    int64_t last_t = 0;
  };
  std::map<int, QuizState> graded;
  std::set<int> attempted_later, watched;
  std::vector<double> gaps;
  std::map<int, int64_t> last_attempt;
  for (size_t i = 0; i < end; ++i) {
    const Ev& e = ev[i];
    if (e.obj < 0) continue;
    if (e.action == Action::kQuizSubmit) {
      if (c.quiz_release_week[e.obj] > j) attempted_later.insert(e.obj);
      auto [it, first] = last_attempt.emplace(e.obj, e.t);
      if (!first) {
        gaps.push_back(static_cast<double>(e.t - it->second));
        it->second = e.t;
      }
      if (c.graded[e.obj] && !std::isnan(e.grade)) {
        QuizState& q = graded[e.obj];
        if (q.attempts == 0) q.first = e.grade;
        ++q.attempts;
        q.best = std::max(q.best, e.grade);
      }
    } else if (e.action == Action::kVideoPlay && c.video_release_week[e.obj] >= 0) {
      watched.insert(e.obj);
    }
  }
  double strength = 0, aligned = 0, first_try_max = 0;
  int passed = 0;
  for (const auto& [obj, q] : graded) {
    if (q.best < pass) continue;
    ++passed;
    strength += q.best / q.attempts;
    if (c.quiz_release_week[obj] == j) aligned += 1.0;
    if (q.first >= 1.0) first_try_max += 1.0;
  }
  double content_aligned = 0, content_later = 0;
  for (int obj : watched) {
    const int w = c.video_release_week[obj];
    if (w == j) content_aligned += 1.0;
    if (w > j) content_later += 1.0;
  }
  out[0] = ratio(strength, passed);
  out[1] = aligned;
  out[2] = static_cast<double>(attempted_later.size());
  out[3] = content_aligned;
  out[4] = content_later;
  out[5] = mean(gaps);
  out[6] = ratio(first_try_max, passed);
}

// Fills weeks x 45 values for one student.
void student_features(const Ctx& c, const std::vector<Ev>& ev, double* out) {
  std::vector<size_t> week_begin(static_cast<size_t>(c.weeks) + 1);
  for (int k = 0; k <= c.weeks; ++k) {
    const int64_t boundary = k == 0 ? std::numeric_limits<int64_t>::min() : c.course->week_start(k);
    week_begin[k] = static_cast<size_t>(
        std::lower_bound(ev.begin(), ev.end(), boundary,
                         [](const Ev& e, int64_t t) { return e.t < t; }) -
        ev.begin());
  }
  for (int j = 0; j < c.weeks; ++j) {
    double* row = out + static_cast<size_t>(j) * kBehaviorFeatureCount;
    const size_t end = week_begin[j + 1];
    regularity(c, ev, end, row + kRegularityOffset);
    engagement(c, ev, week_begin[j], end, row + kEngagementOffset);
    control(c, ev, week_begin, j, row + kControlOffset);
    participation(c, ev, end, j, row + kParticipationOffset);
  }
}

FeatureBlock slice(const FeatureBlock& all, int offset, int width) {
  FeatureBlock b;
  b.students = all.students;
  b.weeks = all.weeks;
  b.width = width;
  b.values.reserve(all.students.size() * all.weeks * width);
  for (size_t s = 0; s < all.students.size(); ++s) {
    for (int w = 0; w < all.weeks; ++w) {
      auto cell = all.cell(s, w);
      b.values.insert(b.values.end(), cell.begin() + offset, cell.begin() + offset + width);
    }
  }
  return b;
}

}  // namespace

const std::array<std::string_view, kBehaviorFeatureCount>& feature_names() { return kNames; }

std::vector<Session> sessionize(std::span<const InteractionEvent> events,
                                const FeatureConfig& config) {
  std::vector<Ev> ev;
  ev.reserve(events.size());
  for (const auto& e : events) ev.push_back({e.timestamp, e.action, -1, kNaN, kNaN});
  return sessions_of(ev, ev.size(), config);
}

FeatureBlock compute_raw(const CourseIteration& course, int weeks, const FeatureConfig& config,
                         int jobs) {
  if (weeks < 1) throw ArgumentError("feature computation needs at least one week");
  const Ctx ctx = make_ctx(course, weeks, config);
  const ScheduleIndex index(course.schedule);
  FeatureBlock b;
  for (const auto& [s, _] : course.labels) b.students.push_back(s);
  b.weeks = weeks;
  b.width = kBehaviorFeatureCount;
  const size_t stride = static_cast<size_t>(weeks) * kBehaviorFeatureCount;
  b.values.assign(b.students.size() * stride, 0.0);

  const std::vector<InteractionEvent> empty;
  auto work = [&](size_t lo, size_t hi) {
    for (size_t i = lo; i < hi; ++i) {
      auto it = course.logs.find(b.students[i]);
      const auto ev = resolve(it == course.logs.end() ? empty : it->second, index);
      student_features(ctx, ev, b.values.data() + i * stride);
    }
  };
  const size_t n = b.students.size();
  const size_t threads = std::clamp<size_t>(static_cast<size_t>(std::max(jobs, 1)), 1, std::max<size_t>(n, 1));
  if (threads <= 1) {
    work(0, n);
  } else {
    std::vector<std::thread> pool;
    for (size_t t = 0; t < threads; ++t) pool.emplace_back(work, n * t / threads, n * (t + 1) / threads);
    for (auto& th : pool) th.join();
  }
  return b;
}

FeatureBlock compute_regularity(const CourseIteration& course, int weeks,
                                const FeatureConfig& config) {
  return slice(compute_raw(course, weeks, config), kRegularityOffset, kRegularityCount);
}

FeatureBlock compute_engagement(const CourseIteration& course, int weeks,
                                const FeatureConfig& config) {
  return slice(compute_raw(course, weeks, config), kEngagementOffset, kEngagementCount);
}

FeatureBlock compute_control(const CourseIteration& course, int weeks,
                             const FeatureConfig& config) {
  return slice(compute_raw(course, weeks, config), kControlOffset, kControlCount);
}

FeatureBlock compute_participation(const CourseIteration& course, int weeks,
                                   const FeatureConfig& config) {
  return slice(compute_raw(course, weeks, config), kParticipationOffset, kParticipationCount);
}

NormStats fit_norm_stats(std::span<const FeatureBlock* const> blocks) {
  NormStats st;
  for (auto name : kNames) st.names.emplace_back(name);
  st.min.assign(kBehaviorFeatureCount, std::numeric_limits<double>::infinity());
  st.max.assign(kBehaviorFeatureCount, -std::numeric_limits<double>::infinity());
  bool any = false;
  for (const FeatureBlock* b : blocks) {
    if (b->width != kBehaviorFeatureCount) throw ArgumentError("norm stats need all 45 features");
    for (size_t i = 0; i + kBehaviorFeatureCount <= b->values.size(); i += kBehaviorFeatureCount) {
      any = true;
      for (int f = 0; f < kBehaviorFeatureCount; ++f) {
        st.min[f] = std::min(st.min[f], b->values[i + f]);
        st.max[f] = std::max(st.max[f], b->values[i + f]);
      }
    }
  }
  if (!any) throw DataError("no students to fit normalisation statistics on");
  return st;
}

double normalize_value(double x, double lo, double hi) {
  if (!(hi > lo)) return 0.0;
  return std::clamp((x - lo) / (hi - lo), 0.0, 1.0);
}

BehaviorTensor normalize(const FeatureBlock& raw, const NormStats& stats, int max_weeks) {
  if (stats.names.size() != static_cast<size_t>(raw.width) ||
      stats.min.size() != stats.names.size() || stats.max.size() != stats.names.size()) {
    throw DataError("normalisation statistics cover " + std::to_string(stats.names.size()) +
                    " features, tensor has " + std::to_string(raw.width));
  }
  if (max_weeks < raw.weeks) {
    throw ArgumentError("padded length " + std::to_string(max_weeks) + " is shorter than " +
                        std::to_string(raw.weeks) + " kept weeks");
  }
  BehaviorTensor t;
  t.students = raw.students;
  t.feature_names = stats.names;
  t.weeks = max_weeks;
  t.weeks_kept = raw.weeks;
  const size_t width = static_cast<size_t>(raw.width);
  t.values.assign(raw.students.size() * max_weeks * width, kMaskValue);
  for (size_t s = 0; s < raw.students.size(); ++s) {
    for (int w = 0; w < raw.weeks; ++w) {
      auto cell = raw.cell(s, w);
      double* dst = t.values.data() + (s * max_weeks + w) * width;
      for (size_t f = 0; f < width; ++f) dst[f] = normalize_value(cell[f], stats.min[f], stats.max[f]);
    }
  }
  return t;
}

std::pair<BehaviorTensor, NormStats> assemble_behavior(const CourseIteration& course,
                                                       double level,
                                                       const std::optional<NormStats>& stats,
                                                       int max_weeks,
                                                       const FeatureConfig& config) {
  const int kept = weeks_kept(course, level);
  const FeatureBlock raw = compute_raw(course, kept, config);
  NormStats st;
  if (stats) {
    if (stats->names.size() != static_cast<size_t>(kBehaviorFeatureCount) ||
        !std::equal(stats->names.begin(), stats->names.end(), kNames.begin())) {
      throw DataError("normalisation statistics name different features");
    }
    st = *stats;
  } else {
    const FeatureBlock* one[] = {&raw};
    st = fit_norm_stats(one);
  }
  return {normalize(raw, st, max_weeks), st};
}

}  // namespace moocxfer::features
