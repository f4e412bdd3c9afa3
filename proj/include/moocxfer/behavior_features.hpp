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

#ifndef MOOCXFER_BEHAVIOR_FEATURES_HPP_
#define MOOCXFER_BEHAVIOR_FEATURES_HPP_

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "moocxfer/datamodel.hpp"

namespace moocxfer::features {

inline constexpr int kRegularityCount = 3;
inline constexpr int kEngagementCount = 13;
inline constexpr int kControlCount = 22;
inline constexpr int kParticipationCount = 7;
inline constexpr int kBehaviorFeatureCount =
    kRegularityCount + kEngagementCount + kControlCount + kParticipationCount;
inline constexpr double kMaskValue = -1.0;

// Canonical order: Regularity, Engagement, Control, Participation. The
// Engagement and Control sets both carry a "TotalClicksVideo" column; the
// former counts this week's video clicks, the latter all video clicks so far.
const std::array<std::string_view, kBehaviorFeatureCount>& feature_names();

struct FeatureConfig {
  int64_t session_gap = 1800;      // events closer than this share a session
  int64_t terminal_credit = 60;    // seconds credited to a session's last event
  int64_t gap_cap = 1800;          // cap on per-event time and pause duration
  double pass_threshold = 0.5;     // quiz grade counted as passed
};

struct Session {
  int64_t start = 0;
  int64_t end = 0;  // last event + terminal credit
  int n_events = 0;
  int64_t duration() const { return end - start; }
};

std::vector<Session> sessionize(std::span<const InteractionEvent> events,
                                const FeatureConfig& config = {});

// Dense students x weeks x width block.
struct FeatureBlock {
  std::vector<std::string> students;
  int weeks = 0;
  int width = 0;
  std::vector<double> values;

  double at(size_t s, size_t w, size_t f) const {
    return values[(s * weeks + w) * width + f];
  }
  std::span<const double> cell(size_t s, size_t w) const {
    return {values.data() + (s * weeks + w) * width, static_cast<size_t>(width)};
  }
};

// Students are the course's labelled students, in id order. Week j of every
// feature depends only on events strictly before the start of week j + 1.
FeatureBlock compute_regularity(const CourseIteration& course, int weeks,
                                const FeatureConfig& config = {});
FeatureBlock compute_engagement(const CourseIteration& course, int weeks,
                                const FeatureConfig& config = {});
FeatureBlock compute_control(const CourseIteration& course, int weeks,
                             const FeatureConfig& config = {});
FeatureBlock compute_participation(const CourseIteration& course, int weeks,
                                   const FeatureConfig& config = {});

// All 45 features, unnormalised. `jobs` > 1 splits students across threads;
// the output does not depend on it.
FeatureBlock compute_raw(const CourseIteration& course, int weeks,
                         const FeatureConfig& config = {}, int jobs = 1);

struct NormStats {
  std::vector<std::string> names;
  std::vector<double> min;
  std::vector<double> max;
};

// Min/max per feature over all students and all `weeks` of every block.
NormStats fit_norm_stats(std::span<const FeatureBlock* const> blocks);

// Normalised behaviour tensor, padded with kMaskValue from week `weeks_kept`
// up to `max_weeks`.
struct BehaviorTensor {
  std::vector<std::string> students;
  std::vector<std::string> feature_names;
  int weeks = 0;       // padded length
  int weeks_kept = 0;  // unpadded prefix
  std::vector<double> values;

  static constexpr double mask_value = kMaskValue;
  size_t width() const { return feature_names.size(); }
  std::span<const double> student(size_t s) const {
    const size_t n = static_cast<size_t>(weeks) * width();
    return {values.data() + s * n, n};
  }
};

// (x - min) / (max - min) clamped to [0, 1]; constant columns map to 0.
double normalize_value(double x, double lo, double hi);

BehaviorTensor normalize(const FeatureBlock& raw, const NormStats& stats, int max_weeks);

// Computes the 45 features of a (truncated) course at level e. Fits stats on
// this course when none are given, otherwise applies them. Throws DataError
// when the given stats name different features.
std::pair<BehaviorTensor, NormStats> assemble_behavior(const CourseIteration& course,
                                                       double level,
                                                       const std::optional<NormStats>& stats,
                                                       int max_weeks,
                                                       const FeatureConfig& config = {});

}  // namespace moocxfer::features

#endif  // MOOCXFER_BEHAVIOR_FEATURES_HPP_
