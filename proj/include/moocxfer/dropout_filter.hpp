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

#ifndef MOOCXFER_DROPOUT_FILTER_HPP_
#define MOOCXFER_DROPOUT_FILTER_HPP_

#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "moocxfer/datamodel.hpp"

namespace moocxfer::filter {

// Per-student weekly assignment scores over the first `weeks` course weeks.
// Cell (i, j) = sum of the student's best grade on each graded quiz released
// in week j, divided by the number of graded quizzes released in week j.
// Only submissions before the end of week `weeks - 1` count.
struct GradeMatrix {
  std::vector<std::string> students;
  int weeks = 2;
  std::vector<double> values;  // row-major students x weeks

  double at(size_t student, size_t week) const { return values[student * weeks + week]; }
  std::span<const double> row(size_t student) const {
    return {values.data() + student * weeks, static_cast<size_t>(weeks)};
  }
};

inline constexpr int kDefaultGradeWeeks = 2;

GradeMatrix build_grade_matrix(const CourseIteration& course, int weeks = kDefaultGradeWeeks);
GradeMatrix build_grade_matrix(const CourseIteration& course, int weeks,
                               const std::vector<std::string>& students);

struct LogisticModel {
  std::vector<double> weights;
  double bias = 0.0;

  // P(fail | grades)
  double predict(std::span<const double> grades) const;
};

struct LogisticOptions {
  double l2 = 1e-4;
  int max_iterations = 10000;
  double tolerance = 1e-6;  // on the max-norm of the gradient
};

struct FitTrace {
  std::vector<double> losses;  // objective before each step, plus the final one
  int iterations = 0;
};

// Full-batch gradient descent from zero on the mean log-loss plus
// (l2/2)|w|^2. Grades are centred internally (the bias absorbs the shift) and
// the step is 1/L for the data's Lipschitz bound, so the objective never
// increases. Throws DataError("degenerate labels") on single-class input.
LogisticModel fit_logistic(const GradeMatrix& grades,
                           const std::map<std::string, Outcome>& labels,
                           const LogisticOptions& options = {}, FitTrace* trace = nullptr);

inline const std::vector<double> kThresholdGrid = {0.96, 0.97, 0.98, 0.99, 0.999};

// Grid value maximising the balanced accuracy of "remove iff p > t", removal
// counting as a fail prediction. Ties go to the largest threshold, as does a
// validation set with a single class.
double select_threshold(const LogisticModel& model, const GradeMatrix& validation,
                        const std::map<std::string, Outcome>& labels,
                        const std::vector<double>& grid = kThresholdGrid);

struct FilterResult {
  std::set<std::string> kept;
  std::set<std::string> removed;
  double threshold = 0.99;
  std::map<std::string, double> fail_probability;
  LogisticModel model;
};

// removed = {s : p_s > threshold}; every labelled student lands in exactly
// one of kept / removed.
FilterResult filter_early_dropouts(const CourseIteration& course, const LogisticModel& model,
                                   double threshold, int grade_weeks = kDefaultGradeWeeks);

struct FilterConfig {
  int grade_weeks = kDefaultGradeWeeks;
  LogisticOptions logistic;
  std::vector<double> grid = kThresholdGrid;
  double validation_fraction = 0.1;
  uint64_t seed = 1;
};

// Per-course procedure: stratified split of the course's students, fit on the
// larger part, pick the threshold on the smaller part, filter everyone.
FilterResult run_filter(const CourseIteration& course, const FilterConfig& config);

// The course restricted to `result.kept` (logs and labels).
CourseIteration keep_students(const CourseIteration& course, const std::set<std::string>& kept);

}  // namespace moocxfer::filter

#endif  // MOOCXFER_DROPOUT_FILTER_HPP_
