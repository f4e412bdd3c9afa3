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

#include "moocxfer/dropout_filter.hpp"

#include <algorithm>
#include <cmath>

#include "moocxfer/common.hpp"
#include "moocxfer/metrics.hpp"

namespace moocxfer::filter {
namespace {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

std::vector<std::string> labelled_students(const CourseIteration& course) {
  std::vector<std::string> out;
  for (const auto& [s, _] : course.labels) out.push_back(s);
  return out;
}

}  // namespace

GradeMatrix build_grade_matrix(const CourseIteration& course, int weeks) {
  return build_grade_matrix(course, weeks, labelled_students(course));
}

GradeMatrix build_grade_matrix(const CourseIteration& course, int weeks,
                               const std::vector<std::string>& students) {
  if (weeks < 1) throw ArgumentError("grade matrix needs at least one week");
  GradeMatrix g;
  g.students = students;
  g.weeks = weeks;
  g.values.assign(students.size() * static_cast<size_t>(weeks), 0.0);

  std::vector<int> graded_per_week(static_cast<size_t>(weeks), 0);
  for (const auto& o : course.schedule) {
    if (o.kind == ObjectKind::kQuiz && o.graded && o.release_week < weeks) {
      ++graded_per_week[static_cast<size_t>(o.release_week)];
    }
  }
  ScheduleIndex index(course.schedule);
  const int64_t cutoff = course.week_start(weeks);
  for (size_t i = 0; i < students.size(); ++i) {
    auto it = course.logs.find(students[i]);
    if (it == course.logs.end()) continue;
    std::map<std::string, double> best;
    for (const auto& e : it->second) {
      if (e.timestamp >= cutoff) break;
      if (e.action != Action::kQuizSubmit || !e.grade) continue;
      const LearningObject* o = index.find(e.object_id);
      if (o == nullptr || !o->graded || o->release_week >= weeks) continue;
      auto [slot, inserted] = best.emplace(e.object_id, *e.grade);
      if (!inserted) slot->second = std::max(slot->second, *e.grade);
    }
    for (const auto& [object, grade] : best) {
      const int week = index.find(object)->release_week;
      g.values[i * weeks + week] += grade;
    }
    for (int j = 0; j < weeks; ++j) {
      const int n = graded_per_week[static_cast<size_t>(j)];
      g.values[i * weeks + j] = n > 0 ? g.values[i * weeks + j] / n : 0.0;
    }
  }
  return g;
}

double LogisticModel::predict(std::span<const double> grades) const {
  double z = bias;
  for (size_t k = 0; k < weights.size(); ++k) z += weights[k] * grades[k];
  return sigmoid(z);
}

LogisticModel fit_logistic(const GradeMatrix& grades,
                           const std::map<std::string, Outcome>& labels,
                           const LogisticOptions& options, FitTrace* trace) {
  const size_t n = grades.students.size();
  const size_t d = static_cast<size_t>(grades.weeks);
  std::vector<double> y(n);
  int fails = 0;
  for (size_t i = 0; i < n; ++i) {
    auto it = labels.find(grades.students[i]);
    if (it == labels.end()) throw DataError("no label for student " + grades.students[i]);
    y[i] = it->second == Outcome::kFail ? 1.0 : 0.0;
    fails += static_cast<int>(y[i]);
  }
  if (fails == 0 || fails == static_cast<int>(n)) throw DataError("degenerate labels");

  std::vector<double> mu(d, 0.0);
  for (size_t i = 0; i < n; ++i) {
    for (size_t k = 0; k < d; ++k) mu[k] += grades.at(i, k) / static_cast<double>(n);
  }
  std::vector<double> x(n * d);
  double max_sq = 0.0;
  for (size_t i = 0; i < n; ++i) {
    double sq = 0.0;
    for (size_t k = 0; k < d; ++k) {
      x[i * d + k] = grades.at(i, k) - mu[k];
      sq += x[i * d + k] * x[i * d + k];
    }
    max_sq = std::max(max_sq, sq);
  }
  // Hessian of the objective is bounded by 0.25 * (1 + max |x|^2) + l2.
  const double step = 1.0 / (0.25 * (1.0 + max_sq) + options.l2);

  std::vector<double> w(d, 0.0), gw(d);
  double b = 0.0;
  auto objective = [&]() {
    double loss = 0.0;
    for (size_t i = 0; i < n; ++i) {
      double z = b;
      for (size_t k = 0; k < d; ++k) z += w[k] * x[i * d + k];
      loss += softplus(z) - y[i] * z;
    }
    double reg = 0.0;
    for (double v : w) reg += v * v;
    return loss / static_cast<double>(n) + 0.5 * options.l2 * reg;
  };

  int it = 0;
  for (; it < options.max_iterations; ++it) {
    if (trace) trace->losses.push_back(objective());
    std::fill(gw.begin(), gw.end(), 0.0);
    double gb = 0.0;
    for (size_t i = 0; i < n; ++i) {
      double z = b;
      for (size_t k = 0; k < d; ++k) z += w[k] * x[i * d + k];
      const double r = sigmoid(z) - y[i];
      gb += r;
      for (size_t k = 0; k < d; ++k) gw[k] += r * x[i * d + k];
    }
    gb /= static_cast<double>(n);
    double gmax = std::abs(gb);
    for (size_t k = 0; k < d; ++k) {
      gw[k] = gw[k] / static_cast<double>(n) + options.l2 * w[k];
      gmax = std::max(gmax, std::abs(gw[k]));
    }
    if (gmax < options.tolerance) break;
    for (size_t k = 0; k < d; ++k) w[k] -= step * gw[k];
    b -= step * gb;
  }
  if (trace) {
    trace->losses.push_back(objective());
    trace->iterations = it;
  }

  LogisticModel m;
  m.weights = w;
  m.bias = b;
  for (size_t k = 0; k < d; ++k) m.bias -= w[k] * mu[k];
  for (double v : m.weights) {
    if (!std::isfinite(v)) throw DataError("logistic fit diverged");
  }
  return m;
}

double select_threshold(const LogisticModel& model, const GradeMatrix& validation,
                        const std::map<std::string, Outcome>& labels,
                        const std::vector<double>& grid) {
  if (grid.empty()) throw ArgumentError("threshold grid is empty");
  std::vector<int> actual;
  std::vector<double> p;
  for (size_t i = 0; i < validation.students.size(); ++i) {
    auto it = labels.find(validation.students[i]);
    if (it == labels.end()) throw DataError("no label for student " + validation.students[i]);
    actual.push_back(it->second == Outcome::kFail ? 1 : 0);
    p.push_back(model.predict(validation.row(i)));
  }
  std::vector<double> sorted = grid;
  std::sort(sorted.begin(), sorted.end());
  double best_t = sorted.back();
  double best_bac = -1.0;
  for (double t : sorted) {
    std::vector<int> predicted(p.size());
    for (size_t i = 0; i < p.size(); ++i) predicted[i] = p[i] > t ? 1 : 0;
    const Confusion c = confusion(predicted, actual);
    if (!c.defined()) return sorted.back();
    const double bac = c.balanced_accuracy();
    if (bac >= best_bac) {
      best_bac = bac;
      best_t = t;
    }
  }
  return best_t;
}

FilterResult filter_early_dropouts(const CourseIteration& course, const LogisticModel& model,
                                   double threshold, int grade_weeks) {
  FilterResult r;
  r.threshold = threshold;
  r.model = model;
  const GradeMatrix g = build_grade_matrix(course, grade_weeks);
  for (size_t i = 0; i < g.students.size(); ++i) {
    const double p = model.predict(g.row(i));
    r.fail_probability[g.students[i]] = p;
    (p > threshold ? r.removed : r.kept).insert(g.students[i]);
  }
  return r;
}

FilterResult run_filter(const CourseIteration& course, const FilterConfig& config) {
  const auto students = labelled_students(course);
  std::vector<int> y;
  for (const auto& s : students) y.push_back(course.labels.at(s) == Outcome::kFail ? 1 : 0);
  const std::vector<double> fractions = {1.0 - config.validation_fraction,
                                         config.validation_fraction};
  const auto parts = stratified_split(y, fractions, derive_seed(config.seed, "filter:" + course.id()));
  std::vector<std::string> fit_ids, val_ids;
  for (size_t i : parts[0]) fit_ids.push_back(students[i]);
  for (size_t i : parts[1]) val_ids.push_back(students[i]);
  const GradeMatrix g_fit = build_grade_matrix(course, config.grade_weeks, fit_ids);
  const GradeMatrix g_val = build_grade_matrix(course, config.grade_weeks, val_ids);
  LogisticModel model;
  try {
    model = fit_logistic(g_fit, course.labels, config.logistic);
  } catch (const DataError& e) {
    throw DataError(course.id() + ": " + e.what());
  }
  const double t = select_threshold(model, g_val, course.labels, config.grid);
  return filter_early_dropouts(course, model, t, config.grade_weeks);
}

CourseIteration keep_students(const CourseIteration& course, const std::set<std::string>& kept) {
  CourseIteration out = course;
  std::erase_if(out.logs, [&](const auto& kv) { return !kept.count(kv.first); });
  std::erase_if(out.labels, [&](const auto& kv) { return !kept.count(kv.first); });
  return out;
}

}  // namespace moocxfer::filter
