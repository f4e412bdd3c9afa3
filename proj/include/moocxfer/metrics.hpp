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

#ifndef MOOCXFER_METRICS_HPP_
#define MOOCXFER_METRICS_HPP_

#include <cstdint>
#include <span>
#include <vector>

namespace moocxfer {

// Binary outcome encoding used throughout training and evaluation: 1 = fail
// (the positive class), 0 = pass.
struct Confusion {
  int tp = 0;
  int fn = 0;
  int tn = 0;
  int fp = 0;

  int total() const { return tp + fn + tn + fp; }
  bool defined() const { return tp + fn > 0 && tn + fp > 0; }
  // (TPR + TNR) / 2. Throws DataError("BAC undefined") on single-class labels.
  double balanced_accuracy() const;
  double accuracy() const;
};

Confusion confusion(std::span<const int> predicted, std::span<const int> actual);
double balanced_accuracy(std::span<const int> predicted, std::span<const int> actual);

// p >= threshold -> predicted fail.
inline constexpr double kDecisionThreshold = 0.5;
std::vector<int> to_predictions(std::span<const double> fail_prob,
                                double threshold = kDecisionThreshold);

// Stratified partition of indices [0, labels.size()). Each class is shuffled
// with a seeded generator and cut proportionally; leftover members go to the
// partitions with the largest fractional share. Partitions are disjoint and
// exhaustive. Throws ArgumentError when fractions do not sum to 1 or a class
// has fewer members than there are non-empty partitions.
std::vector<std::vector<size_t>> stratified_split(std::span<const int> labels,
                                                  std::span<const double> fractions,
                                                  uint64_t seed);

// k folds; per-class fold counts differ by at most one.
std::vector<std::vector<size_t>> stratified_kfold(std::span<const int> labels, int k,
                                                  uint64_t seed);

}  // namespace moocxfer

#endif  // MOOCXFER_METRICS_HPP_
