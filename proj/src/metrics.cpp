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

#include "moocxfer/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "moocxfer/common.hpp"

namespace moocxfer {

double Confusion::balanced_accuracy() const {
  if (!defined()) throw DataError("BAC undefined: labels contain a single class");
  const double tpr = static_cast<double>(tp) / (tp + fn);
  const double tnr = static_cast<double>(tn) / (tn + fp);
  return (tpr + tnr) / 2.0;
}

double Confusion::accuracy() const {
  return total() == 0 ? 0.0 : static_cast<double>(tp + tn) / total();
}

Confusion confusion(std::span<const int> predicted, std::span<const int> actual) {
  if (predicted.size() != actual.size()) {
    throw ArgumentError("confusion: " + std::to_string(predicted.size()) + " predictions vs " +
                        std::to_string(actual.size()) + " labels");
  }
  Confusion c;
  for (size_t i = 0; i < actual.size(); ++i) {
    const bool p = predicted[i] != 0;
    if (actual[i] != 0) {
      p ? ++c.tp : ++c.fn;
    } else {
      p ? ++c.fp : ++c.tn;
    }
  }
  return c;
}

double balanced_accuracy(std::span<const int> predicted, std::span<const int> actual) {
  return confusion(predicted, actual).balanced_accuracy();
}

std::vector<int> to_predictions(std::span<const double> fail_prob, double threshold) {
  std::vector<int> out(fail_prob.size());
  for (size_t i = 0; i < fail_prob.size(); ++i) out[i] = fail_prob[i] >= threshold ? 1 : 0;
  return out;
}

namespace {

std::vector<std::vector<size_t>> by_class(std::span<const int> labels) {
  std::vector<std::vector<size_t>> classes(2);
  for (size_t i = 0; i < labels.size(); ++i) classes[labels[i] != 0 ? 1 : 0].push_back(i);
  return classes;
}

}  // namespace

std::vector<std::vector<size_t>> stratified_split(std::span<const int> labels,
                                                  std::span<const double> fractions,
                                                  uint64_t seed) {
  if (fractions.empty()) throw ArgumentError("stratified_split: no partitions");
  double sum = 0.0;
  size_t nonempty = 0;
  for (double f : fractions) {
    if (f < 0.0) throw ArgumentError("stratified_split: negative fraction");
    sum += f;
    if (f > 0.0) ++nonempty;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ArgumentError("stratified_split: fractions must sum to 1");

  std::vector<std::vector<size_t>> parts(fractions.size());
  auto classes = by_class(labels);
  for (size_t c = 0; c < classes.size(); ++c) {
    auto& members = classes[c];
    if (members.empty()) continue;
    if (members.size() < nonempty) {
      throw ArgumentError("stratified_split: class of " + std::to_string(members.size()) +
                          " students is smaller than the " + std::to_string(nonempty) +
                          " partitions");
    }
    Rng rng(derive_seed(seed, c ? "class:fail" : "class:pass"));
    std::shuffle(members.begin(), members.end(), rng);
    const double n = static_cast<double>(members.size());
    std::vector<size_t> counts(fractions.size());
    std::vector<double> rest(fractions.size());
    size_t assigned = 0;
    for (size_t k = 0; k < fractions.size(); ++k) {
      const double exact = n * fractions[k];
      counts[k] = static_cast<size_t>(std::floor(exact + 1e-9));
      rest[k] = exact - static_cast<double>(counts[k]);
      assigned += counts[k];
    }
    std::vector<size_t> order(fractions.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return rest[a] > rest[b]; });
    for (size_t i = 0; assigned < members.size(); ++i, ++assigned) {
      ++counts[order[i % order.size()]];
    }
    size_t pos = 0;
    for (size_t k = 0; k < fractions.size(); ++k) {
      for (size_t j = 0; j < counts[k]; ++j) parts[k].push_back(members[pos++]);
    }
  }
  for (auto& p : parts) std::sort(p.begin(), p.end());
  return parts;
}

std::vector<std::vector<size_t>> stratified_kfold(std::span<const int> labels, int k,
                                                  uint64_t seed) {
  if (k < 2) throw ArgumentError("stratified_kfold: k must be >= 2");
  std::vector<std::vector<size_t>> folds(static_cast<size_t>(k));
  auto classes = by_class(labels);
  size_t offset = 0;
  for (size_t c = 0; c < classes.size(); ++c) {
    auto& members = classes[c];
    if (members.empty()) continue;
    if (members.size() < static_cast<size_t>(k)) {
      throw ArgumentError("stratified_kfold: class of " + std::to_string(members.size()) +
                          " students is smaller than " + std::to_string(k) + " folds");
    }
    Rng rng(derive_seed(seed, c ? "kfold:fail" : "kfold:pass"));
    std::shuffle(members.begin(), members.end(), rng);
    for (size_t i = 0; i < members.size(); ++i) {
      folds[(offset + i) % folds.size()].push_back(members[i]);
    }
    offset += members.size();
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

}  // namespace moocxfer
