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

#include <algorithm>
#include <numeric>
#include <set>

#include <gtest/gtest.h>

#include "moocxfer/common.hpp"
#include "moocxfer/metrics.hpp"

namespace moocxfer {
namespace {

// Independent recomputation from per-pair counting.
double oracle_bac(const std::vector<int>& pred, const std::vector<int>& y) {
  long pos = 0, neg = 0, hit_pos = 0, hit_neg = 0;
  for (size_t i = 0; i < y.size(); ++i) {
    if (y[i] == 1) {
      ++pos;
      hit_pos += pred[i] == 1;
    } else {
      ++neg;
      hit_neg += pred[i] == 0;
    }
  }
  return (static_cast<double>(hit_pos) / pos + static_cast<double>(hit_neg) / neg) / 2.0;
}

TEST(BacTest, PerfectPredictions) {
  const std::vector<int> y = {1, 0, 0, 1, 0};
  EXPECT_DOUBLE_EQ(balanced_accuracy(y, y), 1.0);
}

TEST(BacTest, ConstantPredictorOnImbalancedData) {
  const std::vector<int> y = {1, 0, 0, 0, 0, 0, 0, 0, 0, 0};
  const std::vector<int> p(10, 0);
  EXPECT_DOUBLE_EQ(balanced_accuracy(p, y), 0.5);
}

TEST(BacTest, HandConfusionMatrix) {
  // TP=3, FN=1, TN=2, FP=2
  const std::vector<int> y = {1, 1, 1, 1, 0, 0, 0, 0};
  const std::vector<int> p = {1, 1, 1, 0, 0, 0, 1, 1};
  const Confusion c = confusion(p, y);
  EXPECT_EQ(c.tp, 3);
  EXPECT_EQ(c.fn, 1);
  EXPECT_EQ(c.tn, 2);
  EXPECT_EQ(c.fp, 2);
  EXPECT_DOUBLE_EQ(balanced_accuracy(p, y), 0.625);
  EXPECT_DOUBLE_EQ(c.accuracy(), 5.0 / 8.0);
}

TEST(BacTest, MatchesOracleOnRandomSets) {
  Rng rng(11);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = std::uniform_int_distribution<int>(2, 200)(rng);
    std::vector<int> y(n), p(n);
    for (int i = 0; i < n; ++i) {
      y[i] = rng() & 1;
      p[i] = rng() & 1;
    }
    y[0] = 1;
    y[1] = 0;
    ASSERT_EQ(balanced_accuracy(p, y), oracle_bac(p, y)) << trial;
  }
}

TEST(BacTest, SingleClassIsUndefined) {
  const std::vector<int> y = {1, 1};
  EXPECT_FALSE(confusion(y, y).defined());
  EXPECT_THROW(balanced_accuracy(y, y), DataError);
  const std::vector<int> shorter = {1};
  EXPECT_THROW(confusion(shorter, y), ArgumentError);
}

TEST(BacTest, HalfProbabilityPredictsFail) {
  const std::vector<double> p = {0.49, 0.5, 0.51};
  EXPECT_EQ(to_predictions(p), (std::vector<int>{0, 1, 1}));
}

std::vector<int> labels_with(int n, int fails) {
  std::vector<int> y(n, 0);
  std::fill(y.begin(), y.begin() + fails, 1);
  return y;
}

TEST(SplitTest, ProportionalFailCounts) {
  const auto y = labels_with(100, 40);
  const std::vector<double> f = {0.8, 0.1, 0.1};
  const auto parts = stratified_split(y, f, 3);
  ASSERT_EQ(parts.size(), 3u);
  const std::vector<size_t> sizes = {80, 10, 10}, fails = {32, 4, 4};
  for (size_t k = 0; k < 3; ++k) {
    EXPECT_EQ(parts[k].size(), sizes[k]);
    size_t nf = 0;
    for (size_t i : parts[k]) nf += y[i];
    EXPECT_EQ(nf, fails[k]);
  }
}

TEST(SplitTest, SeededAndExhaustive) {
  const auto y = labels_with(57, 13);
  const std::vector<double> f = {0.7, 0.3};
  EXPECT_EQ(stratified_split(y, f, 9), stratified_split(y, f, 9));
  EXPECT_NE(stratified_split(y, f, 9), stratified_split(y, f, 10));
  std::vector<size_t> all;
  for (const auto& p : stratified_split(y, f, 9)) all.insert(all.end(), p.begin(), p.end());
  std::sort(all.begin(), all.end());
  std::vector<size_t> expect(57);
  std::iota(expect.begin(), expect.end(), 0);
  EXPECT_EQ(all, expect);
  const std::vector<double> bad = {0.5, 0.4};
  EXPECT_THROW(stratified_split(y, bad, 1), ArgumentError);
}

TEST(SplitTest, KFoldProportionsWithinOneStudent) {
  const auto y = labels_with(137, 41);
  const auto folds = stratified_kfold(y, 10, 4);
  ASSERT_EQ(folds.size(), 10u);
  std::set<size_t> seen;
  for (const auto& f : folds) {
    size_t nf = 0;
    for (size_t i : f) {
      EXPECT_TRUE(seen.insert(i).second);
      nf += y[i];
    }
    const double expect_fail = 41.0 * f.size() / 137.0;
    EXPECT_LE(std::abs(static_cast<double>(nf) - expect_fail), 1.0);
  }
  EXPECT_EQ(seen.size(), 137u);
}

}  // namespace
}  // namespace moocxfer
