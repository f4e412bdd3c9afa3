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
#include <numeric>

#include <gtest/gtest.h>

#include "moocxfer/bilstm.hpp"
#include "moocxfer/grad_check.hpp"
#include "moocxfer/layers.hpp"
#include "moocxfer/optim.hpp"
#include "moocxfer/tensor.hpp"
#include "test_util.hpp"

namespace moocxfer::nn {
namespace {

using moocxfer::testing::random_vector;

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

void randomize(ParamStore& store, Rng& rng, double scale = 0.5) {
  for (auto& [_, p] : store.params()) {
    for (double& v : p.value.values()) v = std::uniform_real_distribution<double>(-scale, scale)(rng);
  }
}

TEST(TensorTest, ShapeAndMismatchMessage) {
  Tensor a({2, 3}, 1.0);
  EXPECT_EQ(a.size(), 6u);
  EXPECT_EQ(a.shape_string(), "[2,3]");
  Tensor b({3, 2});
  try {
    check_same_shape(a, b, "add");
    FAIL();
  } catch (const ArgumentError& e) {
    EXPECT_NE(std::string(e.what()).find("[2,3] vs [3,2]"), std::string::npos);
  }
  EXPECT_THROW(Tensor({2, 2}, std::vector<double>(3)), ArgumentError);
  EXPECT_THROW(Tensor({1, 1, 1, 1}), ArgumentError);
}

TEST(ParamStoreTest, IterationIsByNameAndInitIsDeterministic) {
  ParamStore a, b;
  for (ParamStore* s : {&a, &b}) {
    s->add("zeta", {3}, Init::uniform(0.1));
    s->add("alpha", {2, 2}, Init::uniform(0.1));
    s->initialize(42);
  }
  std::vector<std::string> names;
  for (const auto& [n, _] : a.params()) names.push_back(n);
  EXPECT_EQ(names, (std::vector<std::string>{"alpha", "zeta"}));
  EXPECT_EQ(a.snapshot(), b.snapshot());
  EXPECT_THROW(a.add("alpha", {1}, Init::zeros()), ArgumentError);
}

TEST(ParamStoreTest, LstmBiasStartsForgetGateAtOne) {
  ParamStore s;
  s.add("b", {8}, Init::lstm_bias(2, 0.05));
  s.initialize(1);
  const auto& v = s.get("b").value;
  EXPECT_EQ(v[2], 1.0);
  EXPECT_EQ(v[3], 1.0);
  for (size_t i : {0u, 1u, 4u, 5u, 6u, 7u}) EXPECT_LE(std::abs(v[i]), 0.05);
}

TEST(DenseTest, IdentityAndSigmoidAtZero) {
  ParamStore s;
  Dense d(s, "d", 3, 3, Activation::kLinear);
  s.initialize(1);
  auto& w = s.get("d/w").value;
  w.fill(0.0);
  for (int i = 0; i < 3; ++i) w.at(i, i) = 1.0;
  Dense::Cache c;
  const std::vector<double> x = {0.3, -1.0, 2.5};
  d.forward(x, c);
  EXPECT_EQ(c.y, x);
  EXPECT_EQ(sigmoid(0.0), 0.5);
}

TEST(DenseTest, ShapeMismatchNamesBothShapes) {
  ParamStore s;
  Dense d(s, "d", 3, 2, Activation::kLinear);
  Dense::Cache c;
  try {
    d.forward(std::vector<double>(4), c);
    FAIL();
  } catch (const ArgumentError& e) {
    EXPECT_NE(std::string(e.what()).find("[4] vs [3]"), std::string::npos);
  }
}

class DenseGradTest : public ::testing::TestWithParam<Activation> {};

TEST_P(DenseGradTest, MatchesFiniteDifferences) {
  Rng rng(7);
  ParamStore s;
  Dense d(s, "d", 3, 2, GetParam());
  s.initialize(3);
  randomize(s, rng);
  std::vector<std::vector<double>> xs;
  for (int i = 0; i < 4; ++i) xs.push_back(random_vector(3, rng));
  const auto r = random_vector(2, rng);
  auto loss = [&]() {
    double l = 0.0;
    Dense::Cache c;
    for (const auto& x : xs) {
      d.forward(x, c);
      l += dot(c.y, r);
    }
    return l;
  };
  auto grad = [&]() {
    Dense::Cache c;
    std::vector<double> dx(3);
    for (const auto& x : xs) {
      d.forward(x, c);
      d.backward(c, r, dx);
    }
  };
  const auto rep = grad_check(s, loss, grad);
  EXPECT_LT(rep.max_rel_error, 1e-6) << rep.worst_param;
  EXPECT_EQ(rep.coords_checked, 8u);
}

INSTANTIATE_TEST_SUITE_P(Activations, DenseGradTest,
                         ::testing::Values(Activation::kLinear, Activation::kSigmoid,
                                           Activation::kTanh, Activation::kGelu));

TEST(DenseTest, InputGradientMatchesFiniteDifferences) {
  Rng rng(9);
  ParamStore s;
  Dense d(s, "d", 4, 3, Activation::kGelu);
  s.initialize(5);
  auto x = random_vector(4, rng);
  const auto r = random_vector(3, rng);
  Dense::Cache c;
  d.forward(x, c);
  std::vector<double> dx(4);
  d.backward(c, r, dx);
  for (size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + 1e-5;
    d.forward(x, c);
    const double up = dot(c.y, r);
    x[i] = saved - 1e-5;
    d.forward(x, c);
    const double down = dot(c.y, r);
    x[i] = saved;
    EXPECT_LT(relative_error(dx[i], (up - down) / 2e-5), 1e-6);
  }
}

TEST(GeluTest, ExactFormAndDerivative) {
  EXPECT_EQ(gelu(0.0), 0.0);
  EXPECT_NEAR(gelu(1.0), 0.8413447460685429, 1e-15);
  for (double x : {-2.0, -0.3, 0.0, 0.7, 3.0}) {
    const double fd = (gelu(x + 1e-6) - gelu(x - 1e-6)) / 2e-6;
    EXPECT_NEAR(gelu_grad(x), fd, 1e-8);
  }
}

TEST(BiLstmTest, ZeroParametersGiveZeroStates) {
  ParamStore s;
  BiLstmStack lstm(s, "l", 2, 1, 3);
  for (auto& [_, p] : s.params()) p.value.fill(0.0);
  BiLstmStack::Cache c;
  const std::vector<double> seq = {0.5, 0.2, -0.3, 0.9, 0.1, 0.1};
  lstm.forward(seq, 3, c);
  for (double v : c.final()) EXPECT_EQ(v, 0.0);
  for (double v : c.layers[0].out) EXPECT_EQ(v, 0.0);
}

TEST(BiLstmTest, AppendingMaskedStepsKeepsFinalStateBitIdentical) {
  Rng rng(11);
  ParamStore s;
  BiLstmStack lstm(s, "l", 3, 2, 4);
  s.initialize(2);
  auto seq = random_vector(4 * 3, rng, 0.0, 1.0);
  BiLstmStack::Cache a, b;
  lstm.forward(seq, 4, a);
  for (int pad = 1; pad <= 5; ++pad) {
    auto padded = seq;
    padded.insert(padded.end(), static_cast<size_t>(pad) * 3, kMaskValue);
    lstm.forward(padded, 4 + pad, b);
    EXPECT_EQ(a.final(), b.final());
  }
}

TEST(BiLstmTest, AllMaskedIsAnEmptySequence) {
  ParamStore s;
  BiLstmStack lstm(s, "l", 2, 1, 2);
  BiLstmStack::Cache c;
  try {
    lstm.forward(std::vector<double>(6, kMaskValue), 3, c);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_STREQ(e.what(), "empty sequence");
  }
}

TEST(BiLstmTest, PartiallyMaskedStepsAreSkipped) {
  const std::vector<double> seq = {0.1, -1.0, -1.0, -1.0, -1.0, 0.5};
  EXPECT_EQ(unmasked_steps(seq, 3, 2), (std::vector<int>{0, 2}));
}

class BiLstmGradTest : public ::testing::TestWithParam<int> {};

TEST_P(BiLstmGradTest, MatchesFiniteDifferences) {
  const int layers = GetParam();
  Rng rng(13);
  ParamStore s;
  BiLstmStack lstm(s, "l", 2, layers, 2);
  s.initialize(4);
  randomize(s, rng, 0.8);
  const auto seq = random_vector(3 * 2, rng);
  const auto r = random_vector(4, rng);
  auto loss = [&]() {
    BiLstmStack::Cache c;
    lstm.forward(seq, 3, c);
    return dot(c.final(), r);
  };
  auto grad = [&]() {
    BiLstmStack::Cache c;
    lstm.forward(seq, 3, c);
    lstm.backward(c, r);
  };
  const auto rep = grad_check(s, loss, grad);
  EXPECT_LT(rep.max_rel_error, 1e-4) << rep.worst_param << "[" << rep.worst_index << "]";
}

INSTANTIATE_TEST_SUITE_P(Depth, BiLstmGradTest, ::testing::Values(1, 2));

TEST(BiLstmTest, WindowLongerThanSequenceEqualsFullBackprop) {
  Rng rng(17);
  ParamStore a, b;
  BiLstmStack la(a, "l", 2, 1, 3, 0);
  BiLstmStack lb(b, "l", 2, 1, 3, 10);
  a.initialize(1);
  b.initialize(1);
  const auto seq = random_vector(4 * 2, rng);
  const auto r = random_vector(6, rng);
  BiLstmStack::Cache ca, cb;
  la.forward(seq, 4, ca);
  la.backward(ca, r);
  lb.forward(seq, 4, cb);
  lb.backward(cb, r);
  for (const auto& [name, p] : a.params()) EXPECT_EQ(p.grad, b.get(name).grad) << name;
}

TEST(BiLstmTest, TruncationWindowCutsRecurrentGradient) {
  Rng rng(19);
  ParamStore a, b;
  BiLstmStack la(a, "l", 2, 1, 3, 0);
  BiLstmStack lb(b, "l", 2, 1, 3, 1);
  a.initialize(1);
  b.initialize(1);
  const auto seq = random_vector(4 * 2, rng);
  const auto r = random_vector(6, rng);
  BiLstmStack::Cache ca, cb;
  la.forward(seq, 4, ca);
  la.backward(ca, r);
  lb.forward(seq, 4, cb);
  lb.backward(cb, r);
  EXPECT_NE(a.get("l/layer0/fwd/wh").grad, b.get("l/layer0/fwd/wh").grad);
}

TEST(AttentionTest, IdenticalItemsShareWeightEvenly) {
  ParamStore s;
  Attention att(s, "a", 1, 8);
  s.initialize(3);
  Attention::Cache c;
  att.forward(std::vector<double>{0.4, 0.4}, 2, c);
  EXPECT_DOUBLE_EQ(c.y[0], 0.5);
  EXPECT_DOUBLE_EQ(c.y[1], 0.5);
  att.forward(std::vector<double>{0.9}, 1, c);
  EXPECT_EQ(c.y[0], 1.0);
}

TEST(AttentionTest, WeightsAreADistribution) {
  Rng rng(23);
  ParamStore s;
  Attention att(s, "a", 1, 16);
  s.initialize(3);
  randomize(s, rng, 2.0);
  Attention::Cache c;
  for (int trial = 0; trial < 50; ++trial) {
    att.forward(random_vector(37, rng, -3.0, 3.0), 37, c);
    double sum = 0.0;
    for (double w : c.y) {
      EXPECT_GE(w, 0.0);
      sum += w;
    }
    EXPECT_NEAR(sum, 1.0, 1e-9);
  }
}

class AttentionGradTest : public ::testing::TestWithParam<int> {};

TEST_P(AttentionGradTest, MatchesFiniteDifferences) {
  const int k = GetParam();
  Rng rng(29);
  ParamStore s;
  Attention att(s, "a", k, 4);
  s.initialize(5);
  randomize(s, rng, 1.0);
  const auto items = random_vector(5 * static_cast<size_t>(k), rng);
  const auto r = random_vector(5, rng);
  auto loss = [&]() {
    Attention::Cache c;
    att.forward(items, 5, c);
    return dot(c.y, r);
  };
  auto grad = [&]() {
    Attention::Cache c;
    att.forward(items, 5, c);
    std::vector<double> di(items.size());
    att.backward(c, r, di);
  };
  const auto rep = grad_check(s, loss, grad);
  EXPECT_LT(rep.max_rel_error, 1e-5) << rep.worst_param;
}

INSTANTIATE_TEST_SUITE_P(ItemDims, AttentionGradTest, ::testing::Values(1, 3));

TEST(ProjectionTest, InferenceIsDeterministicAndNormalised) {
  Rng rng(31);
  ParamStore s;
  ProjectionBlock proj(s, "p", 6, 16, 0.1);
  s.initialize(7);
  const auto x = random_vector(6, rng);
  ProjectionBlock::Cache a, b;
  proj.forward(x, false, nullptr, a);
  proj.forward(x, false, nullptr, b);
  EXPECT_EQ(a.y(), b.y());
}

TEST(LayerNormTest, NormalisedVectorHasZeroMeanUnitVariance) {
  Rng rng(33);
  ParamStore s;
  LayerNorm norm(s, "n", 16, 0.0);
  s.initialize(1);
  LayerNorm::Cache c;
  norm.forward(random_vector(16, rng, -5.0, 5.0), c);
  double mu = 0.0, var = 0.0;
  for (double v : c.xhat) mu += v / 16.0;
  for (double v : c.xhat) var += (v - mu) * (v - mu) / 16.0;
  EXPECT_NEAR(mu, 0.0, 1e-10);
  EXPECT_NEAR(var, 1.0, 1e-10);
}

TEST(ProjectionTest, DropoutOnlyWhenTraining) {
  Rng rng(37);
  ParamStore s;
  ProjectionBlock proj(s, "p", 4, 32, 0.5);
  s.initialize(7);
  const auto x = random_vector(4, rng);
  ProjectionBlock::Cache train, eval;
  Rng drop(1);
  proj.forward(x, true, &drop, train);
  proj.forward(x, false, nullptr, eval);
  EXPECT_NE(train.y(), eval.y());
  int zeros = 0;
  for (double v : train.drop.scale) zeros += v == 0.0;
  EXPECT_GT(zeros, 0);
}

TEST(ProjectionTest, GradientMatchesFiniteDifferences) {
  Rng rng(41);
  ParamStore s;
  ProjectionBlock proj(s, "p", 5, 6, 0.1);
  s.initialize(9);
  randomize(s, rng, 0.7);
  const auto x = random_vector(5, rng);
  const auto r = random_vector(6, rng);
  auto loss = [&]() {
    ProjectionBlock::Cache c;
    proj.forward(x, false, nullptr, c);
    return dot(c.y(), r);
  };
  auto grad = [&]() {
    ProjectionBlock::Cache c;
    proj.forward(x, false, nullptr, c);
    std::vector<double> dx(5);
    proj.backward(c, r, dx);
  };
  const auto rep = grad_check(s, loss, grad);
  EXPECT_LT(rep.max_rel_error, 1e-4) << rep.worst_param;
}

TEST(BceTest, KnownValues) {
  const std::vector<double> y = {1.0, 0.0, 1.0};
  EXPECT_NEAR(bce_loss(y, y), 0.0, 1e-11);
  const std::vector<double> half = {0.5, 0.5, 0.5};
  EXPECT_NEAR(bce_loss(half, y), std::log(2.0), 1e-15);
}

TEST(BceTest, GradientMatchesFiniteDifferences) {
  Rng rng(43);
  auto p = random_vector(6, rng, 0.05, 0.95);
  const std::vector<double> y = {1, 0, 0, 1, 1, 0};
  const auto g = bce_grad(p, y);
  for (size_t i = 0; i < p.size(); ++i) {
    const double saved = p[i];
    p[i] = saved + 1e-6;
    const double up = bce_loss(p, y);
    p[i] = saved - 1e-6;
    const double down = bce_loss(p, y);
    p[i] = saved;
    EXPECT_NEAR(g[i], (up - down) / 2e-6, 1e-8);
  }
}

TEST(BceTest, LogitFormMatchesProbabilityForm) {
  for (double z : {-4.0, -0.5, 0.0, 1.3, 6.0}) {
    for (double y : {0.0, 1.0}) {
      const double p = sigmoid(z);
      EXPECT_NEAR(bce_with_logit(z, y), bce_loss(std::vector<double>{p}, std::vector<double>{y}),
                  1e-12);
    }
  }
}

TEST(AdamTest, FirstStepMatchesHandComputation) {
  ParamStore s;
  s.add("w", {3}, Init::zeros());
  s.initialize(1);
  auto& p = s.get("w");
  p.value.values() = {1.0, -2.0, 0.5};
  p.grad.values() = {0.2, -3.0, 0.0};
  adam_step(s, {});
  // m = 0.1 g, v = 0.001 g^2, mhat = g, vhat = g^2: step = lr * g / (|g| + eps)
  const double lr = 1e-3, eps = 1e-8;
  EXPECT_DOUBLE_EQ(p.value[0], 1.0 - lr * 0.2 / (0.2 + eps));
  EXPECT_DOUBLE_EQ(p.value[1], -2.0 - lr * -3.0 / (3.0 + eps));
  EXPECT_EQ(p.value[2], 0.5);
  EXPECT_EQ(s.step, 1);
}

TEST(AdamTest, ZeroGradientLeavesParametersUnchanged) {
  ParamStore s;
  s.add("w", {4}, Init::uniform(1.0));
  s.initialize(3);
  const auto before = s.snapshot();
  for (int i = 0; i < 5; ++i) adam_step(s, {});
  EXPECT_EQ(s.snapshot(), before);
}

TEST(AdamTest, ConvergesOnQuadraticBowl) {
  ParamStore s;
  s.add("x", {1}, Init::ones());
  s.initialize(1);
  auto& x = s.get("x");
  AdamOptions o;
  o.lr = 0.01;
  int steps = 0;
  while (std::abs(x.value[0]) >= 0.01 && steps < 2000) {
    x.grad[0] = 2.0 * x.value[0];
    adam_step(s, o);
    ++steps;
  }
  EXPECT_LT(std::abs(x.value[0]), 0.01);
  EXPECT_LE(steps, 2000);
}

TEST(AdamTest, NonFiniteGradientNamesParameter) {
  ParamStore s;
  s.add("layer/w", {2}, Init::zeros());
  s.get("layer/w").grad[1] = std::nan("");
  try {
    adam_step(s, {});
    FAIL();
  } catch (const TrainingError& e) {
    EXPECT_NE(std::string(e.what()).find("layer/w"), std::string::npos);
  }
}

TEST(GradCheckTest, LinearModelIsExact) {
  Rng rng(47);
  ParamStore s;
  s.add("w", {5}, Init::uniform(1.0));
  s.initialize(2);
  const auto x = random_vector(5, rng);
  auto loss = [&]() { return dot(s.get("w").value.values(), x); };
  auto grad = [&]() {
    for (size_t i = 0; i < 5; ++i) s.get("w").grad[i] = x[i];
  };
  EXPECT_LT(grad_check(s, loss, grad).max_rel_error, 1e-9);
}

TEST(GradCheckTest, SubsamplesLargeStores) {
  ParamStore s;
  s.add("w", {30, 20}, Init::uniform(1.0));
  s.initialize(2);
  GradCheckOptions o;
  o.max_coords = 200;
  const auto rep = grad_check(
      s, [&]() { return 0.0; }, [] {}, o);
  EXPECT_EQ(rep.coords_checked, 200u);
}

}  // namespace
}  // namespace moocxfer::nn
