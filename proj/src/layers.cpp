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

#include "moocxfer/layers.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace moocxfer::nn {
namespace {

void check_len(size_t got, size_t want, const char* what) {
  if (got != want) {
    throw ArgumentError(std::string(what) + ": shape mismatch [" + std::to_string(got) +
                        "] vs [" + std::to_string(want) + "]");
  }
}

}  // namespace

std::string_view activation_name(Activation a) {
  switch (a) {
    case Activation::kLinear: return "linear";
    case Activation::kSigmoid: return "sigmoid";
    case Activation::kTanh: return "tanh";
    case Activation::kGelu: return "gelu";
  }
  return "linear";
}

Activation parse_activation(std::string_view s) {
  if (s == "linear") return Activation::kLinear;
  if (s == "sigmoid") return Activation::kSigmoid;
  if (s == "tanh") return Activation::kTanh;
  if (s == "gelu") return Activation::kGelu;
  throw ArgumentError("unknown activation '" + std::string(s) + "'");
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::numbers::sqrt2)); }

double gelu_grad(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x / std::numbers::sqrt2));
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  return cdf + x * pdf;
}

double activate(Activation a, double z) {
  switch (a) {
    case Activation::kLinear: return z;
    case Activation::kSigmoid: return sigmoid(z);
    case Activation::kTanh: return std::tanh(z);
    case Activation::kGelu: return gelu(z);
  }
  return z;
}

double activate_grad(Activation a, double z, double y) {
  switch (a) {
    case Activation::kLinear: return 1.0;
    case Activation::kSigmoid: return y * (1.0 - y);
    case Activation::kTanh: return 1.0 - y * y;
    case Activation::kGelu: return gelu_grad(z);
  }
  return 1.0;
}

// Dense

Dense::Dense(ParamStore& store, const std::string& name, int in, int out, Activation act)
    : in_(in), out_(out), act_(act) {
  if (in < 1 || out < 1) throw ArgumentError("dense " + name + ": sizes must be positive");
  w_ = &store.add(name + "/w", {in, out}, Init::glorot(in, out));
  b_ = &store.add(name + "/b", {out}, Init::zeros());
}

void Dense::forward(std::span<const double> x, Cache& c) const {
  check_len(x.size(), static_cast<size_t>(in_), "dense input");
  c.x.assign(x.begin(), x.end());
  c.z.assign(b_->value.values().begin(), b_->value.values().end());
  const double* w = w_->value.data();
  for (int i = 0; i < in_; ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    const double* row = w + static_cast<size_t>(i) * out_;
    for (int j = 0; j < out_; ++j) c.z[j] += xi * row[j];
  }
  c.y.resize(c.z.size());
  for (int j = 0; j < out_; ++j) c.y[j] = activate(act_, c.z[j]);
}

void Dense::backward(const Cache& c, std::span<const double> dy, std::span<double> dx) const {
  check_len(dy.size(), static_cast<size_t>(out_), "dense output gradient");
  Vec dz(static_cast<size_t>(out_));
  for (int j = 0; j < out_; ++j) dz[j] = dy[j] * activate_grad(act_, c.z[j], c.y[j]);
  double* gb = b_->grad.data();
  for (int j = 0; j < out_; ++j) gb[j] += dz[j];
  double* gw = w_->grad.data();
  const double* w = w_->value.data();
  const bool want_dx = !dx.empty();
  for (int i = 0; i < in_; ++i) {
    const double xi = c.x[i];
    double* grow = gw + static_cast<size_t>(i) * out_;
    const double* row = w + static_cast<size_t>(i) * out_;
    double acc = 0.0;
    for (int j = 0; j < out_; ++j) {
      grow[j] += xi * dz[j];
      acc += row[j] * dz[j];
    }
    if (want_dx) dx[i] = acc;
  }
}

// LayerNorm

LayerNorm::LayerNorm(ParamStore& store, const std::string& name, int dim, double eps)
    : dim_(dim), eps_(eps) {
  gamma_ = &store.add(name + "/gamma", {dim}, Init::ones());
  beta_ = &store.add(name + "/beta", {dim}, Init::zeros());
}

void LayerNorm::forward(std::span<const double> x, Cache& c) const {
  check_len(x.size(), static_cast<size_t>(dim_), "layer norm input");
  double mu = 0.0;
  for (double v : x) mu += v;
  mu /= dim_;
  double var = 0.0;
  for (double v : x) var += (v - mu) * (v - mu);
  var /= dim_;
  c.inv_std = 1.0 / std::sqrt(var + eps_);
  c.xhat.resize(x.size());
  c.y.resize(x.size());
  const double* g = gamma_->value.data();
  const double* b = beta_->value.data();
  for (int i = 0; i < dim_; ++i) {
    c.xhat[i] = (x[i] - mu) * c.inv_std;
    c.y[i] = g[i] * c.xhat[i] + b[i];
  }
}

void LayerNorm::backward(const Cache& c, std::span<const double> dy, std::span<double> dx) const {
  const double* g = gamma_->value.data();
  double* gg = gamma_->grad.data();
  double* gb = beta_->grad.data();
  Vec dxhat(static_cast<size_t>(dim_));
  double sum_d = 0.0, sum_dx = 0.0;
  for (int i = 0; i < dim_; ++i) {
    gg[i] += dy[i] * c.xhat[i];
    gb[i] += dy[i];
    dxhat[i] = dy[i] * g[i];
    sum_d += dxhat[i];
    sum_dx += dxhat[i] * c.xhat[i];
  }
  if (dx.empty()) return;
  for (int i = 0; i < dim_; ++i) {
    dx[i] = c.inv_std * (dxhat[i] - sum_d / dim_ - c.xhat[i] * sum_dx / dim_);
  }
}

// Dropout

Dropout::Dropout(double rate) : rate_(rate) {
  if (rate < 0.0 || rate >= 1.0) throw ArgumentError("dropout rate must be in [0, 1)");
}

void Dropout::forward(std::span<const double> x, bool training, Rng* rng, Cache& c) const {
  c.y.assign(x.begin(), x.end());
  c.scale.clear();
  if (!training || rate_ == 0.0) return;
  if (rng == nullptr) throw ArgumentError("dropout in training mode needs a generator");
  std::bernoulli_distribution keep(1.0 - rate_);
  const double s = 1.0 / (1.0 - rate_);
  c.scale.resize(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    c.scale[i] = keep(*rng) ? s : 0.0;
    c.y[i] *= c.scale[i];
  }
}

void Dropout::backward(const Cache& c, std::span<const double> dy, std::span<double> dx) const {
  for (size_t i = 0; i < dy.size(); ++i) dx[i] = c.scale.empty() ? dy[i] : dy[i] * c.scale[i];
}

// Attention

Attention::Attention(ParamStore& store, const std::string& name, int item_dim, int hidden)
    : k_(item_dim), a_(hidden) {
  if (item_dim < 1 || hidden < 1) throw ArgumentError("attention " + name + ": sizes must be positive");
  w_ = &store.add(name + "/w", {item_dim, hidden}, Init::glorot(item_dim, hidden));
  b_ = &store.add(name + "/b", {hidden}, Init::zeros());
  v_ = &store.add(name + "/v", {hidden}, Init::glorot(hidden, 1));
}

void Attention::forward(std::span<const double> items, int n, Cache& c) const {
  if (n < 1) throw ArgumentError("attention over zero items");
  check_len(items.size(), static_cast<size_t>(n) * k_, "attention input");
  c.n = n;
  c.f.assign(items.begin(), items.end());
  c.t.assign(static_cast<size_t>(n) * a_, 0.0);
  c.score.assign(static_cast<size_t>(n), 0.0);
  const double* w = w_->value.data();
  const double* b = b_->value.data();
  const double* v = v_->value.data();
  for (int i = 0; i < n; ++i) {
    double* t = c.t.data() + static_cast<size_t>(i) * a_;
    for (int h = 0; h < a_; ++h) t[h] = b[h];
    for (int q = 0; q < k_; ++q) {
      const double fq = items[static_cast<size_t>(i) * k_ + q];
      const double* row = w + static_cast<size_t>(q) * a_;
      for (int h = 0; h < a_; ++h) t[h] += fq * row[h];
    }
    double s = 0.0;
    for (int h = 0; h < a_; ++h) {
      t[h] = std::tanh(t[h]);
      s += v[h] * t[h];
    }
    c.score[i] = s;
  }
  const double mx = *std::max_element(c.score.begin(), c.score.end());
  c.y.resize(static_cast<size_t>(n));
  double z = 0.0;
  for (int i = 0; i < n; ++i) z += (c.y[i] = std::exp(c.score[i] - mx));
  for (double& y : c.y) y /= z;
}

void Attention::backward(const Cache& c, std::span<const double> dy, std::span<double> ditems) const {
  const int n = c.n;
  double dot = 0.0;
  for (int i = 0; i < n; ++i) dot += c.y[i] * dy[i];
  const double* w = w_->value.data();
  const double* v = v_->value.data();
  double* gw = w_->grad.data();
  double* gb = b_->grad.data();
  double* gv = v_->grad.data();
  Vec dpre(static_cast<size_t>(a_));
  for (int i = 0; i < n; ++i) {
    const double ds = c.y[i] * (dy[i] - dot);
    const double* t = c.t.data() + static_cast<size_t>(i) * a_;
    for (int h = 0; h < a_; ++h) {
      gv[h] += ds * t[h];
      dpre[h] = ds * v[h] * (1.0 - t[h] * t[h]);
      gb[h] += dpre[h];
    }
    for (int q = 0; q < k_; ++q) {
      const double fq = c.f[static_cast<size_t>(i) * k_ + q];
      double* grow = gw + static_cast<size_t>(q) * a_;
      const double* row = w + static_cast<size_t>(q) * a_;
      double acc = 0.0;
      for (int h = 0; h < a_; ++h) {
        grow[h] += fq * dpre[h];
        acc += row[h] * dpre[h];
      }
      if (!ditems.empty()) ditems[static_cast<size_t>(i) * k_ + q] = acc;
    }
  }
}

// ProjectionBlock

ProjectionBlock::ProjectionBlock(ParamStore& store, const std::string& name, int in, int dim,
                                 double dropout)
    : d1_(store, name + "/dense1", in, dim, Activation::kGelu),
      d2_(store, name + "/dense2", dim, dim, Activation::kLinear),
      drop_(dropout),
      norm_(store, name + "/norm", dim),
      dim_(dim) {}

void ProjectionBlock::forward(std::span<const double> x, bool training, Rng* rng,
                              Cache& c) const {
  d1_.forward(x, c.d1);
  d2_.forward(c.d1.y, c.d2);
  drop_.forward(c.d2.y, training, rng, c.drop);
  norm_.forward(c.drop.y, c.norm);
}

void ProjectionBlock::backward(const Cache& c, std::span<const double> dy,
                               std::span<double> dx) const {
  Vec a(static_cast<size_t>(dim_)), b(static_cast<size_t>(dim_));
  norm_.backward(c.norm, dy, a);
  drop_.backward(c.drop, a, b);
  d2_.backward(c.d2, b, a);
  d1_.backward(c.d1, a, dx);
}

// Loss

double bce_loss(std::span<const double> p, std::span<const double> y) {
  check_len(p.size(), y.size(), "bce");
  if (p.empty()) return 0.0;
  double s = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    const double q = std::clamp(p[i], kProbEps, 1.0 - kProbEps);
    s -= y[i] * std::log(q) + (1.0 - y[i]) * std::log(1.0 - q);
  }
  return s / static_cast<double>(p.size());
}

Vec bce_grad(std::span<const double> p, std::span<const double> y) {
  check_len(p.size(), y.size(), "bce");
  Vec g(p.size(), 0.0);
  const double n = static_cast<double>(p.size());
  for (size_t i = 0; i < p.size(); ++i) {
    if (p[i] < kProbEps || p[i] > 1.0 - kProbEps) continue;
    g[i] = (-(y[i] / p[i]) + (1.0 - y[i]) / (1.0 - p[i])) / n;
  }
  return g;
}

double bce_with_logit(double z, double y) {
  const double sp = z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
  return sp - y * z;
}

}  // namespace moocxfer::nn
