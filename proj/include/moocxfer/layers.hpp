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

#ifndef MOOCXFER_LAYERS_HPP_
#define MOOCXFER_LAYERS_HPP_

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "moocxfer/common.hpp"
#include "moocxfer/tensor.hpp"

// Single-sample layers with explicit caches. forward() is const and records
// what backward() needs; backward() accumulates parameter gradients and
// writes the input gradient.
namespace moocxfer::nn {

using Vec = std::vector<double>;

enum class Activation { kLinear, kSigmoid, kTanh, kGelu };

std::string_view activation_name(Activation a);
Activation parse_activation(std::string_view s);

double sigmoid(double z);
double gelu(double x);       // exact: x * Phi(x)
double gelu_grad(double x);  // Phi(x) + x * phi(x)

double activate(Activation a, double z);
// d act / dz given pre-activation z and output y.
double activate_grad(Activation a, double z, double y);

class Dense {
 public:
  struct Cache {
    Vec x;
    Vec z;
    Vec y;
  };

  Dense() = default;
  Dense(ParamStore& store, const std::string& name, int in, int out, Activation act);

  int in() const { return in_; }
  int out() const { return out_; }

  void forward(std::span<const double> x, Cache& cache) const;
  // dx may be empty when the input gradient is not needed.
  void backward(const Cache& cache, std::span<const double> dy, std::span<double> dx) const;

 private:
  Param* w_ = nullptr;  // in x out
  Param* b_ = nullptr;
  int in_ = 0;
  int out_ = 0;
  Activation act_ = Activation::kLinear;
};

class LayerNorm {
 public:
  struct Cache {
    Vec xhat;
    double inv_std = 0.0;
    Vec y;
  };

  static constexpr double kDefaultEps = 1e-5;

  LayerNorm() = default;
  LayerNorm(ParamStore& store, const std::string& name, int dim, double eps = kDefaultEps);

  void forward(std::span<const double> x, Cache& cache) const;
  void backward(const Cache& cache, std::span<const double> dy, std::span<double> dx) const;

 private:
  Param* gamma_ = nullptr;
  Param* beta_ = nullptr;
  int dim_ = 0;
  double eps_ = kDefaultEps;
};

// Inverted dropout; identity unless training.
class Dropout {
 public:
  struct Cache {
    Vec scale;  // 0 or 1/(1-p) per unit; empty when inactive
    Vec y;
  };

  explicit Dropout(double rate = 0.1);

  void forward(std::span<const double> x, bool training, Rng* rng, Cache& cache) const;
  void backward(const Cache& cache, std::span<const double> dy, std::span<double> dx) const;
  double rate() const { return rate_; }

 private:
  double rate_;
};

// Bahdanau scoring over n items of k dims each:
// score_i = v . tanh(W^T f_i + b), weights = softmax(score).
class Attention {
 public:
  struct Cache {
    Vec f;      // n x k
    Vec t;      // n x a, tanh outputs
    Vec score;  // n
    Vec y;      // n weights
    int n = 0;
  };

  static constexpr int kDefaultHidden = 64;

  Attention() = default;
  Attention(ParamStore& store, const std::string& name, int item_dim, int hidden);

  void forward(std::span<const double> items, int n, Cache& cache) const;
  void backward(const Cache& cache, std::span<const double> dy, std::span<double> ditems) const;

 private:
  Param* w_ = nullptr;  // k x a
  Param* b_ = nullptr;  // a
  Param* v_ = nullptr;  // a
  int k_ = 0;
  int a_ = 0;
};

// Dense(in -> d, GELU) -> Dense(d -> d) -> Dropout -> LayerNorm.
class ProjectionBlock {
 public:
  struct Cache {
    Dense::Cache d1;
    Dense::Cache d2;
    Dropout::Cache drop;
    LayerNorm::Cache norm;
    const Vec& y() const { return norm.y; }
  };

  static constexpr int kDefaultDim = 256;

  ProjectionBlock() = default;
  ProjectionBlock(ParamStore& store, const std::string& name, int in, int dim,
                  double dropout = 0.1);

  int dim() const { return dim_; }
  void forward(std::span<const double> x, bool training, Rng* rng, Cache& cache) const;
  void backward(const Cache& cache, std::span<const double> dy, std::span<double> dx) const;

 private:
  Dense d1_;
  Dense d2_;
  Dropout drop_{0.1};
  LayerNorm norm_;
  int dim_ = 0;
};

inline constexpr double kProbEps = 1e-12;

// Mean binary cross-entropy with p clamped to [eps, 1 - eps].
double bce_loss(std::span<const double> p, std::span<const double> y);
// dL/dp_i of bce_loss (zero where the clamp is active).
Vec bce_grad(std::span<const double> p, std::span<const double> y);
// -[y log s(z) + (1-y) log(1 - s(z))] computed from the logit.
double bce_with_logit(double z, double y);

}  // namespace moocxfer::nn

#endif  // MOOCXFER_LAYERS_HPP_
