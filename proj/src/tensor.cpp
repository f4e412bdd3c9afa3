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

#include "moocxfer/tensor.hpp"

#include <cmath>
#include <random>

#include "moocxfer/common.hpp"

namespace moocxfer::nn {
namespace {

size_t product(const std::vector<int>& shape) {
  size_t n = 1;
  for (int d : shape) {
    if (d < 0) throw ArgumentError("negative tensor dimension");
    n *= static_cast<size_t>(d);
  }
  return n;
}

void check_rank(const std::vector<int>& shape) {
  if (shape.size() > 3) throw ArgumentError("tensors have at most 3 dimensions");
}

}  // namespace

Tensor::Tensor(std::vector<int> shape, double fill) : shape_(std::move(shape)) {
  check_rank(shape_);
  data_.assign(product(shape_), fill);
}

Tensor::Tensor(std::vector<int> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  check_rank(shape_);
  if (data_.size() != product(shape_)) {
    throw ArgumentError("tensor data length " + std::to_string(data_.size()) +
                        " does not match shape " + shape_string());
  }
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

std::string Tensor::shape_string() const {
  std::string s = "[";
  for (size_t i = 0; i < shape_.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape_[i]);
  }
  return s + "]";
}

void check_same_shape(const Tensor& a, const Tensor& b, std::string_view what) {
  if (a.shape() != b.shape()) {
    throw ArgumentError(std::string(what) + ": shape mismatch " + a.shape_string() + " vs " +
                        b.shape_string());
  }
}

Init Init::glorot(int fan_in, int fan_out) {
  return uniform(std::sqrt(6.0 / static_cast<double>(fan_in + fan_out)));
}

Param& ParamStore::add(const std::string& name, std::vector<int> shape, Init init) {
  if (params_.count(name)) throw ArgumentError("duplicate parameter " + name);
  Param p;
  p.name = name;
  p.value = Tensor(shape);
  p.grad = Tensor(shape);
  p.m = Tensor(shape);
  p.v = Tensor(shape);
  p.init = init;
  return params_.emplace(name, std::move(p)).first->second;
}

Param& ParamStore::get(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw ArgumentError("unknown parameter " + name);
  return it->second;
}

const Param& ParamStore::get(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw ArgumentError("unknown parameter " + name);
  return it->second;
}

void ParamStore::initialize(uint64_t seed) {
  for (auto& [name, p] : params_) {
    Rng rng(derive_seed(seed, name));
    std::uniform_real_distribution<double> u(-p.init.scale, p.init.scale);
    auto& v = p.value.values();
    switch (p.init.kind) {
      case Init::kZeros: p.value.fill(0.0); break;
      case Init::kOnes: p.value.fill(1.0); break;
      case Init::kUniform:
        for (double& x : v) x = u(rng);
        break;
      case Init::kLstmBias:
        for (size_t i = 0; i < v.size(); ++i) {
          const bool forget = static_cast<int>(i) / p.init.units == 1;
          v[i] = forget ? 1.0 : u(rng);
        }
        break;
    }
  }
  zero_grad();
  reset_optimizer();
}

void ParamStore::zero_grad() {
  for (auto& [_, p] : params_) p.grad.fill(0.0);
}

void ParamStore::reset_optimizer() {
  for (auto& [_, p] : params_) {
    p.m.fill(0.0);
    p.v.fill(0.0);
  }
  step = 0;
}

size_t ParamStore::num_values() const {
  size_t n = 0;
  for (const auto& [_, p] : params_) n += p.value.size();
  return n;
}

std::map<std::string, Tensor> ParamStore::snapshot() const {
  std::map<std::string, Tensor> out;
  for (const auto& [name, p] : params_) out.emplace(name, p.value);
  return out;
}

void ParamStore::restore(const std::map<std::string, Tensor>& values) {
  for (const auto& [name, t] : values) {
    Param& p = get(name);
    check_same_shape(p.value, t, "restore " + name);
    p.value = t;
  }
}

}  // namespace moocxfer::nn
