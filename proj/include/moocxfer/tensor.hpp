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

#ifndef MOOCXFER_TENSOR_HPP_
#define MOOCXFER_TENSOR_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace moocxfer::nn {

// Dense row-major array of doubles with at most three dimensions.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape, double fill = 0.0);
  Tensor(std::vector<int> shape, std::vector<double> data);

  const std::vector<int>& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int dim(int i) const { return shape_[static_cast<size_t>(i)]; }
  size_t size() const { return data_.size(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& values() { return data_; }
  const std::vector<double>& values() const { return data_; }

  double& operator[](size_t i) { return data_[i]; }
  double operator[](size_t i) const { return data_[i]; }
  double& at(int i, int j) { return data_[static_cast<size_t>(i) * shape_[1] + j]; }
  double at(int i, int j) const { return data_[static_cast<size_t>(i) * shape_[1] + j]; }

  void fill(double v);
  std::string shape_string() const;

  bool operator==(const Tensor&) const = default;

 private:
  std::vector<int> shape_;
  std::vector<double> data_;
};

// Throws ArgumentError("<what>: shape mismatch [a] vs [b]").
void check_same_shape(const Tensor& a, const Tensor& b, std::string_view what);

struct Init {
  enum Kind { kZeros, kOnes, kUniform, kLstmBias };
  Kind kind = kZeros;
  double scale = 0.0;  // half-width for kUniform / kLstmBias
  int units = 0;       // kLstmBias: gate width; the forget slice starts at 1.0

  static Init zeros() { return {kZeros, 0.0, 0}; }
  static Init ones() { return {kOnes, 0.0, 0}; }
  static Init uniform(double a) { return {kUniform, a, 0}; }
  static Init glorot(int fan_in, int fan_out);
  static Init lstm_bias(int units, double a) { return {kLstmBias, a, units}; }
};

struct Param {
  std::string name;
  Tensor value;
  Tensor grad;
  Tensor m;
  Tensor v;
  Init init;
};

// Named parameters with gradient and Adam moment buffers. Iteration order is
// by name; element addresses stay valid for the store's lifetime.
class ParamStore {
 public:
  ParamStore() = default;
  ParamStore(const ParamStore&) = delete;
  ParamStore& operator=(const ParamStore&) = delete;

  Param& add(const std::string& name, std::vector<int> shape, Init init);
  Param& get(const std::string& name);
  const Param& get(const std::string& name) const;
  bool contains(const std::string& name) const { return params_.count(name) > 0; }

  std::map<std::string, Param>& params() { return params_; }
  const std::map<std::string, Param>& params() const { return params_; }

  // Draws every parameter from its Init with a per-name seed stream.
  void initialize(uint64_t seed);
  void zero_grad();
  void reset_optimizer();
  size_t num_values() const;

  std::map<std::string, Tensor> snapshot() const;
  // Throws ArgumentError on unknown names or shape mismatch.
  void restore(const std::map<std::string, Tensor>& values);

  int64_t step = 0;

 private:
  std::map<std::string, Param> params_;
};

}  // namespace moocxfer::nn

#endif  // MOOCXFER_TENSOR_HPP_
