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

#ifndef MOOCXFER_GRAD_CHECK_HPP_
#define MOOCXFER_GRAD_CHECK_HPP_

#include <functional>
#include <string>

#include "moocxfer/tensor.hpp"

namespace moocxfer::nn {

struct GradCheckOptions {
  double h = 1e-5;
  // Coordinates checked; 0 or >= the parameter count checks all of them.
  size_t max_coords = 0;
  uint64_t seed = 1;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  size_t coords_checked = 0;
};

// |a - n| / max(|a|, |n|, 1e-6)
double relative_error(double analytic, double numeric);

// `loss` evaluates the scalar objective at the store's current values;
// `gradient` must leave dLoss/dparam in the store's grad buffers (it is
// called once, after zeroing). Values are restored afterwards.
GradCheckReport grad_check(ParamStore& store, const std::function<double()>& loss,
                           const std::function<void()>& gradient,
                           const GradCheckOptions& options = {});

}  // namespace moocxfer::nn

#endif  // MOOCXFER_GRAD_CHECK_HPP_
