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

#ifndef MOOCXFER_OPTIM_HPP_
#define MOOCXFER_OPTIM_HPP_

#include "moocxfer/tensor.hpp"

namespace moocxfer::nn {

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam on every parameter, then increments store.step.
// Throws TrainingError naming the parameter when a gradient is not finite.
void adam_step(ParamStore& store, const AdamOptions& options = {});

// Multiplies every gradient by `factor` (batch averaging).
void scale_gradients(ParamStore& store, double factor);

}  // namespace moocxfer::nn

#endif  // MOOCXFER_OPTIM_HPP_
