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

#include "moocxfer/optim.hpp"

#include <cmath>

#include "moocxfer/common.hpp"

namespace moocxfer::nn {

void adam_step(ParamStore& store, const AdamOptions& o) {
  for (const auto& [name, p] : store.params()) {
    for (double g : p.grad.values()) {
      if (!std::isfinite(g)) throw TrainingError("non-finite gradient in parameter " + name);
    }
  }
  const int64_t t = store.step + 1;
  const double c1 = 1.0 - std::pow(o.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(o.beta2, static_cast<double>(t));
  for (auto& [_, p] : store.params()) {
    double* w = p.value.data();
    double* m = p.m.data();
    double* v = p.v.data();
    const double* g = p.grad.data();
    for (size_t i = 0; i < p.value.size(); ++i) {
      m[i] = o.beta1 * m[i] + (1.0 - o.beta1) * g[i];
      v[i] = o.beta2 * v[i] + (1.0 - o.beta2) * g[i] * g[i];
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      w[i] -= o.lr * mhat / (std::sqrt(vhat) + o.eps);
    }
  }
  store.step = t;
}

void scale_gradients(ParamStore& store, double factor) {
  for (auto& [_, p] : store.params()) {
    for (double& g : p.grad.values()) g *= factor;
  }
}

}  // namespace moocxfer::nn
