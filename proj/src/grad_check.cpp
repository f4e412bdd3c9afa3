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

#include "moocxfer/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "moocxfer/common.hpp"

namespace moocxfer::nn {

double relative_error(double analytic, double numeric) {
  const double den = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
  return std::abs(analytic - numeric) / den;
}

GradCheckReport grad_check(ParamStore& store, const std::function<double()>& loss,
                           const std::function<void()>& gradient,
                           const GradCheckOptions& options) {
  store.zero_grad();
  gradient();

  struct Coord {
    Param* p;
    size_t i;
  };
  std::vector<Coord> coords;
  for (auto& [_, p] : store.params()) {
    for (size_t i = 0; i < p.value.size(); ++i) coords.push_back({&p, i});
  }
  if (options.max_coords > 0 && options.max_coords < coords.size()) {
    Rng rng(options.seed);
    std::shuffle(coords.begin(), coords.end(), rng);
    coords.resize(options.max_coords);
  }

  GradCheckReport r;
  for (const Coord& c : coords) {
    double& w = c.p->value[c.i];
    const double saved = w;
    w = saved + options.h;
    const double up = loss();
    w = saved - options.h;
    const double down = loss();
    w = saved;
    const double numeric = (up - down) / (2.0 * options.h);
    const double analytic = c.p->grad[c.i];
    const double err = relative_error(analytic, numeric);
    ++r.coords_checked;
    if (err > r.max_rel_error || r.worst_param.empty()) {
      r.max_rel_error = std::max(r.max_rel_error, err);
      if (err >= r.max_rel_error) {
        r.worst_param = c.p->name;
        r.worst_index = c.i;
        r.worst_analytic = analytic;
        r.worst_numeric = numeric;
      }
    }
  }
  return r;
}

}  // namespace moocxfer::nn
