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

#include "moocxfer/bilstm.hpp"

#include <algorithm>
#include <cmath>

#include "moocxfer/common.hpp"

namespace moocxfer::nn {

std::vector<int> unmasked_steps(std::span<const double> seq, int steps, int width) {
  std::vector<int> out;
  for (int t = 0; t < steps; ++t) {
    const double* row = seq.data() + static_cast<size_t>(t) * width;
    bool masked = true;
    for (int k = 0; k < width && masked; ++k) masked = row[k] == kMaskValue;
    if (!masked) out.push_back(t);
  }
  return out;
}

// LstmCell

LstmCell::LstmCell(ParamStore& store, const std::string& name, int in, int units)
    : in_(in), units_(units) {
  if (in < 1 || units < 1) throw ArgumentError("lstm " + name + ": sizes must be positive");
  wx_ = &store.add(name + "/wx", {in, 4 * units}, Init::uniform(kLstmInitScale));
  wh_ = &store.add(name + "/wh", {units, 4 * units}, Init::uniform(kLstmInitScale));
  b_ = &store.add(name + "/b", {4 * units}, Init::lstm_bias(units, kLstmInitScale));
}

void LstmCell::forward(std::span<const double> seq, const std::vector<int>& order,
                       Cache& cache) const {
  const int u = units_;
  const int g4 = 4 * u;
  cache.steps.resize(order.size());
  Vec h(static_cast<size_t>(u), 0.0), c(static_cast<size_t>(u), 0.0), z(static_cast<size_t>(g4));
  const double* wx = wx_->value.data();
  const double* wh = wh_->value.data();
  const double* b = b_->value.data();
  for (size_t k = 0; k < order.size(); ++k) {
    Step& s = cache.steps[k];
    s.t = order[k];
    const double* x = seq.data() + static_cast<size_t>(s.t) * in_;
    s.x.assign(x, x + in_);
    s.h_prev = h;
    s.c_prev = c;
    std::copy(b, b + g4, z.begin());
    for (int q = 0; q < in_; ++q) {
      const double xq = x[q];
      if (xq == 0.0) continue;
      const double* row = wx + static_cast<size_t>(q) * g4;
      for (int j = 0; j < g4; ++j) z[j] += xq * row[j];
    }
    for (int q = 0; q < u; ++q) {
      const double hq = h[q];
      if (hq == 0.0) continue;
      const double* row = wh + static_cast<size_t>(q) * g4;
      for (int j = 0; j < g4; ++j) z[j] += hq * row[j];
    }
    s.i.resize(u); s.f.resize(u); s.g.resize(u); s.o.resize(u);
    s.c.resize(u); s.tc.resize(u); s.h.resize(u);
    for (int j = 0; j < u; ++j) {
      s.i[j] = sigmoid(z[j]);
      s.f[j] = sigmoid(z[u + j]);
      s.g[j] = std::tanh(z[2 * u + j]);
      s.o[j] = sigmoid(z[3 * u + j]);
      s.c[j] = s.f[j] * c[j] + s.i[j] * s.g[j];
      s.tc[j] = std::tanh(s.c[j]);
      s.h[j] = s.o[j] * s.tc[j];
    }
    h = s.h;
    c = s.c;
  }
}

void LstmCell::backward(const Cache& cache, const std::vector<Vec>& dh_out,
                        std::span<const double> dh_final, std::span<double> dseq,
                        int window) const {
  const int u = units_;
  const int g4 = 4 * u;
  const size_t n = cache.steps.size();
  if (n == 0) return;
  Vec dh_next(static_cast<size_t>(u), 0.0), dc_next(static_cast<size_t>(u), 0.0);
  Vec dh(static_cast<size_t>(u)), dz(static_cast<size_t>(g4));
  const double* wx = wx_->value.data();
  const double* wh = wh_->value.data();
  double* gwx = wx_->grad.data();
  double* gwh = wh_->grad.data();
  double* gb = b_->grad.data();
  for (size_t kk = n; kk-- > 0;) {
    const Step& s = cache.steps[kk];
    const size_t from_end = n - 1 - kk;
    if (window > 0 && from_end > 0 && from_end % static_cast<size_t>(window) == 0) {
      std::fill(dh_next.begin(), dh_next.end(), 0.0);
      std::fill(dc_next.begin(), dc_next.end(), 0.0);
    }
    for (int j = 0; j < u; ++j) {
      dh[j] = dh_next[j];
      if (!dh_out.empty()) dh[j] += dh_out[kk][j];
      if (kk == n - 1 && !dh_final.empty()) dh[j] += dh_final[j];
    }
    for (int j = 0; j < u; ++j) {
      const double d_o = dh[j] * s.tc[j];
      const double dc = dh[j] * s.o[j] * (1.0 - s.tc[j] * s.tc[j]) + dc_next[j];
      const double di = dc * s.g[j];
      const double dg = dc * s.i[j];
      const double df = dc * s.c_prev[j];
      dc_next[j] = dc * s.f[j];
      dz[j] = di * s.i[j] * (1.0 - s.i[j]);
      dz[u + j] = df * s.f[j] * (1.0 - s.f[j]);
      dz[2 * u + j] = dg * (1.0 - s.g[j] * s.g[j]);
      dz[3 * u + j] = d_o * s.o[j] * (1.0 - s.o[j]);
    }
    for (int j = 0; j < g4; ++j) gb[j] += dz[j];
    double* dx = dseq.empty() ? nullptr : dseq.data() + static_cast<size_t>(s.t) * in_;
    for (int q = 0; q < in_; ++q) {
      const double xq = s.x[q];
      double* grow = gwx + static_cast<size_t>(q) * g4;
      const double* row = wx + static_cast<size_t>(q) * g4;
      double acc = 0.0;
      for (int j = 0; j < g4; ++j) {
        grow[j] += xq * dz[j];
        acc += row[j] * dz[j];
      }
      if (dx) dx[q] += acc;
    }
    for (int q = 0; q < u; ++q) {
      const double hq = s.h_prev[q];
      double* grow = gwh + static_cast<size_t>(q) * g4;
      const double* row = wh + static_cast<size_t>(q) * g4;
      double acc = 0.0;
      for (int j = 0; j < g4; ++j) {
        grow[j] += hq * dz[j];
        acc += row[j] * dz[j];
      }
      dh_next[q] = acc;
    }
  }
}

// BiLstmLayer

BiLstmLayer::BiLstmLayer(ParamStore& store, const std::string& name, int in, int units)
    : fwd_(store, name + "/fwd", in, units),
      bwd_(store, name + "/bwd", in, units),
      in_(in),
      units_(units) {}

void BiLstmLayer::forward(std::span<const double> seq, int steps, const std::vector<int>& active,
                          Cache& cache) const {
  const int u = units_;
  fwd_.forward(seq, active, cache.fwd);
  std::vector<int> reversed(active.rbegin(), active.rend());
  bwd_.forward(seq, reversed, cache.bwd);
  cache.out.assign(static_cast<size_t>(steps) * 2 * u, 0.0);
  for (const auto& s : cache.fwd.steps) {
    std::copy(s.h.begin(), s.h.end(), cache.out.begin() + static_cast<size_t>(s.t) * 2 * u);
  }
  for (const auto& s : cache.bwd.steps) {
    std::copy(s.h.begin(), s.h.end(), cache.out.begin() + static_cast<size_t>(s.t) * 2 * u + u);
  }
  cache.final.assign(static_cast<size_t>(2 * u), 0.0);
  if (!active.empty()) {
    std::copy(cache.fwd.steps.back().h.begin(), cache.fwd.steps.back().h.end(), cache.final.begin());
    std::copy(cache.bwd.steps.back().h.begin(), cache.bwd.steps.back().h.end(),
              cache.final.begin() + u);
  }
}

void BiLstmLayer::backward(const Cache& cache, int steps, std::span<const double> dout,
                           std::span<const double> dfinal, std::span<double> dseq,
                           int window) const {
  (void)steps;
  const int u = units_;
  std::vector<Vec> dh_f, dh_b;
  if (!dout.empty()) {
    for (const auto& s : cache.fwd.steps) {
      const double* d = dout.data() + static_cast<size_t>(s.t) * 2 * u;
      dh_f.emplace_back(d, d + u);
    }
    for (const auto& s : cache.bwd.steps) {
      const double* d = dout.data() + static_cast<size_t>(s.t) * 2 * u + u;
      dh_b.emplace_back(d, d + u);
    }
  }
  std::span<const double> df, db;
  if (!dfinal.empty()) {
    df = dfinal.subspan(0, static_cast<size_t>(u));
    db = dfinal.subspan(static_cast<size_t>(u), static_cast<size_t>(u));
  }
  fwd_.backward(cache.fwd, dh_f, df, dseq, window);
  bwd_.backward(cache.bwd, dh_b, db, dseq, window);
}

// BiLstmStack

BiLstmStack::BiLstmStack(ParamStore& store, const std::string& name, int in, int layers,
                         int units, int window)
    : in_(in), units_(units), window_(window) {
  if (layers < 1) throw ArgumentError("bilstm stack needs at least one layer");
  for (int l = 0; l < layers; ++l) {
    layers_.emplace_back(store, name + "/layer" + std::to_string(l), l == 0 ? in : 2 * units,
                         units);
  }
}

void BiLstmStack::forward(std::span<const double> seq, int steps, Cache& cache) const {
  if (seq.size() != static_cast<size_t>(steps) * in_) {
    throw ArgumentError("bilstm input: shape mismatch [" + std::to_string(seq.size()) + "] vs [" +
                        std::to_string(steps) + "x" + std::to_string(in_) + "]");
  }
  cache.steps = steps;
  cache.active = unmasked_steps(seq, steps, in_);
  if (cache.active.empty()) throw DataError("empty sequence");
  cache.layers.resize(layers_.size());
  for (size_t l = 0; l < layers_.size(); ++l) {
    std::span<const double> input = l == 0 ? seq : std::span<const double>(cache.layers[l - 1].out);
    layers_[l].forward(input, steps, cache.active, cache.layers[l]);
  }
}

void BiLstmStack::backward(const Cache& cache, std::span<const double> dfinal) const {
  Vec dout;  // gradient on the current layer's per-step outputs
  for (size_t l = layers_.size(); l-- > 0;) {
    Vec dseq;
    if (l > 0) dseq.assign(static_cast<size_t>(cache.steps) * 2 * units_, 0.0);
    layers_[l].backward(cache.layers[l], cache.steps, dout,
                        l + 1 == layers_.size() ? dfinal : std::span<const double>(), dseq,
                        window_);
    dout = std::move(dseq);
  }
}

}  // namespace moocxfer::nn
