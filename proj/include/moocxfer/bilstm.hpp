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

#ifndef MOOCXFER_BILSTM_HPP_
#define MOOCXFER_BILSTM_HPP_

#include <span>
#include <string>
#include <vector>

#include "moocxfer/layers.hpp"
#include "moocxfer/tensor.hpp"

namespace moocxfer::nn {

inline constexpr double kMaskValue = -1.0;
inline constexpr double kLstmInitScale = 0.05;

// Steps whose every value equals kMaskValue are padding.
std::vector<int> unmasked_steps(std::span<const double> seq, int steps, int width);

// One LSTM direction. Gates are laid out [input, forget, candidate, output].
class LstmCell {
 public:
  struct Step {
    int t = 0;  // sequence position
    Vec x, h_prev, c_prev;
    Vec i, f, g, o, c, tc, h;
  };
  struct Cache {
    std::vector<Step> steps;  // in processing order
  };

  LstmCell() = default;
  LstmCell(ParamStore& store, const std::string& name, int in, int units);

  int units() const { return units_; }

  // Runs over `order` (sequence positions). seq is steps x in.
  void forward(std::span<const double> seq, const std::vector<int>& order, Cache& cache) const;
  // dh_out[k] is the gradient on the hidden output of processing step k;
  // dh_final is added to the last step. Writes dseq (steps x in,
  // accumulating). window > 0 cuts the recurrent gradient every `window`
  // steps counted back from the end.
  void backward(const Cache& cache, const std::vector<Vec>& dh_out, std::span<const double> dh_final,
                std::span<double> dseq, int window) const;

 private:
  Param* wx_ = nullptr;  // in x 4u
  Param* wh_ = nullptr;  // u x 4u
  Param* b_ = nullptr;   // 4u
  int in_ = 0;
  int units_ = 0;
};

// Bidirectional layer over the unmasked steps. Output per step is
// [h_fwd, h_bwd] (zeros on masked steps); the final state is the forward
// direction's last hidden state next to the backward direction's last.
class BiLstmLayer {
 public:
  struct Cache {
    LstmCell::Cache fwd, bwd;
    Vec out;    // steps x 2u
    Vec final;  // 2u
  };

  BiLstmLayer() = default;
  BiLstmLayer(ParamStore& store, const std::string& name, int in, int units);

  int in() const { return in_; }
  int units() const { return units_; }

  void forward(std::span<const double> seq, int steps, const std::vector<int>& active,
               Cache& cache) const;
  void backward(const Cache& cache, int steps, std::span<const double> dout,
                std::span<const double> dfinal, std::span<double> dseq, int window) const;

 private:
  LstmCell fwd_, bwd_;
  int in_ = 0;
  int units_ = 0;
};

class BiLstmStack {
 public:
  struct Cache {
    std::vector<int> active;
    int steps = 0;
    std::vector<BiLstmLayer::Cache> layers;
    const Vec& final() const { return layers.back().final; }
  };

  BiLstmStack() = default;
  BiLstmStack(ParamStore& store, const std::string& name, int in, int layers, int units,
              int window = 0);

  int output_dim() const { return 2 * units_; }
  int input_dim() const { return in_; }

  // seq is steps x in; masked steps are detected from the values. Throws
  // DataError("empty sequence") when every step is masked.
  void forward(std::span<const double> seq, int steps, Cache& cache) const;
  // Gradient w.r.t. the parameters only; the input needs none.
  void backward(const Cache& cache, std::span<const double> dfinal) const;

 private:
  std::vector<BiLstmLayer> layers_;
  int in_ = 0;
  int units_ = 0;
  int window_ = 0;
};

}  // namespace moocxfer::nn

#endif  // MOOCXFER_BILSTM_HPP_
