/* Copyright 2026 The dagplace Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <cmath>
#include <vector>

#include "dagplace/autograd.hpp"
#include "dagplace/rng.hpp"

namespace dagplace {

// Uniform fan-in initialisation scaled by `gain` (gain sqrt(2) gives He init).
inline Matrix init_uniform(int rows, int cols, double gain, Rng& rng) {
  const double bound = gain * std::sqrt(3.0 / std::max(rows, 1));
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-bound, bound);
  return m;
}

struct Linear {
  Tensor weight;  // in x out
  Tensor bias;    // 1 x out

  Linear() = default;
  Linear(int in, int out, Rng& rng, double gain = std::sqrt(2.0))
      : weight(init_uniform(in, out, gain, rng)), bias(Matrix::Zero(1, out)) {}

  int in_features() const { return static_cast<int>(weight.rows()); }
  int out_features() const { return static_cast<int>(weight.cols()); }

  Var forward(Tape& tape, Var x) { return tape.add_row(tape.matmul(x, tape.param(weight)), tape.param(bias)); }

  void collect(std::vector<Tensor*>& out) {
    out.push_back(&weight);
    out.push_back(&bias);
  }
};

// Stack of Linear layers with ReLU between them; the last layer is left linear
// unless `relu_last` is set.
struct Mlp {
  std::vector<Linear> layers;
  bool relu_last = false;

  Mlp() = default;
  // widths = {in, hidden..., out}
  Mlp(const std::vector<int>& widths, Rng& rng, bool relu_last_layer = false, double last_gain = std::sqrt(2.0))
      : relu_last(relu_last_layer) {
    for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
      const bool last = i + 2 == widths.size();
      layers.emplace_back(widths[i], widths[i + 1], rng, last ? last_gain : std::sqrt(2.0));
    }
  }

  int in_features() const { return layers.front().in_features(); }
  int out_features() const { return layers.back().out_features(); }

  Var forward(Tape& tape, Var x) {
    for (std::size_t i = 0; i < layers.size(); ++i) {
      x = layers[i].forward(tape, x);
      if (i + 1 < layers.size() || relu_last) x = tape.relu(x);
    }
    return x;
  }

  void collect(std::vector<Tensor*>& out) {
    for (Linear& l : layers) l.collect(out);
  }
};

// Inverted dropout: zeroes entries with probability `rate` and rescales the rest.
inline Var dropout(Tape& tape, Var x, double rate, Rng& rng) {
  if (rate <= 0.0) return x;
  const Matrix& v = tape.value(x);
  Matrix mask(v.rows(), v.cols());
  const double keep = 1.0 - rate;
  for (Eigen::Index i = 0; i < mask.size(); ++i) mask.data()[i] = rng.bernoulli(keep) ? 1.0 / keep : 0.0;
  return tape.mul(x, tape.constant(std::move(mask)));
}

}  // namespace dagplace
