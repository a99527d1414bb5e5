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
#include <optional>
#include <vector>

#include "dagplace/autograd.hpp"
#include "dagplace/compgraph.hpp"
#include "dagplace/nn.hpp"
#include "dagplace/rng.hpp"

namespace dagplace {

struct EncoderConfig {
  int hidden_channel = 128;
  int layer_gnn = 2;
  int layer_trans = 2;
  double dropout_network = 0.2;
  bool activation_final = true;
};

// D^-1/2 (A + I) D^-1/2 with D the row sums of A + I, applied to the directed
// adjacency as is (no symmetrisation).
struct NormAdjacency {
  Matrix matrix;
};

inline NormAdjacency normalize_adjacency(int n, const std::vector<Edge>& edges) {
  Matrix a_hat = Matrix::Identity(n, n);
  for (const Edge& e : edges)
    if (e.src != e.dst) a_hat(e.src, e.dst) = 1.0;
  const Vector inv_sqrt_deg = a_hat.rowwise().sum().array().rsqrt().matrix();
  return {inv_sqrt_deg.asDiagonal() * a_hat * inv_sqrt_deg.asDiagonal()};
}

inline NormAdjacency normalize_adjacency(const CompGraph& g) { return normalize_adjacency(g.size(), g.edges); }

struct GcnParams {
  std::vector<Tensor> layers;  // each d_in x d_out, no bias
  int hidden = 0;

  GcnParams() = default;
  GcnParams(int in, int hidden_width, int depth, Rng& rng) : hidden(hidden_width) {
    for (int l = 0; l < depth; ++l) layers.emplace_back(init_uniform(l == 0 ? in : hidden_width, hidden_width, std::sqrt(2.0), rng));
  }

  void collect(std::vector<Tensor*>& out) {
    for (Tensor& w : layers) out.push_back(&w);
  }
};

// Stacked graph convolutions: H <- relu(norm * H * W_l). Dropout (training only)
// follows every layer. With activation_final false the last layer stays linear.
inline Var encode(Tape& tape, Var x, const NormAdjacency& norm, GcnParams& params, bool activation_final = true,
                  double dropout_rate = 0.0, Rng* rng = nullptr) {
  if (tape.value(x).rows() != norm.matrix.rows()) {
    throw Error(ErrorCode::kShapeMismatch, "feature rows do not match adjacency size");
  }
  Var a = tape.constant(norm.matrix);
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    x = tape.matmul(a, tape.matmul(x, tape.param(params.layers[l])));
    if (l + 1 < params.layers.size() || activation_final) x = tape.relu(x);
    if (rng != nullptr) x = dropout(tape, x, dropout_rate, *rng);
  }
  return x;
}

// Input projection (layer_trans linear layers, ReLU between) followed by the GCN stack.
struct Encoder {
  EncoderConfig cfg;
  Mlp projection;
  GcnParams gcn;

  Encoder() = default;
  Encoder(int feature_width, const EncoderConfig& config, Rng& rng) : cfg(config) {
    std::vector<int> widths{feature_width};
    for (int i = 0; i < std::max(cfg.layer_trans, 1); ++i) widths.push_back(cfg.hidden_channel);
    projection = Mlp(widths, rng);
    gcn = GcnParams(cfg.hidden_channel, cfg.hidden_channel, cfg.layer_gnn, rng);
  }

  // `carry` (optional, hidden-wide) is added to the projected features before
  // message passing. Pass an rng to enable training-time dropout.
  Var forward(Tape& tape, const Matrix& features, const NormAdjacency& norm, const Matrix* carry = nullptr,
              Rng* rng = nullptr) {
    Var h = projection.forward(tape, tape.constant(features));
    if (carry != nullptr) h = tape.add(h, tape.constant(*carry));
    return encode(tape, h, norm, gcn, cfg.activation_final, cfg.dropout_network, rng);
  }

  void collect(std::vector<Tensor*>& out) {
    projection.collect(out);
    gcn.collect(out);
  }
};

}  // namespace dagplace
