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

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <string>
#include <vector>

#include "dagplace/compgraph.hpp"
#include "dagplace/error.hpp"
#include "dagplace/matrix.hpp"

namespace dagplace {

struct FeatureConfig {
  int d_pos = 8;
  double pe_base = 10000.0;

  void check() const {
    if (d_pos < 2 || d_pos % 2 != 0) throw Error(ErrorCode::kInvalidConfig, "d_pos must be even and >= 2");
    if (!(pe_base > 0.0)) throw Error(ErrorCode::kInvalidConfig, "pe_base must be positive");
  }
};

// Column layout of the initial feature matrix, in concatenation order.
struct FeatureLayout {
  int type = 0;
  int shape = 0;
  int in_degree = 0;
  int out_degree = 0;
  int fractal = 1;
  int pos = 0;

  int width() const { return type + shape + in_degree + out_degree + fractal + pos; }
  int type_offset() const { return 0; }
  int shape_offset() const { return type; }
  int in_degree_offset() const { return type + shape; }
  int out_degree_offset() const { return type + shape + in_degree; }
  int fractal_offset() const { return type + shape + in_degree + out_degree; }
  int pos_offset() const { return type + shape + in_degree + out_degree + fractal; }
};

struct FeatureMatrix {
  Matrix values;
  FeatureLayout layout;
};

inline Matrix one_hot_types(const CompGraph& g) {
  Matrix m = Matrix::Zero(g.size(), g.num_op_types);
  for (const OpNode& node : g.nodes) {
    if (node.op_type < 0 || node.op_type >= g.num_op_types) {
      throw Error(ErrorCode::kTypeIndexOutOfRange,
                  "op_type " + std::to_string(node.op_type) + " with |T| = " + std::to_string(g.num_op_types));
    }
    m(node.id, node.op_type) = 1.0;
  }
  return m;
}

namespace detail {

// Columns follow the sorted distinct degree values present in the graph.
inline Matrix degree_one_hot(const std::vector<int>& degree) {
  std::map<int, int> column;
  for (int d : degree) column.emplace(d, 0);
  int next = 0;
  for (auto& [value, col] : column) col = next++;
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(degree.size()), next);
  for (std::size_t v = 0; v < degree.size(); ++v) m(static_cast<Eigen::Index>(v), column[degree[v]]) = 1.0;
  return m;
}

}  // namespace detail

struct DegreeOneHots {
  Matrix in;
  Matrix out;
};

inline DegreeOneHots degree_one_hots(const CompGraph& g) {
  std::vector<int> in(static_cast<std::size_t>(g.size()), 0), out(static_cast<std::size_t>(g.size()), 0);
  for (const Edge& e : g.edges) {
    ++out[e.src];
    ++in[e.dst];
  }
  return {detail::degree_one_hot(in), detail::degree_one_hot(out)};
}

// Hop distances over the undirected view of the graph; -1 marks unreachable nodes.
inline std::vector<int> undirected_distances(const Adjacency& undirected, NodeId source) {
  std::vector<int> dist(undirected.size(), -1);
  std::queue<NodeId> frontier;
  dist[source] = 0;
  frontier.push(source);
  while (!frontier.empty()) {
    NodeId v = frontier.front();
    frontier.pop();
    for (NodeId w : undirected[v]) {
      if (dist[w] < 0) {
        dist[w] = dist[v] + 1;
        frontier.push(w);
      }
    }
  }
  return dist;
}

// Mass-distribution fractal dimension of one node: least-squares slope of
// log N(v, r) against log r over the distinct distances r reached from v.
inline double fractal_dimension(const Adjacency& undirected, NodeId v) {
  const std::vector<int> dist = undirected_distances(undirected, v);
  int max_dist = 0;
  for (int d : dist) max_dist = std::max(max_dist, d);
  std::vector<int> at_distance(static_cast<std::size_t>(max_dist) + 1, 0);
  for (int d : dist)
    if (d >= 1) ++at_distance[d];

  std::vector<double> log_r, log_n;
  int cumulative = 0;
  for (int r = 1; r <= max_dist; ++r) {
    if (at_distance[r] == 0) continue;
    cumulative += at_distance[r];
    log_r.push_back(std::log(static_cast<double>(r)));
    log_n.push_back(std::log(static_cast<double>(cumulative)));
  }
  const std::size_t m = log_r.size();
  if (m < 2) return 0.0;
  double mean_r = 0.0, mean_n = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    mean_r += log_r[k];
    mean_n += log_n[k];
  }
  mean_r /= static_cast<double>(m);
  mean_n /= static_cast<double>(m);
  double cov = 0.0, var = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    cov += (log_r[k] - mean_r) * (log_n[k] - mean_n);
    var += (log_r[k] - mean_r) * (log_r[k] - mean_r);
  }
  return cov / var;
}

inline double fractal_dimension(const CompGraph& g, NodeId v) {
  return fractal_dimension(undirected_adjacency(g.size(), g.edges), v);
}

inline std::vector<double> fractal_dimensions(const CompGraph& g) {
  const Adjacency undirected = undirected_adjacency(g.size(), g.edges);
  std::vector<double> out(static_cast<std::size_t>(g.size()));
  for (NodeId v = 0; v < g.size(); ++v) out[v] = fractal_dimension(undirected, v);
  return out;
}

// Sinusoidal encoding of a topological position: even slots sine, odd slots cosine.
inline Vector positional_encoding(int pos, const FeatureConfig& cfg) {
  Vector pe(cfg.d_pos);
  for (int i = 0; i < cfg.d_pos / 2; ++i) {
    const double angle = pos / std::pow(cfg.pe_base, 2.0 * i / cfg.d_pos);
    pe(2 * i) = std::sin(angle);
    pe(2 * i + 1) = std::cos(angle);
  }
  return pe;
}

inline Matrix shape_features(const CompGraph& g) {
  std::size_t width = 0;
  for (const OpNode& node : g.nodes) width = std::max(width, node.output_shape.size());
  Matrix m = Matrix::Zero(g.size(), static_cast<Eigen::Index>(width));
  for (const OpNode& node : g.nodes)
    for (std::size_t k = 0; k < node.output_shape.size(); ++k)
      m(node.id, static_cast<Eigen::Index>(k)) = static_cast<double>(node.output_shape[k]);
  return m;
}

inline FeatureMatrix build_features(const CompGraph& g, const FeatureConfig& cfg) {
  cfg.check();
  const Matrix types = one_hot_types(g);
  const Matrix shapes = shape_features(g);
  const DegreeOneHots degrees = degree_one_hots(g);
  const std::vector<double> fractal = fractal_dimensions(g);
  const TopoOrder topo = topo_sort(g);

  FeatureMatrix fm;
  fm.layout.type = static_cast<int>(types.cols());
  fm.layout.shape = static_cast<int>(shapes.cols());
  fm.layout.in_degree = static_cast<int>(degrees.in.cols());
  fm.layout.out_degree = static_cast<int>(degrees.out.cols());
  fm.layout.fractal = 1;
  fm.layout.pos = cfg.d_pos;
  const FeatureLayout& L = fm.layout;

  fm.values = Matrix::Zero(g.size(), L.width());
  for (NodeId v = 0; v < g.size(); ++v) {
    fm.values.block(v, L.type_offset(), 1, L.type) = types.row(v);
    fm.values.block(v, L.shape_offset(), 1, L.shape) = shapes.row(v);
    fm.values.block(v, L.in_degree_offset(), 1, L.in_degree) = degrees.in.row(v);
    fm.values.block(v, L.out_degree_offset(), 1, L.out_degree) = degrees.out.row(v);
    fm.values(v, L.fractal_offset()) = fractal[v];
    fm.values.block(v, L.pos_offset(), 1, L.pos) = positional_encoding(topo.rank[v], cfg).transpose();
  }
  return fm;
}

}  // namespace dagplace
