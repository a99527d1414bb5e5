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
#include <numeric>
#include <vector>

#include "dagplace/autograd.hpp"
#include "dagplace/compgraph.hpp"
#include "dagplace/nn.hpp"

namespace dagplace {

struct ParserConfig {
  int layer_parsingnet = 2;
  double dropout_parsing = 0.0;
};

// Edge scorer phi: MLP with a scalar head. Scores are sigmoid(phi(z_src * z_dst)).
struct EdgeScorer {
  Mlp phi;

  EdgeScorer() = default;
  EdgeScorer(int hidden, const ParserConfig& cfg, Rng& rng) {
    std::vector<int> widths{hidden};
    for (int i = 1; i < std::max(cfg.layer_parsingnet, 1); ++i) widths.push_back(hidden);
    widths.push_back(1);
    phi = Mlp(widths, rng, false, 1.0);
  }

  void collect(std::vector<Tensor*>& out) { phi.collect(out); }
};

// |E| x 1 column of scores, one per edge in `edges` order. Self-loops are never scored.
inline Var score_edges(Tape& tape, Var z, const std::vector<Edge>& edges, EdgeScorer& scorer) {
  std::vector<int> src, dst;
  src.reserve(edges.size());
  dst.reserve(edges.size());
  for (const Edge& e : edges) {
    if (e.src == e.dst) throw Error(ErrorCode::kSelfLoop, "self-loops are not scored");
    src.push_back(e.src);
    dst.push_back(e.dst);
  }
  Var pair = tape.mul(tape.gather_rows(z, std::move(src)), tape.gather_rows(z, std::move(dst)));
  return tape.sigmoid(scorer.phi.forward(tape, pair));
}

struct EdgeScores {
  std::vector<Edge> edges;
  std::vector<double> scores;  // aligned with edges, each in [0, 1]
};

inline EdgeScores edge_scores_from(const Tape& tape, Var scores, const std::vector<Edge>& edges) {
  EdgeScores out{edges, std::vector<double>(edges.size())};
  for (std::size_t i = 0; i < edges.size(); ++i) out.scores[i] = tape.value(scores)(static_cast<Eigen::Index>(i), 0);
  return out;
}

// Each node keeps its single best incident edge (in or out). Ties go to the
// smaller (src, dst). Result is sorted and deduplicated; |result| <= n.
inline std::vector<Edge> retain_dominant_edges(const EdgeScores& s, int n) {
  std::vector<int> best(static_cast<std::size_t>(n), -1);
  auto better = [&](int cand, int cur) {
    if (cur < 0) return true;
    if (s.scores[cand] != s.scores[cur]) return s.scores[cand] > s.scores[cur];
    return s.edges[cand] < s.edges[cur];
  };
  for (int i = 0; i < static_cast<int>(s.edges.size()); ++i) {
    const Edge& e = s.edges[i];
    if (better(i, best[e.src])) best[e.src] = i;
    if (better(i, best[e.dst])) best[e.dst] = i;
  }
  std::vector<Edge> kept;
  for (int b : best)
    if (b >= 0) kept.push_back(s.edges[b]);
  std::sort(kept.begin(), kept.end());
  kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
  return kept;
}

// Node -> cluster map; the dense |V| x |V'| one-hot form is available on request.
struct AssignMatrix {
  std::vector<int> cluster_of;
  int cluster_count = 0;

  int node_count() const { return static_cast<int>(cluster_of.size()); }

  Matrix dense() const {
    Matrix m = Matrix::Zero(node_count(), cluster_count);
    for (int v = 0; v < node_count(); ++v) m(v, cluster_of[v]) = 1.0;
    return m;
  }

  std::vector<int> cluster_sizes() const {
    std::vector<int> sizes(static_cast<std::size_t>(cluster_count), 0);
    for (int c : cluster_of) ++sizes[c];
    return sizes;
  }

  // One cluster per node, every cluster non-empty.
  bool well_formed() const {
    for (int c : cluster_of)
      if (c < 0 || c >= cluster_count) return false;
    for (int size : cluster_sizes())
      if (size == 0) return false;
    return true;
  }

  static AssignMatrix identity(int n) {
    AssignMatrix a{std::vector<int>(static_cast<std::size_t>(n)), n};
    std::iota(a.cluster_of.begin(), a.cluster_of.end(), 0);
    return a;
  }
};

// Chains two groupings: node -> inner cluster -> outer cluster.
inline AssignMatrix compose(const AssignMatrix& inner, const AssignMatrix& outer) {
  AssignMatrix out{std::vector<int>(inner.cluster_of.size()), outer.cluster_count};
  for (std::size_t v = 0; v < inner.cluster_of.size(); ++v) out.cluster_of[v] = outer.cluster_of[inner.cluster_of[v]];
  return out;
}

// Clusters are the weakly connected components of the retained edges, numbered
// by ascending smallest member id.
inline AssignMatrix parse_clusters(const std::vector<Edge>& retained, int n) {
  DisjointSets sets(n);
  for (const Edge& e : retained) sets.unite(e.src, e.dst);
  std::vector<NodeId> label(static_cast<std::size_t>(n));
  for (NodeId v = 0; v < n; ++v) label[v] = sets.find(v);
  AssignMatrix a{canonical_groups(label), 0};
  for (int c : a.cluster_of) a.cluster_count = std::max(a.cluster_count, c + 1);
  return a;
}

struct PooledGraph {
  int size = 0;
  std::vector<Edge> edges;  // support of A'
  Matrix adjacency;         // binary, zero diagonal
  Matrix features;          // X^T Z
  int two_cycles = 0;       // cluster pairs joined in both directions
};

inline Matrix adjacency_matrix(int n, const std::vector<Edge>& edges) {
  Matrix a = Matrix::Zero(n, n);
  for (const Edge& e : edges) a(e.src, e.dst) = 1.0;
  return a;
}

// A' = X^T A X, clipped to {0, 1} with the diagonal zeroed; Z' = X^T Z.
inline PooledGraph pool(const AssignMatrix& assign, const std::vector<Edge>& edges, const Matrix& z) {
  const Matrix x = assign.dense();
  const Matrix raw = x.transpose() * adjacency_matrix(assign.node_count(), edges) * x;
  PooledGraph p;
  p.size = assign.cluster_count;
  p.adjacency = Matrix::Zero(p.size, p.size);
  for (int i = 0; i < p.size; ++i)
    for (int j = 0; j < p.size; ++j)
      if (i != j && raw(i, j) > 0.0) {
        p.adjacency(i, j) = 1.0;
        p.edges.push_back({i, j});
      }
  for (const Edge& e : p.edges)
    if (e.src < e.dst && p.adjacency(e.dst, e.src) > 0.0) ++p.two_cycles;
  if (z.size() > 0) p.features = x.transpose() * z;
  return p;
}

}  // namespace dagplace
