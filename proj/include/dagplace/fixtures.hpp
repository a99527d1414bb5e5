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
#include <set>
#include <string>
#include <vector>

#include "dagplace/compgraph.hpp"
#include "dagplace/error.hpp"
#include "dagplace/rng.hpp"
#include "dagplace/simulator.hpp"

namespace dagplace::fixtures {

enum class Kind { kChain, kDiamondChain, kRandomDag, kInceptionLike };

inline Kind parse_kind(const std::string& name) {
  if (name == "chain") return Kind::kChain;
  if (name == "diamond-chain") return Kind::kDiamondChain;
  if (name == "random-dag") return Kind::kRandomDag;
  if (name == "inception-like") return Kind::kInceptionLike;
  throw Error(ErrorCode::kInvalidConfig, "unknown fixture kind '" + name +
                                             "' (expected chain, diamond-chain, random-dag, inception-like)");
}

namespace detail {

inline int add_node(CompGraph& g, int op_type, std::vector<std::int64_t> shape) {
  const int id = g.size();
  g.nodes.push_back({id, op_type, std::move(shape)});
  return id;
}

inline std::vector<std::int64_t> small_shape(Rng& rng) {
  return {1, 16 * static_cast<std::int64_t>(1 + rng.below(4))};
}

}  // namespace detail

inline CompGraph chain(int n, int num_op_types = 4) {
  CompGraph g;
  g.num_op_types = num_op_types;
  for (int i = 0; i < n; ++i) detail::add_node(g, i % num_op_types, {1, 16});
  for (int i = 0; i + 1 < n; ++i) g.edges.push_back({i, i + 1});
  return g;
}

// Repeated diamonds source -> {left, right} -> sink, each sink feeding the next
// diamond. Leftover nodes extend the tail as a chain.
inline CompGraph diamond_chain(int n, int num_op_types = 4) {
  CompGraph g;
  g.num_op_types = num_op_types;
  if (n <= 0) return g;
  int tail = detail::add_node(g, 0, {1, 16});
  while (g.size() + 3 <= n) {
    const int left = detail::add_node(g, g.size() % num_op_types, {1, 16});
    const int right = detail::add_node(g, g.size() % num_op_types, {1, 16});
    const int sink = detail::add_node(g, g.size() % num_op_types, {1, 16});
    g.edges.insert(g.edges.end(), {{tail, left}, {tail, right}, {left, sink}, {right, sink}});
    tail = sink;
  }
  while (g.size() < n) {
    const int next = detail::add_node(g, g.size() % num_op_types, {1, 16});
    g.edges.push_back({tail, next});
    tail = next;
  }
  return g;
}

// Weakly connected random DAG: a random spanning tree over a random topological
// order plus extra forward edges until |E| reaches `edges` (default ~1.05 |V|).
inline CompGraph random_dag(int n, std::uint64_t seed, int num_op_types = 8, int edges = -1) {
  Rng rng(seed);
  CompGraph g;
  g.num_op_types = num_op_types;
  for (int i = 0; i < n; ++i) detail::add_node(g, static_cast<int>(rng.below(num_op_types)), detail::small_shape(rng));
  if (n <= 1) return g;
  const long long max_edges = static_cast<long long>(n) * (n - 1) / 2;
  long long target = edges >= 0 ? edges : std::llround(1.05 * n);
  target = std::clamp<long long>(target, n - 1, max_edges);
  std::set<Edge> present;
  for (int j = 1; j < n; ++j) present.insert({static_cast<int>(rng.below(j)), j});
  while (static_cast<long long>(present.size()) < target) {
    int a = static_cast<int>(rng.below(n)), b = static_cast<int>(rng.below(n));
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    present.insert({a, b});
  }
  g.edges.assign(present.begin(), present.end());
  return g;
}

// Blocks of parallel branches (1-3 ops each) joined by a concat node, with
// stem chains between blocks; 4-d activation shapes.
inline CompGraph inception_like(int n, std::uint64_t seed, int num_op_types = 8) {
  Rng rng(seed);
  CompGraph g;
  g.num_op_types = num_op_types;
  if (n <= 0) return g;
  std::int64_t channels = 32, spatial = 64;
  auto shape = [&] { return std::vector<std::int64_t>{1, channels, spatial, spatial}; };
  auto op = [&] { return static_cast<int>(rng.below(num_op_types)); };
  int tail = detail::add_node(g, op(), shape());
  auto extend = [&](int from) {
    const int next = detail::add_node(g, op(), shape());
    g.edges.push_back({from, next});
    return next;
  };
  while (g.size() < n) {
    const int stem = 8 + static_cast<int>(rng.below(7));
    for (int i = 0; i < stem && g.size() < n; ++i) tail = extend(tail);
    const int branches = 3 + static_cast<int>(rng.below(2));
    std::vector<int> lengths;
    int block_nodes = 1;
    for (int b = 0; b < branches; ++b) {
      lengths.push_back(1 + static_cast<int>(rng.below(3)));
      block_nodes += lengths.back();
    }
    if (g.size() + block_nodes > n) continue;
    std::vector<int> ends;
    for (int len : lengths) {
      int cur = tail;
      for (int i = 0; i < len; ++i) cur = extend(cur);
      ends.push_back(cur);
    }
    if (spatial > 8) spatial /= 2;
    channels = std::min<std::int64_t>(channels * 2, 512);
    const int concat = detail::add_node(g, op(), shape());
    for (int e : ends) g.edges.push_back({e, concat});
    tail = concat;
  }
  return g;
}

inline CompGraph generate(Kind kind, int n, std::uint64_t seed) {
  switch (kind) {
    case Kind::kChain: return chain(n);
    case Kind::kDiamondChain: return diamond_chain(n);
    case Kind::kRandomDag: return random_dag(n, seed);
    case Kind::kInceptionLike: return inception_like(n, seed);
  }
  return {};
}

// Two-device cost model: device 1 is faster on a random half of the op types and
// slower on the rest; transfers cost the same in both directions and are scaled
// so that moving a median tensor costs about a fifth of a median op.
inline CostModel heterogeneous_costs(const CompGraph& g, std::uint64_t seed) {
  Rng rng(seed ^ 0x5bd1e995ULL);
  const int types = g.num_op_types;
  std::vector<int> order(static_cast<std::size_t>(types));
  for (int t = 0; t < types; ++t) order[t] = t;
  for (int t = types - 1; t > 0; --t) std::swap(order[t], order[rng.below(t + 1)]);
  std::vector<bool> gpu_faster(static_cast<std::size_t>(types), false);
  for (int i = 0; i < types / 2 + types % 2; ++i) gpu_faster[order[i]] = true;

  CostModel cm;
  double total = 0.0;
  for (int t = 0; t < types; ++t) {
    const double cpu = rng.uniform(1e-4, 1e-3);
    const double gpu = gpu_faster[t] ? cpu * rng.uniform(0.2, 0.6) : cpu * rng.uniform(1.5, 3.0);
    cm.compute.push_back({cpu, gpu});
    total += cpu;
  }
  std::vector<double> volumes;
  for (const OpNode& node : g.nodes) volumes.push_back(volume(node));
  double median_volume = 1.0;
  if (!volumes.empty()) {
    std::nth_element(volumes.begin(), volumes.begin() + volumes.size() / 2, volumes.end());
    median_volume = std::max(volumes[volumes.size() / 2], 1.0);
  }
  const double per_unit = 0.2 * (total / types) / median_volume;
  cm.transfer = {{0.0, per_unit}, {per_unit, 0.0}};
  return cm;
}

struct Fixture {
  CompGraph graph;
  CostModel costs;
};

// Device 1 is twice as fast on every op and transfers are free. Every node sits
// on a longest path, so the all-device-1 placement is the unique optimum.
inline Fixture dominant_device(int n = 10) {
  Fixture f{diamond_chain(n), {}};
  for (int t = 0; t < f.graph.num_op_types; ++t) f.costs.compute.push_back({2.0, 1.0});
  f.costs.transfer = {{0.0, 0.0}, {0.0, 0.0}};
  return f;
}

// Ten ops in two halves: the first half (types 0, 1) runs 3x faster on device 0,
// the second half (types 2, 3) 3x faster on device 1. One crossing costs 0.5.
inline Fixture split_favoring() {
  Fixture f;
  CompGraph& g = f.graph;
  g.num_op_types = 4;
  const int types[10] = {0, 1, 0, 1, 0, 2, 3, 2, 3, 2};
  for (int i = 0; i < 10; ++i) detail::add_node(g, types[i], {1, 1});
  g.edges = {{0, 1}, {0, 2}, {1, 3}, {2, 3}, {3, 4}, {4, 5}, {5, 6}, {5, 7}, {6, 8}, {7, 8}, {8, 9}};
  f.costs.compute = {{1.0, 3.0}, {1.0, 3.0}, {3.0, 1.0}, {3.0, 1.0}};
  f.costs.transfer = {{0.0, 0.5}, {0.5, 0.0}};
  return f;
}

// Two diamonds joined by an edge; the first four ops favour device 0, the last
// four device 1. Optimum: [0,0,0,0,1,1,1,1] at latency 6.5.
inline Fixture hand_solved_split() {
  Fixture f;
  CompGraph& g = f.graph;
  g.num_op_types = 2;
  for (int i = 0; i < 8; ++i) detail::add_node(g, i < 4 ? 0 : 1, {});
  g.edges = {{0, 1}, {0, 2}, {1, 3}, {2, 3}, {3, 4}, {4, 5}, {4, 6}, {5, 7}, {6, 7}};
  f.costs.compute = {{1.0, 4.0}, {4.0, 1.0}};
  f.costs.transfer = {{0.0, 0.5}, {0.5, 0.0}};
  return f;
}

}  // namespace dagplace::fixtures
