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
#include <compare>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "dagplace/error.hpp"

namespace dagplace {

using NodeId = int;

struct OpNode {
  NodeId id = 0;
  int op_type = 0;
  std::vector<std::int64_t> output_shape;

  bool operator==(const OpNode&) const = default;
};

struct Edge {
  NodeId src = 0;
  NodeId dst = 0;

  auto operator<=>(const Edge&) const = default;
};

// Labeled operation DAG. Node i of `nodes` carries id i once validated.
struct CompGraph {
  int num_op_types = 1;
  std::vector<OpNode> nodes;
  std::vector<Edge> edges;

  int size() const { return static_cast<int>(nodes.size()); }
  int edge_count() const { return static_cast<int>(edges.size()); }

  bool operator==(const CompGraph&) const = default;
};

using Adjacency = std::vector<std::vector<NodeId>>;

inline Adjacency out_adjacency(int n, const std::vector<Edge>& edges) {
  Adjacency adj(static_cast<std::size_t>(n));
  for (const Edge& e : edges) adj[e.src].push_back(e.dst);
  return adj;
}

inline Adjacency in_adjacency(int n, const std::vector<Edge>& edges) {
  Adjacency adj(static_cast<std::size_t>(n));
  for (const Edge& e : edges) adj[e.dst].push_back(e.src);
  return adj;
}

inline Adjacency out_adjacency(const CompGraph& g) { return out_adjacency(g.size(), g.edges); }
inline Adjacency in_adjacency(const CompGraph& g) { return in_adjacency(g.size(), g.edges); }

// Neighbors in either direction, deduplicated and sorted.
inline Adjacency undirected_adjacency(int n, const std::vector<Edge>& edges) {
  Adjacency adj(static_cast<std::size_t>(n));
  for (const Edge& e : edges) {
    adj[e.src].push_back(e.dst);
    adj[e.dst].push_back(e.src);
  }
  for (auto& nbrs : adj) {
    std::sort(nbrs.begin(), nbrs.end());
    nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
  }
  return adj;
}

struct GraphIssue {
  ErrorCode code;
  std::string message;
  // Populated for kCycleDetected: nodes along the cycle, first node repeated at the end.
  std::vector<NodeId> cycle;
};

namespace detail {

// Returns a directed cycle if one exists. Iterative DFS with white/grey/black marks.
inline std::optional<std::vector<NodeId>> find_cycle(int n, const Adjacency& out) {
  std::vector<int> color(static_cast<std::size_t>(n), 0);
  std::vector<NodeId> parent(static_cast<std::size_t>(n), -1);
  std::vector<std::size_t> next_child(static_cast<std::size_t>(n), 0);
  for (NodeId root = 0; root < n; ++root) {
    if (color[root] != 0) continue;
    std::vector<NodeId> stack{root};
    color[root] = 1;
    while (!stack.empty()) {
      NodeId v = stack.back();
      if (next_child[v] < out[v].size()) {
        NodeId w = out[v][next_child[v]++];
        if (color[w] == 0) {
          color[w] = 1;
          parent[w] = v;
          stack.push_back(w);
        } else if (color[w] == 1) {
          std::vector<NodeId> cycle{w};
          for (NodeId u = v; u != w; u = parent[u]) cycle.push_back(u);
          cycle.push_back(w);
          std::reverse(cycle.begin(), cycle.end());
          return cycle;
        }
      } else {
        color[v] = 2;
        stack.pop_back();
      }
    }
  }
  return std::nullopt;
}

inline std::string join_ids(const std::vector<NodeId>& ids, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += sep;
    out += std::to_string(ids[i]);
  }
  return out;
}

}  // namespace detail

// Checks every CompGraph invariant. Returns nullopt when the graph is well formed.
inline std::optional<GraphIssue> validate(const CompGraph& g) {
  const int n = g.size();
  for (int i = 0; i < n; ++i) {
    if (g.nodes[i].id != i) {
      return GraphIssue{ErrorCode::kInvalidNodeIds,
                        "node at position " + std::to_string(i) + " has id " +
                            std::to_string(g.nodes[i].id) + "; ids must be 0..|V|-1 in order",
                        {}};
    }
    if (g.nodes[i].op_type < 0 || g.nodes[i].op_type >= g.num_op_types) {
      return GraphIssue{ErrorCode::kTypeIndexOutOfRange,
                        "node " + std::to_string(i) + " has op_type " +
                            std::to_string(g.nodes[i].op_type) + " but num_op_types is " +
                            std::to_string(g.num_op_types),
                        {}};
    }
    for (auto dim : g.nodes[i].output_shape) {
      if (dim < 0) {
        return GraphIssue{ErrorCode::kParse,
                          "node " + std::to_string(i) + " has a negative output_shape entry", {}};
      }
    }
  }
  std::set<Edge> seen;
  for (const Edge& e : g.edges) {
    const std::string label = "(" + std::to_string(e.src) + ", " + std::to_string(e.dst) + ")";
    if (e.src < 0 || e.src >= n || e.dst < 0 || e.dst >= n) {
      return GraphIssue{ErrorCode::kDanglingEdge, "edge " + label + " references a missing node", {}};
    }
    if (e.src == e.dst) {
      return GraphIssue{ErrorCode::kSelfLoop, "edge " + label + " is a self-loop", {}};
    }
    if (!seen.insert(e).second) {
      return GraphIssue{ErrorCode::kDuplicateEdge, "edge " + label + " appears more than once", {}};
    }
  }
  if (auto cycle = detail::find_cycle(n, out_adjacency(g))) {
    return GraphIssue{ErrorCode::kCycleDetected, "cycle " + detail::join_ids(*cycle, " -> "),
                      std::move(*cycle)};
  }
  return std::nullopt;
}

inline void validate_or_throw(const CompGraph& g) {
  if (auto issue = validate(g)) throw Error(issue->code, issue->message);
}

struct TopoOrder {
  std::vector<NodeId> order;  // position -> node
  std::vector<int> rank;      // node -> position
};

// Kahn's algorithm with a min-id frontier, so ties resolve to the lower id.
inline TopoOrder topo_sort(int n, const std::vector<Edge>& edges) {
  std::vector<int> indegree(static_cast<std::size_t>(n), 0);
  for (const Edge& e : edges) ++indegree[e.dst];
  const Adjacency out = out_adjacency(n, edges);
  std::priority_queue<NodeId, std::vector<NodeId>, std::greater<>> frontier;
  for (NodeId v = 0; v < n; ++v)
    if (indegree[v] == 0) frontier.push(v);
  TopoOrder topo;
  topo.order.reserve(static_cast<std::size_t>(n));
  topo.rank.assign(static_cast<std::size_t>(n), -1);
  while (!frontier.empty()) {
    NodeId v = frontier.top();
    frontier.pop();
    topo.rank[v] = static_cast<int>(topo.order.size());
    topo.order.push_back(v);
    for (NodeId w : out[v])
      if (--indegree[w] == 0) frontier.push(w);
  }
  if (static_cast<int>(topo.order.size()) != n) {
    throw Error(ErrorCode::kCycleDetected, "graph has a cycle; no topological order exists");
  }
  return topo;
}

inline TopoOrder topo_sort(const CompGraph& g) { return topo_sort(g.size(), g.edges); }

// Lift edges through a node -> group map, dropping intra-group edges and duplicates.
inline std::vector<Edge> lift_edges(const std::vector<Edge>& edges, const std::vector<NodeId>& group_of) {
  std::vector<Edge> lifted;
  lifted.reserve(edges.size());
  for (const Edge& e : edges) {
    NodeId a = group_of[e.src], b = group_of[e.dst];
    if (a != b) lifted.push_back({a, b});
  }
  std::sort(lifted.begin(), lifted.end());
  lifted.erase(std::unique(lifted.begin(), lifted.end()), lifted.end());
  return lifted;
}

// Renumbers arbitrary group labels densely by ascending minimum member id.
inline std::vector<NodeId> canonical_groups(const std::vector<NodeId>& label) {
  const int n = static_cast<int>(label.size());
  std::vector<NodeId> dense(static_cast<std::size_t>(n), -1);
  NodeId next = 0;
  std::vector<NodeId> out(static_cast<std::size_t>(n));
  for (NodeId v = 0; v < n; ++v) {
    NodeId l = label[v];
    if (dense[l] < 0) dense[l] = next++;
    out[v] = dense[l];
  }
  return out;
}

class DisjointSets {
 public:
  explicit DisjointSets(int n) : parent_(static_cast<std::size_t>(n)) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }

  int find(int x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
    return true;
  }

 private:
  std::vector<int> parent_;
};

struct Colocation {
  CompGraph coarse;
  std::vector<NodeId> membership;  // original node -> coarse node
};

namespace detail {

// Nearest integer to sum/count; exact halves round down.
inline int rounded_mean(long long sum, long long count) {
  long long q = sum / count, r = sum % count;
  return static_cast<int>(2 * r > count ? q + 1 : q);
}

inline CompGraph contract(const CompGraph& g, const std::vector<NodeId>& membership, int groups) {
  const TopoOrder topo = topo_sort(g);
  CompGraph coarse;
  coarse.num_op_types = g.num_op_types;
  coarse.nodes.resize(static_cast<std::size_t>(groups));
  std::vector<long long> type_sum(static_cast<std::size_t>(groups), 0), count(static_cast<std::size_t>(groups), 0);
  std::vector<int> last_rank(static_cast<std::size_t>(groups), -1);
  for (NodeId v = 0; v < g.size(); ++v) {
    NodeId c = membership[v];
    type_sum[c] += g.nodes[v].op_type;
    ++count[c];
    if (topo.rank[v] > last_rank[c]) {
      last_rank[c] = topo.rank[v];
      coarse.nodes[c].output_shape = g.nodes[v].output_shape;
    }
  }
  for (NodeId c = 0; c < groups; ++c) {
    coarse.nodes[c].id = c;
    coarse.nodes[c].op_type = rounded_mean(type_sum[c], count[c]);
  }
  coarse.edges = lift_edges(g.edges, membership);
  return coarse;
}

}  // namespace detail

// Co-location pre-pass: merges v and its child w whenever w is v's only child and
// v is w's only parent, repeated to a fixed point.
inline Colocation colocate(const CompGraph& g) {
  validate_or_throw(g);
  std::vector<NodeId> membership(static_cast<std::size_t>(g.size()));
  std::iota(membership.begin(), membership.end(), 0);
  int groups = g.size();
  CompGraph current = g;
  while (true) {
    const TopoOrder topo = topo_sort(current);
    const Adjacency out = out_adjacency(current);
    const Adjacency in = in_adjacency(current);
    DisjointSets sets(current.size());
    bool merged = false;
    for (NodeId v : topo.order) {
      if (out[v].size() == 1 && in[out[v][0]].size() == 1) merged |= sets.unite(v, out[v][0]);
    }
    if (!merged) break;
    std::vector<NodeId> label(static_cast<std::size_t>(current.size()));
    for (NodeId v = 0; v < current.size(); ++v) label[v] = sets.find(v);
    std::vector<NodeId> step = canonical_groups(label);
    for (NodeId& m : membership) m = step[m];
    membership = canonical_groups(membership);
    groups = 1 + (membership.empty() ? -1 : *std::max_element(membership.begin(), membership.end()));
    current = detail::contract(g, membership, groups);
  }
  return {std::move(current), std::move(membership)};
}

inline double average_degree(int num_nodes, int num_edges) {
  return num_nodes == 0 ? 0.0 : static_cast<double>(num_edges) / num_nodes;
}

}  // namespace dagplace
