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

#include <gtest/gtest.h>

#include "dagplace/compgraph.hpp"
#include "dagplace/error.hpp"
#include "dagplace/fixtures.hpp"
#include "dagplace/graph_io.hpp"
#include "oracles.hpp"

using namespace dagplace;

namespace {

CompGraph make(int n, std::vector<Edge> edges, int types = 1) {
  CompGraph g;
  g.num_op_types = types;
  for (int i = 0; i < n; ++i) g.nodes.push_back({i, 0, {1, 4}});
  g.edges = std::move(edges);
  return g;
}

ErrorCode issue_of(const CompGraph& g) {
  auto issue = validate(g);
  EXPECT_TRUE(issue.has_value());
  return issue ? issue->code : ErrorCode::kIo;
}

}  // namespace

TEST(Validate, AcceptsChain) { EXPECT_FALSE(validate(make(3, {{0, 1}, {1, 2}})).has_value()); }

TEST(Validate, ReportsCycleMembers) {
  auto issue = validate(make(3, {{0, 1}, {1, 2}, {2, 0}}));
  ASSERT_TRUE(issue.has_value());
  EXPECT_EQ(issue->code, ErrorCode::kCycleDetected);
  // closed walk: first node repeated at the end
  const std::vector<NodeId>& cycle = issue->cycle;
  ASSERT_EQ(cycle.size(), 4u);
  EXPECT_EQ(cycle.front(), cycle.back());
  std::vector<NodeId> members(cycle.begin(), cycle.end() - 1);
  std::sort(members.begin(), members.end());
  EXPECT_EQ(members, (std::vector<NodeId>{0, 1, 2}));
}

TEST(Validate, RejectsStructuralProblems) {
  EXPECT_EQ(issue_of(make(2, {{0, 5}})), ErrorCode::kDanglingEdge);
  EXPECT_EQ(issue_of(make(2, {{1, 1}})), ErrorCode::kSelfLoop);
  EXPECT_EQ(issue_of(make(2, {{0, 1}, {0, 1}})), ErrorCode::kDuplicateEdge);
  CompGraph gap = make(2, {});
  gap.nodes[1].id = 7;
  EXPECT_EQ(issue_of(gap), ErrorCode::kInvalidNodeIds);
  CompGraph bad_type = make(2, {});
  bad_type.nodes[0].op_type = 3;
  EXPECT_EQ(issue_of(bad_type), ErrorCode::kTypeIndexOutOfRange);
}

TEST(Validate, ThrowsTypedError) {
  try {
    validate_or_throw(make(2, {{0, 1}, {1, 0}}));
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCycleDetected);
  }
}

TEST(TopoSort, RespectsEveryEdgeAndBreaksTiesBySmallestId) {
  CompGraph g = make(4, {{0, 3}, {2, 1}});
  TopoOrder t = topo_sort(g);
  EXPECT_EQ(t.order, (std::vector<NodeId>{0, 2, 1, 3}));
  for (const Edge& e : g.edges) EXPECT_LT(t.rank[e.src], t.rank[e.dst]);
}

TEST(TopoSort, RandomGraphsAreOrdered) {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    CompGraph g = oracle::random_dag(1 + static_cast<int>(rng.below(30)), 0.2, 3, rng);
    TopoOrder t = topo_sort(g);
    ASSERT_EQ(static_cast<int>(t.order.size()), g.size());
    for (const Edge& e : g.edges) EXPECT_LT(t.rank[e.src], t.rank[e.dst]);
  }
}

TEST(TopoSort, ThrowsOnCycle) {
  EXPECT_THROW(topo_sort(3, {{0, 1}, {1, 2}, {2, 1}}), Error);
}

TEST(Colocate, ChainCollapsesToOneNode) {
  Colocation c = colocate(fixtures::chain(100));
  EXPECT_EQ(c.coarse.size(), 1);
  EXPECT_EQ(c.coarse.edge_count(), 0);
  for (int m : c.membership) EXPECT_EQ(m, 0);
}

TEST(Colocate, DiamondIsUnchanged) {
  CompGraph g = make(4, {{0, 1}, {0, 2}, {1, 3}, {2, 3}});
  Colocation c = colocate(g);
  EXPECT_EQ(c.coarse.size(), 4);
  EXPECT_EQ(c.coarse.edges, g.edges);
}

TEST(Colocate, MergesOnlySoleParentSoleChildPairs) {
  // 0 -> 1 -> 2 -> {3, 4}; 3 -> 5; 4 -> 5
  CompGraph g = make(6, {{0, 1}, {1, 2}, {2, 3}, {2, 4}, {3, 5}, {4, 5}});
  Colocation c = colocate(g);
  EXPECT_EQ(c.coarse.size(), 4);
  EXPECT_EQ(c.membership[0], c.membership[1]);
  EXPECT_EQ(c.membership[1], c.membership[2]);
  EXPECT_NE(c.membership[3], c.membership[4]);
  EXPECT_FALSE(validate(c.coarse).has_value());
}

TEST(Colocate, MergedTypeIsRoundedMeanTiesDownAndShapeOfLastMember) {
  CompGraph g = make(2, {{0, 1}}, 4);
  g.nodes[0].op_type = 1;
  g.nodes[1].op_type = 2;
  g.nodes[1].output_shape = {3, 5};
  Colocation c = colocate(g);
  ASSERT_EQ(c.coarse.size(), 1);
  EXPECT_EQ(c.coarse.nodes[0].op_type, 1);
  EXPECT_EQ(c.coarse.nodes[0].output_shape, (std::vector<std::int64_t>{3, 5}));
  EXPECT_EQ(detail::rounded_mean(5, 2), 2);
  EXPECT_EQ(detail::rounded_mean(7, 3), 2);
  EXPECT_EQ(detail::rounded_mean(8, 3), 3);
}

TEST(Colocate, IdempotentAndNeverGrows) {
  Rng rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    CompGraph g = oracle::random_dag(2 + static_cast<int>(rng.below(40)), 0.08, 4, rng);
    Colocation once = colocate(g);
    Colocation twice = colocate(once.coarse);
    EXPECT_LE(once.coarse.size(), g.size());
    EXPECT_LE(once.coarse.edge_count(), g.edge_count());
    EXPECT_FALSE(validate(once.coarse).has_value());
    EXPECT_EQ(twice.coarse.size(), once.coarse.size());
    EXPECT_EQ(twice.coarse.edges, once.coarse.edges);
  }
}

TEST(AverageDegree, MatchesRatio) {
  EXPECT_DOUBLE_EQ(average_degree(728, 764), 764.0 / 728.0);
  EXPECT_DOUBLE_EQ(average_degree(1, 0), 0.0);
}

TEST(GraphJson, RoundTripsAndSortsNodesById) {
  json j = {{"num_op_types", 3},
            {"nodes", {{{"id", 1}, {"op_type", 2}, {"output_shape", {4}}}, {{"id", 0}, {"op_type", 0}, {"output_shape", json::array()}}}},
            {"edges", {{0, 1}}}};
  CompGraph g = graph_from_json(j);
  ASSERT_EQ(g.size(), 2);
  EXPECT_EQ(g.nodes[0].id, 0);
  EXPECT_EQ(g.nodes[1].op_type, 2);
  CompGraph back = graph_from_json(graph_to_json(g));
  EXPECT_EQ(back.edges, g.edges);
  EXPECT_EQ(back.nodes[1].output_shape, g.nodes[1].output_shape);
  EXPECT_EQ(back.num_op_types, 3);
}

TEST(GraphJson, RejectsMalformedAndCyclicInput) {
  EXPECT_THROW(graph_from_json(json{{"nodes", 3}}), Error);
  json cyc = {{"num_op_types", 1},
              {"nodes", {{{"id", 0}, {"op_type", 0}, {"output_shape", {1}}}, {{"id", 1}, {"op_type", 0}, {"output_shape", {1}}}}},
              {"edges", {{0, 1}, {1, 0}}}};
  try {
    graph_from_json(cyc);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCycleDetected);
  }
}
