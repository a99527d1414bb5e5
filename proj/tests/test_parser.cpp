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

#include "dagplace/parser.hpp"
#include "oracles.hpp"

using namespace dagplace;

namespace {

EdgeScores random_scores(const std::vector<Edge>& edges, Rng& rng) {
  EdgeScores s{edges, {}};
  for (std::size_t i = 0; i < edges.size(); ++i) s.scores.push_back(rng.uniform());
  return s;
}

}  // namespace

TEST(RetainDominantEdges, KeepsEachNodesBestIncidentEdge) {
  // 0-1 (0.9), 1-2 (0.2), 2-3 (0.8), 3-4 (0.1)
  EdgeScores s{{{0, 1}, {1, 2}, {2, 3}, {3, 4}}, {0.9, 0.2, 0.8, 0.1}};
  std::vector<Edge> kept = retain_dominant_edges(s, 5);
  EXPECT_EQ(kept, (std::vector<Edge>{{0, 1}, {2, 3}, {3, 4}}));
}

TEST(RetainDominantEdges, TiesGoToSmallerEdge) {
  EdgeScores s{{{1, 2}, {0, 1}}, {0.5, 0.5}};
  EXPECT_EQ(retain_dominant_edges(s, 3), (std::vector<Edge>{{0, 1}, {1, 2}}));
  EdgeScores one{{{0, 2}, {0, 1}}, {0.5, 0.5}};
  // node 0 prefers (0,1); nodes 1 and 2 each keep their only edge
  EXPECT_EQ(retain_dominant_edges(one, 3), (std::vector<Edge>{{0, 1}, {0, 2}}));
}

TEST(RetainDominantEdges, AtMostOneEdgePerNode) {
  Rng rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    CompGraph g = oracle::random_dag(1 + static_cast<int>(rng.below(32)), 0.3, 1, rng);
    EdgeScores s = random_scores(g.edges, rng);
    std::vector<Edge> kept = retain_dominant_edges(s, g.size());
    EXPECT_LE(static_cast<int>(kept.size()), g.size());
    // every node with an incident edge keeps its maximum-score one
    for (int v = 0; v < g.size(); ++v) {
      double best = -1.0;
      Edge best_edge{-1, -1};
      for (std::size_t i = 0; i < s.edges.size(); ++i) {
        const Edge& e = s.edges[i];
        if ((e.src == v || e.dst == v) && s.scores[i] > best) {
          best = s.scores[i];
          best_edge = e;
        }
      }
      if (best >= 0.0) EXPECT_TRUE(std::binary_search(kept.begin(), kept.end(), best_edge));
    }
  }
}

TEST(ParseClusters, ComponentsMatchFloodFill) {
  Rng rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    CompGraph g = oracle::random_dag(1 + static_cast<int>(rng.below(32)), 0.15, 1, rng);
    std::vector<Edge> kept = retain_dominant_edges(random_scores(g.edges, rng), g.size());
    AssignMatrix a = parse_clusters(kept, g.size());
    EXPECT_TRUE(a.well_formed());
    EXPECT_EQ(a.cluster_of, oracle::components(g.size(), kept));
    Matrix x = a.dense();
    for (int v = 0; v < g.size(); ++v) EXPECT_DOUBLE_EQ(x.row(v).sum(), 1.0);
  }
}

TEST(ParseClusters, NoEdgesGivesIdentity) {
  AssignMatrix a = parse_clusters({}, 4);
  EXPECT_EQ(a.cluster_count, 4);
  EXPECT_EQ(a.cluster_of, (std::vector<int>{0, 1, 2, 3}));
}

TEST(Compose, ChainsGroupings) {
  AssignMatrix inner{{0, 0, 1, 2}, 3};
  AssignMatrix outer{{0, 1, 1}, 2};
  AssignMatrix c = compose(inner, outer);
  EXPECT_EQ(c.cluster_of, (std::vector<int>{0, 0, 1, 1}));
  EXPECT_EQ(c.cluster_count, 2);
}

TEST(AssignMatrix, WellFormedDetectsEmptyCluster) {
  EXPECT_FALSE((AssignMatrix{{0, 0}, 2}.well_formed()));
  EXPECT_TRUE(AssignMatrix::identity(3).well_formed());
}

TEST(Pool, AdjacencyMatchesClusterPairScan) {
  Rng rng(14);
  for (int trial = 0; trial < 200; ++trial) {
    CompGraph g = oracle::random_dag(1 + static_cast<int>(rng.below(32)), 0.2, 1, rng);
    AssignMatrix a = parse_clusters(retain_dominant_edges(random_scores(g.edges, rng), g.size()), g.size());
    Matrix z(g.size(), 3);
    for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = rng.uniform(-1, 1);
    PooledGraph p = pool(a, g.edges, z);
    auto ref = oracle::cluster_pair_scan(a.cluster_of, a.cluster_count, g.edges);
    int ref_two_cycles = 0;
    for (int i = 0; i < p.size; ++i)
      for (int j = 0; j < p.size; ++j) {
        EXPECT_EQ(p.adjacency(i, j), static_cast<double>(ref[i][j]));
        if (i < j && ref[i][j] && ref[j][i]) ++ref_two_cycles;
      }
    EXPECT_EQ(p.two_cycles, ref_two_cycles);
    Matrix sums = Matrix::Zero(a.cluster_count, 3);
    for (int v = 0; v < g.size(); ++v) sums.row(a.cluster_of[v]) += z.row(v);
    EXPECT_LT((p.features - sums).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Pool, CountsTwoCycleBetweenClusters) {
  // {0, 3} and {1, 2}: 0->1 and 2->3 join the clusters both ways
  AssignMatrix a{{0, 1, 1, 0}, 2};
  PooledGraph p = pool(a, {{0, 1}, {1, 2}, {2, 3}}, Matrix());
  EXPECT_EQ(p.two_cycles, 1);
  EXPECT_EQ(p.edges, (std::vector<Edge>{{0, 1}, {1, 0}}));
  EXPECT_EQ(p.features.size(), 0);
}

TEST(ScoreEdges, ScoresInUnitIntervalAndSymmetric) {
  Rng rng(5);
  ParserConfig cfg;
  EdgeScorer scorer(6, cfg, rng);
  Matrix z(4, 6);
  for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = rng.uniform(-2, 2);
  Tape t;
  std::vector<Edge> edges{{0, 1}, {1, 0}, {2, 3}};
  Matrix s = t.value(score_edges(t, t.constant(z), edges, scorer));
  ASSERT_EQ(s.rows(), 3);
  for (Eigen::Index i = 0; i < 3; ++i) {
    EXPECT_GE(s(i, 0), 0.0);
    EXPECT_LE(s(i, 0), 1.0);
  }
  EXPECT_DOUBLE_EQ(s(0, 0), s(1, 0));
}

TEST(ScoreEdges, RejectsSelfLoop) {
  Rng rng(5);
  EdgeScorer scorer(2, {}, rng);
  Tape t;
  EXPECT_THROW(score_edges(t, t.constant(Matrix::Ones(2, 2)), {{1, 1}}, scorer), Error);
}

TEST(ScoreEdges, GradientsMatchFiniteDifferences) {
  Rng rng(33);
  EdgeScorer scorer(5, {}, rng);
  Tensor z(Matrix(6, 5));
  for (Eigen::Index i = 0; i < z.value.size(); ++i) z.value.data()[i] = rng.uniform(-1, 1);
  std::vector<Edge> edges{{0, 1}, {0, 2}, {2, 5}, {3, 4}, {1, 4}};
  auto loss = [&](Tape& t) { return t.sum(t.scale(score_edges(t, t.param(z), edges, scorer), 1.7)); };
  std::vector<Tensor*> params{&z};
  scorer.collect(params);
  oracle::randomize(params, rng);
  for (Tensor* p : params) p->zero_grad();
  Tape tape;
  tape.backward(loss(tape));
  std::vector<Matrix> analytic, numeric;
  for (Tensor* p : params) {
    analytic.push_back(p->grad);
    numeric.push_back(oracle::numeric_gradient(*p, [&] {
      Tape t;
      return t.scalar(loss(t));
    }));
  }
  EXPECT_LT(oracle::relative_error(analytic, numeric), 1e-6);
}
