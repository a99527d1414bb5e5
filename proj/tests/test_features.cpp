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

#include <cmath>

#include "dagplace/features.hpp"
#include "dagplace/fixtures.hpp"
#include "oracles.hpp"

using namespace dagplace;

namespace {

CompGraph path(int n) { return fixtures::chain(n, 1); }

}  // namespace

TEST(OneHotTypes, RowsAreUnitVectors) {
  CompGraph g = fixtures::chain(6, 3);
  Matrix m = one_hot_types(g);
  ASSERT_EQ(m.cols(), 3);
  for (int v = 0; v < g.size(); ++v) {
    EXPECT_DOUBLE_EQ(m.row(v).sum(), 1.0);
    EXPECT_DOUBLE_EQ(m(v, g.nodes[v].op_type), 1.0);
  }
}

TEST(OneHotTypes, RejectsOutOfRangeType) {
  CompGraph g = fixtures::chain(3, 2);
  g.nodes[1].op_type = 2;
  try {
    one_hot_types(g);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTypeIndexOutOfRange);
  }
}

TEST(DegreeOneHots, ColumnsFollowDistinctDegrees) {
  // 0 -> {1, 2}, 1 -> 2: in-degrees {0, 1, 2}, out-degrees {2, 1, 0}
  CompGraph g = fixtures::chain(3, 1);
  g.edges = {{0, 1}, {0, 2}, {1, 2}};
  DegreeOneHots d = degree_one_hots(g);
  ASSERT_EQ(d.in.cols(), 3);
  EXPECT_DOUBLE_EQ(d.in(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(d.in(1, 1), 1.0);
  EXPECT_DOUBLE_EQ(d.in(2, 2), 1.0);
  EXPECT_DOUBLE_EQ(d.out(0, 2), 1.0);
  EXPECT_DOUBLE_EQ(d.out(2, 0), 1.0);
}

TEST(FractalDimension, PathCenterIsExactlyOne) {
  EXPECT_EQ(fractal_dimension(path(5), 2), 1.0);
}

TEST(FractalDimension, PathEndpointIsOne) {
  // N(r) = r at an endpoint, so log N = log r.
  EXPECT_NEAR(fractal_dimension(path(6), 0), 1.0, 1e-12);
}

TEST(FractalDimension, DegenerateCasesAreZero) {
  EXPECT_EQ(fractal_dimension(path(1), 0), 0.0);
  EXPECT_EQ(fractal_dimension(path(2), 0), 0.0);  // a single radius
  CompGraph star = path(5);
  star.edges = {{0, 1}, {0, 2}, {0, 3}, {0, 4}};
  EXPECT_EQ(fractal_dimension(star, 0), 0.0);
}

TEST(FractalDimension, MatchesFloydWarshallRegression) {
  Rng rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    CompGraph g = oracle::random_dag(2 + static_cast<int>(rng.below(30)), 0.1, 2, rng);
    std::vector<double> got = fractal_dimensions(g);
    for (int v = 0; v < g.size(); ++v) EXPECT_NEAR(got[v], oracle::fractal_dimension(g.size(), g.edges, v), 1e-9);
  }
}

TEST(PositionalEncoding, SineCosinePairs) {
  FeatureConfig cfg{8, 10000.0};
  Vector pe0 = positional_encoding(0, cfg);
  for (int i = 0; i < 4; ++i) {
    EXPECT_DOUBLE_EQ(pe0(2 * i), 0.0);
    EXPECT_DOUBLE_EQ(pe0(2 * i + 1), 1.0);
  }
  Vector pe3 = positional_encoding(3, cfg);
  EXPECT_DOUBLE_EQ(pe3(0), std::sin(3.0));
  EXPECT_DOUBLE_EQ(pe3(3), std::cos(3.0 / std::pow(10000.0, 2.0 / 8.0)));
}

TEST(FeatureConfig, RejectsOddWidth) { EXPECT_THROW((FeatureConfig{7, 10000.0}.check()), Error); }

TEST(BuildFeatures, LayoutAndSegments) {
  fixtures::Fixture f = fixtures::split_favoring();
  FeatureConfig cfg;
  FeatureMatrix fm = build_features(f.graph, cfg);
  const FeatureLayout& L = fm.layout;
  EXPECT_EQ(L.type, 4);
  EXPECT_EQ(L.shape, 2);
  EXPECT_EQ(L.pos, cfg.d_pos);
  EXPECT_EQ(fm.values.rows(), 10);
  EXPECT_EQ(fm.values.cols(), L.width());
  TopoOrder topo = topo_sort(f.graph);
  std::vector<double> fd = fractal_dimensions(f.graph);
  for (int v = 0; v < 10; ++v) {
    EXPECT_DOUBLE_EQ(fm.values(v, L.type_offset() + f.graph.nodes[v].op_type), 1.0);
    EXPECT_DOUBLE_EQ(fm.values.block(v, L.in_degree_offset(), 1, L.in_degree).sum(), 1.0);
    EXPECT_DOUBLE_EQ(fm.values.block(v, L.out_degree_offset(), 1, L.out_degree).sum(), 1.0);
    EXPECT_DOUBLE_EQ(fm.values(v, L.fractal_offset()), fd[v]);
    Vector pe = positional_encoding(topo.rank[v], cfg);
    for (int k = 0; k < L.pos; ++k) EXPECT_DOUBLE_EQ(fm.values(v, L.pos_offset() + k), pe(k));
  }
}

TEST(BuildFeatures, Deterministic) {
  CompGraph g = fixtures::random_dag(40, 9);
  EXPECT_EQ(build_features(g, {}).values, build_features(g, {}).values);
}
