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

#include "dagplace/policy.hpp"
#include "oracles.hpp"

using namespace dagplace;

namespace {

Matrix random_matrix(int r, int c, Rng& rng) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-1.0, 1.0);
  return m;
}

}  // namespace

TEST(DeviceList, Names) {
  EXPECT_EQ(DeviceList::make(2).names, (std::vector<std::string>{"CPU", "GPU"}));
  EXPECT_EQ(DeviceList::make(3).names, (std::vector<std::string>{"CPU", "GPU.0", "GPU.1"}));
  EXPECT_THROW(DeviceList::make(1), Error);
}

TEST(Placer, DistributionRowsSumToOne) {
  Rng rng(3);
  Placer placer(8, 3, rng);
  Tape t;
  Matrix d = t.value(device_distribution(t, t.constant(random_matrix(5, 8, rng)), placer));
  ASSERT_EQ(d.cols(), 3);
  for (Eigen::Index r = 0; r < d.rows(); ++r) {
    EXPECT_NEAR(d.row(r).sum(), 1.0, 1e-12);
    EXPECT_GT(d.row(r).minCoeff(), 0.0);
  }
}

TEST(Placer, InitialPolicyIsNearUniform) {
  Rng rng(3);
  Placer placer(128, 2, rng);
  Tape t;
  Matrix d = t.value(device_distribution(t, t.constant(random_matrix(10, 128, rng)), placer));
  EXPECT_LT((d.array() - 0.5).abs().maxCoeff(), 0.25);
}

TEST(PlacementLogProb, SumsChosenEntries) {
  Tape t;
  Matrix p(2, 2);
  p << 0.25, 0.75, 0.6, 0.4;
  Var log_dist = t.log(t.constant(p));
  EXPECT_NEAR(t.scalar(placement_log_prob(t, log_dist, {1, 0})), std::log(0.75) + std::log(0.6), 1e-15);
  EXPECT_THROW(placement_log_prob(t, log_dist, {1}), Error);
}

TEST(PlacementLogProb, GradientsMatchFiniteDifferences) {
  Rng rng(44);
  Placer placer(6, 3, rng);
  Tensor pooled(random_matrix(4, 6, rng));
  const std::vector<DeviceId> choice{2, 0, 1, 1};
  auto loss = [&](Tape& t) { return placement_log_prob(t, device_log_distribution(t, t.param(pooled), placer), choice); };
  std::vector<Tensor*> params{&pooled};
  placer.collect(params);
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

TEST(SampleDevices, FollowsDistribution) {
  Matrix dist(1, 3);
  dist << 0.2, 0.5, 0.3;
  Rng rng(7);
  std::vector<int> counts(3, 0);
  const int n = 20000;
  for (int i = 0; i < n; ++i) ++counts[sample_devices(dist, rng)[0]];
  EXPECT_NEAR(counts[0] / double(n), 0.2, 0.015);
  EXPECT_NEAR(counts[1] / double(n), 0.5, 0.015);
  EXPECT_NEAR(counts[2] / double(n), 0.3, 0.015);
}

TEST(SampleDevices, DegenerateRowsAreDeterministic) {
  Matrix dist(2, 2);
  dist << 1.0, 0.0, 0.0, 1.0;
  Rng rng(1);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sample_devices(dist, rng), (std::vector<DeviceId>{0, 1}));
}

TEST(SamplePlacement, LogProbMatchesChoice) {
  Matrix p(3, 2);
  p << 0.1, 0.9, 0.5, 0.5, 0.7, 0.3;
  Rng rng(2);
  Tape t;
  SampledPlacement s = sample_placement(t, t.constant(p), rng);
  double want = 0.0;
  for (int r = 0; r < 3; ++r) want += std::log(p(r, s.clusters[r]));
  EXPECT_NEAR(t.scalar(s.log_prob), want, 1e-15);
}

TEST(GreedyDevices, ArgmaxWithLowIdTies) {
  Matrix d(3, 2);
  d << 0.3, 0.7, 0.5, 0.5, 0.8, 0.2;
  EXPECT_EQ(greedy_devices(d), (std::vector<DeviceId>{1, 0, 0}));
}

TEST(LiftPlacement, CopiesClusterDeviceToMembers) {
  AssignMatrix a{{0, 1, 0, 2}, 3};
  EXPECT_EQ(lift_placement({1, 0, 1}, a).assignments, (std::vector<DeviceId>{1, 0, 1, 1}));
}

TEST(PlacementJson, RoundTrip) {
  Placement p{{0, 1, 1, 0}};
  json j = placement_to_json(p, DeviceList::make(2));
  EXPECT_EQ(j.at("devices"), json({"CPU", "GPU"}));
  EXPECT_EQ(placement_from_json(j), p);
  EXPECT_THROW(placement_from_json(json{{"nope", 1}}), Error);
}
