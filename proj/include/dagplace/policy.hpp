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
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "dagplace/autograd.hpp"
#include "dagplace/error.hpp"
#include "dagplace/graph_io.hpp"
#include "dagplace/nn.hpp"
#include "dagplace/parser.hpp"
#include "dagplace/rng.hpp"

namespace dagplace {

using DeviceId = int;

struct DeviceList {
  std::vector<std::string> names;

  int size() const { return static_cast<int>(names.size()); }

  // "CPU", "GPU" for two devices; "CPU", "GPU.0", "GPU.1", ... beyond that.
  static DeviceList make(int count) {
    if (count < 2) throw Error(ErrorCode::kInvalidConfig, "at least two devices are required");
    DeviceList d;
    d.names.push_back("CPU");
    if (count == 2) {
      d.names.push_back("GPU");
    } else {
      for (int i = 0; i + 1 < count; ++i) d.names.push_back("GPU." + std::to_string(i));
    }
    return d;
  }
};

struct Placement {
  std::vector<DeviceId> assignments;

  int size() const { return static_cast<int>(assignments.size()); }
  bool operator==(const Placement&) const = default;

  static Placement uniform(int n, DeviceId device) { return {std::vector<DeviceId>(static_cast<std::size_t>(n), device)}; }
};

// Placement head: d' -> hidden -> hidden -> |D| logits.
struct Placer {
  Mlp mlp;

  Placer() = default;
  Placer(int hidden, int num_devices, Rng& rng) : mlp({hidden, hidden, hidden, num_devices}, rng, false, 0.1) {}

  int num_devices() const { return mlp.out_features(); }

  Var logits(Tape& tape, Var pooled) { return mlp.forward(tape, pooled); }

  void collect(std::vector<Tensor*>& out) { mlp.collect(out); }
};

// Row-stochastic |V'| x |D| matrix of device probabilities.
inline Var device_distribution(Tape& tape, Var pooled, Placer& placer) {
  return tape.softmax_rows(placer.logits(tape, pooled));
}

inline Var device_log_distribution(Tape& tape, Var pooled, Placer& placer) {
  return tape.log_softmax_rows(placer.logits(tape, pooled));
}

// Sum over rows of log_dist[row][choice[row]], kept on the tape.
inline Var placement_log_prob(Tape& tape, Var log_dist, const std::vector<DeviceId>& choice) {
  const Matrix& ld = tape.value(log_dist);
  if (static_cast<Eigen::Index>(choice.size()) != ld.rows()) {
    throw Error(ErrorCode::kShapeMismatch, "one device choice per cluster is required");
  }
  Matrix mask = Matrix::Zero(ld.rows(), ld.cols());
  for (std::size_t c = 0; c < choice.size(); ++c) mask(static_cast<Eigen::Index>(c), choice[c]) = 1.0;
  return tape.sum(tape.mul(log_dist, tape.constant(std::move(mask))));
}

// Independent categorical draw per row.
inline std::vector<DeviceId> sample_devices(const Matrix& dist, Rng& rng) {
  std::vector<DeviceId> choice(static_cast<std::size_t>(dist.rows()));
  for (Eigen::Index r = 0; r < dist.rows(); ++r) {
    const double u = rng.uniform();
    double acc = 0.0;
    DeviceId pick = static_cast<DeviceId>(dist.cols()) - 1;
    for (Eigen::Index d = 0; d < dist.cols(); ++d) {
      acc += dist(r, d);
      if (u < acc) {
        pick = static_cast<DeviceId>(d);
        break;
      }
    }
    choice[static_cast<std::size_t>(r)] = pick;
  }
  return choice;
}

struct SampledPlacement {
  std::vector<DeviceId> clusters;
  Var log_prob;
};

inline SampledPlacement sample_placement(Tape& tape, Var dist, Rng& rng) {
  SampledPlacement s;
  s.clusters = sample_devices(tape.value(dist), rng);
  s.log_prob = placement_log_prob(tape, tape.log(dist), s.clusters);
  return s;
}

// Row-wise argmax; ties go to the lower device id.
inline std::vector<DeviceId> greedy_devices(const Matrix& dist) {
  std::vector<DeviceId> choice(static_cast<std::size_t>(dist.rows()));
  for (Eigen::Index r = 0; r < dist.rows(); ++r) {
    Eigen::Index best = 0;
    for (Eigen::Index d = 1; d < dist.cols(); ++d)
      if (dist(r, d) > dist(r, best)) best = d;
    choice[static_cast<std::size_t>(r)] = static_cast<DeviceId>(best);
  }
  return choice;
}

inline Placement lift_placement(const std::vector<DeviceId>& cluster_devices, const AssignMatrix& assign) {
  Placement p;
  p.assignments.reserve(assign.cluster_of.size());
  for (int c : assign.cluster_of) p.assignments.push_back(cluster_devices[static_cast<std::size_t>(c)]);
  return p;
}

// {"assignments": [int, ...], "devices": ["CPU", "GPU", ...]}
inline json placement_to_json(const Placement& p, const DeviceList& devices) {
  return {{"assignments", p.assignments}, {"devices", devices.names}};
}

inline Placement placement_from_json(const json& j) {
  try {
    return {j.at("assignments").get<std::vector<DeviceId>>()};
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("placement json: ") + e.what());
  }
}

}  // namespace dagplace
