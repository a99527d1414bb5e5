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
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "dagplace/compgraph.hpp"
#include "dagplace/error.hpp"
#include "dagplace/graph_io.hpp"
#include "dagplace/policy.hpp"

namespace dagplace {

// Per-op-type compute seconds on each device plus per-unit-volume transfer
// seconds between devices.
struct CostModel {
  std::vector<std::vector<double>> compute;   // [op_type][device]
  std::vector<std::vector<double>> transfer;  // [from][to]

  int num_devices() const { return static_cast<int>(transfer.size()); }

  void check() const {
    const std::size_t d = transfer.size();
    if (d < 1) throw Error(ErrorCode::kParse, "cost model needs at least one device");
    for (std::size_t i = 0; i < d; ++i) {
      if (transfer[i].size() != d) throw Error(ErrorCode::kParse, "transfer matrix must be square");
      if (transfer[i][i] != 0.0) throw Error(ErrorCode::kParse, "transfer cost to the same device must be 0");
      for (double c : transfer[i])
        if (!std::isfinite(c) || c < 0.0) throw Error(ErrorCode::kParse, "transfer costs must be finite and >= 0");
    }
    for (const auto& row : compute)
      for (double c : row)
        if (!std::isfinite(c) || c < 0.0) throw Error(ErrorCode::kParse, "compute costs must be finite and >= 0");
  }

  double compute_cost(int op_type, DeviceId device) const {
    if (op_type < 0 || op_type >= static_cast<int>(compute.size()) || device < 0 ||
        device >= static_cast<int>(compute[op_type].size())) {
      throw Error(ErrorCode::kMissingCost,
                  "no compute cost for op_type " + std::to_string(op_type) + " on device " + std::to_string(device));
    }
    return compute[op_type][device];
  }

  double transfer_cost(DeviceId from, DeviceId to) const {
    if (from < 0 || from >= num_devices() || to < 0 || to >= num_devices()) {
      throw Error(ErrorCode::kMissingCost,
                  "no transfer cost between devices " + std::to_string(from) + " and " + std::to_string(to));
    }
    return transfer[from][to];
  }
};

// Tensor volume moved along an out-edge: product of the producer's output shape.
inline double volume(const OpNode& node) {
  double v = 1.0;
  for (auto dim : node.output_shape) v *= static_cast<double>(dim);
  return v;
}

struct Schedule {
  std::vector<double> start;
  std::vector<double> finish;

  double makespan() const { return finish.empty() ? 0.0 : *std::max_element(finish.begin(), finish.end()); }
};

// Critical-path timing with unbounded parallelism on every device. Graph
// structure is preprocessed once so repeated evaluations stay cheap.
class Simulator {
 public:
  Simulator(const CompGraph& g, const CostModel& cm)
      : graph_(&g), cost_(&cm), topo_(topo_sort(g)), in_(in_adjacency(g)) {
    volume_.reserve(g.nodes.size());
    for (const OpNode& n : g.nodes) volume_.push_back(volume(n));
  }

  Schedule schedule(const Placement& p) const {
    const CompGraph& g = *graph_;
    if (p.size() != g.size()) throw Error(ErrorCode::kShapeMismatch, "placement does not cover every node");
    Schedule s{std::vector<double>(static_cast<std::size_t>(g.size()), 0.0),
               std::vector<double>(static_cast<std::size_t>(g.size()), 0.0)};
    for (NodeId v : topo_.order) {
      const DeviceId dv = p.assignments[v];
      double ready = 0.0;
      for (NodeId u : in_[v]) {
        ready = std::max(ready, s.finish[u] + cost_->transfer_cost(p.assignments[u], dv) * volume_[u]);
      }
      s.start[v] = ready;
      s.finish[v] = ready + cost_->compute_cost(g.nodes[v].op_type, dv);
    }
    return s;
  }

  double latency(const Placement& p) const { return schedule(p).makespan(); }

  const CompGraph& graph() const { return *graph_; }
  const CostModel& cost_model() const { return *cost_; }

 private:
  const CompGraph* graph_;
  const CostModel* cost_;
  TopoOrder topo_;
  Adjacency in_;
  std::vector<double> volume_;
};

inline double simulate(const CompGraph& g, const Placement& p, const CostModel& cm) {
  return Simulator(g, cm).latency(p);
}

inline double reward(double latency) {
  if (!(latency > 0.0)) throw Error(ErrorCode::kNonPositiveLatency, "latency must be positive, got " + std::to_string(latency));
  return 1.0 / latency;
}

// Percent reduction of `latency` relative to `base_latency`.
inline double speedup(double base_latency, double latency) {
  if (!(base_latency > 0.0)) throw Error(ErrorCode::kNonPositiveLatency, "baseline latency must be positive");
  return 100.0 * (base_latency - latency) / base_latency;
}

struct OptimalPlacement {
  Placement placement;
  double latency = 0.0;
};

inline constexpr double kBruteForceLimit = 16777216.0;  // 2^24 placements

// Exhaustive search; the lexicographically smallest minimiser wins.
inline OptimalPlacement brute_force_optimal(const CompGraph& g, const CostModel& cm, int num_devices) {
  if (num_devices < 1) throw Error(ErrorCode::kInvalidConfig, "need at least one device");
  if (std::pow(static_cast<double>(num_devices), g.size()) > kBruteForceLimit) {
    throw Error(ErrorCode::kTooLarge, std::to_string(num_devices) + "^" + std::to_string(g.size()) +
                                          " placements exceed the 2^24 enumeration limit");
  }
  const Simulator sim(g, cm);
  Placement current = Placement::uniform(g.size(), 0);
  OptimalPlacement best{current, sim.latency(current)};
  while (true) {
    int i = g.size() - 1;
    while (i >= 0 && current.assignments[i] == num_devices - 1) current.assignments[i--] = 0;
    if (i < 0) break;
    ++current.assignments[i];
    const double latency = sim.latency(current);
    if (latency < best.latency) best = {current, latency};
  }
  return best;
}

// {"compute": [[seconds per device] per op_type], "transfer": [[seconds per unit] per device]}
inline CostModel cost_model_from_json(const json& j) {
  CostModel cm;
  try {
    cm.compute = j.at("compute").get<std::vector<std::vector<double>>>();
    cm.transfer = j.at("transfer").get<std::vector<std::vector<double>>>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("cost model json: ") + e.what());
  }
  cm.check();
  return cm;
}

inline json cost_model_to_json(const CostModel& cm) { return {{"compute", cm.compute}, {"transfer", cm.transfer}}; }

inline CostModel load_cost_model(const std::filesystem::path& path) { return cost_model_from_json(read_json_file(path)); }

inline void save_cost_model(const std::filesystem::path& path, const CostModel& cm) {
  write_text_file(path, cost_model_to_json(cm).dump(1) + "\n");
}

}  // namespace dagplace
