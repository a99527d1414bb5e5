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
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "dagplace/autograd.hpp"
#include "dagplace/compgraph.hpp"
#include "dagplace/encoder.hpp"
#include "dagplace/features.hpp"
#include "dagplace/fpenv.hpp"
#include "dagplace/parser.hpp"
#include "dagplace/policy.hpp"
#include "dagplace/rng.hpp"
#include "dagplace/simulator.hpp"

namespace dagplace {

struct TrainConfig {
  int max_episodes = 100;
  int update_timestep = 20;
  int k_epochs = 4;
  double gamma = 0.99;
  double learning_rate = 1e-4;
  std::uint64_t seed = 0;
  // Subtract the buffer's mean reward before weighting log-probabilities.
  // Off by default; plain REINFORCE uses the raw 1/latency reward.
  bool reward_baseline = false;

  void check() const {
    if (max_episodes < 1) throw Error(ErrorCode::kInvalidConfig, "max_episodes must be >= 1");
    if (update_timestep < 1) throw Error(ErrorCode::kInvalidConfig, "update_timestep must be >= 1");
    if (k_epochs < 1) throw Error(ErrorCode::kInvalidConfig, "k_epochs must be >= 1");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw Error(ErrorCode::kInvalidConfig, "gamma must be in (0, 1]");
    if (!(learning_rate > 0.0)) throw Error(ErrorCode::kInvalidConfig, "learning_rate must be positive");
  }
};

struct ModelConfig {
  FeatureConfig features;
  EncoderConfig encoder;
  ParserConfig parser;
  int num_devices = 2;
};

// Everything needed to replay one step's log-probability under new parameters.
struct StepRecord {
  int step_index = 0;  // 1-based position in the buffer
  double latency = 0.0;
  double reward = 0.0;
  double log_prob = 0.0;  // at sampling time
  int num_clusters = 0;
  Placement placement;    // over the original nodes

  Matrix features;
  Matrix carry;
  NormAdjacency norm;
  AssignMatrix clusters;
  std::vector<DeviceId> cluster_devices;
};

struct HistoryRow {
  long step = 0;
  int episode = 0;
  double latency = 0.0;
  double reward = 0.0;
  int num_clusters = 0;
};

struct TrainResult {
  Placement best_placement;
  double best_latency = std::numeric_limits<double>::infinity();
  std::vector<HistoryRow> history;
  long pooled_two_cycles = 0;
};

struct PlacementModel {
  Encoder encoder;
  EdgeScorer scorer;
  Placer placer;

  PlacementModel(int feature_width, const ModelConfig& cfg, Rng& rng)
      : encoder(feature_width, cfg.encoder, rng),
        scorer(cfg.encoder.hidden_channel, cfg.parser, rng),
        placer(cfg.encoder.hidden_channel, cfg.num_devices, rng) {}

  std::vector<Tensor*> parameters() {
    std::vector<Tensor*> out;
    encoder.collect(out);
    scorer.collect(out);
    placer.collect(out);
    return out;
  }
};

namespace detail {

// Per-column max-abs scaling so raw shape sizes do not swamp the one-hots.
inline Matrix scale_columns(const Matrix& x) {
  Matrix out = x;
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const double m = x.col(c).cwiseAbs().maxCoeff();
    if (m > 0.0) out.col(c) /= m;
  }
  return out;
}

inline Matrix mean_pool(const Matrix& rows, const AssignMatrix& assign) {
  Matrix out = Matrix::Zero(assign.cluster_count, rows.cols());
  const std::vector<int> sizes = assign.cluster_sizes();
  for (int v = 0; v < assign.node_count(); ++v) out.row(assign.cluster_of[v]) += rows.row(v);
  for (int c = 0; c < assign.cluster_count; ++c) out.row(c) /= sizes[c];
  return out;
}

inline Matrix normalize_rows(Matrix m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const double n = m.row(r).norm();
    if (n > 0.0) m.row(r) /= n;
  }
  return m;
}

}  // namespace detail

// REINFORCE trainer over iterative parse -> place -> simulate steps.
//
// The policy works on a "base" graph: the original graph, or its co-location
// coarsening when a base grouping is supplied. Each step coarsens the current
// state graph once more; placements are always lifted back to the original
// nodes before simulation. When coarsening reaches one cluster (or stalls on an
// edgeless state) the state returns to the base graph. Carried embeddings live
// on base nodes, so they survive that reset.
class Trainer {
 public:
  Trainer(const CompGraph& original, const CostModel& cm, TrainConfig cfg, ModelConfig model_cfg,
          std::optional<Colocation> colocation = std::nullopt)
      : original_(original),
        cost_(cm),
        cfg_(cfg),
        model_cfg_(model_cfg),
        simulator_(original_, cost_),
        base_graph_(colocation ? colocation->coarse : original_),
        base_assign_(colocation ? AssignMatrix{colocation->membership, colocation->coarse.size()}
                                : AssignMatrix::identity(original_.size())),
        features_(detail::scale_columns(build_features(base_graph_, model_cfg_.features).values)),
        rng_(cfg.seed),
        model_(init_model(features_.cols(), model_cfg_, rng_)),
        optimizer_(model_.parameters(), AdamConfig{cfg.learning_rate, 0.9, 0.999, 1e-8}),
        sample_rng_(rng_.fork()) {
    cfg_.check();
    if (cost_.num_devices() != model_cfg_.num_devices) {
      throw Error(ErrorCode::kInvalidConfig, "cost model has " + std::to_string(cost_.num_devices()) +
                                                 " devices but num_devices is " + std::to_string(model_cfg_.num_devices));
    }
    reset_episode();
  }

  Trainer(const Trainer&) = delete;
  Trainer& operator=(const Trainer&) = delete;

  const TrainConfig& config() const { return cfg_; }
  const CompGraph& base_graph() const { return base_graph_; }
  PlacementModel& model() { return model_; }
  int state_size() const { return state_assign_.cluster_count; }
  const Matrix& carry() const { return carry_; }
  const AssignMatrix& state_assignment() const { return state_assign_; }
  const Simulator& simulator() const { return simulator_; }

  // Fresh episode: base graph state, zero carried embeddings.
  void reset_episode() {
    reset_state();
    carry_ = Matrix::Zero(base_graph_.size(), model_cfg_.encoder.hidden_channel);
  }

  StepRecord step() {
    FlushDenormals ftz;
    StepRecord rec;
    rec.features = detail::mean_pool(features_, state_assign_);
    rec.carry = detail::normalize_rows(detail::mean_pool(carry_, state_assign_));
    rec.norm = normalize_adjacency(state_assign_.cluster_count, state_edges_);

    Tape tape;
    Var z = model_.encoder.forward(tape, rec.features, rec.norm, &rec.carry, &sample_rng_);
    rec.clusters = cluster(tape, z, state_edges_, true);
    Var pooled = tape.scatter_add_rows(z, rec.clusters.cluster_of, rec.clusters.cluster_count);
    Var log_dist = device_log_distribution(tape, pooled, model_.placer);
    const Matrix dist = tape.value(log_dist).array().exp().matrix();
    rec.cluster_devices = sample_devices(dist, sample_rng_);
    rec.log_prob = tape.scalar(placement_log_prob(tape, log_dist, rec.cluster_devices));
    rec.num_clusters = rec.clusters.cluster_count;

    const AssignMatrix to_cluster = compose(compose(base_assign_, state_assign_), rec.clusters);
    rec.placement = lift_placement(rec.cluster_devices, to_cluster);
    rec.latency = simulator_.latency(rec.placement);
    rec.reward = reward(rec.latency);

    // Carry-over: each base node accumulates the pooled embedding of its cluster.
    const Matrix& pooled_z = tape.value(pooled);
    const AssignMatrix base_to_cluster = compose(state_assign_, rec.clusters);
    for (int b = 0; b < base_to_cluster.node_count(); ++b) carry_.row(b) += pooled_z.row(base_to_cluster.cluster_of[b]);

    const PooledGraph next = pool(rec.clusters, state_edges_, Matrix());
    two_cycles_ += next.two_cycles;
    if (next.size <= 1 || next.size == state_assign_.cluster_count) {
      reset_state();
    } else {
      state_assign_ = base_to_cluster;
      state_edges_ = next.edges;
    }
    return rec;
  }

  // Buffered REINFORCE update: loss = -sum_i gamma^i * r_i * log p_i,
  // repeated k_epochs times with log-probabilities recomputed under the current
  // parameters for the recorded placements.
  void update(std::vector<StepRecord>& buffer) {
    if (buffer.empty()) throw Error(ErrorCode::kEmptyBuffer, "update called with an empty buffer");
    FlushDenormals ftz;
    double baseline = 0.0;
    if (cfg_.reward_baseline) {
      for (const StepRecord& r : buffer) baseline += r.reward;
      baseline /= static_cast<double>(buffer.size());
    }
    for (int epoch = 0; epoch < cfg_.k_epochs; ++epoch) {
      optimizer_.zero_grad();
      Tape tape;
      Var loss = surrogate_loss(tape, buffer, baseline, &sample_rng_);
      tape.backward(loss);
      optimizer_.step();
    }
    buffer.clear();
  }

  // Surrogate whose gradient is the buffered policy-gradient estimate.
  Var surrogate_loss(Tape& tape, const std::vector<StepRecord>& buffer, double baseline, Rng* dropout_rng) {
    std::optional<Var> total;
    for (const StepRecord& r : buffer) {
      Var lp = replay_log_prob(tape, r, dropout_rng);
      const double weight = -std::pow(cfg_.gamma, r.step_index) * (r.reward - baseline);
      Var term = tape.scale(lp, weight);
      total = total ? tape.add(*total, term) : term;
    }
    return *total;
  }

  Var replay_log_prob(Tape& tape, const StepRecord& r, Rng* dropout_rng) {
    Var z = model_.encoder.forward(tape, r.features, r.norm, &r.carry, dropout_rng);
    Var pooled = tape.scatter_add_rows(z, r.clusters.cluster_of, r.clusters.cluster_count);
    Var log_dist = device_log_distribution(tape, pooled, model_.placer);
    return placement_log_prob(tape, log_dist, r.cluster_devices);
  }

  using EpisodeCallback = std::function<void(int episode, Trainer&)>;

  TrainResult train(const EpisodeCallback& on_episode_end = {}) {
    FlushDenormals ftz;
    TrainResult result;
    long step_counter = 0;
    std::vector<StepRecord> buffer;
    for (int episode = 1; episode <= cfg_.max_episodes; ++episode) {
      reset_episode();
      for (int i = 1; i <= cfg_.update_timestep; ++i) {
        StepRecord rec = step();
        rec.step_index = i;
        result.history.push_back({++step_counter, episode, rec.latency, rec.reward, rec.num_clusters});
        if (rec.latency < result.best_latency) {
          result.best_latency = rec.latency;
          result.best_placement = rec.placement;
        }
        buffer.push_back(std::move(rec));
      }
      update(buffer);
      if (on_episode_end) on_episode_end(episode, *this);
    }
    result.pooled_two_cycles = two_cycles_;
    return result;
  }

  struct Decision {
    AssignMatrix to_cluster;  // original node -> cluster
    Matrix dist;              // cluster x device probabilities
  };

  // Deterministic forward pass from a fresh base-graph state (no dropout).
  Decision evaluate() {
    FlushDenormals ftz;
    const AssignMatrix identity = AssignMatrix::identity(base_graph_.size());
    const Matrix zero_carry = Matrix::Zero(base_graph_.size(), model_cfg_.encoder.hidden_channel);
    Tape tape;
    Var z = model_.encoder.forward(tape, features_, normalize_adjacency(base_graph_), &zero_carry, nullptr);
    const AssignMatrix clusters = cluster(tape, z, base_graph_.edges, false);
    Var pooled = tape.scatter_add_rows(z, clusters.cluster_of, clusters.cluster_count);
    Var dist = device_distribution(tape, pooled, model_.placer);
    return {compose(base_assign_, clusters), tape.value(dist)};
  }

  // Argmax device per cluster at the fresh state, lifted to the original nodes.
  Placement greedy_placement() {
    const Decision d = evaluate();
    return lift_placement(greedy_devices(d.dist), d.to_cluster);
  }

  // Probability that the fresh-state policy emits `target` (0 if `target`
  // splits one of its clusters).
  double placement_probability(const Placement& target) {
    const Decision d = evaluate();
    std::vector<DeviceId> per_cluster(static_cast<std::size_t>(d.to_cluster.cluster_count), -1);
    for (int v = 0; v < d.to_cluster.node_count(); ++v) {
      DeviceId& slot = per_cluster[d.to_cluster.cluster_of[v]];
      if (slot >= 0 && slot != target.assignments[v]) return 0.0;
      slot = target.assignments[v];
    }
    double p = 1.0;
    for (std::size_t c = 0; c < per_cluster.size(); ++c) p *= d.dist(static_cast<Eigen::Index>(c), per_cluster[c]);
    return p;
  }

 private:
  static PlacementModel init_model(Eigen::Index width, const ModelConfig& cfg, Rng& rng) {
    Rng init = rng.fork();
    return PlacementModel(static_cast<int>(width), cfg, init);
  }

  void reset_state() {
    state_assign_ = AssignMatrix::identity(base_graph_.size());
    state_edges_ = base_graph_.edges;
  }

  // Score edges (tape-free for gradients: parsing is discrete), keep dominant
  // edges and group their components.
  AssignMatrix cluster(Tape& tape, Var z, const std::vector<Edge>& edges, bool training) {
    const int n = static_cast<int>(tape.value(z).rows());
    std::vector<Edge> kept = edges;
    if (training && model_cfg_.parser.dropout_parsing > 0.0) {
      kept.clear();
      for (const Edge& e : edges)
        if (!sample_rng_.bernoulli(model_cfg_.parser.dropout_parsing)) kept.push_back(e);
    }
    if (kept.empty()) return AssignMatrix::identity(n);
    Tape scoring;
    Var zc = scoring.constant(tape.value(z));
    Var s = score_edges(scoring, zc, kept, model_.scorer);
    return parse_clusters(retain_dominant_edges(edge_scores_from(scoring, s, kept), n), n);
  }

  CompGraph original_;
  CostModel cost_;
  TrainConfig cfg_;
  ModelConfig model_cfg_;
  Simulator simulator_;
  CompGraph base_graph_;
  AssignMatrix base_assign_;
  Matrix features_;
  Rng rng_;
  PlacementModel model_;
  Adam optimizer_;
  Rng sample_rng_;

  AssignMatrix state_assign_;  // base node -> state node
  std::vector<Edge> state_edges_;
  Matrix carry_;
  long two_cycles_ = 0;
};

inline TrainResult train(const CompGraph& graph, const CostModel& cm, const TrainConfig& cfg,
                         const ModelConfig& model_cfg = {}) {
  Trainer trainer(graph, cm, cfg, model_cfg);
  return trainer.train();
}

}  // namespace dagplace
