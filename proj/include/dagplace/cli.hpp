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

#include <filesystem>
#include <map>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dagplace/compgraph.hpp"
#include "dagplace/fixtures.hpp"
#include "dagplace/graph_io.hpp"
#include "dagplace/policy.hpp"
#include "dagplace/report.hpp"
#include "dagplace/rl.hpp"
#include "dagplace/simulator.hpp"

namespace dagplace::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

struct RunConfig {
  std::string graph;
  std::string cost_model;
  std::string out_dir = "run";
  TrainConfig train;
  ModelConfig model;
  bool colocate = false;
  bool baselines = true;
  bool brute_force = true;

  // Resolved snapshot; also the list of accepted config keys.
  json to_json() const {
    return {
        {"graph", graph},
        {"cost_model", cost_model},
        {"out_dir", out_dir},
        {"max_episodes", train.max_episodes},
        {"update_timestep", train.update_timestep},
        {"k_epochs", train.k_epochs},
        {"gamma", train.gamma},
        {"learning_rate", train.learning_rate},
        {"seed", train.seed},
        {"reward_baseline", train.reward_baseline},
        {"d_pos", model.features.d_pos},
        {"pe_base", model.features.pe_base},
        {"hidden_channel", model.encoder.hidden_channel},
        {"layer_gnn", model.encoder.layer_gnn},
        {"layer_trans", model.encoder.layer_trans},
        {"dropout_network", model.encoder.dropout_network},
        {"activation_final", model.encoder.activation_final},
        {"layer_parsingnet", model.parser.layer_parsingnet},
        {"dropout_parsing", model.parser.dropout_parsing},
        {"link_ignore_self_loop", true},
        {"num_devices", model.num_devices},
        {"colocate", colocate},
        {"baselines", baselines},
        {"brute_force", brute_force},
    };
  }

  static RunConfig from_json(const json& j) {
    const json known = RunConfig{}.to_json();
    for (const auto& [key, value] : j.items()) {
      if (!known.contains(key)) throw Error(ErrorCode::kInvalidConfig, "unknown config key '" + key + "'");
    }
    json merged = known;
    merged.update(j);
    RunConfig c;
    try {
      c.graph = merged.at("graph").get<std::string>();
      c.cost_model = merged.at("cost_model").get<std::string>();
      c.out_dir = merged.at("out_dir").get<std::string>();
      c.train.max_episodes = merged.at("max_episodes").get<int>();
      c.train.update_timestep = merged.at("update_timestep").get<int>();
      c.train.k_epochs = merged.at("k_epochs").get<int>();
      c.train.gamma = merged.at("gamma").get<double>();
      c.train.learning_rate = merged.at("learning_rate").get<double>();
      c.train.seed = merged.at("seed").get<std::uint64_t>();
      c.train.reward_baseline = merged.at("reward_baseline").get<bool>();
      c.model.features.d_pos = merged.at("d_pos").get<int>();
      c.model.features.pe_base = merged.at("pe_base").get<double>();
      c.model.encoder.hidden_channel = merged.at("hidden_channel").get<int>();
      c.model.encoder.layer_gnn = merged.at("layer_gnn").get<int>();
      c.model.encoder.layer_trans = merged.at("layer_trans").get<int>();
      c.model.encoder.dropout_network = merged.at("dropout_network").get<double>();
      c.model.encoder.activation_final = merged.at("activation_final").get<bool>();
      c.model.parser.layer_parsingnet = merged.at("layer_parsingnet").get<int>();
      c.model.parser.dropout_parsing = merged.at("dropout_parsing").get<double>();
      c.model.num_devices = merged.at("num_devices").get<int>();
      c.colocate = merged.at("colocate").get<bool>();
      c.baselines = merged.at("baselines").get<bool>();
      c.brute_force = merged.at("brute_force").get<bool>();
      if (!merged.at("link_ignore_self_loop").get<bool>()) {
        throw Error(ErrorCode::kInvalidConfig, "link_ignore_self_loop must be true; self-loops are never scored");
      }
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kInvalidConfig, std::string("config: ") + e.what());
    }
    c.train.check();
    c.model.features.check();
    if (c.model.num_devices < 2) throw Error(ErrorCode::kInvalidConfig, "num_devices must be >= 2");
    if (c.model.encoder.hidden_channel < 1 || c.model.encoder.layer_gnn < 1 || c.model.encoder.layer_trans < 1 ||
        c.model.parser.layer_parsingnet < 1) {
      throw Error(ErrorCode::kInvalidConfig, "layer counts and hidden_channel must be >= 1");
    }
    return c;
  }
};

namespace detail {

inline std::string kebab(std::string key) {
  for (char& ch : key)
    if (ch == '_') ch = '-';
  return key;
}

// Converts a flag's text to the JSON type of the key's default value.
inline json typed_value(const json& like, const std::string& key, const std::string& text) {
  try {
    if (like.is_boolean()) {
      if (text == "true" || text == "1" || text == "on") return true;
      if (text == "false" || text == "0" || text == "off") return false;
      throw Error(ErrorCode::kInvalidConfig, "--" + kebab(key) + " expects true/false");
    }
    if (like.is_number_unsigned()) return static_cast<std::uint64_t>(std::stoull(text));
    if (like.is_number_integer()) return std::stoi(text);
    if (like.is_number_float()) return std::stod(text);
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::kInvalidConfig, "--" + kebab(key) + ": cannot parse '" + text + "'");
  }
  return text;
}

// One --kebab-key option per config key, plus --config for a JSON file.
struct ConfigFlags {
  std::string config_path;
  std::map<std::string, std::string> values;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "JSON config file; flags override it");
    const json keys = RunConfig{}.to_json();
    for (const auto& [key, value] : keys.items()) {
      const char* type = value.is_boolean() ? "BOOL" : value.is_number_integer() ? "INT" : value.is_number() ? "FLOAT" : "TEXT";
      app->add_option("--" + kebab(key), values[key], "config key " + key)
          ->type_name(type)
          ->default_str(value.is_string() ? value.get<std::string>() : value.dump());
    }
  }

  RunConfig resolve(const CLI::App* app) const {
    json j = json::object();
    if (!config_path.empty()) {
      j = read_json_file(config_path);
      if (!j.is_object()) throw Error(ErrorCode::kInvalidConfig, config_path + " is not a JSON object");
    }
    RunConfig::from_json(j);  // reject unknown keys in the file before merging flags
    const json defaults = RunConfig{}.to_json();
    for (const auto& [key, text] : values) {
      if (app->count("--" + kebab(key)) > 0) j[key] = typed_value(defaults.at(key), key, text);
    }
    return RunConfig::from_json(j);
  }
};

struct Inputs {
  CompGraph graph;
  CostModel costs;
};

inline Inputs load_inputs(const RunConfig& c) {
  if (c.graph.empty()) throw Error(ErrorCode::kInvalidConfig, "no graph given (--graph)");
  if (c.cost_model.empty()) throw Error(ErrorCode::kInvalidConfig, "no cost model given (--cost-model)");
  Inputs in{load_graph(c.graph), load_cost_model(c.cost_model)};
  if (in.costs.num_devices() != c.model.num_devices) {
    throw Error(ErrorCode::kInvalidConfig, c.cost_model + " describes " + std::to_string(in.costs.num_devices()) +
                                               " devices but num_devices is " + std::to_string(c.model.num_devices));
  }
  return in;
}

inline Placement random_placement(int n, int devices, std::uint64_t seed) {
  Rng rng(seed ^ 0xa5a5a5a5a5a5a5a5ULL);
  Placement p;
  for (int i = 0; i < n; ++i) p.assignments.push_back(static_cast<DeviceId>(rng.below(static_cast<std::uint64_t>(devices))));
  return p;
}

inline bool brute_force_feasible(const CompGraph& g, int devices) {
  return std::pow(static_cast<double>(devices), g.size()) <= kBruteForceLimit;
}

inline std::vector<std::pair<std::string, double>> baseline_rows(const Inputs& in, const RunConfig& c) {
  const Simulator sim(in.graph, in.costs);
  const int n = in.graph.size();
  std::vector<std::pair<std::string, double>> rows{
      {"cpu-only", sim.latency(Placement::uniform(n, 0))},
      {"gpu-only", sim.latency(Placement::uniform(n, 1))},
      {"random", sim.latency(random_placement(n, c.model.num_devices, c.train.seed))},
  };
  if (c.brute_force && brute_force_feasible(in.graph, c.model.num_devices)) {
    rows.push_back({"brute-force", brute_force_optimal(in.graph, in.costs, c.model.num_devices).latency});
  }
  return rows;
}

}  // namespace detail

inline int cmd_train(const RunConfig& c, std::ostream& out) {
  const detail::Inputs in = detail::load_inputs(c);
  std::optional<Colocation> coloc;
  if (c.colocate) coloc = colocate(in.graph);
  Trainer trainer(in.graph, in.costs, c.train, c.model, coloc);
  const TrainResult result = trainer.train();
  const Placement greedy = trainer.greedy_placement();
  const DeviceList devices = DeviceList::make(c.model.num_devices);

  std::vector<std::pair<std::string, double>> rows;
  const Simulator sim(in.graph, in.costs);
  if (c.baselines) {
    rows = detail::baseline_rows(in, c);
  } else {
    rows.push_back({"cpu-only", sim.latency(Placement::uniform(in.graph.size(), 0))});
  }
  rows.push_back({"learned-best", result.best_latency});
  rows.push_back({"learned-greedy", sim.latency(greedy)});
  const std::vector<ResultRow> table = with_speedups(rows);

  const std::filesystem::path dir(c.out_dir);
  std::filesystem::create_directories(dir);
  write_text_file(dir / "history.csv", history_csv(result.history));
  write_text_file(dir / "best_placement.json", placement_to_json(result.best_placement, devices).dump() + "\n");
  write_text_file(dir / "config.json", c.to_json().dump(2) + "\n");
  write_text_file(dir / "results.csv", results_csv(table));

  out << results_table(table);
  out << "steps: " << result.history.size() << "  pooled 2-cycles: " << result.pooled_two_cycles << "\n";
  out << "artifacts written to " << dir.string() << "\n";
  return kExitOk;
}

inline int cmd_baselines(const RunConfig& c, std::ostream& out) {
  const detail::Inputs in = detail::load_inputs(c);
  const std::vector<ResultRow> table = with_speedups(detail::baseline_rows(in, c));
  const std::filesystem::path dir(c.out_dir);
  std::filesystem::create_directories(dir);
  write_text_file(dir / "baselines.csv", results_csv(table));
  out << results_table(table);
  return kExitOk;
}

inline int cmd_stats(const std::string& path, std::ostream& out) {
  const CompGraph g = load_graph(path);
  out << stats_table(std::filesystem::path(path).filename().string(), g.size(), g.edge_count());
  return kExitOk;
}

inline int cmd_gen_fixture(const std::string& kind, int size, std::uint64_t seed, const std::string& out_dir,
                           std::ostream& out) {
  const CompGraph g = fixtures::generate(fixtures::parse_kind(kind), size, seed);
  validate_or_throw(g);
  const CostModel cm = fixtures::heterogeneous_costs(g, seed);
  const std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);
  save_graph(dir / "graph.json", g);
  save_cost_model(dir / "cost_model.json", cm);
  out << stats_table(kind, g.size(), g.edge_count());
  out << "wrote " << (dir / "graph.json").string() << " and " << (dir / "cost_model.json").string() << "\n";
  return kExitOk;
}

// Entry point shared by the executable and the tests.
// Exit codes: 0 success, 1 runtime failure, 2 usage or input error.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Device placement for computation graphs via graph parsing and REINFORCE"};
  app.require_subcommand(1);

  detail::ConfigFlags train_flags, baseline_flags;
  CLI::App* train = app.add_subcommand("train", "train a placement policy and write run artifacts");
  train_flags.attach(train);
  CLI::App* baselines = app.add_subcommand("baselines", "evaluate cpu-only, gpu-only, random and brute-force placements");
  baseline_flags.attach(baselines);

  std::string stats_path;
  CLI::App* stats = app.add_subcommand("stats", "print |V|, |E| and average degree of a graph");
  stats->add_option("graph", stats_path, "graph JSON file")->required();

  std::string kind = "random-dag", fixture_dir = ".";
  int size = 10;
  std::uint64_t seed = 0;
  CLI::App* gen = app.add_subcommand("gen-fixture", "generate a synthetic graph and cost model");
  gen->add_option("--kind", kind, "chain | diamond-chain | random-dag | inception-like");
  gen->add_option("--size", size, "number of nodes");
  gen->add_option("--seed", seed, "generator seed");
  gen->add_option("--out-dir", fixture_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  // Loading problems (bad config, unreadable or invalid inputs) are usage errors.
  auto classify = [](const Error& e) {
    switch (e.code()) {
      case ErrorCode::kIo:
      case ErrorCode::kParse:
      case ErrorCode::kInvalidConfig:
      case ErrorCode::kCycleDetected:
      case ErrorCode::kDanglingEdge:
      case ErrorCode::kDuplicateEdge:
      case ErrorCode::kSelfLoop:
      case ErrorCode::kInvalidNodeIds:
      case ErrorCode::kTypeIndexOutOfRange:
        return kExitUsage;
      default:
        return kExitRuntime;
    }
  };

  try {
    if (*train) return cmd_train(train_flags.resolve(train), out);
    if (*baselines) return cmd_baselines(baseline_flags.resolve(baselines), out);
    if (*stats) return cmd_stats(stats_path, out);
    if (*gen) {
      if (size < 0) throw Error(ErrorCode::kInvalidConfig, "--size must be >= 0");
      return cmd_gen_fixture(kind, size, seed, fixture_dir, out);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return classify(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace dagplace::cli
