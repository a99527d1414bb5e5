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
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "dagplace/compgraph.hpp"
#include "dagplace/error.hpp"

namespace dagplace {

using json = nlohmann::json;

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << text;
}

// Graph schema:
//   {"num_op_types": int,
//    "nodes": [{"id": int, "op_type": int, "output_shape": [int, ...]}, ...],
//    "edges": [[src, dst], ...]}
// Nodes may appear in any order in the file; they are stored sorted by id.
inline CompGraph graph_from_json(const json& j) {
  CompGraph g;
  try {
    g.num_op_types = j.at("num_op_types").get<int>();
    if (g.num_op_types < 1) throw Error(ErrorCode::kParse, "num_op_types must be >= 1");
    for (const auto& jn : j.at("nodes")) {
      OpNode node;
      node.id = jn.at("id").get<int>();
      node.op_type = jn.at("op_type").get<int>();
      node.output_shape = jn.at("output_shape").get<std::vector<std::int64_t>>();
      g.nodes.push_back(std::move(node));
    }
    for (const auto& je : j.at("edges")) {
      if (!je.is_array() || je.size() != 2) throw Error(ErrorCode::kParse, "edge must be [src, dst]");
      g.edges.push_back({je[0].get<int>(), je[1].get<int>()});
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("graph json: ") + e.what());
  }
  std::stable_sort(g.nodes.begin(), g.nodes.end(),
                   [](const OpNode& a, const OpNode& b) { return a.id < b.id; });
  validate_or_throw(g);
  return g;
}

inline json graph_to_json(const CompGraph& g) {
  json nodes = json::array();
  for (const OpNode& n : g.nodes) {
    nodes.push_back({{"id", n.id}, {"op_type", n.op_type}, {"output_shape", n.output_shape}});
  }
  json edges = json::array();
  for (const Edge& e : g.edges) edges.push_back({e.src, e.dst});
  return {{"num_op_types", g.num_op_types}, {"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
}

inline CompGraph load_graph(const std::filesystem::path& path) {
  return graph_from_json(read_json_file(path));
}

inline void save_graph(const std::filesystem::path& path, const CompGraph& g) {
  write_text_file(path, graph_to_json(g).dump(1) + "\n");
}

}  // namespace dagplace
