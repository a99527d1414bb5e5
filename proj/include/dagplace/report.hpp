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

#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "dagplace/compgraph.hpp"
#include "dagplace/rl.hpp"
#include "dagplace/simulator.hpp"

namespace dagplace {

inline std::string format_double(const char* fmt, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, value);
  return buf;
}

// Full round-trip precision; identical inputs always give identical text.
inline std::string exact(double value) { return format_double("%.17g", value); }

inline std::string history_csv(const std::vector<HistoryRow>& history) {
  std::string out = "step,episode,latency,reward,num_clusters\n";
  for (const HistoryRow& h : history) {
    out += std::to_string(h.step) + "," + std::to_string(h.episode) + "," + exact(h.latency) + "," + exact(h.reward) +
           "," + std::to_string(h.num_clusters) + "\n";
  }
  return out;
}

struct ResultRow {
  std::string method;
  double latency = 0.0;
  double speedup_pct = 0.0;
};

// Rows with speedup measured against the first row (the all-CPU baseline).
inline std::vector<ResultRow> with_speedups(const std::vector<std::pair<std::string, double>>& rows) {
  std::vector<ResultRow> out;
  if (rows.empty()) return out;
  const double base = rows.front().second;
  for (const auto& [name, latency] : rows) out.push_back({name, latency, speedup(base, latency)});
  return out;
}

inline std::string results_csv(const std::vector<ResultRow>& rows) {
  std::string out = "method,latency,speedup_pct\n";
  for (const ResultRow& r : rows) out += r.method + "," + exact(r.latency) + "," + format_double("%.1f", r.speedup_pct) + "\n";
  return out;
}

// Console table: latency to three significant digits, speedup to one decimal.
inline std::string results_table(const std::vector<ResultRow>& rows) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-18s %14s %12s\n", "method", "l_P(G) [s]", "speedup %");
  out << line;
  for (const ResultRow& r : rows) {
    std::snprintf(line, sizeof line, "%-18s %14.3g %12.1f\n", r.method.c_str(), r.latency, r.speedup_pct);
    out << line;
  }
  return out.str();
}

inline std::string stats_table(const std::string& name, int nodes, int edges) {
  char line[200];
  std::string out;
  std::snprintf(line, sizeof line, "%-24s %8s %8s %8s\n", "graph", "|V|", "|E|", "avg_deg");
  out += line;
  std::snprintf(line, sizeof line, "%-24s %8d %8d %8.2f\n", name.c_str(), nodes, edges, average_degree(nodes, edges));
  out += line;
  return out;
}

}  // namespace dagplace
