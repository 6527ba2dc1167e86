#pragma once

// Sensitivity-score propagation and leak detection.
//
// score(n) = max(initial(n), max over edges p->n of max(0, score(p) - decrement))
// is computed as a least fixpoint by monotone worklist iteration. A sink whose
// score stays above zero leaks.

#include <algorithm>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cimflow/error.hpp"
#include "cimflow/flow_graph.hpp"
#include "cimflow/security_config.hpp"

namespace cimflow {

inline constexpr int kReportSchemaVersion = 1;

struct ScoreMap {
  std::map<std::string, Score> scores;
  // Number of score raises after initialization; bounded by nodes x max initial score.
  std::size_t iterations = 0;

  Score at(const std::string& node) const {
    auto it = scores.find(node);
    return it == scores.end() ? 0 : it->second;
  }
};

struct WitnessPath {
  std::vector<std::string> nodes;
  std::vector<std::string> via;  // via[i] labels the edge nodes[i] -> nodes[i + 1]

  bool operator==(const WitnessPath&) const = default;
};

struct Leak {
  std::string sink;
  Score score = 0;
  WitnessPath path;
  std::vector<std::string> configs;  // refined mode: driver configurations exposing the leak

  bool operator==(const Leak&) const = default;
};

struct AnalysisStats {
  std::size_t nodes = 0;
  std::size_t edges = 0;
  std::size_t iterations = 0;
  std::size_t configs = 0;

  bool operator==(const AnalysisStats&) const = default;
};

struct AnalysisReport {
  AnalysisMode mode = AnalysisMode::Conservative;
  std::vector<Leak> leaks;  // sorted by sink
  AnalysisStats stats;
  std::vector<std::string> warnings;
  // Refined mode only: sinks flagged by the conservative analysis of the same design.
  std::optional<std::vector<std::string>> conservative_sinks;

  std::set<std::string> leaking_sinks() const {
    std::set<std::string> out;
    for (const auto& l : leaks) out.insert(l.sink);
    return out;
  }
  bool operator==(const AnalysisReport&) const = default;
};

namespace detail {

inline void require_nodes(const FlowGraph& g, const SecurityConfig& cfg) {
  for (const auto& [net, s] : cfg.sources)
    if (!g.has_node(net)) throw Error(ErrorCode::UnknownNet, "source '" + net + "' is not a node of the flow graph");
  for (const auto& net : cfg.sinks)
    if (!g.has_node(net)) throw Error(ErrorCode::UnknownNet, "sink '" + net + "' is not a node of the flow graph");
}

inline Score residual(Score s, Score decrement) { return s > decrement ? s - decrement : 0; }

}  // namespace detail

inline ScoreMap propagate(const FlowGraph& g, const SecurityConfig& cfg) {
  detail::require_nodes(g, cfg);
  const auto& nodes = g.nodes();
  std::vector<Score> score(nodes.size(), 0);
  std::vector<bool> queued(nodes.size(), false);
  std::deque<std::size_t> work;
  for (const auto& [net, s] : cfg.sources) {
    const auto i = *g.index_of(net);
    score[i] = std::max(score[i], s);
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (score[i] > 0) {
      work.push_back(i);
      queued[i] = true;
    }
  }

  ScoreMap out;
  while (!work.empty()) {
    const auto p = work.front();
    work.pop_front();
    queued[p] = false;
    for (auto ei : g.out_edges(p)) {
      const auto& e = g.edges()[ei];
      const auto n = *g.index_of(e.dst);
      const Score cand = detail::residual(score[p], e.decrement);
      if (cand > score[n]) {
        score[n] = cand;
        ++out.iterations;
        if (!queued[n]) {
          work.push_back(n);
          queued[n] = true;
        }
      }
    }
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) out.scores.emplace(nodes[i], score[i]);
  return out;
}

// One path achieving the sink's residual score: highest score first, then
// fewest edges, then lexicographically smallest node sequence.
inline WitnessPath witness_path(const FlowGraph& g, const ScoreMap& scores, const SecurityConfig& cfg,
                                const std::string& sink) {
  const auto sink_idx = g.index_of(sink);
  if (!sink_idx) throw Error(ErrorCode::UnknownNet, "sink '" + sink + "' is not a node of the flow graph");
  if (scores.at(sink) == 0) throw Error(ErrorCode::NotLeaking, "sink '" + sink + "' has score 0");

  const auto& nodes = g.nodes();
  // An edge lies on an optimal path iff it carries its source's score to its target exactly.
  const auto tight = [&](const Edge& e) {
    const Score ps = scores.at(e.src);
    return ps > e.decrement && ps - e.decrement == scores.at(e.dst);
  };

  constexpr std::size_t kInf = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> dist(nodes.size(), kInf);
  std::deque<std::size_t> bfs{*sink_idx};
  dist[*sink_idx] = 0;
  while (!bfs.empty()) {
    const auto n = bfs.front();
    bfs.pop_front();
    for (auto ei : g.in_edges(n)) {
      const auto& e = g.edges()[ei];
      const auto p = *g.index_of(e.src);
      if (dist[p] == kInf && tight(e)) {
        dist[p] = dist[n] + 1;
        bfs.push_back(p);
      }
    }
  }

  std::optional<std::size_t> start;
  for (const auto& [net, init] : cfg.sources) {
    const auto i = g.index_of(net);
    if (!i || init == 0 || init != scores.at(net) || dist[*i] == kInf) continue;
    if (!start || dist[*i] < dist[*start] || (dist[*i] == dist[*start] && nodes[*i] < nodes[*start])) start = *i;
  }
  if (!start) throw Error(ErrorCode::NotLeaking, "no source explains the score of '" + sink + "'");

  WitnessPath path;
  auto cur = *start;
  path.nodes.push_back(nodes[cur]);
  while (dist[cur] > 0) {
    const Edge* best = nullptr;
    for (auto ei : g.out_edges(cur)) {
      const auto& e = g.edges()[ei];
      const auto n = *g.index_of(e.dst);
      if (dist[n] + 1 != dist[cur] || !tight(e)) continue;
      if (!best || e.dst < best->dst) best = &e;
    }
    path.via.push_back(best->via);
    path.nodes.push_back(best->dst);
    cur = *g.index_of(best->dst);
  }
  return path;
}

inline AnalysisReport detect_leakages(const FlowGraph& g, const ScoreMap& scores, const SecurityConfig& cfg) {
  detail::require_nodes(g, cfg);
  AnalysisReport r;
  r.mode = cfg.mode;
  r.stats.nodes = g.nodes().size();
  r.stats.edges = g.edges().size();
  r.stats.iterations = scores.iterations;
  for (const auto& sink : cfg.sinks) {
    const Score s = scores.at(sink);
    if (s == 0) continue;
    r.leaks.push_back({sink, s, witness_path(g, scores, cfg, sink), {}});
  }
  return r;
}

inline AnalysisReport analyze_graph(const FlowGraph& g, const SecurityConfig& cfg) {
  return detect_leakages(g, propagate(g, cfg), cfg);
}

// ---------------------------------------------------------------------------
// JSON report
//
// {
//   "schema": 1,
//   "mode": "conservative" | "refined",
//   "leaks": [{"sink", "score", "path": [...], "via": [...], "configs": [...]?}],
//   "stats": {"nodes", "edges", "iterations", "configs"},
//   "warnings": [...],
//   "reduction": {"conservative_leaks", "refined_leaks", "removed": [...]}   (refined only)
// }

inline nlohmann::json to_json(const AnalysisReport& r) {
  nlohmann::json j;
  j["schema"] = kReportSchemaVersion;
  j["mode"] = std::string(to_string(r.mode));
  j["leaks"] = nlohmann::json::array();
  for (const auto& l : r.leaks) {
    nlohmann::json lj{{"sink", l.sink}, {"score", l.score}, {"path", l.path.nodes}, {"via", l.path.via}};
    if (r.mode == AnalysisMode::Refined) lj["configs"] = l.configs;
    j["leaks"].push_back(std::move(lj));
  }
  j["stats"] = {{"nodes", r.stats.nodes},
                {"edges", r.stats.edges},
                {"iterations", r.stats.iterations},
                {"configs", r.stats.configs}};
  j["warnings"] = r.warnings;
  if (r.conservative_sinks) {
    std::vector<std::string> removed;
    const auto refined = r.leaking_sinks();
    for (const auto& s : *r.conservative_sinks)
      if (!refined.contains(s)) removed.push_back(s);
    j["reduction"] = {{"conservative_leaks", r.conservative_sinks->size()},
                      {"refined_leaks", r.leaks.size()},
                      {"removed", removed}};
  }
  return j;
}

inline std::string report_text(const AnalysisReport& r) { return to_json(r).dump(2) + "\n"; }

}  // namespace cimflow
