#pragma once

// Mask-aware analysis: every allowed driver configuration grounds all but one
// word line, one source line and (for SET/RESET/READ) every bit line. Grounded
// lines are constant, so the per-configuration graph drops their outgoing
// edges and the channels of selectors whose gate they hold. Leaks are the
// union over configurations.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cimflow/error.hpp"
#include "cimflow/flow_graph.hpp"
#include "cimflow/ift_engine.hpp"
#include "cimflow/mask.hpp"
#include "cimflow/netlist.hpp"

namespace cimflow {

inline FlowGraph refine_graph(const FlowGraph& g, const DriverConfig& config, const ElaboratedNetlist& nl) {
  std::set<std::string> grounded;
  for (const auto& [name, role] : config.assignments) {
    auto net = nl.resolve(name);
    if (!net || !g.has_node(*net))
      throw Error(ErrorCode::ConfigNetMismatch,
                  "configuration '" + config.label() + "' names '" + name + "', which is not a net of the design");
    if (role == LineRole::Gnd) grounded.insert(*net);
  }
  if (grounded.empty()) return g;

  std::set<std::string> off;
  for (const auto& d : nl.devices)
    if ((d.kind == DeviceKind::Nmos || d.kind == DeviceKind::Pmos) && transistor_off(d, grounded, {}))
      off.insert(d.name);
  return g.filter([&](const Edge& e) {
    if (grounded.contains(e.src)) return false;
    return !(e.kind == EdgeKind::AnalogChannel && off.contains(e.via));
  });
}

inline AnalysisReport analyze_conservative(const ElaboratedNetlist& nl, const SecurityConfig& cfg) {
  auto c = canonicalize(cfg, nl);
  c.mode = AnalysisMode::Conservative;
  return analyze_graph(build_flow_graph(nl, c), c);
}

// Union of per-configuration analyses. With cfg.mode == conservative the mask
// is ignored and the plain conservative analysis is returned.
inline AnalysisReport analyze_masked(const ElaboratedNetlist& nl, const std::vector<DriverConfig>& configs,
                                     const SecurityConfig& cfg) {
  if (cfg.mode == AnalysisMode::Conservative) return analyze_conservative(nl, cfg);

  const auto c = canonicalize(cfg, nl);
  const auto base = build_flow_graph(nl, c);

  AnalysisReport r;
  r.mode = AnalysisMode::Refined;
  r.stats.nodes = base.nodes().size();
  r.stats.edges = base.edges().size();
  r.stats.configs = configs.size();
  if (configs.empty()) r.warnings.push_back("mask admits no configuration; nothing was analyzed");

  std::map<std::string, Leak> merged;
  for (const auto& config : configs) {
    const auto g = refine_graph(base, config, nl);
    const auto scores = propagate(g, c);
    r.stats.iterations += scores.iterations;
    for (auto& leak : detect_leakages(g, scores, c).leaks) {
      auto [it, inserted] = merged.emplace(leak.sink, leak);
      if (!inserted && leak.score > it->second.score) {
        it->second.score = leak.score;
        it->second.path = leak.path;
      }
      it->second.configs.push_back(config.label());
    }
  }
  for (auto& [sink, leak] : merged) r.leaks.push_back(std::move(leak));

  std::vector<std::string> conservative;
  for (const auto& s : analyze_conservative(nl, cfg).leaking_sinks()) conservative.push_back(s);
  r.conservative_sinks = std::move(conservative);
  return r;
}

// Entry point used by the command line: refined mode requires a mask.
inline AnalysisReport analyze_design(const ElaboratedNetlist& nl, const SecurityConfig& cfg,
                                     const std::optional<std::vector<DriverConfig>>& mask) {
  if (cfg.mode == AnalysisMode::Refined) {
    if (!mask) throw Error(ErrorCode::MissingMask, "refined mode needs the design's .mask sidecar");
    return analyze_masked(nl, *mask, cfg);
  }
  return analyze_conservative(nl, cfg);
}

}  // namespace cimflow
