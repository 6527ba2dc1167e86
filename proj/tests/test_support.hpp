#pragma once

// Shared helpers and independent oracles for the test suites. The oracles
// derive flow directly from the elaborated netlist and never go through
// FlowGraph or the worklist engine.

#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "cimflow/cimflow.hpp"

namespace cimflow::testing {

// Flow-mimicking memristor model, kept character for character.
inline constexpr const char* kMemristorFlowModel = R"(// Mimicking the information flow
// in memristors
module memristor (ae, oe);
    inout ae, oe;
    
    assign ae = ae | oe;
    assign oe = ae | oe;
endmodule
)";

inline ElaboratedNetlist load(const std::string& verilog, std::string top = {}) {
  auto modules = parse_verilog(verilog);
  if (top.empty()) top = find_top_module(modules);
  return elaborate(modules, top);
}

inline ElaboratedNetlist load(const GeneratedDesign& d) { return load(d.verilog, d.top); }

// Dense boolean adjacency over the netlist's nets.
struct ReachOracle {
  std::vector<std::string> names;
  std::map<std::string, std::size_t> index;
  std::vector<std::vector<bool>> adj;

  explicit ReachOracle(const ElaboratedNetlist& nl) : names(nl.nets.begin(), nl.nets.end()) {
    for (std::size_t i = 0; i < names.size(); ++i) index[names[i]] = i;
    adj.assign(names.size(), std::vector<bool>(names.size(), false));
  }

  void link(const std::string& a, const std::string& b) { adj[index.at(a)][index.at(b)] = true; }

  // Floyd-Warshall transitive closure.
  std::vector<std::vector<bool>> closure() const {
    auto c = adj;
    const auto n = names.size();
    for (std::size_t i = 0; i < n; ++i) c[i][i] = true;
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < n; ++i)
        if (c[i][k])
          for (std::size_t j = 0; j < n; ++j)
            if (c[k][j]) c[i][j] = true;
    return c;
  }

  std::set<std::string> reachable_sinks(const std::set<std::string>& sources, const std::set<std::string>& sinks) const {
    const auto c = closure();
    std::set<std::string> out;
    for (const auto& s : sources)
      for (const auto& t : sinks)
        if (c[index.at(s)][index.at(t)]) out.insert(t);
    return out;
  }
};

// Conservative flow from the netlist, optionally with a set of grounded nets
// (outgoing flow suppressed, nmos selectors gated by them open).
inline ReachOracle netlist_oracle(const ElaboratedNetlist& nl, const std::set<std::string>& grounded = {}) {
  ReachOracle o(nl);
  const auto add = [&](const std::string& a, const std::string& b) {
    if (a != b && !grounded.count(a)) o.link(a, b);
  };
  for (const auto& a : nl.assigns)
    for (const auto& s : a.sources) add(s, a.target);
  for (const auto& d : nl.devices) {
    const auto& p = d.pins;
    switch (d.kind) {
      case DeviceKind::Memristor:
        add(p.at("ae"), p.at("oe"));
        add(p.at("oe"), p.at("ae"));
        break;
      case DeviceKind::Nmos:
      case DeviceKind::Pmos: {
        const bool open = d.kind == DeviceKind::Nmos && grounded.count(p.at("gate"));
        if (!open) {
          add(p.at("drain"), p.at("source"));
          add(p.at("source"), p.at("drain"));
        }
        add(p.at("gate"), p.at("drain"));
        add(p.at("gate"), p.at("source"));
        break;
      }
      case DeviceKind::Lut:
        for (const auto& [ip, in] : p)
          if (ip.rfind("in_", 0) == 0)
            for (const auto& [op, out] : p)
              if (op.rfind("out_", 0) == 0) add(in, out);
        break;
    }
  }
  return o;
}

inline std::set<std::string> grounded_nets(const DriverConfig& c) {
  std::set<std::string> out;
  for (const auto& [net, role] : c.assignments)
    if (role == LineRole::Gnd) out.insert(net);
  return out;
}

// Jacobi sweeps of the score equation until nothing changes.
inline std::map<std::string, Score> brute_force_scores(const FlowGraph& g, const SecurityConfig& cfg) {
  std::map<std::string, Score> cur;
  for (const auto& n : g.nodes()) cur[n] = 0;
  for (const auto& [n, s] : cfg.sources) cur[n] = std::max(cur[n], s);
  for (;;) {
    auto nxt = cur;
    for (const auto& e : g.edges()) {
      const Score p = cur[e.src];
      const Score r = p > e.decrement ? p - e.decrement : 0;
      nxt[e.dst] = std::max(nxt[e.dst], r);
    }
    if (nxt == cur) return cur;
    cur = std::move(nxt);
  }
}

inline std::set<std::string> bfs_reachable(const FlowGraph& g, const std::set<std::string>& from) {
  std::set<std::string> seen(from.begin(), from.end());
  std::vector<std::string> stack(from.begin(), from.end());
  while (!stack.empty()) {
    const auto n = stack.back();
    stack.pop_back();
    for (const auto& e : g.edges())
      if (e.src == n && seen.insert(e.dst).second) stack.push_back(e.dst);
  }
  return seen;
}

struct RandomCase {
  FlowGraph graph;
  SecurityConfig cfg;
};

// Random graph with up to `max_nodes` nodes, a few sources and sinks; unit
// scores and no decrements when `non_interference` is set.
inline RandomCase random_case(std::mt19937& rng, std::size_t max_nodes, bool non_interference) {
  std::uniform_int_distribution<std::size_t> node_count(1, max_nodes);
  const auto n = node_count(rng);
  std::set<std::string> nodes;
  for (std::size_t i = 0; i < n; ++i) nodes.insert("n" + std::to_string(i));
  const std::vector<std::string> names(nodes.begin(), nodes.end());
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::uniform_int_distribution<std::size_t> edge_count(0, n * 2);
  std::uniform_int_distribution<Score> dec(0, 2);
  std::uniform_int_distribution<Score> score(1, 5);
  std::uniform_int_distribution<int> kind(0, 2);

  std::vector<Edge> edges;
  const auto m = edge_count(rng);
  for (std::size_t i = 0; i < m; ++i) {
    const auto a = names[pick(rng)];
    const auto b = names[pick(rng)];
    if (a == b) continue;
    const auto k = static_cast<EdgeKind>(kind(rng));
    const Score d = non_interference ? 0 : dec(rng);
    edges.push_back({a, b, k, d, "e" + std::to_string(i)});
    if (k == EdgeKind::AnalogChannel) edges.push_back({b, a, k, d, "e" + std::to_string(i)});
  }
  SecurityConfig cfg;
  std::uniform_int_distribution<std::size_t> few(1, std::min<std::size_t>(3, n));
  for (std::size_t i = 0, c = few(rng); i < c; ++i) cfg.sources[names[pick(rng)]] = non_interference ? 1 : score(rng);
  for (std::size_t i = 0, c = few(rng); i < c; ++i) cfg.sinks.insert(names[pick(rng)]);
  return {FlowGraph(nodes, std::move(edges)), cfg};
}

}  // namespace cimflow::testing
