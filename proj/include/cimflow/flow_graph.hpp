#pragma once

// Information-flow graph over canonical nets.
//
// Policies:
//   assign      every source -> target (digital)
//   memristor   ae <-> oe (analog-channel), identical for set, read and reset
//   nmos/pmos   drain <-> source (analog-channel), gate -> drain, gate -> source (gate-control)
//   lut         every in_* pin -> every out_* pin (digital)
//
// In refined mode GND/VDD nets are constant: they emit no edges, and a
// transistor held off by its gate (nmos at GND, pmos at VDD) loses its channel.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "cimflow/error.hpp"
#include "cimflow/netlist.hpp"
#include "cimflow/security_config.hpp"

namespace cimflow {

enum class EdgeKind { Digital, AnalogChannel, GateControl };

inline std::string_view to_string(EdgeKind k) {
  switch (k) {
    case EdgeKind::Digital: return "digital";
    case EdgeKind::AnalogChannel: return "analog-channel";
    case EdgeKind::GateControl: return "gate-control";
  }
  return "digital";
}

struct Edge {
  std::string src;
  std::string dst;
  EdgeKind kind = EdgeKind::Digital;
  Score decrement = 0;
  std::string via;  // device name, or `<scope>/assign.<op>` for assigns

  auto key() const { return std::tie(src, dst, kind, via); }
  bool operator==(const Edge&) const = default;
};

inline bool edge_less(const Edge& a, const Edge& b) {
  return std::tie(a.src, a.dst, a.kind, a.via, a.decrement) < std::tie(b.src, b.dst, b.kind, b.via, b.decrement);
}

class FlowGraph {
 public:
  FlowGraph() = default;

  // Sorts nodes and edges; duplicate (src, dst, kind, via) edges keep the smallest decrement.
  FlowGraph(std::set<std::string> nodes, std::vector<Edge> edges) : nodes_(nodes.begin(), nodes.end()) {
    for (std::size_t i = 0; i < nodes_.size(); ++i) index_.emplace(nodes_[i], i);
    for (const auto& e : edges) {
      if (!index_.contains(e.src) || !index_.contains(e.dst))
        throw Error(ErrorCode::UnknownNet, "edge " + e.src + " -> " + e.dst + " references a missing node");
    }
    std::sort(edges.begin(), edges.end(), edge_less);
    for (auto& e : edges) {
      if (!edges_.empty() && edges_.back().key() == e.key()) continue;
      edges_.push_back(std::move(e));
    }
    out_.resize(nodes_.size());
    in_.resize(nodes_.size());
    for (std::size_t i = 0; i < edges_.size(); ++i) {
      out_[index_.at(edges_[i].src)].push_back(i);
      in_[index_.at(edges_[i].dst)].push_back(i);
    }
  }

  const std::vector<std::string>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  bool has_node(const std::string& n) const { return index_.contains(n); }
  std::optional<std::size_t> index_of(const std::string& n) const {
    auto it = index_.find(n);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  const std::vector<std::size_t>& out_edges(std::size_t node) const { return out_[node]; }
  const std::vector<std::size_t>& in_edges(std::size_t node) const { return in_[node]; }

  // Copy keeping only the edges for which `keep` is true.
  template <typename Pred>
  FlowGraph filter(Pred keep) const {
    std::vector<Edge> kept;
    for (const auto& e : edges_)
      if (keep(e)) kept.push_back(e);
    return FlowGraph(std::set<std::string>(nodes_.begin(), nodes_.end()), std::move(kept));
  }

  bool operator==(const FlowGraph& o) const { return nodes_ == o.nodes_ && edges_ == o.edges_; }

 private:
  std::vector<std::string> nodes_;
  std::map<std::string, std::size_t> index_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> out_;
  std::vector<std::vector<std::size_t>> in_;
};

// ---------------------------------------------------------------------------
// Device policies

inline std::vector<Edge> memristor_policy(const Device& cell, Score decrement = 0) {
  if (cell.kind != DeviceKind::Memristor)
    throw Error(ErrorCode::WrongKind, "'" + cell.name + "' is a " + std::string(to_string(cell.kind)) + ", not a memristor");
  const auto& ae = cell.pins.at("ae");
  const auto& oe = cell.pins.at("oe");
  if (ae == oe) return {};
  return {{ae, oe, EdgeKind::AnalogChannel, decrement, cell.name},
          {oe, ae, EdgeKind::AnalogChannel, decrement, cell.name}};
}

inline std::vector<Edge> transistor_policy(const Device& sel, Score decrement = 0) {
  if (sel.kind != DeviceKind::Nmos && sel.kind != DeviceKind::Pmos)
    throw Error(ErrorCode::WrongKind, "'" + sel.name + "' is a " + std::string(to_string(sel.kind)) + ", not a transistor");
  const auto& d = sel.pins.at("drain");
  const auto& g = sel.pins.at("gate");
  const auto& s = sel.pins.at("source");
  std::vector<Edge> out;
  if (d != s) {
    out.push_back({d, s, EdgeKind::AnalogChannel, decrement, sel.name});
    out.push_back({s, d, EdgeKind::AnalogChannel, decrement, sel.name});
  }
  if (g != d) out.push_back({g, d, EdgeKind::GateControl, decrement, sel.name});
  if (g != s && s != d) out.push_back({g, s, EdgeKind::GateControl, decrement, sel.name});
  return out;
}

inline std::vector<Edge> lut_policy(const Device& lut, Score decrement = 0) {
  if (lut.kind != DeviceKind::Lut)
    throw Error(ErrorCode::WrongKind, "'" + lut.name + "' is a " + std::string(to_string(lut.kind)) + ", not a lut");
  std::vector<Edge> out;
  for (const auto& [ip, in] : lut.pins) {
    if (!is_lut_input_pin(ip)) continue;
    for (const auto& [op, o] : lut.pins)
      if (is_lut_output_pin(op) && in != o) out.push_back({in, o, EdgeKind::Digital, decrement, lut.name});
  }
  return out;
}

inline std::vector<Edge> assign_policy(const FlatAssign& a, Score decrement = 0) {
  std::vector<Edge> out;
  const std::string via = (a.scope.empty() ? "" : a.scope + "/") + "assign." + std::string(to_string(a.op));
  for (const auto& s : a.sources)
    if (s != a.target) out.push_back({s, a.target, EdgeKind::Digital, decrement, via});
  return out;
}

// True when the transistor's gate holds its channel open-circuit.
inline bool transistor_off(const Device& sel, const std::set<std::string>& gnd, const std::set<std::string>& vdd) {
  const auto& g = sel.pins.at("gate");
  return (sel.kind == DeviceKind::Nmos && gnd.contains(g)) || (sel.kind == DeviceKind::Pmos && vdd.contains(g));
}

namespace detail {

// Decrement for an item, max over every reducer designator naming it.
class ReducerTable {
 public:
  ReducerTable(const ElaboratedNetlist& nl, const std::map<std::string, Score>& reducers) : reducers_(reducers) {
    std::set<std::string> known;
    for (const auto& a : nl.assigns) {
      known.insert(a.module);
      if (!a.scope.empty()) known.insert(a.scope);
    }
    for (const auto& d : nl.devices) {
      known.insert(d.module);
      known.insert(d.name);
      if (!d.scope.empty()) known.insert(d.scope);
    }
    for (const auto& [designator, dec] : reducers) {
      if (!parse_assign_op(designator) && !known.contains(designator))
        throw Error(ErrorCode::UnknownDesignator,
                    "reducer '" + designator + "' names no operator, instance or module of the design");
    }
  }

  Score for_assign(const FlatAssign& a) const {
    return std::max({lookup(std::string(to_string(a.op))), a.scope.empty() ? 0 : lookup(a.scope), lookup(a.module)});
  }
  Score for_device(const Device& d) const {
    return std::max({lookup(d.name), d.scope.empty() ? 0 : lookup(d.scope), lookup(d.module)});
  }

 private:
  Score lookup(const std::string& key) const {
    auto it = reducers_.find(key);
    return it == reducers_.end() ? 0 : it->second;
  }
  const std::map<std::string, Score>& reducers_;
};

}  // namespace detail

inline FlowGraph build_flow_graph(const ElaboratedNetlist& nl, const SecurityConfig& cfg) {
  if (auto diags = validate(nl); !diags.empty()) {
    std::string msg = std::to_string(diags.size()) + " validation error(s); first: " + diags.front().str();
    throw Error(ErrorCode::InvalidNetlist, msg);
  }
  const detail::ReducerTable reducers(nl, cfg.reducers);

  std::vector<Edge> edges;
  for (const auto& a : nl.assigns) {
    auto e = assign_policy(a, reducers.for_assign(a));
    edges.insert(edges.end(), e.begin(), e.end());
  }
  for (const auto& d : nl.devices) {
    if (d.kind == DeviceKind::Memristor) {
      auto e = memristor_policy(d, reducers.for_device(d));
      edges.insert(edges.end(), e.begin(), e.end());
    }
  }
  for (const auto& d : nl.devices) {
    if (d.kind == DeviceKind::Nmos || d.kind == DeviceKind::Pmos) {
      auto e = transistor_policy(d, reducers.for_device(d));
      edges.insert(edges.end(), e.begin(), e.end());
    }
  }
  for (const auto& d : nl.devices) {
    if (d.kind == DeviceKind::Lut) {
      auto e = lut_policy(d, reducers.for_device(d));
      edges.insert(edges.end(), e.begin(), e.end());
    }
  }

  if (cfg.mode == AnalysisMode::Refined) {
    std::set<std::string> gnd, vdd;
    for (const auto& [net, s] : nl.constants) (s == Supply::Gnd ? gnd : vdd).insert(net);
    std::set<std::string> off;
    for (const auto& d : nl.devices)
      if ((d.kind == DeviceKind::Nmos || d.kind == DeviceKind::Pmos) && transistor_off(d, gnd, vdd)) off.insert(d.name);
    std::erase_if(edges, [&](const Edge& e) {
      return nl.constants.contains(e.src) || (e.kind == EdgeKind::AnalogChannel && off.contains(e.via));
    });
  }
  return FlowGraph(nl.nets, std::move(edges));
}

// ---------------------------------------------------------------------------
// DOT export

namespace detail {

inline std::string dot_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace detail

inline std::string export_dot(const FlowGraph& g, const std::map<std::string, Score>* scores = nullptr,
                              const std::set<std::string>& leaking = {}) {
  std::ostringstream os;
  os << "digraph flow {\n";
  for (const auto& n : g.nodes()) {
    os << "  " << detail::dot_quote(n);
    std::vector<std::string> attrs;
    if (scores) {
      auto it = scores->find(n);
      const Score s = it == scores->end() ? 0 : it->second;
      auto label = detail::dot_quote(n);
      label.insert(label.size() - 1, "\\n" + std::to_string(s));  // DOT line break, not an escaped backslash
      attrs.push_back("label=" + label);
    }
    if (leaking.contains(n)) {
      attrs.push_back("color=red");
      attrs.push_back("penwidth=2");
    }
    if (!attrs.empty()) {
      os << " [";
      for (std::size_t i = 0; i < attrs.size(); ++i) os << (i ? ", " : "") << attrs[i];
      os << "]";
    }
    os << ";\n";
  }
  for (const auto& e : g.edges()) {
    os << "  " << detail::dot_quote(e.src) << " -> " << detail::dot_quote(e.dst) << " [";
    switch (e.kind) {
      case EdgeKind::Digital: os << "style=solid"; break;
      case EdgeKind::AnalogChannel: os << "color=blue"; break;
      case EdgeKind::GateControl: os << "style=dashed"; break;
    }
    if (e.decrement > 0) os << ", label=\"-" << e.decrement << "\"";
    os << "];\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace cimflow
