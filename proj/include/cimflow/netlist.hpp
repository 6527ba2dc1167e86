#pragma once

// Hierarchical design model and its flattening into an ElaboratedNetlist.
//
// Elaboration scalarizes buses (`bus[3]` becomes its own net), collapses every
// group of nets joined through instance ports into one canonical net, and
// keeps only builtin devices (memristor, nmos, pmos, lut) and assigns.

#include <algorithm>
#include <cstdlib>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "cimflow/error.hpp"

namespace cimflow {

inline constexpr std::string_view kGnd = "GND";
inline constexpr std::string_view kVdd = "VDD";

inline bool is_supply_name(std::string_view name) { return name == kGnd || name == kVdd; }

enum class PortDirection { Input, Output, Inout };

inline std::string_view to_string(PortDirection d) {
  switch (d) {
    case PortDirection::Input: return "input";
    case PortDirection::Output: return "output";
    case PortDirection::Inout: return "inout";
  }
  return "inout";
}

// Declared `[msb:lsb]` range of a bus.
struct BitRange {
  int msb = 0;
  int lsb = 0;

  int width() const { return std::abs(msb - lsb) + 1; }
  bool contains(int bit) const { return bit >= std::min(msb, lsb) && bit <= std::max(msb, lsb); }
  // Bit indices in declaration order, msb first.
  std::vector<int> bits() const {
    std::vector<int> out;
    const int step = msb >= lsb ? -1 : 1;
    for (int b = msb;; b += step) {
      out.push_back(b);
      if (b == lsb) break;
    }
    return out;
  }
  bool operator==(const BitRange&) const = default;
};

struct PortDecl {
  std::string name;
  PortDirection direction = PortDirection::Inout;
  std::optional<BitRange> range;

  int width() const { return range ? range->width() : 1; }
  bool operator==(const PortDecl&) const = default;
};

struct WireDecl {
  std::string name;
  std::optional<BitRange> range;

  int width() const { return range ? range->width() : 1; }
  bool operator==(const WireDecl&) const = default;
};

// A whole net or a single bit of a bus.
struct NetRef {
  std::string name;
  std::optional<int> bit;

  std::string str() const { return bit ? name + "[" + std::to_string(*bit) + "]" : name; }
  bool operator==(const NetRef&) const = default;
  auto operator<=>(const NetRef&) const = default;
};

enum class AssignOp { Or, And, Xor, Not, Buf };

inline std::string_view to_string(AssignOp op) {
  switch (op) {
    case AssignOp::Or: return "or";
    case AssignOp::And: return "and";
    case AssignOp::Xor: return "xor";
    case AssignOp::Not: return "not";
    case AssignOp::Buf: return "buf";
  }
  return "buf";
}

inline std::optional<AssignOp> parse_assign_op(std::string_view tag) {
  if (tag == "or") return AssignOp::Or;
  if (tag == "and") return AssignOp::And;
  if (tag == "xor") return AssignOp::Xor;
  if (tag == "not") return AssignOp::Not;
  if (tag == "buf") return AssignOp::Buf;
  return std::nullopt;
}

struct Assign {
  NetRef target;
  std::vector<NetRef> sources;
  AssignOp op = AssignOp::Buf;

  bool operator==(const Assign&) const = default;
};

struct Instance {
  std::string name;
  std::string kind;  // user module name or builtin
  std::map<std::string, NetRef> connections;

  bool operator==(const Instance&) const = default;
};

struct ModuleDef {
  std::string name;
  std::vector<PortDecl> ports;
  std::vector<WireDecl> wires;
  std::vector<Assign> assigns;
  std::vector<Instance> instances;

  const PortDecl* find_port(std::string_view port) const {
    for (const auto& p : ports)
      if (p.name == port) return &p;
    return nullptr;
  }
  bool operator==(const ModuleDef&) const = default;
};

enum class DeviceKind { Memristor, Nmos, Pmos, Lut };

inline std::string_view to_string(DeviceKind k) {
  switch (k) {
    case DeviceKind::Memristor: return "memristor";
    case DeviceKind::Nmos: return "nmos";
    case DeviceKind::Pmos: return "pmos";
    case DeviceKind::Lut: return "lut";
  }
  return "lut";
}

inline std::optional<DeviceKind> builtin_kind(std::string_view name) {
  if (name == "memristor") return DeviceKind::Memristor;
  if (name == "nmos") return DeviceKind::Nmos;
  if (name == "pmos") return DeviceKind::Pmos;
  if (name == "lut") return DeviceKind::Lut;
  return std::nullopt;
}

// Lut pins are named `in_*` (inputs) or `out_*` (outputs).
inline bool is_lut_input_pin(std::string_view pin) { return pin.starts_with("in_") && pin.size() > 3; }
inline bool is_lut_output_pin(std::string_view pin) { return pin.starts_with("out_") && pin.size() > 4; }

// Returns an empty string when `pins` is a legal pinout for `kind`, otherwise a reason.
inline std::string check_builtin_pins(DeviceKind kind, const std::set<std::string>& pins) {
  switch (kind) {
    case DeviceKind::Memristor:
      if (pins != std::set<std::string>{"ae", "oe"}) return "memristor requires exactly ports {ae, oe}";
      return {};
    case DeviceKind::Nmos:
    case DeviceKind::Pmos:
      if (pins != std::set<std::string>{"drain", "gate", "source"})
        return std::string(to_string(kind)) + " requires exactly ports {drain, gate, source}";
      return {};
    case DeviceKind::Lut: {
      bool has_out = false;
      for (const auto& p : pins) {
        if (is_lut_output_pin(p)) {
          has_out = true;
        } else if (!is_lut_input_pin(p)) {
          return "lut port '" + p + "' must be named in_* or out_*";
        }
      }
      if (!has_out) return "lut requires at least one out_* port";
      return {};
    }
  }
  return {};
}

enum class Supply { Gnd, Vdd };

// A builtin device after flattening. `pins` maps port name to canonical net.
struct Device {
  std::string name;    // fully-qualified instance path
  DeviceKind kind = DeviceKind::Memristor;
  std::map<std::string, std::string> pins;
  std::string scope;   // enclosing instance path, empty at top
  std::string module;  // enclosing module definition

  bool operator==(const Device&) const = default;
};

struct FlatAssign {
  std::string target;
  std::vector<std::string> sources;
  AssignOp op = AssignOp::Buf;
  std::string scope;
  std::string module;

  bool operator==(const FlatAssign&) const = default;
};

struct ElaboratedNetlist {
  std::set<std::string> nets;
  std::map<std::string, Supply> constants;
  std::vector<Device> devices;
  std::vector<FlatAssign> assigns;
  std::set<std::string> top_inputs;
  std::set<std::string> top_outputs;
  // Every fully-qualified name seen during elaboration, mapped to its canonical net.
  std::map<std::string, std::string> aliases;

  // Canonical net for a (possibly hierarchical or aliased) name.
  std::optional<std::string> resolve(std::string_view name) const {
    const std::string key(name);
    if (auto it = aliases.find(key); it != aliases.end()) return it->second;
    if (nets.contains(key)) return key;
    return std::nullopt;
  }
};

// ---------------------------------------------------------------------------
// Elaboration

namespace detail {

class UnionFind {
 public:
  std::size_t add() {
    parent_.push_back(parent_.size());
    return parent_.size() - 1;
  }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }
  std::size_t size() const { return parent_.size(); }

 private:
  std::vector<std::size_t> parent_;
};

inline std::size_t depth_of(std::string_view name) {
  return static_cast<std::size_t>(std::count(name.begin(), name.end(), '/'));
}

class Elaborator {
 public:
  explicit Elaborator(const std::vector<ModuleDef>& design) {
    for (const auto& m : design) {
      if (!modules_.emplace(m.name, &m).second) throw Error(ErrorCode::DuplicateName, "module '" + m.name + "' defined twice");
    }
  }

  ElaboratedNetlist run(std::string_view top_name) {
    const ModuleDef* top = lookup(top_name);
    if (!top) throw Error(ErrorCode::UnknownModule, "top module '" + std::string(top_name) + "' is not defined");

    std::vector<std::string> stack;
    const Scope scope = instantiate(*top, "", {}, stack);

    ElaboratedNetlist out;
    finalize(out);
    for (const auto& port : top->ports) {
      for (auto id : scope.nets.at(port.name)) {
        const auto& net = canonical_[uf_.find(id)];
        if (port.direction != PortDirection::Output) out.top_inputs.insert(net);
        if (port.direction != PortDirection::Input) out.top_outputs.insert(net);
      }
    }
    return out;
  }

 private:
  // Local net name -> node ids, one per bit in declaration order.
  struct Scope {
    std::map<std::string, std::vector<std::size_t>> nets;
    std::map<std::string, std::optional<BitRange>> ranges;
  };

  struct PendingDevice {
    Device device;
    std::map<std::string, std::size_t> pins;
  };

  struct PendingAssign {
    std::size_t target;
    std::vector<std::size_t> sources;
    AssignOp op;
    std::string scope;
    std::string module;
  };

  const ModuleDef* lookup(std::string_view name) const {
    auto it = modules_.find(std::string(name));
    return it == modules_.end() ? nullptr : it->second;
  }

  std::size_t node(const std::string& qualified) {
    auto [it, inserted] = ids_.emplace(qualified, 0);
    if (inserted) {
      it->second = uf_.add();
      names_.push_back(qualified);
    }
    return it->second;
  }

  static std::string scalar_name(const std::string& base, const std::optional<BitRange>& range, int bit) {
    return range ? base + "[" + std::to_string(bit) + "]" : base;
  }

  std::vector<std::size_t> declare(Scope& scope, const std::string& prefix, const std::string& module,
                                   const std::string& name, const std::optional<BitRange>& range) {
    if (is_supply_name(name))
      throw Error(ErrorCode::DuplicateName, "module '" + module + "' redeclares reserved net '" + name + "'");
    if (scope.nets.contains(name))
      throw Error(ErrorCode::DuplicateName, "net '" + name + "' declared twice in module '" + module + "'");
    std::vector<std::size_t> ids;
    if (range) {
      for (int b : range->bits()) ids.push_back(node(prefix + scalar_name(name, range, b)));
    } else {
      ids.push_back(node(prefix + name));
    }
    scope.nets.emplace(name, ids);
    scope.ranges.emplace(name, range);
    return ids;
  }

  std::vector<std::size_t> resolve_ref(const Scope& scope, const NetRef& ref, const std::string& module) {
    if (is_supply_name(ref.name)) {
      if (ref.bit) throw Error(ErrorCode::WidthMismatch, "bit select on supply net '" + ref.name + "'");
      return {node(ref.name)};
    }
    auto it = scope.nets.find(ref.name);
    if (it == scope.nets.end())
      throw Error(ErrorCode::UndeclaredNet, "net '" + ref.name + "' is not declared in module '" + module + "'");
    if (!ref.bit) return it->second;
    const auto& range = scope.ranges.at(ref.name);
    if (!range || !range->contains(*ref.bit))
      throw Error(ErrorCode::WidthMismatch, "bit select '" + ref.str() + "' out of range in module '" + module + "'");
    const auto bits = range->bits();
    const auto pos = std::find(bits.begin(), bits.end(), *ref.bit) - bits.begin();
    return {it->second[static_cast<std::size_t>(pos)]};
  }

  Scope instantiate(const ModuleDef& def, const std::string& path,
                    const std::map<std::string, std::vector<std::size_t>>& bindings,
                    std::vector<std::string>& stack) {
    if (std::find(stack.begin(), stack.end(), def.name) != stack.end()) {
      std::string cycle;
      for (const auto& s : stack) cycle += s + " -> ";
      throw Error(ErrorCode::RecursiveInstantiation, "instantiation cycle " + cycle + def.name);
    }
    stack.push_back(def.name);
    const std::string prefix = path.empty() ? "" : path + "/";

    Scope scope;
    for (const auto& port : def.ports) {
      auto ids = declare(scope, prefix, def.name, port.name, port.range);
      if (auto it = bindings.find(port.name); it != bindings.end()) {
        for (std::size_t i = 0; i < ids.size(); ++i) uf_.unite(ids[i], it->second[i]);
      }
    }
    for (const auto& wire : def.wires) declare(scope, prefix, def.name, wire.name, wire.range);

    for (const auto& a : def.assigns) {
      const auto target = resolve_ref(scope, a.target, def.name);
      std::vector<std::vector<std::size_t>> sources;
      for (const auto& s : a.sources) {
        auto bits = resolve_ref(scope, s, def.name);
        if (bits.size() != target.size() && bits.size() != 1)
          throw Error(ErrorCode::WidthMismatch, "assign to '" + a.target.str() + "' in module '" + def.name +
                                                    "' mixes widths " + std::to_string(target.size()) + " and " +
                                                    std::to_string(bits.size()));
        sources.push_back(std::move(bits));
      }
      for (std::size_t i = 0; i < target.size(); ++i) {
        PendingAssign pa{target[i], {}, a.op, path, def.name};
        for (const auto& bits : sources) pa.sources.push_back(bits.size() == 1 ? bits[0] : bits[i]);
        assigns_.push_back(std::move(pa));
      }
    }

    std::set<std::string> instance_names;
    for (const auto& inst : def.instances) {
      if (!instance_names.insert(inst.name).second)
        throw Error(ErrorCode::DuplicateName, "instance '" + inst.name + "' declared twice in module '" + def.name + "'");
      const std::string inst_path = prefix + inst.name;

      if (const ModuleDef* child = lookup(inst.kind)) {
        std::map<std::string, std::vector<std::size_t>> child_bindings;
        for (const auto& [port, ref] : inst.connections) {
          const PortDecl* decl = child->find_port(port);
          if (!decl)
            throw Error(ErrorCode::PortMismatch,
                        "instance '" + inst_path + "' connects unknown port '" + port + "' of '" + child->name + "'");
          auto bits = resolve_ref(scope, ref, def.name);
          if (static_cast<int>(bits.size()) != decl->width())
            throw Error(ErrorCode::PortMismatch, "instance '" + inst_path + "' port '" + port + "' has width " +
                                                     std::to_string(decl->width()) + " but is connected to " +
                                                     std::to_string(bits.size()) + " bit(s)");
          child_bindings.emplace(port, std::move(bits));
        }
        instantiate(*child, inst_path, child_bindings, stack);
      } else if (auto kind = builtin_kind(inst.kind)) {
        std::set<std::string> pin_names;
        for (const auto& [port, ref] : inst.connections) pin_names.insert(port);
        if (auto why = check_builtin_pins(*kind, pin_names); !why.empty())
          throw Error(ErrorCode::PortMismatch, "instance '" + inst_path + "': " + why);
        PendingDevice pd;
        pd.device.name = inst_path;
        pd.device.kind = *kind;
        pd.device.scope = path;
        pd.device.module = def.name;
        for (const auto& [port, ref] : inst.connections) {
          auto bits = resolve_ref(scope, ref, def.name);
          if (bits.size() != 1)
            throw Error(ErrorCode::PortMismatch, "instance '" + inst_path + "' port '" + port +
                                                     "' is scalar but is connected to " + std::to_string(bits.size()) +
                                                     " bits");
          const auto pin_id = node(inst_path + "/" + port);
          uf_.unite(pin_id, bits[0]);
          pd.pins.emplace(port, bits[0]);
        }
        devices_.push_back(std::move(pd));
      } else {
        throw Error(ErrorCode::UnknownModule,
                    "instance '" + inst_path + "' refers to undefined module '" + inst.kind + "'");
      }
    }

    stack.pop_back();
    return scope;
  }

  void finalize(ElaboratedNetlist& out) {
    // Canonical name per group: supply first, then the shallowest, then lexicographically smallest.
    std::map<std::size_t, std::string> best;
    for (std::size_t id = 0; id < names_.size(); ++id) {
      const auto root = uf_.find(id);
      const auto& name = names_[id];
      auto it = best.find(root);
      if (it == best.end()) {
        best.emplace(root, name);
        continue;
      }
      const auto& cur = it->second;
      if (is_supply_name(name) && is_supply_name(cur) && name != cur)
        throw Error(ErrorCode::SupplyShort, "GND and VDD are connected together");
      const auto rank = [](const std::string& n) { return std::make_tuple(!is_supply_name(n), depth_of(n), n); };
      if (rank(name) < rank(cur)) it->second = name;
    }
    canonical_.assign(uf_.size(), {});
    for (std::size_t id = 0; id < names_.size(); ++id) canonical_[uf_.find(id)] = best.at(uf_.find(id));

    for (std::size_t id = 0; id < names_.size(); ++id) {
      const auto& net = canonical_[uf_.find(id)];
      out.nets.insert(net);
      out.aliases.emplace(names_[id], net);
    }
    for (auto& pd : devices_) {
      Device d = pd.device;
      for (const auto& [port, id] : pd.pins) d.pins.emplace(port, canonical_[uf_.find(id)]);
      out.devices.push_back(std::move(d));
    }
    for (const auto& pa : assigns_) {
      FlatAssign fa;
      fa.target = canonical_[uf_.find(pa.target)];
      for (auto s : pa.sources) fa.sources.push_back(canonical_[uf_.find(s)]);
      fa.op = pa.op;
      fa.scope = pa.scope;
      fa.module = pa.module;
      out.assigns.push_back(std::move(fa));
    }
    for (const auto& net : out.nets) {
      if (net == kGnd) out.constants.emplace(net, Supply::Gnd);
      if (net == kVdd) out.constants.emplace(net, Supply::Vdd);
    }
    std::sort(out.devices.begin(), out.devices.end(),
              [](const Device& a, const Device& b) { return a.name < b.name; });
    std::sort(out.assigns.begin(), out.assigns.end(), [](const FlatAssign& a, const FlatAssign& b) {
      return std::tie(a.target, a.sources, a.op, a.scope, a.module) <
             std::tie(b.target, b.sources, b.op, b.scope, b.module);
    });
  }

  std::map<std::string, const ModuleDef*> modules_;
  UnionFind uf_;
  std::map<std::string, std::size_t> ids_;
  std::vector<std::string> names_;
  std::vector<std::string> canonical_;
  std::vector<PendingDevice> devices_;
  std::vector<PendingAssign> assigns_;
};

}  // namespace detail

inline ElaboratedNetlist elaborate(const std::vector<ModuleDef>& design, std::string_view top) {
  return detail::Elaborator(design).run(top);
}

// The unique module that no other module instantiates.
inline std::string find_top_module(const std::vector<ModuleDef>& design) {
  std::set<std::string> instantiated;
  for (const auto& m : design)
    for (const auto& inst : m.instances) instantiated.insert(inst.kind);
  std::vector<std::string> roots;
  for (const auto& m : design)
    if (!instantiated.contains(m.name)) roots.push_back(m.name);
  if (roots.size() == 1) return roots.front();
  if (roots.empty()) throw Error(ErrorCode::AmbiguousTop, "no top module: every module is instantiated");
  std::string list;
  for (const auto& r : roots) list += (list.empty() ? "" : ", ") + r;
  throw Error(ErrorCode::AmbiguousTop, "several candidate top modules (" + list + "); pick one explicitly");
}

// ---------------------------------------------------------------------------
// Validation

enum class DiagnosticCode { DanglingNet, ConstantDriven, BadPinout, DuplicateName, UnknownConstant };

inline std::string_view to_string(DiagnosticCode c) {
  switch (c) {
    case DiagnosticCode::DanglingNet: return "DanglingNet";
    case DiagnosticCode::ConstantDriven: return "ConstantDriven";
    case DiagnosticCode::BadPinout: return "BadPinout";
    case DiagnosticCode::DuplicateName: return "DuplicateName";
    case DiagnosticCode::UnknownConstant: return "UnknownConstant";
  }
  return "Unknown";
}

struct Diagnostic {
  DiagnosticCode code;
  std::string subject;  // offending net or instance
  std::string message;

  auto operator<=>(const Diagnostic&) const = default;
  std::string str() const { return std::string(to_string(code)) + " " + subject + ": " + message; }
};

inline std::vector<Diagnostic> validate(const ElaboratedNetlist& nl) {
  std::vector<Diagnostic> out;
  const auto has = [&](const std::string& n) { return nl.nets.contains(n); };

  std::set<std::string> seen;
  for (const auto& d : nl.devices) {
    if (!seen.insert(d.name).second)
      out.push_back({DiagnosticCode::DuplicateName, d.name, "device name used twice"});
    std::set<std::string> pins;
    for (const auto& [pin, net] : d.pins) {
      pins.insert(pin);
      if (!has(net))
        out.push_back({DiagnosticCode::DanglingNet, d.name, "pin '" + pin + "' connects to undeclared net '" + net + "'"});
    }
    if (auto why = check_builtin_pins(d.kind, pins); !why.empty())
      out.push_back({DiagnosticCode::BadPinout, d.name, why});
  }
  for (const auto& a : nl.assigns) {
    if (!has(a.target))
      out.push_back({DiagnosticCode::DanglingNet, a.target, "assign target is not a declared net"});
    else if (nl.constants.contains(a.target))
      out.push_back({DiagnosticCode::ConstantDriven, a.target, "constant net is driven by an assign"});
    for (const auto& s : a.sources)
      if (!has(s)) out.push_back({DiagnosticCode::DanglingNet, s, "assign source is not a declared net"});
  }
  for (const auto& [net, supply] : nl.constants)
    if (!has(net)) out.push_back({DiagnosticCode::UnknownConstant, net, "constant is not a declared net"});
  for (const auto& set : {&nl.top_inputs, &nl.top_outputs})
    for (const auto& n : *set)
      if (!has(n)) out.push_back({DiagnosticCode::DanglingNet, n, "top-level port is not a declared net"});

  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// Line-oriented canonical dump: sorted nets, then devices, then assigns.
inline std::string dump_netlist(const ElaboratedNetlist& nl) {
  std::ostringstream os;
  for (const auto& net : nl.nets) {
    os << "net " << net;
    if (auto it = nl.constants.find(net); it != nl.constants.end())
      os << (it->second == Supply::Gnd ? " const=GND" : " const=VDD");
    if (nl.top_inputs.contains(net)) os << " in";
    if (nl.top_outputs.contains(net)) os << " out";
    os << '\n';
  }
  for (const auto& d : nl.devices) {
    os << "device " << d.name << ' ' << to_string(d.kind);
    for (const auto& [pin, net] : d.pins) os << ' ' << pin << '=' << net;
    os << '\n';
  }
  for (const auto& a : nl.assigns) {
    os << "assign " << a.target << " <- " << to_string(a.op);
    for (const auto& s : a.sources) os << ' ' << s;
    if (!a.scope.empty()) os << " @" << a.scope;
    os << '\n';
  }
  return os.str();
}

}  // namespace cimflow
