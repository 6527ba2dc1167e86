#pragma once

// `cimflow` command line: gen, analyze, check.
//
// Exit codes: 0 no leaks / clean, 1 leaks found, 2 usage, parse or analysis error.

#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "cimflow/crossbar_gen.hpp"
#include "cimflow/flow_graph.hpp"
#include "cimflow/ift_engine.hpp"
#include "cimflow/refined_analysis.hpp"
#include "cimflow/security_config.hpp"
#include "cimflow/verilog_parser.hpp"

namespace cimflow {

inline constexpr std::string_view kToolVersion = "0.3.0";

inline std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return os.str();
}

struct ManifestEntry {
  std::string role;
  std::string path;
  std::string sha256;
};

// Inputs consumed and outputs written by one run. `timestamp` is the only
// field that differs between identical runs; SOURCE_DATE_EPOCH pins it.
struct RunManifest {
  std::vector<ManifestEntry> inputs;
  std::vector<ManifestEntry> outputs;
  std::string mode;
  std::string timestamp;

  nlohmann::json to_json() const {
    const auto entries = [](const std::vector<ManifestEntry>& es) {
      auto arr = nlohmann::json::array();
      for (const auto& e : es) arr.push_back({{"role", e.role}, {"path", e.path}, {"sha256", e.sha256}});
      return arr;
    };
    return {{"tool", "cimflow"}, {"version", std::string(kToolVersion)}, {"mode", mode},
            {"inputs", entries(inputs)}, {"outputs", entries(outputs)}, {"timestamp", timestamp}};
  }
};

inline std::string manifest_timestamp() {
  std::time_t t = std::time(nullptr);
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

namespace detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << data;
}

class Diag {
 public:
  explicit Diag(std::ostream& err, bool color) : err_(err), color_(color) {}
  void error(const std::string& msg) { emit("\x1b[1;31m", "error", msg); }
  void warning(const std::string& msg) { emit("\x1b[1;33m", "warning", msg); }
  void note(const std::string& msg) { emit("\x1b[1;36m", "note", msg); }

 private:
  void emit(const char* ansi, const char* label, const std::string& msg) {
    if (color_) {
      err_ << ansi << label << ":\x1b[0m " << msg << '\n';
    } else {
      err_ << label << ": " << msg << '\n';
    }
  }
  std::ostream& err_;
  bool color_;
};

inline bool want_color(const std::ostream& err) {
  if (std::getenv("NO_COLOR")) return false;
  return &err == &std::cerr && ::isatty(STDERR_FILENO);
}

struct LoadedDesign {
  std::string text;
  std::string top;
  ElaboratedNetlist netlist;
};

inline LoadedDesign load_design(const std::string& path, const std::string& top_override) {
  LoadedDesign d;
  d.text = read_file(path);
  const auto modules = parse_verilog(d.text, path);
  if (modules.empty()) throw Error(ErrorCode::UnknownModule, "'" + path + "' defines no module");
  d.top = top_override.empty() ? find_top_module(modules) : top_override;
  d.netlist = elaborate(modules, d.top);
  return d;
}

inline std::string replace_extension(const std::string& path, const std::string& ext) {
  return std::filesystem::path(path).replace_extension(ext).string();
}

}  // namespace detail

inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  detail::Diag diag(err, detail::want_color(err));

  CLI::App app{"Static information-flow analysis for memristor computing-in-memory netlists", "cimflow"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  std::string kind = "1r";
  int rows = 0, cols = 0;
  bool masked = false, bare = false, write_ifc = false;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen", "Generate a crossbar design");
  gen->add_option("--kind", kind, "Crossbar kind")->check(CLI::IsMember({"1r", "1t1r"}));
  gen->add_option("--rows", rows, "Word lines (m)")->required();
  gen->add_option("--cols", cols, "Bit lines (n)")->required();
  gen->add_flag("--masked", masked, "Drive the crossbar through the access-mask lut (1t1r only)");
  gen->add_flag("--bare", bare, "Emit only the crossbar module, without the CIM top level");
  gen->add_flag("--ifc", write_ifc, "Also write a default security config next to the design");
  gen->add_option("-o,--output", gen_out, "Output .v path")->required();

  std::string design_path, mask_path, config_path, mode_flag, report_path, dot_path, manifest_path, top;
  auto* analyze = app.add_subcommand("analyze", "Analyze a design for leaks");
  analyze->add_option("--design", design_path, "Verilog netlist")->required();
  analyze->add_option("--mask", mask_path, "Access-mask sidecar (.mask)");
  analyze->add_option("--config", config_path, "Security config (.ifc)")->required();
  analyze->add_option("--mode", mode_flag, "Override the config's mode")
      ->check(CLI::IsMember({"conservative", "refined"}));
  analyze->add_option("--report", report_path, "Write the JSON report here instead of stdout");
  analyze->add_option("--manifest", manifest_path, "Manifest path (default: <report>.manifest.json)");
  analyze->add_option("--dot", dot_path, "Write the flow graph in DOT format");
  analyze->add_option("--top", top, "Top module (default: the only uninstantiated module)");

  std::string check_path, check_top;
  bool dump = false;
  auto* check = app.add_subcommand("check", "Parse, elaborate and validate a design");
  check->add_option("path", check_path, "Verilog netlist")->required();
  check->add_option("--top", check_top, "Top module");
  check->add_flag("--dump", dump, "Print the canonical elaborated netlist");

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) {
      CrossbarSpec spec{rows, cols, kind == "1r" ? CrossbarKind::Passive1R : CrossbarKind::Active1T1R, masked};
      check_spec(spec);
      if (bare) {
        if (masked) throw Error(ErrorCode::InvalidDimension, "--bare and --masked are exclusive");
        detail::write_file(gen_out, spec.kind == CrossbarKind::Passive1R ? gen_1r(rows, cols) : gen_1t1r(rows, cols));
      } else {
        auto design = gen_cim_top(spec);
        detail::write_file(gen_out, design.verilog);
        if (design.mask) detail::write_file(detail::replace_extension(gen_out, ".mask"), *design.mask);
        if (write_ifc) detail::write_file(detail::replace_extension(gen_out, ".ifc"), default_security_config(spec));
      }
      return 0;
    }

    if (check->parsed()) {
      auto d = detail::load_design(check_path, check_top);
      const auto diags = validate(d.netlist);
      for (const auto& dg : diags) diag.error(check_path + ": " + dg.str());
      if (dump) out << dump_netlist(d.netlist);
      if (!diags.empty()) return 2;
      if (!dump)
        out << check_path << ": ok (top " << d.top << ", " << d.netlist.nets.size() << " nets, "
            << d.netlist.devices.size() << " devices, " << d.netlist.assigns.size() << " assigns)\n";
      return 0;
    }

    // analyze
    auto d = detail::load_design(design_path, top);
    const auto cfg_text = detail::read_file(config_path);
    auto cfg = parse_security_config(cfg_text, config_path);
    if (!mode_flag.empty()) cfg.mode = mode_flag == "refined" ? AnalysisMode::Refined : AnalysisMode::Conservative;

    RunManifest manifest;
    manifest.mode = std::string(to_string(cfg.mode));
    manifest.inputs.push_back({"design", design_path, sha256_hex(d.text)});
    manifest.inputs.push_back({"config", config_path, sha256_hex(cfg_text)});

    std::optional<std::vector<DriverConfig>> mask;
    if (!mask_path.empty()) {
      const auto mask_text = detail::read_file(mask_path);
      mask = parse_mask(mask_text, mask_path);
      manifest.inputs.push_back({"mask", mask_path, sha256_hex(mask_text)});
      if (cfg.mode == AnalysisMode::Conservative) diag.note("conservative mode ignores the access mask");
    }

    const auto report = analyze_design(d.netlist, cfg, mask);
    for (const auto& w : report.warnings) diag.warning(w);
    const auto text = report_text(report);

    if (!dot_path.empty()) {
      const auto canon = canonicalize(cfg, d.netlist);
      const auto g = build_flow_graph(d.netlist, canon);
      std::map<std::string, Score> scores;
      if (cfg.mode == AnalysisMode::Conservative) {
        scores = propagate(g, canon).scores;
      } else {
        // Highest score any configuration reaches.
        for (const auto& config : *mask)
          for (const auto& [n, s] : propagate(refine_graph(g, config, d.netlist), canon).scores)
            scores[n] = std::max(scores[n], s);
      }
      const auto dot = export_dot(g, &scores, report.leaking_sinks());
      detail::write_file(dot_path, dot);
      manifest.outputs.push_back({"dot", dot_path, sha256_hex(dot)});
    }

    if (report_path.empty()) {
      out << text;
    } else {
      detail::write_file(report_path, text);
      manifest.outputs.push_back({"report", report_path, sha256_hex(text)});
      manifest.timestamp = manifest_timestamp();
      const auto mpath = manifest_path.empty() ? report_path + ".manifest.json" : manifest_path;
      detail::write_file(mpath, manifest.to_json().dump(2) + "\n");
      out << report.leaks.size() << " leak(s) in " << design_path << " (" << to_string(report.mode) << ")\n";
      for (const auto& l : report.leaks) {
        out << "  " << l.sink << " score " << l.score << ": ";
        for (std::size_t i = 0; i < l.path.nodes.size(); ++i) out << (i ? " -> " : "") << l.path.nodes[i];
        out << '\n';
      }
    }
    return report.leaks.empty() ? 0 : 1;
  } catch (const Error& e) {
    diag.error(e.what());
    return 2;
  } catch (const std::exception& e) {
    diag.error(e.what());
    return 2;
  }
}

}  // namespace cimflow
