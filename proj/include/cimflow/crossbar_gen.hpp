#pragma once

// Netlist generators for 1R / 1T1R crossbars, the access-mask driver and the
// CIM top level that joins them to the digital domain.

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cimflow/error.hpp"
#include "cimflow/mask.hpp"

namespace cimflow {

enum class CrossbarKind { Passive1R, Active1T1R };

inline std::string_view to_string(CrossbarKind k) { return k == CrossbarKind::Passive1R ? "1r" : "1t1r"; }

struct CrossbarSpec {
  int rows = 1;  // word lines
  int cols = 1;  // bit lines
  CrossbarKind kind = CrossbarKind::Passive1R;
  bool masked = false;
};

inline void check_dimensions(int rows, int cols) {
  if (rows < 1 || cols < 1)
    throw Error(ErrorCode::InvalidDimension, "crossbar dimensions must be at least 1x1, got " +
                                                 std::to_string(rows) + "x" + std::to_string(cols));
}

inline void check_spec(const CrossbarSpec& spec) {
  check_dimensions(spec.rows, spec.cols);
  if (spec.masked && spec.kind != CrossbarKind::Active1T1R)
    throw Error(ErrorCode::InvalidDimension, "an access mask requires a 1T1R crossbar");
}

inline std::string crossbar_module_name(CrossbarKind kind, int rows, int cols) {
  return "xbar_" + std::string(to_string(kind)) + "_" + std::to_string(rows) + "x" + std::to_string(cols);
}

inline std::string mask_driver_module_name(int rows, int cols) {
  return "mask_driver_" + std::to_string(rows) + "x" + std::to_string(cols);
}

namespace detail {

inline std::vector<std::string> crossbar_lines(CrossbarKind kind, int rows, int cols) {
  std::vector<std::string> out;
  for (int i = 1; i <= rows; ++i) out.push_back(word_line(i));
  if (kind == CrossbarKind::Active1T1R)
    for (int j = 1; j <= cols; ++j) out.push_back(source_line(j));
  for (int j = 1; j <= cols; ++j) out.push_back(bit_line(j));
  return out;
}

inline std::string join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? std::string(sep) : "") + items[i];
  return out;
}

}  // namespace detail

// m word lines, n bit lines, one memristor cell_i_j(ae=WL_i, oe=BL_j) per crossing.
inline std::string gen_1r(int rows, int cols) {
  check_dimensions(rows, cols);
  std::ostringstream os;
  const auto lines = detail::crossbar_lines(CrossbarKind::Passive1R, rows, cols);
  os << "// Passive 1R crossbar: " << rows << " word lines x " << cols << " bit lines\n";
  os << "module " << crossbar_module_name(CrossbarKind::Passive1R, rows, cols) << " (" << detail::join(lines, ", ")
     << ");\n";
  for (const auto& l : lines) os << "  inout " << l << ";\n";
  for (int i = 1; i <= rows; ++i)
    for (int j = 1; j <= cols; ++j)
      os << "  memristor cell_" << i << '_' << j << " (.ae(" << word_line(i) << "), .oe(" << bit_line(j) << "));\n";
  os << "endmodule\n";
  return os.str();
}

// Per cell: memristor from WL_i to an internal node, nmos selector from that
// node to BL_j with its gate on SL_j.
inline std::string gen_1t1r(int rows, int cols) {
  check_dimensions(rows, cols);
  std::ostringstream os;
  os << "// Active 1T1R crossbar: " << rows << " word lines x " << cols << " source/bit line pairs\n";
  os << "module " << crossbar_module_name(CrossbarKind::Active1T1R, rows, cols) << " ("
     << detail::join(detail::crossbar_lines(CrossbarKind::Active1T1R, rows, cols), ", ") << ");\n";
  for (int i = 1; i <= rows; ++i) os << "  inout " << word_line(i) << ";\n";
  for (int j = 1; j <= cols; ++j) os << "  input " << source_line(j) << ";\n";
  for (int j = 1; j <= cols; ++j) os << "  inout " << bit_line(j) << ";\n";
  for (int i = 1; i <= rows; ++i)
    for (int j = 1; j <= cols; ++j) os << "  wire mid_" << i << '_' << j << ";\n";
  for (int i = 1; i <= rows; ++i) {
    for (int j = 1; j <= cols; ++j) {
      const auto mid = "mid_" + std::to_string(i) + "_" + std::to_string(j);
      const auto suffix = std::to_string(i) + "_" + std::to_string(j);
      os << "  memristor cell_" << suffix << " (.ae(" << word_line(i) << "), .oe(" << mid << "));\n";
      os << "  nmos sel_" << suffix << " (.drain(" << mid << "), .gate(" << source_line(j) << "), .source("
         << bit_line(j) << "));\n";
    }
  }
  os << "endmodule\n";
  return os.str();
}

struct MaskedDriver {
  std::string verilog;
  std::string mask;  // `.mask` sidecar text
};

// Lut-based driver: a 2-bit mode and one request line per crossbar line in,
// every WL/SL/BL out. The allowed configurations go to the sidecar.
inline MaskedDriver gen_masked_driver(int rows, int cols) {
  check_dimensions(rows, cols);
  const auto lines = detail::crossbar_lines(CrossbarKind::Active1T1R, rows, cols);
  std::vector<std::string> ports{"mode"};
  for (const auto& l : lines) ports.push_back("req_" + l);
  for (const auto& l : lines) ports.push_back(l);

  std::ostringstream os;
  os << "// Access-mask driver for a " << rows << "x" << cols << " 1T1R crossbar\n";
  os << "module " << mask_driver_module_name(rows, cols) << " (" << detail::join(ports, ", ") << ");\n";
  os << "  input [1:0] mode;\n";
  for (const auto& l : lines) os << "  input req_" << l << ";\n";
  for (const auto& l : lines) os << "  output " << l << ";\n";
  std::vector<std::string> conns{".in_mode_0(mode[0])", ".in_mode_1(mode[1])"};
  for (const auto& l : lines) conns.push_back(".in_" + l + "(req_" + l + ")");
  for (const auto& l : lines) conns.push_back(".out_" + l + "(" + l + ")");
  os << "  lut mask (" << detail::join(conns, ", ") << ");\n";
  os << "endmodule\n";

  const auto configs =
      enumerate_configs(MaskSpec::all({AccessMode::Set, AccessMode::Reset, AccessMode::Read}), rows, cols);
  return {os.str(), format_mask(configs)};
}

struct GeneratedDesign {
  std::string verilog;
  std::optional<std::string> mask;
  std::string top;
};

// Digital inputs din_<line> drive every crossbar line (plain assigns, or the
// access-mask lut when masked); word and bit lines are read back to dout_<line>.
inline GeneratedDesign gen_cim_top(const CrossbarSpec& spec) {
  check_spec(spec);
  const int m = spec.rows;
  const int n = spec.cols;
  const auto lines = detail::crossbar_lines(spec.kind, m, n);
  std::vector<std::string> readout;
  for (int i = 1; i <= m; ++i) readout.push_back(word_line(i));
  for (int j = 1; j <= n; ++j) readout.push_back(bit_line(j));

  GeneratedDesign out;
  out.top = "cim_top";
  std::ostringstream os;
  os << (spec.kind == CrossbarKind::Passive1R ? gen_1r(m, n) : gen_1t1r(m, n)) << '\n';
  if (spec.masked) {
    auto drv = gen_masked_driver(m, n);
    os << drv.verilog << '\n';
    out.mask = std::move(drv.mask);
  }

  std::vector<std::string> ports;
  for (const auto& l : lines) ports.push_back("din_" + l);
  if (spec.masked) ports.push_back("din_mode");
  for (const auto& l : readout) ports.push_back("dout_" + l);

  os << "// CIM module: " << m << "x" << n << ' ' << to_string(spec.kind) << " crossbar"
     << (spec.masked ? " behind an access-mask driver" : "") << "\n";
  os << "module cim_top (" << detail::join(ports, ", ") << ");\n";
  for (const auto& l : lines) os << "  input din_" << l << ";\n";
  if (spec.masked) os << "  input [1:0] din_mode;\n";
  for (const auto& l : readout) os << "  output dout_" << l << ";\n";
  for (const auto& l : lines) os << "  wire " << l << ";\n";

  if (spec.masked) {
    std::vector<std::string> conns{".mode(din_mode)"};
    for (const auto& l : lines) conns.push_back(".req_" + l + "(din_" + l + ")");
    for (const auto& l : lines) conns.push_back("." + l + "(" + l + ")");
    os << "  " << mask_driver_module_name(m, n) << " drv (" << detail::join(conns, ", ") << ");\n";
  } else {
    for (const auto& l : lines) os << "  assign " << l << " = din_" << l << ";\n";
  }
  std::vector<std::string> xconns;
  for (const auto& l : lines) xconns.push_back("." + l + "(" + l + ")");
  os << "  " << crossbar_module_name(spec.kind, m, n) << " xbar (" << detail::join(xconns, ", ") << ");\n";
  for (const auto& l : readout) os << "  assign dout_" << l << " = " << l << ";\n";
  os << "endmodule\n";
  out.verilog = os.str();
  return out;
}

// Default labels for a generated top: row-1 input is sensitive, every readout is untrusted.
inline std::string default_security_config(const CrossbarSpec& spec) {
  std::ostringstream os;
  os << "# sensitive digital input on word line 1, every digital readout untrusted\n";
  os << "source din_" << word_line(1) << " 1\n";
  for (int i = 1; i <= spec.rows; ++i) os << "sink dout_" << word_line(i) << '\n';
  for (int j = 1; j <= spec.cols; ++j) os << "sink dout_" << bit_line(j) << '\n';
  return os.str();
}

}  // namespace cimflow
