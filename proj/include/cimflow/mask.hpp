#pragma once

// Access-mask driver configurations for an (m, n) 1T1R crossbar.
//
// Accessing cell (k, l) drives WL_k with the mode voltage, SL_l with V_GAT,
// and grounds BL_l together with every other word, source and bit line.
// READ mirrors SET with a V_READ word-line level.
//
// `.mask` sidecar: one configuration per line, `MODE k l net=ROLE ...`.

#include <algorithm>
#include <charconv>
#include <optional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "cimflow/error.hpp"
#include "cimflow/security_config.hpp"

namespace cimflow {

enum class AccessMode { Set, Reset, Read };
enum class LineRole { VSet, VRes, VRead, VGat, Gnd };

inline std::string_view to_string(AccessMode m) {
  switch (m) {
    case AccessMode::Set: return "SET";
    case AccessMode::Reset: return "RESET";
    case AccessMode::Read: return "READ";
  }
  return "SET";
}

inline std::string_view to_string(LineRole r) {
  switch (r) {
    case LineRole::VSet: return "V_SET";
    case LineRole::VRes: return "V_RES";
    case LineRole::VRead: return "V_READ";
    case LineRole::VGat: return "V_GAT";
    case LineRole::Gnd: return "GND";
  }
  return "GND";
}

inline std::optional<AccessMode> parse_access_mode(std::string_view s) {
  if (s == "SET") return AccessMode::Set;
  if (s == "RESET") return AccessMode::Reset;
  if (s == "READ") return AccessMode::Read;
  return std::nullopt;
}

inline std::optional<LineRole> parse_line_role(std::string_view s) {
  if (s == "V_SET") return LineRole::VSet;
  if (s == "V_RES") return LineRole::VRes;
  if (s == "V_READ") return LineRole::VRead;
  if (s == "V_GAT") return LineRole::VGat;
  if (s == "GND") return LineRole::Gnd;
  return std::nullopt;
}

inline LineRole word_line_role(AccessMode m) {
  switch (m) {
    case AccessMode::Set: return LineRole::VSet;
    case AccessMode::Reset: return LineRole::VRes;
    case AccessMode::Read: return LineRole::VRead;
  }
  return LineRole::VSet;
}

inline std::string word_line(int i) { return "WL_" + std::to_string(i); }
inline std::string source_line(int j) { return "SL_" + std::to_string(j); }
inline std::string bit_line(int j) { return "BL_" + std::to_string(j); }

struct DriverConfig {
  AccessMode mode = AccessMode::Set;
  int row = 1;  // k
  int col = 1;  // l
  std::map<std::string, LineRole> assignments;

  std::string label() const {
    return std::string(to_string(mode)) + " " + std::to_string(row) + " " + std::to_string(col);
  }
  bool operator==(const DriverConfig&) const = default;
};

struct Cell {
  int row = 1;
  int col = 1;
  auto operator<=>(const Cell&) const = default;
};

// Modes the mask admits, and the cells each may address. An empty cell list admits every cell.
struct MaskSpec {
  std::map<AccessMode, std::vector<Cell>> allowed;

  static MaskSpec all(std::set<AccessMode> modes) {
    MaskSpec s;
    for (auto m : modes) s.allowed[m] = {};
    return s;
  }
};

// The line assignment for accessing cell (row, col) in `mode`.
inline DriverConfig make_driver_config(AccessMode mode, int row, int col, int rows, int cols) {
  DriverConfig c{mode, row, col, {}};
  for (int i = 1; i <= rows; ++i) c.assignments[word_line(i)] = i == row ? word_line_role(mode) : LineRole::Gnd;
  for (int j = 1; j <= cols; ++j) {
    c.assignments[source_line(j)] = j == col ? LineRole::VGat : LineRole::Gnd;
    c.assignments[bit_line(j)] = LineRole::Gnd;
  }
  return c;
}

// One configuration per allowed (mode, k, l), ordered by mode, then k, then l.
inline std::vector<DriverConfig> enumerate_configs(const MaskSpec& mask, int rows, int cols) {
  if (rows < 1 || cols < 1)
    throw Error(ErrorCode::InvalidDimension, "crossbar must have at least one row and one column");
  std::vector<DriverConfig> out;
  for (const auto& [mode, cells] : mask.allowed) {
    if (cells.empty()) {
      for (int k = 1; k <= rows; ++k)
        for (int l = 1; l <= cols; ++l) out.push_back(make_driver_config(mode, k, l, rows, cols));
      continue;
    }
    std::set<Cell> sorted(cells.begin(), cells.end());
    for (const auto& c : sorted) {
      if (c.row < 1 || c.row > rows || c.col < 1 || c.col > cols)
        throw Error(ErrorCode::InvalidDimension, "mask cell (" + std::to_string(c.row) + "," +
                                                     std::to_string(c.col) + ") lies outside the crossbar");
      out.push_back(make_driver_config(mode, c.row, c.col, rows, cols));
    }
  }
  return out;
}

// Every deviation of `c` from the access-mask shape for an (rows, cols) crossbar.
inline std::vector<std::string> mask_shape_violations(const DriverConfig& c, int rows, int cols) {
  std::vector<std::string> out;
  if (c.row < 1 || c.row > rows || c.col < 1 || c.col > cols) out.push_back("selected cell outside the crossbar");
  const auto expected = make_driver_config(c.mode, std::clamp(c.row, 1, rows), std::clamp(c.col, 1, cols), rows, cols);
  for (const auto& [net, role] : expected.assignments) {
    auto it = c.assignments.find(net);
    if (it == c.assignments.end()) {
      out.push_back(net + " has no role");
    } else if (it->second != role) {
      out.push_back(net + " is " + std::string(to_string(it->second)) + ", expected " + std::string(to_string(role)));
    }
  }
  for (const auto& [net, role] : c.assignments)
    if (!expected.assignments.contains(net)) out.push_back(net + " is not a crossbar line");
  return out;
}

inline std::string format_mask(const std::vector<DriverConfig>& configs) {
  std::ostringstream os;
  for (const auto& c : configs) {
    os << c.label();
    for (const auto& [net, role] : c.assignments) os << ' ' << net << '=' << to_string(role);
    os << '\n';
  }
  return os.str();
}

inline std::vector<DriverConfig> parse_mask(std::string_view text, const std::string& file = "<mask>") {
  std::vector<DriverConfig> out;
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = std::min(text.find('\n', start), text.size());
    const auto line = detail::strip_comment(text.substr(start, end - start));
    start = end + 1;
    ++line_no;
    const auto words = detail::split_words(line);
    if (words.empty()) continue;
    const auto span_of = [&](std::size_t i) { return SourceSpan{file, line_no, words[i].second}; };
    if (words.size() < 3) throw Error(ErrorCode::SyntaxError, "expected 'MODE k l net=ROLE ...'", span_of(0));
    DriverConfig c;
    auto mode = parse_access_mode(words[0].first);
    if (!mode) throw Error(ErrorCode::SyntaxError, "unknown access mode '" + words[0].first + "'", span_of(0));
    c.mode = *mode;
    const auto index = [&](std::size_t i) {
      int v = 0;
      const auto& w = words[i].first;
      auto [p, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
      if (ec != std::errc{} || p != w.data() + w.size() || v < 1)
        throw Error(ErrorCode::SyntaxError, "'" + w + "' is not a positive index", span_of(i));
      return v;
    };
    c.row = index(1);
    c.col = index(2);
    for (std::size_t i = 3; i < words.size(); ++i) {
      const auto& w = words[i].first;
      const auto eq = w.find('=');
      if (eq == std::string::npos || eq == 0)
        throw Error(ErrorCode::SyntaxError, "expected net=ROLE, found '" + w + "'", span_of(i));
      auto role = parse_line_role(std::string_view(w).substr(eq + 1));
      if (!role) throw Error(ErrorCode::SyntaxError, "unknown line role in '" + w + "'", span_of(i));
      if (!c.assignments.emplace(w.substr(0, eq), *role).second)
        throw Error(ErrorCode::DuplicateDirective, "net '" + w.substr(0, eq) + "' assigned twice", span_of(i));
    }
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace cimflow
