#pragma once

#include <charconv>
#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "cimflow/error.hpp"
#include "cimflow/netlist.hpp"

namespace cimflow {

using Score = std::uint32_t;

enum class AnalysisMode { Conservative, Refined };

inline std::string_view to_string(AnalysisMode m) {
  return m == AnalysisMode::Conservative ? "conservative" : "refined";
}

// Labels for one analysis run.
//
// A reducer designator is an assign operator tag (`or`, `and`, `xor`, `not`,
// `buf`), an instance path (matches assigns and devices directly inside that
// instance, or the device of that name), or a module name (matches assigns and
// devices in every instance of that module).
struct SecurityConfig {
  std::map<std::string, Score> sources;
  std::set<std::string> sinks;
  std::map<std::string, Score> reducers;
  AnalysisMode mode = AnalysisMode::Conservative;

  bool operator==(const SecurityConfig&) const = default;

  Score max_source_score() const {
    Score best = 0;
    for (const auto& [net, s] : sources) best = std::max(best, s);
    return best;
  }
};

namespace detail {

inline std::vector<std::pair<std::string, int>> split_words(std::string_view line) {
  std::vector<std::pair<std::string, int>> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i >= line.size()) break;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    out.emplace_back(std::string(line.substr(start, i - start)), static_cast<int>(start) + 1);
  }
  return out;
}

inline std::string_view strip_comment(std::string_view line) {
  const auto hash = line.find('#');
  const auto slashes = line.find("//");
  return line.substr(0, std::min(hash, slashes));
}

inline Score parse_score(const std::string& word, const SourceSpan& span, bool positive) {
  Score v = 0;
  auto [p, ec] = std::from_chars(word.data(), word.data() + word.size(), v);
  if (ec != std::errc{} || p != word.data() + word.size())
    throw Error(ErrorCode::SyntaxError, "'" + word + "' is not a non-negative integer", span);
  if (positive && v == 0) throw Error(ErrorCode::SyntaxError, "decrement must be positive", span);
  return v;
}

}  // namespace detail

// Line format: `source <net> <score>`, `sink <net>`, `reducer <designator> <decrement>`,
// `mode <conservative|refined>`. `#` and `//` start comments.
inline SecurityConfig parse_security_config(std::string_view text, const std::string& file = "<config>") {
  SecurityConfig cfg;
  bool mode_seen = false;
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
    const auto& directive = words[0].first;
    const auto arity = [&](std::size_t n) {
      if (words.size() != n + 1)
        throw Error(ErrorCode::SyntaxError,
                    "'" + directive + "' takes " + std::to_string(n) + " argument(s), got " +
                        std::to_string(words.size() - 1),
                    span_of(0));
    };
    if (directive == "source") {
      arity(2);
      const auto score = detail::parse_score(words[2].first, span_of(2), false);
      auto [it, inserted] = cfg.sources.emplace(words[1].first, score);
      if (!inserted) it->second = std::max(it->second, score);
    } else if (directive == "sink") {
      arity(1);
      cfg.sinks.insert(words[1].first);
    } else if (directive == "reducer") {
      arity(2);
      const auto dec = detail::parse_score(words[2].first, span_of(2), true);
      if (!cfg.reducers.emplace(words[1].first, dec).second)
        throw Error(ErrorCode::DuplicateDirective, "reducer '" + words[1].first + "' given twice", span_of(0));
    } else if (directive == "mode") {
      arity(1);
      if (mode_seen) throw Error(ErrorCode::DuplicateDirective, "'mode' given twice", span_of(0));
      mode_seen = true;
      if (words[1].first == "conservative") {
        cfg.mode = AnalysisMode::Conservative;
      } else if (words[1].first == "refined") {
        cfg.mode = AnalysisMode::Refined;
      } else {
        throw Error(ErrorCode::SyntaxError, "unknown mode '" + words[1].first + "'", span_of(1));
      }
    } else {
      throw Error(ErrorCode::SyntaxError, "unknown directive '" + directive + "'", span_of(0));
    }
  }
  return cfg;
}

inline std::string format_security_config(const SecurityConfig& cfg) {
  std::ostringstream os;
  os << "mode " << to_string(cfg.mode) << '\n';
  for (const auto& [net, s] : cfg.sources) os << "source " << net << ' ' << s << '\n';
  for (const auto& net : cfg.sinks) os << "sink " << net << '\n';
  for (const auto& [d, dec] : cfg.reducers) os << "reducer " << d << ' ' << dec << '\n';
  return os.str();
}

// Rewrites source and sink names to canonical nets of `nl`; aliases of one net merge by max.
inline SecurityConfig canonicalize(const SecurityConfig& cfg, const ElaboratedNetlist& nl) {
  SecurityConfig out;
  out.mode = cfg.mode;
  out.reducers = cfg.reducers;
  const auto lookup = [&](const std::string& name, std::string_view role) {
    auto net = nl.resolve(name);
    if (!net) throw Error(ErrorCode::UnknownNet, std::string(role) + " '" + name + "' is not a net of the design");
    return *net;
  };
  for (const auto& [name, score] : cfg.sources) {
    auto [it, inserted] = out.sources.emplace(lookup(name, "source"), score);
    if (!inserted) it->second = std::max(it->second, score);
  }
  for (const auto& name : cfg.sinks) out.sinks.insert(lookup(name, "sink"));
  return out;
}

}  // namespace cimflow
