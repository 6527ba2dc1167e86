#pragma once

// Parser for the structural Verilog subset used to describe CIM designs:
// module/endmodule, input/output/inout/wire declarations with optional
// [msb:lsb] ranges, continuous assigns over `| & ^ ~` and parentheses, and
// named-port instantiation. `1'b0` / `1'b1` map to the GND / VDD nets.

#include <cctype>
#include <charconv>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "cimflow/error.hpp"
#include "cimflow/netlist.hpp"

namespace cimflow {

namespace detail {

enum class TokKind { Ident, Number, Literal, Punct, End };

struct Token {
  TokKind kind = TokKind::End;
  std::string text;
  SourceSpan span;
};

class Lexer {
 public:
  Lexer(std::string_view text, std::string file) : text_(text), file_(std::move(file)) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space_and_comments();
      Token t;
      t.span = here();
      if (pos_ >= text_.size()) {
        t.kind = TokKind::End;
        out.push_back(std::move(t));
        return out;
      }
      const char c = text_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        t.kind = TokKind::Ident;
        while (pos_ < text_.size() && is_ident_char(text_[pos_])) t.text += advance();
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) t.text += advance();
        t.kind = TokKind::Number;
        if (pos_ < text_.size() && text_[pos_] == '\'') {
          t.kind = TokKind::Literal;
          t.text += advance();
          while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            t.text += advance();
        }
      } else if (c == '\\') {
        throw Error(ErrorCode::UnsupportedConstruct, "escaped identifiers are not supported", t.span);
      } else if (c == '`') {
        throw Error(ErrorCode::UnsupportedConstruct, "compiler directives are not supported", t.span);
      } else if (c == '$') {
        throw Error(ErrorCode::UnsupportedConstruct, "system tasks are not supported", t.span);
      } else if (std::string_view("();,.[]:=|&^~#@").find(c) != std::string_view::npos) {
        t.kind = TokKind::Punct;
        t.text = std::string(1, advance());
      } else {
        throw Error(ErrorCode::SyntaxError, std::string("unexpected character '") + c + "'", t.span);
      }
      out.push_back(std::move(t));
    }
  }

 private:
  static bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

  SourceSpan here() const { return {file_, line_, column_}; }

  char advance() {
    const char c = text_[pos_++];
    if (c == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    return c;
  }

  void skip_space_and_comments() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (text_.substr(pos_, 2) == "//") {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (text_.substr(pos_, 2) == "/*") {
        const auto start = here();
        advance();
        advance();
        while (pos_ < text_.size() && text_.substr(pos_, 2) != "*/") advance();
        if (pos_ >= text_.size()) throw Error(ErrorCode::SyntaxError, "unterminated block comment", start);
        advance();
        advance();
      } else {
        return;
      }
    }
  }

  std::string_view text_;
  std::string file_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
};

inline const std::set<std::string, std::less<>>& unsupported_keywords() {
  static const std::set<std::string, std::less<>> kw{
      "always",  "always_comb", "always_ff", "initial",   "reg",      "logic",    "parameter", "localparam",
      "generate", "endgenerate", "genvar",   "function",  "endfunction", "task",  "endtask",   "begin",
      "end",     "if",          "else",      "case",      "endcase",  "for",      "while",     "integer",
      "real",    "time",        "supply0",   "supply1",   "tri",      "specify",  "endspecify", "defparam",
      "primitive", "endprimitive", "signed", "analog",    "electrical", "discipline"};
  return kw;
}

// Top-level operator and every net mentioned by a right-hand side.
struct Expr {
  AssignOp op = AssignOp::Buf;
  std::vector<NetRef> refs;
};

class Parser {
 public:
  Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  std::vector<ModuleDef> run() {
    std::vector<ModuleDef> out;
    while (peek().kind != TokKind::End) {
      if (peek_ident("module")) {
        out.push_back(parse_module());
      } else {
        unexpected("'module'");
      }
    }
    return out;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const { return toks_[std::min(pos_ + ahead, toks_.size() - 1)]; }
  bool peek_punct(char c, std::size_t ahead = 0) const {
    const auto& t = peek(ahead);
    return t.kind == TokKind::Punct && t.text[0] == c;
  }
  bool peek_ident(std::string_view word) const { return peek().kind == TokKind::Ident && peek().text == word; }
  const Token& next() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }

  [[noreturn]] void unexpected(std::string_view expected) const {
    const auto& t = peek();
    const std::string got = t.kind == TokKind::End ? "end of input" : "'" + t.text + "'";
    throw Error(ErrorCode::SyntaxError, "expected " + std::string(expected) + ", found " + got, t.span);
  }

  void expect_punct(char c) {
    if (!peek_punct(c)) unexpected(std::string("'") + c + "'");
    next();
  }

  void expect_keyword(std::string_view word) {
    if (!peek_ident(word)) unexpected("'" + std::string(word) + "'");
    next();
  }

  std::string identifier() {
    const auto& t = peek();
    if (t.kind != TokKind::Ident) unexpected("identifier");
    if (unsupported_keywords().contains(t.text))
      throw Error(ErrorCode::UnsupportedConstruct, "'" + t.text + "' is not supported", t.span);
    return next().text;
  }

  int integer() {
    const auto& t = peek();
    if (t.kind != TokKind::Number) unexpected("integer");
    int v = 0;
    auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (ec != std::errc{}) throw Error(ErrorCode::SyntaxError, "integer out of range", t.span);
    next();
    return v;
  }

  std::optional<BitRange> optional_range() {
    if (!peek_punct('[')) return std::nullopt;
    next();
    BitRange r;
    r.msb = integer();
    expect_punct(':');
    r.lsb = integer();
    expect_punct(']');
    return r;
  }

  static std::optional<PortDirection> direction_keyword(const Token& t) {
    if (t.kind != TokKind::Ident) return std::nullopt;
    if (t.text == "input") return PortDirection::Input;
    if (t.text == "output") return PortDirection::Output;
    if (t.text == "inout") return PortDirection::Inout;
    return std::nullopt;
  }

  ModuleDef parse_module() {
    expect_keyword("module");
    ModuleDef m;
    const auto name_span = peek().span;
    m.name = identifier();
    if (peek_punct('#')) throw Error(ErrorCode::UnsupportedConstruct, "parameterized modules are not supported", peek().span);

    // Header ports: either ANSI declarations or a bare name list.
    std::vector<std::string> header_names;
    std::set<std::string> declared;
    bool ansi = false;
    if (peek_punct('(')) {
      next();
      if (!peek_punct(')')) {
        ansi = direction_keyword(peek()).has_value();
        if (ansi) {
          PortDirection dir = PortDirection::Inout;
          std::optional<BitRange> range;
          for (;;) {
            if (auto d = direction_keyword(peek())) {
              next();
              dir = *d;
              if (peek_ident("wire")) next();
              range = optional_range();
            }
            const auto span = peek().span;
            auto name = identifier();
            if (!declared.insert(name).second)
              throw Error(ErrorCode::SyntaxError, "port '" + name + "' declared twice", span);
            m.ports.push_back({name, dir, range});
            if (!peek_punct(',')) break;
            next();
          }
        } else {
          for (;;) {
            const auto span = peek().span;
            auto name = identifier();
            if (std::find(header_names.begin(), header_names.end(), name) != header_names.end())
              throw Error(ErrorCode::SyntaxError, "port '" + name + "' listed twice", span);
            header_names.push_back(std::move(name));
            if (!peek_punct(',')) break;
            next();
          }
        }
      }
      expect_punct(')');
    }
    expect_punct(';');

    std::map<std::string, PortDecl> body_ports;
    while (!peek_ident("endmodule")) {
      if (peek().kind == TokKind::End) unexpected("'endmodule'");
      if (auto dir = direction_keyword(peek())) {
        const auto span = peek().span;
        if (ansi) throw Error(ErrorCode::SyntaxError, "port direction declared in body of an ANSI-style module", span);
        next();
        if (peek_ident("wire")) next();
        auto range = optional_range();
        for (;;) {
          const auto nspan = peek().span;
          auto name = identifier();
          if (std::find(header_names.begin(), header_names.end(), name) == header_names.end())
            throw Error(ErrorCode::SyntaxError, "'" + name + "' is not in the port list of module '" + m.name + "'", nspan);
          if (!body_ports.emplace(name, PortDecl{name, *dir, range}).second)
            throw Error(ErrorCode::SyntaxError, "port '" + name + "' declared twice", nspan);
          if (!peek_punct(',')) break;
          next();
        }
        expect_punct(';');
      } else if (peek_ident("wire")) {
        next();
        auto range = optional_range();
        for (;;) {
          m.wires.push_back({identifier(), range});
          if (peek_punct('=')) throw Error(ErrorCode::UnsupportedConstruct, "net declaration assignments are not supported", peek().span);
          if (!peek_punct(',')) break;
          next();
        }
        expect_punct(';');
      } else if (peek_ident("assign")) {
        next();
        for (;;) {
          Assign a;
          a.target = net_ref();
          expect_punct('=');
          auto e = expr();
          a.op = e.op;
          a.sources = std::move(e.refs);
          m.assigns.push_back(std::move(a));
          if (!peek_punct(',')) break;
          next();
        }
        expect_punct(';');
      } else if (peek().kind == TokKind::Ident) {
        m.instances.push_back(instance());
      } else {
        unexpected("module item");
      }
    }
    next();  // endmodule

    for (const auto& name : header_names) {
      auto it = body_ports.find(name);
      if (it == body_ports.end())
        throw Error(ErrorCode::SyntaxError, "port '" + name + "' of module '" + m.name + "' has no direction", name_span);
      m.ports.push_back(it->second);
    }
    return m;
  }

  NetRef net_ref() {
    if (peek().kind == TokKind::Literal) return literal();
    NetRef r;
    r.name = identifier();
    if (peek_punct('[')) {
      next();
      r.bit = integer();
      if (peek_punct(':')) throw Error(ErrorCode::UnsupportedConstruct, "part selects are not supported", peek().span);
      expect_punct(']');
    }
    return r;
  }

  NetRef literal() {
    const auto& t = next();
    std::string lower;
    for (char c : t.text) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (lower == "1'b0") return {std::string(kGnd), std::nullopt};
    if (lower == "1'b1") return {std::string(kVdd), std::nullopt};
    throw Error(ErrorCode::UnsupportedConstruct, "literal " + t.text + " (only 1'b0 and 1'b1 are supported)", t.span);
  }

  Expr expr() { return binary_level(0); }

  // Precedence, loosest first: | then ^ then &.
  Expr binary_level(int level) {
    static constexpr char kOps[] = {'|', '^', '&'};
    static constexpr AssignOp kTags[] = {AssignOp::Or, AssignOp::Xor, AssignOp::And};
    if (level == 3) return unary();
    Expr lhs = binary_level(level + 1);
    if (!peek_punct(kOps[level])) return lhs;
    Expr out;
    out.op = kTags[level];
    out.refs = std::move(lhs.refs);
    while (peek_punct(kOps[level])) {
      next();
      auto rhs = binary_level(level + 1);
      out.refs.insert(out.refs.end(), rhs.refs.begin(), rhs.refs.end());
    }
    return out;
  }

  Expr unary() {
    if (peek_punct('~')) {
      next();
      auto inner = unary();
      inner.op = AssignOp::Not;
      return inner;
    }
    if (peek_punct('(')) {
      next();
      auto inner = expr();
      expect_punct(')');
      return inner;
    }
    if (peek().kind == TokKind::Ident || peek().kind == TokKind::Literal) return {AssignOp::Buf, {net_ref()}};
    unexpected("expression");
  }

  Instance instance() {
    Instance inst;
    inst.kind = identifier();
    if (peek_punct('#')) throw Error(ErrorCode::UnsupportedConstruct, "parameter overrides are not supported", peek().span);
    inst.name = identifier();
    expect_punct('(');
    if (!peek_punct(')')) {
      for (;;) {
        if (!peek_punct('.'))
          throw Error(ErrorCode::UnsupportedConstruct, "positional port connections are not supported", peek().span);
        next();
        const auto span = peek().span;
        auto port = identifier();
        expect_punct('(');
        if (!peek_punct(')')) {
          if (!inst.connections.emplace(port, net_ref()).second)
            throw Error(ErrorCode::SyntaxError, "port '" + port + "' connected twice", span);
        }
        expect_punct(')');
        if (!peek_punct(',')) break;
        next();
      }
    }
    expect_punct(')');
    expect_punct(';');
    return inst;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

inline std::string format_expr(const Assign& a) {
  const auto join = [&](std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < a.sources.size(); ++i) out += (i ? std::string(sep) : "") + a.sources[i].str();
    return out;
  };
  switch (a.op) {
    case AssignOp::Or: return join(" | ");
    case AssignOp::And: return join(" & ");
    case AssignOp::Xor: return join(" ^ ");
    case AssignOp::Not: return a.sources.size() == 1 ? "~" + a.sources[0].str() : "~(" + join(" | ") + ")";
    case AssignOp::Buf: return a.sources.size() == 1 ? a.sources[0].str() : "(" + join(" | ") + ")";
  }
  return join(" | ");
}

inline std::string format_range(const std::optional<BitRange>& r) {
  return r ? "[" + std::to_string(r->msb) + ":" + std::to_string(r->lsb) + "] " : "";
}

}  // namespace detail

inline std::vector<ModuleDef> parse_verilog(std::string_view text, std::string file = "<input>") {
  return detail::Parser(detail::Lexer(text, std::move(file)).run()).run();
}

// Canonical Verilog text for a parsed design; parse_verilog(format_design(d)) == d.
inline std::string format_design(const std::vector<ModuleDef>& design) {
  std::ostringstream os;
  for (std::size_t mi = 0; mi < design.size(); ++mi) {
    const auto& m = design[mi];
    if (mi) os << '\n';
    os << "module " << m.name << " (";
    for (std::size_t i = 0; i < m.ports.size(); ++i) os << (i ? ", " : "") << m.ports[i].name;
    os << ");\n";
    for (const auto& p : m.ports)
      os << "  " << to_string(p.direction) << ' ' << detail::format_range(p.range) << p.name << ";\n";
    for (const auto& w : m.wires) os << "  wire " << detail::format_range(w.range) << w.name << ";\n";
    for (const auto& a : m.assigns) os << "  assign " << a.target.str() << " = " << detail::format_expr(a) << ";\n";
    for (const auto& inst : m.instances) {
      os << "  " << inst.kind << ' ' << inst.name << " (";
      bool first = true;
      for (const auto& [port, ref] : inst.connections) {
        os << (first ? "" : ", ") << '.' << port << '(' << ref.str() << ')';
        first = false;
      }
      os << ");\n";
    }
    os << "endmodule\n";
  }
  return os.str();
}

}  // namespace cimflow
