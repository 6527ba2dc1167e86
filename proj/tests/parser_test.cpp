#include <gtest/gtest.h>

#include <random>

#include "test_support.hpp"

using namespace cimflow;

namespace {

Error parse_failure(const std::string& src) {
  try {
    parse_verilog(src, "t.v");
  } catch (const Error& e) {
    return e;
  }
  ADD_FAILURE() << "parse succeeded: " << src;
  return Error(ErrorCode::SyntaxError, "none");
}

Error config_failure(const std::string& text) {
  try {
    parse_security_config(text, "t.ifc");
  } catch (const Error& e) {
    return e;
  }
  ADD_FAILURE() << "config parse succeeded: " << text;
  return Error(ErrorCode::SyntaxError, "none");
}

}  // namespace

TEST(ParseVerilog, MemristorFlowModel) {
  const auto mods = parse_verilog(cimflow::testing::kMemristorFlowModel);
  ASSERT_EQ(mods.size(), 1u);
  const auto& m = mods[0];
  EXPECT_EQ(m.name, "memristor");
  ASSERT_EQ(m.ports.size(), 2u);
  for (const auto& p : m.ports) EXPECT_EQ(p.direction, PortDirection::Inout);
  ASSERT_EQ(m.assigns.size(), 2u);
  EXPECT_EQ(m.assigns[0].target.name, "ae");
  EXPECT_EQ(m.assigns[0].op, AssignOp::Or);
  EXPECT_EQ(m.assigns[0].sources, (std::vector<NetRef>{{"ae", {}}, {"oe", {}}}));
  EXPECT_EQ(m.assigns[1].target.name, "oe");
  EXPECT_EQ(m.assigns[1].sources, (std::vector<NetRef>{{"ae", {}}, {"oe", {}}}));
}

TEST(ParseVerilog, EmptyFile) {
  EXPECT_TRUE(parse_verilog("").empty());
  EXPECT_TRUE(parse_verilog("  // only a comment\n/* and a block */\n").empty());
}

TEST(ParseVerilog, OperatorTags) {
  const auto mods = parse_verilog(
      "module t (input a, input b, output y, output z);\n"
      "  assign y = a | b; assign z = ~y;\n"
      "endmodule\n");
  ASSERT_EQ(mods[0].assigns.size(), 2u);
  EXPECT_EQ(mods[0].assigns[0].op, AssignOp::Or);
  EXPECT_EQ(mods[0].assigns[1].op, AssignOp::Not);
}

TEST(ParseVerilog, ExpressionShapes) {
  const auto mods = parse_verilog(
      "module t (input a, input b, input c, output [4:0] y);\n"
      "  assign y[0] = (a & b) | c;\n"
      "  assign y[1] = a ^ b & c;\n"
      "  assign y[2] = ~(a & b);\n"
      "  assign y[3] = (a);\n"
      "  assign y[4] = 1'b1, y[3] = 1'b0;\n"
      "endmodule\n");
  const auto& as = mods[0].assigns;
  ASSERT_EQ(as.size(), 6u);
  EXPECT_EQ(as[0].op, AssignOp::Or);
  EXPECT_EQ(as[0].sources.size(), 3u);
  EXPECT_EQ(as[1].op, AssignOp::Xor);
  EXPECT_EQ(as[2].op, AssignOp::Not);
  EXPECT_EQ(as[2].sources.size(), 2u);
  EXPECT_EQ(as[3].op, AssignOp::Buf);
  EXPECT_EQ(as[4].sources, (std::vector<NetRef>{{"VDD", {}}}));
  EXPECT_EQ(as[5].sources, (std::vector<NetRef>{{"GND", {}}}));
  EXPECT_EQ(as[0].target, (NetRef{"y", 0}));
}

TEST(ParseVerilog, AnsiAndNonAnsiHeadersAgree) {
  const auto ansi = parse_verilog("module t (input wire [1:0] a, b, output y); endmodule");
  const auto classic = parse_verilog("module t (a, b, y); input [1:0] a, b; output y; endmodule");
  EXPECT_EQ(ansi, classic);
  EXPECT_EQ(ansi[0].ports[1].width(), 2);
}

TEST(ParseVerilog, Instances) {
  const auto mods = parse_verilog(
      "module t (inout a, inout b);\n"
      "  memristor m1 (.ae(a), .oe(b));\n"
      "  sub s (.p(a), .q());\n"
      "endmodule\n");
  ASSERT_EQ(mods[0].instances.size(), 2u);
  EXPECT_EQ(mods[0].instances[0].kind, "memristor");
  EXPECT_EQ(mods[0].instances[0].connections.at("oe").name, "b");
  EXPECT_EQ(mods[0].instances[1].connections.size(), 1u);  // .q() is left unconnected
}

TEST(ParseVerilog, SyntaxErrorsCarrySpans) {
  const auto e = parse_failure("module t (a);\n  inout a\nendmodule\n");
  EXPECT_EQ(e.code(), ErrorCode::SyntaxError);
  ASSERT_TRUE(e.span());
  EXPECT_EQ(e.span()->file, "t.v");
  EXPECT_EQ(e.span()->line, 3);
  EXPECT_EQ(e.span()->column, 1);

  EXPECT_EQ(parse_failure("module t (a); endmodule").code(), ErrorCode::SyntaxError);  // no direction
  EXPECT_EQ(parse_failure("module t; assign = a; endmodule").code(), ErrorCode::SyntaxError);
  EXPECT_EQ(parse_failure("module t; /* open").code(), ErrorCode::SyntaxError);
  EXPECT_EQ(parse_failure("module t; wire a; ").code(), ErrorCode::SyntaxError);
  EXPECT_EQ(parse_failure("module t; wire a % b; endmodule").code(), ErrorCode::SyntaxError);
}

TEST(ParseVerilog, UnsupportedConstructs) {
  for (const std::string src : {"module t; reg r; endmodule", "module t; always @(x) y = x; endmodule",
                                "module t #(parameter W = 1) (); endmodule", "module t; sub #(2) s (); endmodule",
                                "module t; sub s (a, b); endmodule", "module t (output y); assign y = 4'b1010; endmodule",
                                "module t; wire \\odd ; endmodule", "`define X 1", "module t; wire a = b; endmodule",
                                "module t (input [3:0] a, output y); assign y = a[1:0]; endmodule"}) {
    const auto e = parse_failure(src);
    EXPECT_EQ(e.code(), ErrorCode::UnsupportedConstruct) << src;
  }
}

// Every span points at a real position of the text.
TEST(ParseVerilog, SpansStayInsideInput) {
  const std::string base = gen_1t1r(2, 2);
  std::mt19937 rng(11);
  std::uniform_int_distribution<std::size_t> pos(0, base.size() - 1);
  int errors = 0;
  for (int i = 0; i < 200; ++i) {
    std::string text = base;
    text[pos(rng)] = "(;.#%)"[i % 6];
    try {
      parse_verilog(text, "m.v");
    } catch (const Error& e) {
      ++errors;
      ASSERT_TRUE(e.span());
      int lines = 1;
      for (char c : text) lines += c == '\n';
      EXPECT_GE(e.span()->line, 1);
      EXPECT_LE(e.span()->line, lines);
      EXPECT_GE(e.span()->column, 1);
    }
  }
  EXPECT_GT(errors, 0);
}

TEST(ParseVerilog, GeneratorOutputRoundTrips) {
  std::vector<std::string> sources{cimflow::testing::kMemristorFlowModel};
  for (int m = 1; m <= 4; ++m)
    for (int n = 1; n <= 4; ++n) {
      sources.push_back(gen_1r(m, n));
      sources.push_back(gen_1t1r(m, n));
      sources.push_back(gen_masked_driver(m, n).verilog);
      sources.push_back(gen_cim_top({m, n, CrossbarKind::Active1T1R, true}).verilog);
    }
  sources.push_back("module t (input [1:0] a, input b, output y); assign y = ~(a[0] & b) ^ 1'b1; endmodule");
  for (const auto& src : sources) {
    const auto first = parse_verilog(src);
    const auto printed = format_design(first);
    EXPECT_EQ(parse_verilog(printed), first) << printed;
    EXPECT_EQ(format_design(parse_verilog(printed)), printed);
  }
}

TEST(ParseSecurityConfig, UnitLabel) {
  const auto cfg = parse_security_config("source key 1\nsink out\nmode conservative\n");
  EXPECT_EQ(cfg.sources, (std::map<std::string, Score>{{"key", 1}}));
  EXPECT_EQ(cfg.sinks, (std::set<std::string>{"out"}));
  EXPECT_TRUE(cfg.reducers.empty());
  EXPECT_EQ(cfg.mode, AnalysisMode::Conservative);
}

TEST(ParseSecurityConfig, EmptyTextDefaults) {
  const auto cfg = parse_security_config("");
  EXPECT_TRUE(cfg.sources.empty());
  EXPECT_TRUE(cfg.sinks.empty());
  EXPECT_TRUE(cfg.reducers.empty());
  EXPECT_EQ(cfg.mode, AnalysisMode::Conservative);
}

TEST(ParseSecurityConfig, ScoreAndReducer) {
  const auto cfg = parse_security_config("source pt 12\nreducer aes_round 1\n# comment\n\nmode refined // trailing\n");
  EXPECT_EQ(cfg.sources.at("pt"), 12u);
  EXPECT_EQ(cfg.reducers.at("aes_round"), 1u);
  EXPECT_EQ(cfg.mode, AnalysisMode::Refined);
}

TEST(ParseSecurityConfig, RepeatedSourceKeepsMax) {
  const auto cfg = parse_security_config("source a 2\nsource a 5\nsource a 3\n");
  EXPECT_EQ(cfg.sources.at("a"), 5u);
}

TEST(ParseSecurityConfig, Errors) {
  EXPECT_EQ(config_failure("mode conservative\nmode refined\n").code(), ErrorCode::DuplicateDirective);
  EXPECT_EQ(config_failure("reducer r 1\nreducer r 2\n").code(), ErrorCode::DuplicateDirective);
  EXPECT_EQ(config_failure("label x 1\n").code(), ErrorCode::SyntaxError);
  EXPECT_EQ(config_failure("source x\n").code(), ErrorCode::SyntaxError);
  EXPECT_EQ(config_failure("source x -1\n").code(), ErrorCode::SyntaxError);
  EXPECT_EQ(config_failure("reducer r 0\n").code(), ErrorCode::SyntaxError);
  EXPECT_EQ(config_failure("mode lax\n").code(), ErrorCode::SyntaxError);
  const auto e = config_failure("sink a\n  source b x\n");
  ASSERT_TRUE(e.span());
  EXPECT_EQ(e.span()->line, 2);
  EXPECT_EQ(e.span()->column, 12);
}

TEST(ParseSecurityConfig, FormatRoundTrip) {
  const auto cfg = parse_security_config("source a 3\nsource b 1\nsink c\nreducer xor 2\nmode refined\n");
  EXPECT_EQ(parse_security_config(format_security_config(cfg)), cfg);
}

TEST(Canonicalize, ResolvesAliasesAndMergesByMax) {
  const auto nl = cimflow::testing::load(
      "module leaf (inout x); endmodule\nmodule t (inout a, inout b); leaf l (.x(a)); endmodule\n");
  const auto cfg = parse_security_config("source a 1\nsource l/x 4\nsink b\n");
  const auto c = canonicalize(cfg, nl);
  EXPECT_EQ(c.sources, (std::map<std::string, Score>{{"a", 4}}));
  try {
    canonicalize(parse_security_config("sink nowhere\n"), nl);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownNet);
  }
}
