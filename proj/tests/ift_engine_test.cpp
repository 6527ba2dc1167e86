#include <gtest/gtest.h>

#include <random>

#include "test_support.hpp"

using namespace cimflow;
using cimflow::testing::load;

namespace {

struct Loaded {
  ElaboratedNetlist nl;
  SecurityConfig cfg;
  FlowGraph graph;
};

Loaded prepare(const std::string& verilog, const std::string& ifc, const std::string& top = "") {
  Loaded l{load(verilog, top), {}, FlowGraph({}, {})};
  l.cfg = canonicalize(parse_security_config(ifc), l.nl);
  l.graph = build_flow_graph(l.nl, l.cfg);
  return l;
}

// A chain of `stages` inverters between pt and ct.
std::string inverter_chain(int stages) {
  std::string s = "module round (input i, output o); assign o = ~i; endmodule\n";
  s += "module cipher (input pt, output ct);\n  wire [" + std::to_string(stages) + ":0] w;\n";
  s += "  assign w[0] = pt;\n";
  for (int k = 1; k <= stages; ++k)
    s += "  round r" + std::to_string(k) + " (.i(w[" + std::to_string(k - 1) + "]), .o(w[" + std::to_string(k) + "]));\n";
  s += "  assign ct = w[" + std::to_string(stages) + "];\nendmodule\n";
  return s;
}

}  // namespace

TEST(Propagate, SingleAssignCarriesUnitLabel) {
  const auto l = prepare("module t (input s, output y); assign y = s; endmodule", "source s 1\nsink y\n");
  const auto scores = propagate(l.graph, l.cfg);
  EXPECT_EQ(scores.at("y"), 1u);
  const auto r = detect_leakages(l.graph, scores, l.cfg);
  ASSERT_EQ(r.leaks.size(), 1u);
  EXPECT_EQ(r.leaks[0].path.nodes, (std::vector<std::string>{"s", "y"}));
}

TEST(Propagate, NoSourcesMeansNoLeaks) {
  const auto l = prepare(gen_1r(3, 3), "sink WL_1\nsink BL_3\n");
  const auto scores = propagate(l.graph, l.cfg);
  for (const auto& [n, s] : scores.scores) EXPECT_EQ(s, 0u) << n;
  EXPECT_EQ(scores.iterations, 0u);
  EXPECT_TRUE(detect_leakages(l.graph, scores, l.cfg).leaks.empty());
}

TEST(Propagate, TwelveRoundsExhaustAScoreOfTwelve) {
  const auto twelve = prepare(inverter_chain(12), "source pt 12\nsink ct\nreducer round 1\n");
  const auto r12 = analyze_graph(twelve.graph, twelve.cfg);
  EXPECT_TRUE(r12.leaks.empty());
  EXPECT_EQ(propagate(twelve.graph, twelve.cfg).at("ct"), 0u);

  const auto eleven = prepare(inverter_chain(11), "source pt 12\nsink ct\nreducer round 1\n");
  const auto r11 = analyze_graph(eleven.graph, eleven.cfg);
  ASSERT_EQ(r11.leaks.size(), 1u);
  EXPECT_EQ(r11.leaks[0].score, 1u);
  EXPECT_EQ(r11.leaks[0].path.nodes.size(), 14u);
}

TEST(Propagate, MemristorFlowModelCarriesBothWays) {
  for (const auto& [src, dst] : {std::pair{"ae", "oe"}, std::pair{"oe", "ae"}}) {
    const auto l = prepare(cimflow::testing::kMemristorFlowModel,
                           std::string("source ") + src + " 1\nsink " + dst + "\n");
    const auto r = analyze_graph(l.graph, l.cfg);
    ASSERT_EQ(r.leaks.size(), 1u);
    EXPECT_EQ(r.leaks[0].sink, dst);
    EXPECT_EQ(r.leaks[0].score, 1u);
  }
}

TEST(Propagate, UnknownNodesAreRejected) {
  const auto g = FlowGraph({"a"}, {});
  SecurityConfig cfg;
  cfg.sources["zz"] = 1;
  try {
    propagate(g, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownNet);
  }
}

TEST(Detect, Passive2x2LeaksEveryOtherLine) {
  const auto l = prepare(gen_1r(2, 2), "source WL_1 1\nsink WL_2\nsink BL_1\nsink BL_2\n");
  const auto r = analyze_graph(l.graph, l.cfg);
  EXPECT_EQ(r.leaking_sinks(), (std::set<std::string>{"BL_1", "BL_2", "WL_2"}));
  const auto& wl2 = r.leaks.back();
  EXPECT_EQ(wl2.sink, "WL_2");
  EXPECT_EQ(wl2.path.nodes, (std::vector<std::string>{"WL_1", "BL_1", "WL_2"}));
  EXPECT_EQ(wl2.path.via, (std::vector<std::string>{"cell_1_1", "cell_2_1"}));
}

TEST(Detect, WitnessPrefersHigherScoreThenShorterThenSmallerName) {
  // b reachable from hi (score 3, two hops) and from lo (score 1, one hop).
  const FlowGraph g({"a", "b", "hi", "lo", "x"}, {{"hi", "x", EdgeKind::Digital, 0, "e1"},
                                                {"x", "b", EdgeKind::Digital, 0, "e2"},
                                                {"lo", "b", EdgeKind::Digital, 0, "e3"},
                                                {"hi", "a", EdgeKind::Digital, 0, "e4"},
                                                {"a", "b", EdgeKind::Digital, 0, "e5"}});
  SecurityConfig cfg;
  cfg.sources = {{"hi", 3}, {"lo", 1}};
  cfg.sinks = {"b"};
  const auto scores = propagate(g, cfg);
  const auto p = witness_path(g, scores, cfg, "b");
  EXPECT_EQ(p.nodes, (std::vector<std::string>{"hi", "a", "b"}));
}

TEST(Detect, WitnessOfCleanSinkIsAnError) {
  const FlowGraph g({"a", "b"}, {});
  SecurityConfig cfg;
  cfg.sources = {{"a", 1}};
  const auto scores = propagate(g, cfg);
  try {
    witness_path(g, scores, cfg, "b");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotLeaking);
  }
}

// The worklist fixpoint equals exhaustive Jacobi iteration on random graphs,
// and every witness is a real path whose residual equals the sink score.
TEST(PropagateProperty, MatchesBruteForceOracle) {
  std::mt19937 rng(20240611);
  for (int trial = 0; trial < 500; ++trial) {
    const auto c = cimflow::testing::random_case(rng, 12, false);
    const auto scores = propagate(c.graph, c.cfg);
    EXPECT_EQ(scores.scores, cimflow::testing::brute_force_scores(c.graph, c.cfg));

    // Bounded work: each node is raised at most max-source-score times.
    EXPECT_LE(scores.iterations, c.graph.nodes().size() * c.cfg.max_source_score());

    for (const auto& [n, s] : scores.scores) EXPECT_LE(s, c.cfg.max_source_score());

    for (const auto& leak : detect_leakages(c.graph, scores, c.cfg).leaks) {
      const auto& nodes = leak.path.nodes;
      ASSERT_FALSE(nodes.empty());
      ASSERT_EQ(leak.path.via.size() + 1, nodes.size());
      EXPECT_EQ(nodes.back(), leak.sink);
      Score s = c.cfg.sources.at(nodes.front());
      for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        const Edge* found = nullptr;
        for (const auto& e : c.graph.edges())
          if (e.src == nodes[i] && e.dst == nodes[i + 1] && e.via == leak.path.via[i] &&
              (!found || e.decrement < found->decrement))
            found = &e;
        ASSERT_NE(found, nullptr);
        s = s > found->decrement ? s - found->decrement : 0;
      }
      EXPECT_EQ(s, leak.score);
    }
  }
}

// With unit labels and no reducers, leaking equals plain reachability.
TEST(PropagateProperty, NonInterferenceIsReachability) {
  std::mt19937 rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    const auto c = cimflow::testing::random_case(rng, 12, true);
    std::set<std::string> sources;
    for (const auto& [n, s] : c.cfg.sources) sources.insert(n);
    const auto reach = cimflow::testing::bfs_reachable(c.graph, sources);
    std::set<std::string> expected;
    for (const auto& s : c.cfg.sinks)
      if (reach.contains(s)) expected.insert(s);
    EXPECT_EQ(analyze_graph(c.graph, c.cfg).leaking_sinks(), expected);
  }
}

// Raising a source or removing a reducer never lowers any score.
TEST(PropagateProperty, MonotoneInLabelsAndReducers) {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    auto c = cimflow::testing::random_case(rng, 10, false);
    const auto before = propagate(c.graph, c.cfg);
    auto raised = c.cfg;
    for (auto& [n, s] : raised.sources) s += 1;
    const auto after = propagate(c.graph, raised);
    std::vector<Edge> relaxed;
    for (auto e : c.graph.edges()) {
      e.decrement = 0;
      relaxed.push_back(e);
    }
    const auto zero = propagate(FlowGraph({c.graph.nodes().begin(), c.graph.nodes().end()}, relaxed), c.cfg);
    for (const auto& n : c.graph.nodes()) {
      EXPECT_GE(after.at(n), before.at(n));
      EXPECT_GE(zero.at(n), before.at(n));
    }
  }
}

TEST(Report, JsonShapeAndDeterminism) {
  const auto l = prepare(gen_1r(2, 2), "source WL_1 1\nsink WL_2\nsink BL_1\n");
  const auto a = report_text(analyze_graph(l.graph, l.cfg));
  const auto b = report_text(analyze_graph(prepare(gen_1r(2, 2), "sink BL_1\nsink WL_2\nsource WL_1 1\n").graph, l.cfg));
  EXPECT_EQ(a, b);
  const auto j = nlohmann::json::parse(a);
  EXPECT_EQ(j["schema"], 1);
  EXPECT_EQ(j["mode"], "conservative");
  ASSERT_EQ(j["leaks"].size(), 2u);
  EXPECT_EQ(j["leaks"][0]["sink"], "BL_1");
  EXPECT_EQ(j["leaks"][0]["path"], nlohmann::json::array({"WL_1", "BL_1"}));
  EXPECT_FALSE(j["leaks"][0].contains("configs"));
  EXPECT_EQ(j["stats"]["nodes"], 4);
  EXPECT_EQ(j["stats"]["edges"], 8);
  EXPECT_FALSE(j.contains("reduction"));
  EXPECT_TRUE(j["warnings"].empty());
}
