#include <gtest/gtest.h>

#include <random>

#include "polyex/explain.hpp"
#include "polyex/fixtures.hpp"
#include "polyex/render.hpp"
#include "polyex/serialize.hpp"
#include "support/networks.hpp"
#include "support/oracles.hpp"

namespace polyex {
namespace {

TEST(ExplainWhy, ToyA) {
  const auto e = explain_why(fixtures::toy_a(), Vector{{1.0, -1.0}});
  EXPECT_EQ(e.class_index, 0u);
  EXPECT_EQ(e.pre_removal_count, 7u);
  EXPECT_EQ(e.removed_count, 5u);
  EXPECT_EQ(e.lp_count, 7u);
  ASSERT_EQ(e.minimal_constraints.size(), 2u);
  // x2 <= 0 from the inactive neuron, x1 > 0 from whichever duplicate row survives.
  EXPECT_EQ(e.minimal_constraints[0].a, (Vector{{0.0, 1.0}}));
  EXPECT_EQ(e.minimal_constraints[0].provenance, Provenance(NeuronTag{0, 1, false}));
  EXPECT_EQ(e.minimal_constraints[1].a, (Vector{{-1.0, 0.0}}));
  EXPECT_TRUE(e.minimal_constraints[1].strict);
  EXPECT_FALSE(e.vrep);
}

TEST(ExplainWhy, ToyAVrep) {
  WhyOptions opts;
  opts.want_vrep = true;
  const auto e = explain_why(fixtures::toy_a(), Vector{{1.0, -1.0}}, opts);
  ASSERT_TRUE(e.vrep);
  const std::vector<Vector> expected{Vector{{0.0, -2.0}}, Vector{{0.0, 0.0}}, Vector{{2.0, -2.0}}, Vector{{2.0, 0.0}}};
  EXPECT_EQ(e.vrep->output.vertices, expected);
  EXPECT_EQ(e.vrep->region.vertices, expected);
}

TEST(ExplainWhy, DimensionMismatch) {
  EXPECT_THROW(explain_why(fixtures::toy_a(), Vector{{1.0}}), DimensionError);
}

TEST(ExplainWhy, InvariantsOnDeepFixture) {
  const Network net = fixtures::random_network({2, 6, 6, 3}, 42);
  std::mt19937_64 rng(10);
  for (int t = 0; t < 10; ++t) {
    const Vector x = testing::uniform_in_box(net.input_bounds(), rng);
    const auto e = explain_why(net, x);
    for (const auto& c : e.minimal_constraints) {
      EXPECT_FALSE(c.is_box());
      if (!c.degenerate()) {
        EXPECT_TRUE(c.strict ? c.slack(x) > -1e-9 : c.slack(x) >= -1e-9);
      }
    }
    EXPECT_EQ(e.pre_removal_count, 12u + 2u + 4u);
    EXPECT_TRUE(remove_redundant(e.reduced_region).removed.empty());
    EXPECT_EQ(testing::membership_disagreements(e.output_region, e.reduced_region, 10000, rng), 0u);
  }
}

TEST(ExplainWhy, ReducedRegionIsExact) {
  const Network net = fixtures::random_network({3, 5, 4, 3}, 77);
  std::mt19937_64 rng(6);
  const Vector x = testing::uniform_in_box(net.input_bounds(), rng);
  const auto e = explain_why(net, x);
  const auto m = open_feasibility(e.reduced_region);
  ASSERT_TRUE(m.open());
  for (const auto& p : testing::sample_interior(e.reduced_region, m.witness, 1000, rng)) {
    ASSERT_EQ(forward(net, p).class_index, e.class_index);
  }
}

TEST(ExplainWhyNot, ToyADifferentRegion) {
  const auto e = explain_why_not(fixtures::toy_a(), Vector{{1.0, -1.0}}, 1);
  const auto* d = std::get_if<DifferentRegion>(&e.outcome);
  ASSERT_NE(d, nullptr);
  EXPECT_EQ(d->distance, 1u);
  ASSERT_EQ(d->differing_constraints.size(), 1u);
  const auto& pr = d->differing_constraints[0];
  EXPECT_EQ(pr.origin_side.provenance, Provenance(NeuronTag{0, 1, false}));
  EXPECT_EQ(pr.target_side.provenance, Provenance(NeuronTag{0, 1, true}));
  EXPECT_EQ(pr.origin_side.a, (Vector{{0.0, 1.0}}));
  EXPECT_EQ(pr.target_side.a, (Vector{{0.0, -1.0}}));
  EXPECT_GT(d->witness[1], d->witness[0]);
  EXPECT_GT(d->witness[0], 0.0);
  EXPECT_EQ(forward(fixtures::toy_a(), d->witness).class_index, 1u);
}

TEST(ExplainWhyNot, FactualClassRejected) {
  EXPECT_THROW(explain_why_not(fixtures::toy_a(), Vector{{1.0, -1.0}}, 0), FactualClassError);
  EXPECT_THROW(explain_why_not(fixtures::toy_a(), Vector{{1.0, -1.0}}, 2), InvalidClassError);
}

TEST(ExplainWhyNot, SameRegion) {
  const Network net = testing::shared_region_net();
  const Vector x{{1.0, 1.0}};
  const auto e = explain_why_not(net, x, 2);
  ASSERT_EQ(e.factual_class, 0u);
  const auto* s = std::get_if<SameRegion>(&e.outcome);
  ASSERT_NE(s, nullptr);
  EXPECT_GT(s->delta_constraint.slack(x), 0.0);
  const auto maps = effective_preactivation_maps(net, e.signature);
  EXPECT_EQ(s->delta_weights, (maps.back().M.row(0) - maps.back().M.row(2)).transpose());
  EXPECT_EQ(s->delta_bias, maps.back().v[0] - maps.back().v[2]);
  EXPECT_EQ(forward(net, s->witness).class_index, 2u);
}

TEST(ExplainWhyNot, UnreachableClass) {
  const Network net = testing::unreachable_class_net();
  const Vector x{{0.3, -0.2}};
  const auto e = explain_why_not(net, x, 2);
  const auto* u = std::get_if<ClassUnreachable>(&e.outcome);
  ASSERT_NE(u, nullptr);
  EXPECT_EQ(u->examined, (std::uint64_t{1} << 12) - 1);
  EXPECT_TRUE(u->exhaustive);
}

TEST(ExplainWhyNot, DifferingPairsMatchDistance) {
  const Network net = fixtures::random_network({2, 5, 5, 3}, 3);
  std::mt19937_64 rng(1);
  for (int t = 0; t < 20; ++t) {
    const Vector x = testing::uniform_in_box(net.input_bounds(), rng);
    const auto fr = forward(net, x);
    const auto e = explain_why_not(net, x, (fr.class_index + 1) % 3);
    if (const auto* d = std::get_if<DifferentRegion>(&e.outcome)) {
      EXPECT_EQ(d->differing_constraints.size(), d->distance);
      EXPECT_EQ(forward(net, d->witness).class_index, e.counterfactual_class);
    }
  }
}

TEST(Render, WhyHrep) {
  const auto e = explain_why(fixtures::toy_a(), Vector{{1.0, -1.0}});
  const auto text = render(e, Style::kHrep);
  EXPECT_NE(text.find("  x2 ≤ 0    [hidden layer 1, neuron 2 inactive]\n"), std::string::npos) << text;
  EXPECT_NE(text.find("  -x1 < 0    [class 0 beats class 1]\n"), std::string::npos) << text;
  EXPECT_EQ(text, render(e, Style::kHrep));
}

TEST(Render, WhyText) {
  const auto text = render(explain_why(fixtures::toy_a(), Vector{{1.0, -1.0}}), Style::kText);
  EXPECT_NE(text.find("because x2 ≤ 0 (hidden layer 1, neuron 2 inactive).\n"), std::string::npos) << text;
  EXPECT_NE(text.find("because x1 > 0 (class 0 beats class 1).\n"), std::string::npos) << text;
}

TEST(Render, VrepNeedsData) {
  const auto e = explain_why(fixtures::toy_a(), Vector{{1.0, -1.0}});
  EXPECT_THROW(render(e, Style::kVrep), MissingDataError);
  WhyOptions opts;
  opts.want_vrep = true;
  const auto text = render(explain_why(fixtures::toy_a(), Vector{{1.0, -1.0}}, opts), Style::kVrep);
  EXPECT_NE(text.find("x1 in [0, 2]"), std::string::npos) << text;
  EXPECT_NE(text.find("vertex (2, -2)"), std::string::npos) << text;
}

TEST(Render, SameRegionTextIsOneSentence) {
  const auto e = explain_why_not(testing::shared_region_net(), Vector{{1.0, 1.0}}, 2);
  const auto text = render(e, Style::kText);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1);
  EXPECT_NE(text.find("2·x1 + 2·x2 > 2"), std::string::npos) << text;
}

TEST(Render, Numbers) {
  EXPECT_EQ(fmt_real(-0.0), "0");
  EXPECT_EQ(fmt_real(1.0 / 3.0), "0.333333");
  EXPECT_EQ(fmt_linear(Vector{{0.0, -0.5, 1.0}}), "-0.5·x2 + x3");
  EXPECT_EQ(fmt_linear(Vector{{0.0, 0.0}}), "0");
  EXPECT_THROW(parse_style("fancy"), ParseError);
}

TEST(Serialize, WhyNotKinds) {
  const auto j = serial::why_not(explain_why_not(fixtures::toy_a(), Vector{{1.0, -1.0}}, 1));
  EXPECT_EQ(j["kind"], "different_region");
  EXPECT_EQ(j["distance"], 1);
  EXPECT_EQ(j["differing_constraints"][0]["origin_side"]["provenance"]["kind"], "neuron");
  EXPECT_EQ(j["target_signature"], nlohmann::json::parse("[1, 1]"));
  const auto s = serial::why_not(explain_why_not(testing::shared_region_net(), Vector{{1.0, 1.0}}, 2));
  EXPECT_EQ(s["kind"], "same_region");
  EXPECT_EQ(s["delta_constraint"]["strict"], true);
}

TEST(Serialize, RealsRoundTrip) {
  const Network net = fixtures::random_network({2, 4, 2}, 1);
  const auto e = explain_why(net, Vector{{0.1, 0.7}});
  const auto back = nlohmann::json::parse(serial::why(e).dump());
  for (std::size_t i = 0; i < e.minimal_constraints.size(); ++i) {
    EXPECT_EQ(back["minimal_constraints"][i]["b"].get<double>(), e.minimal_constraints[i].b);
  }
}

}  // namespace
}  // namespace polyex
