#include <gtest/gtest.h>

#include <random>
#include <set>

#include "polyex/combinatorics.hpp"
#include "polyex/fixtures.hpp"
#include "polyex/marching.hpp"
#include "support/networks.hpp"
#include "support/oracles.hpp"

namespace polyex {
namespace {

ActivationSignature sig(const std::vector<std::size_t>& widths, const std::vector<int>& bits) {
  std::vector<std::size_t> ones;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i]) ones.push_back(i);
  }
  return ActivationSignature::zeros(widths).flipped(ones);
}

TEST(Neighbors, DistanceOne) {
  const auto n = neighbors_at_distance(sig({2}, {1, 0}), 1);
  ASSERT_EQ(n.size(), 2u);
  EXPECT_EQ(n[0], sig({2}, {0, 0}));
  EXPECT_EQ(n[1], sig({2}, {1, 1}));
}

TEST(Neighbors, DistanceTwo) {
  const auto n = neighbors_at_distance(sig({2}, {1, 0}), 2);
  ASSERT_EQ(n.size(), 1u);
  EXPECT_EQ(n[0], sig({2}, {0, 1}));
}

TEST(Neighbors, CountAndDistinct) {
  const auto s = ActivationSignature::zeros({4, 6});
  const auto n = neighbors_at_distance(s, 3);
  ASSERT_EQ(n.size(), 120u);
  std::set<std::string> seen;
  for (const auto& t : n) {
    EXPECT_EQ(s.hamming(t), 3u);
    seen.insert(t.str());
  }
  EXPECT_EQ(seen.size(), 120u);
}

TEST(Neighbors, OutOfRange) {
  EXPECT_THROW(neighbors_at_distance(sig({2}, {1, 0}), 0), RangeError);
  EXPECT_THROW(neighbors_at_distance(sig({2}, {1, 0}), 3), RangeError);
}

TEST(March, ToyA) {
  const Network net = fixtures::toy_a();
  const auto res = march_to_counterfactual(net, sig({2}, {1, 0}), 1);
  const auto* f = std::get_if<MarchFound>(&res);
  ASSERT_NE(f, nullptr);
  EXPECT_EQ(f->signature, sig({2}, {1, 1}));
  EXPECT_EQ(f->distance, 1u);
  EXPECT_GT(f->witness[1], f->witness[0]);
  EXPECT_GT(f->witness[0], 0.0);
  EXPECT_EQ(f->examined, 2u);
}

TEST(March, InvalidClass) {
  EXPECT_THROW(march_to_counterfactual(fixtures::toy_a(), sig({2}, {1, 0}), 5), InvalidClassError);
}

TEST(March, WitnessIsSound) {
  const Network net = fixtures::random_network({2, 5, 4, 3}, 17);
  std::mt19937_64 rng(4);
  for (int t = 0; t < 30; ++t) {
    const Vector x = testing::uniform_in_box(net.input_bounds(), rng);
    const auto fr = forward(net, x);
    const std::size_t target = (fr.class_index + 1 + rng() % 2) % 3;
    const auto res = march_to_counterfactual(net, fr.signature, target);
    if (const auto* f = std::get_if<MarchFound>(&res)) {
      const auto at = forward(net, f->witness);
      EXPECT_EQ(at.class_index, target);
      EXPECT_EQ(at.signature, f->signature);
      EXPECT_EQ(fr.signature.hamming(f->signature), f->distance);
      std::uint64_t bound = 0;
      for (std::size_t k = 1; k <= f->distance; ++k) bound += binomial(fr.signature.size(), k);
      EXPECT_LE(f->examined, bound);
    }
  }
}

TEST(March, BudgetExhaustion) {
  const Network net = testing::unreachable_class_net();
  const auto origin = ActivationSignature::zeros(net.hidden_widths());
  MarchOptions opts;
  opts.budget = 10;
  const auto res = march_to_counterfactual(net, origin, 2, opts);
  const auto* ex = std::get_if<MarchExhausted>(&res);
  ASSERT_NE(ex, nullptr);
  EXPECT_EQ(ex->examined, 10u);
  EXPECT_FALSE(ex->complete);
}

TEST(March, MaxDistance) {
  const Network net = testing::unreachable_class_net();
  MarchOptions opts;
  opts.max_distance = 2;
  const auto res = march_to_counterfactual(net, ActivationSignature::zeros(net.hidden_widths()), 2, opts);
  const auto& ex = std::get<MarchExhausted>(res);
  EXPECT_EQ(ex.examined, 12u + 66u);
  EXPECT_EQ(ex.reached_distance, 2u);
  EXPECT_FALSE(ex.complete);
}

TEST(March, ExhaustiveUnreachable) {
  const Network net = testing::unreachable_class_net();
  const auto res = march_to_counterfactual(net, ActivationSignature::zeros(net.hidden_widths()), 2);
  const auto& ex = std::get<MarchExhausted>(res);
  EXPECT_EQ(ex.examined, (std::uint64_t{1} << 12) - 1);
  EXPECT_TRUE(ex.complete);
}

TEST(March, ParallelMatchesSequential) {
  const Network net = fixtures::random_network({3, 6, 6, 3}, 8);
  std::mt19937_64 rng(2);
  for (int t = 0; t < 20; ++t) {
    const Vector x = testing::uniform_in_box(net.input_bounds(), rng);
    const auto fr = forward(net, x);
    const std::size_t target = (fr.class_index + 1) % 3;
    MarchOptions seq;
    MarchOptions par;
    par.threads = 4;
    const auto a = march_to_counterfactual(net, fr.signature, target, seq);
    const auto b = march_to_counterfactual(net, fr.signature, target, par);
    ASSERT_EQ(a.index(), b.index());
    if (const auto* fa = std::get_if<MarchFound>(&a)) {
      const auto& fb = std::get<MarchFound>(b);
      EXPECT_EQ(fa->signature, fb.signature);
      EXPECT_EQ(fa->examined, fb.examined);
      EXPECT_EQ(fa->witness, fb.witness);
    }
  }
}

TEST(March, FrontierResumes) {
  const Network net = testing::unreachable_class_net();
  MarchFrontier fr;
  fr.origin = ActivationSignature::zeros(net.hidden_widths());
  fr.budget = 100;
  fr.max_distance = 12;
  auto res = march_to_counterfactual(net, 2, fr);
  EXPECT_EQ(std::get<MarchExhausted>(res).examined, 100u);
  fr.budget = 1u << 20;
  res = march_to_counterfactual(net, 2, fr);
  EXPECT_EQ(std::get<MarchExhausted>(res).examined, (std::uint64_t{1} << 12) - 1);
}

TEST(March, ResumedSearchMatchesOneShot) {
  const Network net = fixtures::random_network({2, 6, 6, 3}, 12);
  std::mt19937_64 rng(9);
  for (int t = 0; t < 10; ++t) {
    const auto fr = forward(net, testing::uniform_in_box(net.input_bounds(), rng));
    const std::size_t target = (fr.class_index + 1) % 3;
    const auto whole = march_to_counterfactual(net, fr.signature, target);
    MarchFrontier frontier;
    frontier.origin = fr.signature;
    frontier.max_distance = 12;
    MarchResult step;
    for (std::uint64_t b = 7;; b += 7) {
      frontier.budget = b;
      step = march_to_counterfactual(net, target, frontier);
      if (std::holds_alternative<MarchFound>(step) || std::get<MarchExhausted>(step).complete) break;
    }
    ASSERT_EQ(whole.index(), step.index());
    if (const auto* f = std::get_if<MarchFound>(&whole)) {
      EXPECT_EQ(f->signature, std::get<MarchFound>(step).signature);
      EXPECT_EQ(f->examined, std::get<MarchFound>(step).examined);
    }
  }
}

TEST(CollectRegions, ToyAQuadrants) {
  const Network net = fixtures::toy_a();
  const auto rs = collect_regions(net, sig({2}, {1, 1}), 64);
  ASSERT_EQ(rs.size(), 4u);
  EXPECT_EQ(rs[0].distance, 0u);
  for (const auto& r : rs) {
    EXPECT_EQ(r.vertices.size(), 4u);
    EXPECT_EQ(forward(net, r.witness).signature, r.signature);
  }
  EXPECT_EQ(collect_regions(net, sig({2}, {1, 1}), 2).size(), 2u);
}

}  // namespace
}  // namespace polyex
