// Copyright 2026 The tradenet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <random>

#include "test_support.hpp"

namespace tradenet {
namespace {

using testing::direct_market_value;
using testing::direct_utility;
using testing::fixture;
using testing::prices;
using testing::Q;

TEST(Rational, ParsesIntegersDecimalsFractionsAndExponents) {
  EXPECT_EQ(Q("3"), Rational(3));
  EXPECT_EQ(Q("-2.25"), Rational(-9, 4));
  EXPECT_EQ(Q("0.1"), Rational(1, 10));
  EXPECT_EQ(Q("1/3"), Rational(1, 3));
  EXPECT_EQ(Q("6/4"), Rational(3, 2));
  EXPECT_EQ(Q("1e-2"), Rational(1, 100));
  EXPECT_EQ(Q("2.5E1"), Rational(25));
  EXPECT_THROW(Q("abc"), Error);
  EXPECT_THROW(Q("1/0"), Error);
  EXPECT_THROW(Q(""), Error);
}

TEST(Rational, FormatsExactDecimalsOrFractions) {
  EXPECT_EQ(format_rational(Rational(3, 2)), "1.5");
  EXPECT_EQ(format_rational(Rational(-1, 8)), "-0.125");
  EXPECT_EQ(format_rational(Rational(1, 3)), "1/3");
  EXPECT_EQ(format_rational(Rational(7)), "7");
  EXPECT_EQ(format_rational(Rational(0)), "0");
  for (const char* s : {"1.5", "-0.125", "1/3", "7", "22/7", "0.0625"})
    EXPECT_EQ(Q(format_rational(Q(s))), Q(s)) << s;
}

TEST(ExtValue, NegativeInfinityAbsorbsAndOrders) {
  ExtValue ninf = ExtValue::neg_inf();
  EXPECT_FALSE((ninf + Rational(5)).finite());
  EXPECT_FALSE((ninf - Rational(5)).finite());
  EXPECT_FALSE((ExtValue(1L) + ninf).finite());
  EXPECT_LT(ninf, ExtValue(-1000000L));
  EXPECT_EQ(ninf, ExtValue::neg_inf());
  EXPECT_EQ(ExtValue(Rational(1, 2)) + Rational(1, 2), ExtValue(1L));
}

TEST(Market, RejectsMalformedNetworks) {
  EXPECT_THROW(Market("x", {"a", "b"}, {{"w", "a", "a"}}), Error);
  EXPECT_THROW(Market("x", {"a", "a"}, {}), Error);
  EXPECT_THROW(Market("x", {"a", "b"}, {{"w", "a", "b"}, {"w", "b", "a"}}), Error);
  EXPECT_THROW(Market("x", {"a", "b"}, {{"w", "a", "c"}}), Error);
  Market m("x", {"a", "b"}, {{"w", "a", "b"}});
  EXPECT_THROW(m.set_value(0, 0, ExtValue(1L)), Error);
}

TEST(Market, IncidenceAndSigns) {
  Market m = fixture("fig1").market;
  std::size_t a1 = m.agent_index("1"), a2 = m.agent_index("2");
  std::size_t w = m.trade_index("omega"), x = m.trade_index("chi");
  EXPECT_EQ(m.chi(a1, w), -1);
  EXPECT_EQ(m.chi(a2, w), 1);
  EXPECT_EQ(m.chi(a1, x), 1);
  EXPECT_EQ(m.chi(a2, x), -1);
  EXPECT_EQ(m.max_degree(), 2u);
  EXPECT_EQ(m.counterpart(a1, w), a2);
  EXPECT_EQ(m.buying(a1), bit(x));
  EXPECT_EQ(m.selling(a1), bit(w));
}

// Agent 1 demands the empty bundle iff q_w <= 1 and q_x >= 1; agent 2 iff
// q_w >= 1, q_x <= 1 and q_w - q_x >= 1.
TEST(Demand, EmptyBundleRegionsOfTheTwoAgentExample) {
  Market m = fixture("fig1").market;
  for (int a = -12; a <= 12; ++a) {
    for (int b = -12; b <= 12; ++b) {
      PriceVector q = {fraction(a, 4), fraction(b, 4)};
      auto d1 = demand_set(m, 0, q), d2 = demand_set(m, 1, q);
      bool e1 = std::find(d1.begin(), d1.end(), TradeMask{0}) != d1.end();
      bool e2 = std::find(d2.begin(), d2.end(), TradeMask{0}) != d2.end();
      EXPECT_EQ(e1, q[0] <= 1 && q[1] >= 1) << a << "," << b;
      EXPECT_EQ(e2, q[0] >= 1 && q[1] <= 1 && q[0] - q[1] >= 1) << a << "," << b;
      EXPECT_FALSE(e1 && e2);
    }
  }
}

TEST(Demand, MatchesBruteForceAndTieBreakRule) {
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 200; ++rep) {
    Market m = random_general_market(rng, {2, 3, 1, 4});
    std::size_t i = uniform_index(rng, m.num_agents());
    PriceVector p(m.num_trades());
    for (auto& x : p) x = fraction(uniform_int(rng, -12, 12), 2);
    ExtValue best = ExtValue::neg_inf();
    for (TradeMask b = 0; b <= m.incident(i); ++b)
      if ((b & ~m.incident(i)) == 0) best = std::max(best, direct_utility(m, i, b, p));
    std::vector<TradeMask> expect;
    for (TradeMask b = 0; b <= m.incident(i); ++b)
      if ((b & ~m.incident(i)) == 0 && direct_utility(m, i, b, p) == best) expect.push_back(b);
    auto got = demand_set(m, i, p);
    std::sort(got.begin(), got.end());
    EXPECT_EQ(got, expect);
    // Tie-break: most trades, then lexicographically smallest index list.
    auto key = [&](TradeMask b) {
      std::vector<std::size_t> idx;
      for (std::size_t t = 0; t < 64; ++t)
        if (b >> t & 1) idx.push_back(t);
      return std::make_pair(-static_cast<long>(idx.size()), idx);
    };
    TradeMask pick = *std::min_element(expect.begin(), expect.end(),
                                       [&](TradeMask a, TradeMask b) { return key(a) < key(b); });
    EXPECT_EQ(demand_tiebreak(m, i, p), pick);
  }
}

TEST(Demand, PerturbedDemandIsADemandedBundle) {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 200; ++rep) {
    Market m = random_general_market(rng, {2, 3, 1, 4});
    std::size_t i = uniform_index(rng, m.num_agents());
    PriceVector p(m.num_trades());
    for (auto& x : p) x = Rational(uniform_int(rng, -6, 6));
    auto d = demand_perturbed(m, i, p, Rational(1, 100));
    ASSERT_TRUE(d.has_value());
    auto set = demand_set(m, i, p);
    EXPECT_NE(std::find(set.begin(), set.end(), *d), set.end());
  }
}

TEST(Substitutability, FixtureAgents) {
  Market f1 = fixture("fig1").market;
  EXPECT_TRUE(is_fully_substitutable(f1, 0).substitutable);
  EXPECT_TRUE(is_fully_substitutable(f1, 1).substitutable);
  Market f3 = fixture("fig3").market;
  for (std::size_t i = 0; i < f3.num_agents(); ++i) EXPECT_TRUE(is_fully_substitutable(f3, i).substitutable);
}

// The constant-value agent with one buying and one selling trade is
// substitutes exactly when the constant is nonpositive.
TEST(Substitutability, OpposingTradesAgentsAndWitness) {
  Market m = fixture("figB2").market;
  EXPECT_TRUE(is_fully_substitutable(m, m.agent_index("1")).substitutable);
  auto rep = is_fully_substitutable(m, m.agent_index("2"));
  ASSERT_FALSE(rep.substitutable);
  ASSERT_TRUE(rep.witness.has_value());
  // Witness: the price move p -> p' changes one coordinate by one grid step
  // and the demanded bundle violates the stated condition.
  std::size_t changed = 0;
  for (std::size_t t = 0; t < m.num_trades(); ++t) changed += rep.witness->p[t] != rep.witness->p_prime[t];
  EXPECT_EQ(changed, 1u);
  for (long c : {-3L, -1L, 0L, 1L, 2L, 5L}) {
    Market a("x", {"1", "2"}, {{"chi", "1", "2"}, {"phi", "2", "1"}});
    a.set_default(0, ExtValue(c));
    EXPECT_EQ(is_fully_substitutable(a, 0).substitutable, c <= 0) << c;
  }
}

TEST(Substitutability, ComplementsBuyerIsRejected) {
  Market m("c", {"s", "b"}, {{"w1", "s", "b"}, {"w2", "s", "b"}});
  m.set_value(1, bit(0), ExtValue(0L));
  m.set_value(1, bit(1), ExtValue(0L));
  m.set_value(1, bit(0) | bit(1), ExtValue(3L));
  EXPECT_FALSE(is_fully_substitutable(m, 1).substitutable);
  EXPECT_TRUE(is_fully_substitutable(m, 0).substitutable);
}

TEST(Substitutability, GeneratedSubstitutesMarketsPass) {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 60; ++rep) {
    Market m = random_substitutes_market(rng, {2, 4, 1, 3});
    for (std::size_t i = 0; i < m.num_agents(); ++i)
      ASSERT_TRUE(is_fully_substitutable(m, i).substitutable) << rep << " agent " << i;
  }
}

TEST(Welfare, MarketValuesOfFixtures) {
  EXPECT_EQ(market_value(fixture("fig3").market), 1);
  EXPECT_EQ(market_value(fixture("fig4").market), 3);
  EXPECT_EQ(market_value(fixture("fig6").market), 15);
  EXPECT_EQ(market_value(fixture("fig8").market), 33);
  for (const auto& name : testing::fixture_names()) {
    Market m = fixture(name).market;
    EXPECT_EQ(market_value(m), direct_market_value(m)) << name;
  }
}

TEST(Welfare, EfficientSetsOfTwoSellerExample) {
  Market m = fixture("fig3").market;
  auto eff = efficient_allocations(m);
  std::sort(eff.begin(), eff.end());
  EXPECT_EQ(eff, (std::vector<TradeMask>{bit(0), bit(1)}));
}

TEST(Welfare, MatchesBruteForceOnRandomMarkets) {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 100; ++rep) {
    Market m = random_general_market(rng, {2, 4, 1, 6});
    EXPECT_EQ(market_value(m), direct_market_value(m));
    for (TradeMask phi : efficient_allocations(m)) EXPECT_EQ(social_welfare(m, phi), ExtValue(market_value(m)));
  }
}

}  // namespace
}  // namespace tradenet
