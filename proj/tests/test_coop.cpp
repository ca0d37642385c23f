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

using testing::fixture;
using testing::imputation;
using testing::Q;

Coalition coalition(const Market& m, std::initializer_list<const char*> ids) {
  Coalition c = 0;
  for (const char* id : ids) c |= Coalition{1} << m.agent_index(id);
  return c;
}

TEST(LinearProgram, TextbookOptimum) {
  lp::LinearProgram p;
  auto x = p.add_variable(), y = p.add_variable();
  p.add_constraint({{x, 1}, {y, 2}}, lp::Sense::kLessEqual, 4);
  p.add_constraint({{x, 3}, {y, 1}}, lp::Sense::kLessEqual, 6);
  p.maximize({{x, 1}, {y, 1}});
  auto s = p.solve();
  ASSERT_EQ(s.status, lp::Status::kOptimal);
  EXPECT_EQ(s.objective, Q("14/5"));
  EXPECT_EQ(s.x[x], Q("8/5"));
  EXPECT_EQ(s.x[y], Q("6/5"));
}

TEST(LinearProgram, InfeasibleUnboundedAndFree) {
  lp::LinearProgram a;
  auto x = a.add_variable();
  a.add_constraint({{x, 1}}, lp::Sense::kLessEqual, -1);
  a.maximize({{x, 1}});
  EXPECT_EQ(a.solve().status, lp::Status::kInfeasible);

  lp::LinearProgram b;
  auto y = b.add_variable();
  b.add_constraint({{y, 1}}, lp::Sense::kGreaterEqual, 2);
  b.maximize({{y, 1}});
  EXPECT_EQ(b.solve().status, lp::Status::kUnbounded);

  lp::LinearProgram c;
  auto z = c.add_variable(false), w = c.add_variable(false);
  c.add_constraint({{z, 1}, {w, 1}}, lp::Sense::kEqual, -3);
  c.add_constraint({{z, 1}, {w, -1}}, lp::Sense::kGreaterEqual, 1);
  c.minimize({{z, 2}, {w, 1}});
  // z + w = -3 with z >= w + 1; objective 2z + w = z - 3 is minimized at z = -1.
  auto s = c.solve();
  ASSERT_EQ(s.status, lp::Status::kOptimal);
  EXPECT_EQ(s.objective, -4);
  EXPECT_EQ(s.x[z], -1);
  EXPECT_EQ(s.x[w], -2);
}

TEST(LinearAlgebra, DeterminantAndMinNormPoint) {
  linalg::Matrix a = {{2, 1}, {1, 3}};
  EXPECT_EQ(linalg::determinant(a), 5);
  auto x = linalg::min_norm_point({{1, 1, 1}}, {Rational(3)});
  ASSERT_TRUE(x.has_value());
  EXPECT_EQ(*x, (linalg::Vector{1, 1, 1}));
  EXPECT_FALSE(linalg::min_norm_point({{1, 1}, {2, 2}}, {Rational(1), Rational(3)}).has_value());
}

TEST(CharacteristicFunction, FourAgentTable) {
  Market m = fixture("fig6").market;
  auto cf = characteristic_function(m);
  struct Row {
    std::initializer_list<const char*> ids;
    int value;
  };
  const Row rows[] = {{{"s1", "b1"}, 8},        {{"s1", "b2"}, 3},        {{"s2", "b1"}, 12},
                      {{"s2", "b2"}, 7},        {{"s1", "s2", "b1"}, 14}, {{"s1", "s2", "b2"}, 10},
                      {{"s1", "b1", "b2"}, 8},  {{"s2", "b1", "b2"}, 12}, {{"s1", "s2", "b1", "b2"}, 15},
                      {{"s1", "s2"}, 0},        {{"b1", "b2"}, 0},        {{"s1"}, 0}};
  for (const auto& r : rows) EXPECT_EQ(cf(coalition(m, r.ids)), r.value);
}

TEST(CharacteristicFunction, TwoSellerGameIsNotSupermodular) {
  Market m = fixture("fig3").market;
  auto cf = characteristic_function(m);
  Coalition c = coalition(m, {"s1", "b"}), d = coalition(m, {"s2", "b"});
  EXPECT_EQ(cf(c), 1);
  EXPECT_EQ(cf(d), 1);
  EXPECT_GT(cf(c) + cf(d), cf(c | d) + cf(c & d));
}

TEST(Core, ImputationCheckNamesTheViolatedCoalition) {
  Market m = fixture("fig6").market;
  auto cf = characteristic_function(m);
  EXPECT_TRUE(is_core_imputation(cf, imputation({"3", "7", "5", "0"})).in_core);
  auto r = is_core_imputation(cf, imputation({"3", "7", "4", "1"}));
  EXPECT_FALSE(r.in_core);
  EXPECT_EQ(r.reason, CoreCheck::Reason::kCoalition);
  // {s1,b1} and {s2,b1} both fall short; the first in coalition order is named.
  EXPECT_EQ(r.coalition, coalition(m, {"s1", "b1"}));
  EXPECT_EQ(is_core_imputation(cf, imputation({"3", "7", "6", "-1"})).reason, CoreCheck::Reason::kNegative);
  EXPECT_EQ(is_core_imputation(cf, imputation({"3", "7", "5", "1"})).reason, CoreCheck::Reason::kGrandMismatch);
}

// With every agent essential, the core is the single point (3, 7, 5, 0).
TEST(Core, FourEssentialAgentsPinTheCore) {
  Market m = fixture("fig6").market;
  auto cf = characteristic_function(m);
  auto v = core_vertices(cf);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0], imputation({"3", "7", "5", "0"}));
  EXPECT_EQ(*max_core_utility(cf, m.agent_index("b2")), 0);
  EXPECT_EQ(essential_agents(m).size(), 4u);
}

TEST(Core, TradersGetNothing) {
  Market m = fixture("fig4").market;
  auto cf = characteristic_function(m);
  auto v = core_vertices(cf);
  std::sort(v.begin(), v.end());
  EXPECT_EQ(v, (std::vector<Imputation>{imputation({"0", "3", "0", "0"}), imputation({"3", "0", "0", "0"})}));
  EXPECT_EQ(essential_agents(m), (std::vector<std::size_t>{m.agent_index("s"), m.agent_index("b")}));
}

TEST(Core, EssentialBuyerOfTwoSellerGame) {
  Market m = fixture("fig3").market;
  EXPECT_EQ(essential_agents(m), (std::vector<std::size_t>{m.agent_index("b")}));
  auto cf = characteristic_function(m);
  EXPECT_EQ(*max_core_utility(cf, m.agent_index("s1")), 0);
  EXPECT_EQ(*max_core_utility(cf, m.agent_index("s2")), 0);
  EXPECT_EQ(*max_core_utility(cf, m.agent_index("b")), 1);
}

TEST(Fairness, Goldens) {
  auto lexmin = [](const char* name) { return leximin_imputation(characteristic_function(fixture(name).market)); };
  EXPECT_EQ(lexmin("fig6"), imputation({"3", "7", "5", "0"}));
  EXPECT_EQ(lexmin("fig4"), imputation({"3/2", "3/2", "0", "0"}));
  EXPECT_EQ(lexmin("fig5"), imputation({"1/2", "1/2"}));
  auto cf8 = characteristic_function(fixture("fig8").market);
  EXPECT_EQ(cf8(cf8.grand()), 33);
  EXPECT_EQ(leximin_imputation(cf8), imputation({"11.5", "6.5", "8.5", "6.5"}));
  EXPECT_EQ(leximax_imputation(cf8), imputation({"11", "6", "9", "7"}));
}

TEST(Fairness, MinvarMatchesHandSolution) {
  EXPECT_EQ(minvar_imputation(characteristic_function(fixture("fig5").market)), imputation({"1/2", "1/2"}));
  EXPECT_EQ(minvar_imputation(characteristic_function(fixture("fig4").market)),
            imputation({"3/2", "3/2", "0", "0"}));
}

TEST(Fairness, LeximinNotACompetitiveEquilibrium) {
  Scenario sc = fixture("fig5");
  const Market& m = sc.market;
  auto x = leximin_imputation(characteristic_function(m));
  // Any arrangement realizing (1/2, 1/2) on the efficient set fails the CE test.
  for (TradeMask phi : efficient_allocations(m)) {
    MarketOutcome o = implement_imputation(m, phi, x);
    EXPECT_TRUE(is_core_outcome(m, o));
    for (int k = -8; k <= 8; ++k) {
      PriceVector p(m.num_trades());
      for (std::size_t t = 0; t < p.size(); ++t) p[t] = o.prices.count(t) ? o.prices.at(t) : fraction(k, 4);
      EXPECT_FALSE(is_competitive_equilibrium(m, {p, phi}));
    }
  }
}

TEST(Outcomes, LeximinImplementedAtHalfPrices) {
  Scenario sc = fixture("fig4");
  const Market& m = sc.market;
  const Arrangement& a = sc.arrangements.at("leximin_route1");
  MarketOutcome o = restrict_outcome(a);
  auto u = outcome_utilities(m, o);
  EXPECT_EQ(u, (std::vector<ExtValue>{ExtValue(Q("3/2")), ExtValue(Q("3/2")), ExtValue(0L), ExtValue(0L)}));
  EXPECT_TRUE(is_core_outcome(m, o));
  MarketOutcome built = implement_imputation(m, a.allocation, imputation({"3/2", "3/2", "0", "0"}));
  EXPECT_EQ(built.allocation, a.allocation);
  for (const auto& [t, q] : built.prices) EXPECT_EQ(q, Q("1/2"));
}

TEST(Outcomes, CoreOutcomeOfParallelTrades) {
  Scenario sc = fixture("figB1");
  MarketOutcome o = restrict_outcome(sc.arrangements.at("core_outcome"));
  EXPECT_TRUE(is_core_outcome(sc.market, o));
  EXPECT_FALSE(find_blocking_outcome(sc.market, o).has_value());
}

TEST(Outcomes, BlockingOracleFindsIndividualIrrationality) {
  Market m = fixture("fig7").market;
  MarketOutcome o;
  o.allocation = bit(0);
  o.prices[0] = 5;  // buyer pays 5 for a value of 3
  EXPECT_FALSE(is_core_outcome(m, o));
  auto b = find_blocking_outcome(m, o);
  ASSERT_TRUE(b.has_value());
}

TEST(Outcomes, ImplementImputationRealizesRandomCoreImputations) {
  std::mt19937_64 rng(17);
  int done = 0;
  for (int rep = 0; rep < 80; ++rep) {
    Market m = random_substitutes_market(rng);
    auto cf = characteristic_function(m);
    for (const auto& x : {leximin_imputation(cf), leximax_imputation(cf)}) {
      for (TradeMask phi : efficient_allocations(m)) {
        MarketOutcome o = implement_imputation(m, phi, x);
        auto u = outcome_utilities(m, o);
        for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(u[i], ExtValue(x[i]));
        EXPECT_TRUE(is_core_outcome(m, o, cf));
        ++done;
      }
    }
  }
  EXPECT_GT(done, 80);
}

TEST(TaxedMarket, OriginalEquilibriaSurviveTaxation) {
  std::mt19937_64 rng(19);
  for (int rep = 0; rep < 40; ++rep) {
    Market m = random_substitutes_market(rng);
    Arrangement a = solve_ce_prices(m);
    for (const char* alpha : {"0", "1/4", "1/2", "1"}) {
      TaxedReport r = taxed_ce_check(m, a, Q(alpha));
      EXPECT_TRUE(r.is_ce);
      EXPECT_TRUE(r.is_taxed_ce) << rep << " " << alpha;
      EXPECT_TRUE(r.original_ce_implies_taxed_ce);
      EXPECT_TRUE(r.taxed_allocation_efficient);
    }
  }
}

}  // namespace
}  // namespace tradenet
