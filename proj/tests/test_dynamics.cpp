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

#include <cmath>
#include <random>

#include "test_support.hpp"

namespace tradenet {
namespace {

using testing::fixture;
using testing::prices;
using testing::Q;

OfferRunResult table2_run() {
  Scenario sc = fixture("fig7");
  OfferConfig cfg;
  cfg.initial = sc.offer_profiles.at("table2_start");
  cfg.epsilon = Q("1/2");
  return run_offer_dynamics(sc.market, cfg, Scheduler::scripted(sc.schedules.at("table2")));
}

TEST(OfferDynamics, ReproducesScriptedOfferTrace) {
  Market m = fixture("fig7").market;
  OfferRunResult r = table2_run();
  struct Row {
    const char* agent;
    const char *b1, *b2, *s1, *s2;
    std::vector<std::string> unsat;
  };
  // buyer offers on (omega1, omega2), seller offers of s1 and s2
  const std::vector<Row> table = {
      {"s1", "2", "2", "2", "3", {"s2", "b"}},
      {"b", "2", "2.5", "2", "3", {"s2"}},
      {"s2", "2", "2.5", "2", "2.5", {"b"}},
      {"b", "2", "2", "2", "2.5", {"s2"}},
      {"s2", "2", "2", "2", "2", {"b"}},
      {"b", "2", "1.5", "2", "2", {"s2"}},
      {"s2", "2", "1.5", "2", "2", {}},
  };
  ASSERT_EQ(r.rounds, table.size());
  ASSERT_EQ(r.trace.size(), table.size() + 1);
  for (std::size_t k = 0; k < table.size(); ++k) {
    const auto& row = r.trace[k + 1];
    ASSERT_TRUE(row.agent.has_value());
    EXPECT_EQ(m.agent_id(*row.agent), table[k].agent) << k;
    EXPECT_EQ(row.offers.buyer, prices({table[k].b1, table[k].b2})) << k;
    EXPECT_EQ(row.offers.seller, prices({table[k].s1, table[k].s2})) << k;
    std::vector<std::string> unsat;
    for (std::size_t i : row.unsatisfied) unsat.push_back(m.agent_id(i));
    std::sort(unsat.begin(), unsat.end());
    auto want = table[k].unsat;
    std::sort(want.begin(), want.end());
    EXPECT_EQ(unsat, want) << k;
  }
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(is_nash(m, r.terminal, Q("1/2")).status, NashStatus::kEpsTightNash);
}

// Round 0: b moves (omega1 -> 3, omega2 -> 5/2), s1 and s2 each move one offer.
TEST(OfferDynamics, PotentialAlongScriptedTrace) {
  OfferRunResult r = table2_run();
  EXPECT_EQ(r.trace.front().phi, 4u);
  for (std::size_t k = 1; k < r.trace.size(); ++k) EXPECT_LE(r.trace[k].phi, r.trace[k - 1].phi) << k;
  EXPECT_EQ(r.trace.back().phi, 0u);
}

TEST(OfferDynamics, SeededRunsAreDeterministic) {
  Scenario sc = fixture("fig7");
  OfferConfig cfg;
  cfg.initial = sc.offer_profiles.at("table2_start");
  for (std::uint64_t seed : {1u, 2u, 99u}) {
    OfferRunResult a = run_offer_dynamics(sc.market, cfg, Scheduler::seeded(seed));
    OfferRunResult b = run_offer_dynamics(sc.market, cfg, Scheduler::seeded(seed));
    ASSERT_EQ(a.trace.size(), b.trace.size());
    for (std::size_t k = 0; k < a.trace.size(); ++k) {
      EXPECT_EQ(a.trace[k].agent, b.trace[k].agent);
      EXPECT_EQ(a.trace[k].offers, b.trace[k].offers);
    }
  }
}

TEST(OfferDynamics, RoundCapIsReported) {
  Scenario sc = fixture("fig7");
  OfferConfig cfg;
  cfg.initial = sc.offer_profiles.at("table2_start");
  cfg.max_rounds = 2;
  OfferRunResult r = run_offer_dynamics(sc.market, cfg, Scheduler::scripted(sc.schedules.at("table2")));
  EXPECT_TRUE(r.cap_hit);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.rounds, 2u);
}

TEST(OfferDynamics, RejectsIneligibleScriptedAgentAndInfiniteValues) {
  Scenario sc = fixture("fig7");
  OfferConfig cfg;
  cfg.initial = sc.offer_profiles.at("table2_start");
  std::size_t s1 = sc.market.agent_index("s1");
  EXPECT_THROW(run_offer_dynamics(sc.market, cfg, Scheduler::scripted({s1, s1})), SchedulerError);
  Market f4 = fixture("fig4").market;
  OfferConfig c4;
  c4.initial = OfferProfile::zeros(f4);
  EXPECT_THROW(run_offer_dynamics(f4, c4, Scheduler::seeded(1)), Error);
}

TEST(ClockDynamics, ReproducesScriptedClockTrace) {
  Scenario sc = fixture("fig7");
  PriceConfig cfg;
  cfg.epsilon = Q("1/2");
  cfg.rounds = 5;
  cfg.initial = sc.arrangements.at("table3_start").prices;
  PriceRunResult r = run_price_dynamics(sc.market, cfg, Scheduler::scripted(sc.schedules.at("table3")));
  const std::vector<PriceVector> path = {prices({"2", "1.5"}), prices({"1.5", "1.5"}), prices({"2", "1.5"}),
                                         prices({"2", "2"}), prices({"2", "1.5"})};
  ASSERT_EQ(r.trace.size(), path.size() + 1);
  for (std::size_t k = 0; k < path.size(); ++k) EXPECT_EQ(r.trace[k + 1].prices, path[k]) << k;
  // Average over p^1..p^5.
  EXPECT_EQ(r.average, prices({"1.9", "1.6"}));
}

TEST(Scheduler, UniformIndexIsUnbiased) {
  std::mt19937_64 rng(123);
  std::vector<int> counts(3, 0);
  const int n = 60000;
  for (int k = 0; k < n; ++k) ++counts[uniform_index(rng, 3)];
  double chi2 = 0;
  for (int c : counts) chi2 += (c - n / 3.0) * (c - n / 3.0) / (n / 3.0);
  EXPECT_LT(chi2, 13.8);  // chi-square, 2 dof, p = 0.001
}

TEST(Lyapunov, EqualsMarketValueAtEquilibrium) {
  for (const auto& name : testing::fixture_names()) {
    if (std::string(name) == "figB2") continue;
    Market m = fixture(name).market;
    Arrangement a = solve_ce_prices(m);
    EXPECT_EQ(lyapunov_L(m, a.prices), market_value(m)) << name;
    EXPECT_EQ(ce_gap(m, a.prices), 0) << name;
  }
}

TEST(Lyapunov, BoundsMarketValueFromAbove) {
  std::mt19937_64 rng(31);
  for (int rep = 0; rep < 200; ++rep) {
    Market m = random_general_market(rng);
    PriceVector p(m.num_trades());
    for (auto& x : p) x = fraction(uniform_int(rng, -20, 20), 4);
    EXPECT_GE(lyapunov_L(m, p), market_value(m));
  }
}

// Indirect utility is convex with subgradient -x(Phi) at any demanded Phi.
TEST(Lyapunov, SubgradientInequality) {
  std::mt19937_64 rng(41);
  for (int rep = 0; rep < 500; ++rep) {
    Market m = random_general_market(rng);
    std::size_t i = uniform_index(rng, m.num_agents());
    PriceVector p(m.num_trades()), q(m.num_trades());
    for (auto& x : p) x = fraction(uniform_int(rng, -20, 20), 4);
    for (auto& x : q) x = fraction(uniform_int(rng, -20, 20), 4);
    TradeMask d = demand_tiebreak(m, i, p);
    Rational rhs = indirect_utility(m, i, p);
    for_each_bit(d, [&](std::size_t t) { rhs -= m.chi(i, t) * (q[t] - p[t]); });
    EXPECT_GE(indirect_utility(m, i, q), rhs);
  }
}

TEST(ClockDynamics, StepSizeAndHorizon) {
  Market m = fixture("fig7").market;
  // n = 3, R = 4, m = 2, Delta = 2.
  EXPECT_EQ(horizon_T0(m, 4), 2 * 9 * 16 * 2 * 2);
  for (std::size_t T : {1u, 10u, 1000u, 123457u}) {
    Rational e = auto_epsilon(m, 4, T);
    double exact = 4 * std::sqrt(2.0 * 2 / (T * 2.0));
    EXPECT_LE(e.get_d(), exact);
    EXPECT_GT(e.get_d(), exact - std::ldexp(1.0, -20) - 1e-12);
    EXPECT_TRUE(on_lattice(e, Rational(1, 1 << 20)));
  }
}

TEST(ClockDynamics, DistanceToEquilibriumPrices) {
  Market m = fixture("fig7").market;
  EXPECT_EQ(distance_to_ce_prices(m, prices({"2", "2"})), 0);
  EXPECT_EQ(distance_to_ce_prices(m, prices({"2", "1.5"})), Q("1/2"));
  EXPECT_EQ(distance_to_ce_prices(m, prices({"3", "0"})), 2);
}

}  // namespace
}  // namespace tradenet
