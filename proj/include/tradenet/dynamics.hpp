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

#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <set>
#include <vector>

#include "tradenet/game.hpp"

namespace tradenet {

// Uniform index in [0, n) from mt19937_64 by rejection sampling on the raw
// 64-bit output. Documented so seeded traces are reproducible anywhere.
inline std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  const std::uint64_t range = n;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % range;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return static_cast<std::size_t>(x % range);
}

class SchedulerError : public Error {
 public:
  using Error::Error;
};

// Seeded-uniform (mt19937_64 + uniform_index) or a scripted agent sequence.
class Scheduler {
 public:
  static Scheduler seeded(std::uint64_t seed) {
    Scheduler s;
    s.rng_.seed(seed);
    return s;
  }
  static Scheduler scripted(std::vector<std::size_t> sequence) {
    Scheduler s;
    s.script_ = std::move(sequence);
    return s;
  }

  bool scripted_mode() const { return script_.has_value(); }
  bool exhausted() const { return script_ && pos_ >= script_->size(); }

  // eligible must be sorted ascending.
  std::size_t next(const std::vector<std::size_t>& eligible) {
    if (eligible.empty()) throw SchedulerError("no eligible agent");
    if (script_) {
      if (pos_ >= script_->size()) throw SchedulerError("scripted schedule exhausted");
      std::size_t a = (*script_)[pos_++];
      if (!std::binary_search(eligible.begin(), eligible.end(), a))
        throw SchedulerError("scripted agent is not eligible at step " + std::to_string(pos_));
      return a;
    }
    return eligible[uniform_index(rng_, eligible.size())];
  }

 private:
  std::mt19937_64 rng_;
  std::optional<std::vector<std::size_t>> script_;
  std::size_t pos_ = 0;
};

// Offer update for agent i: match demanded trades, step eps on the rest.
inline std::vector<std::pair<std::size_t, Rational>> best_response_offers(
    const Market& m, std::size_t i, const OfferProfile& s, const Rational& eps,
    TradeMask* demanded = nullptr) {
  PriceVector q = faced_offers(m, i, s);
  TradeMask d = demand_tiebreak(m, i, q);
  if (demanded) *demanded = d;
  std::vector<std::pair<std::size_t, Rational>> out;
  for (std::size_t t : m.incident_list(i))
    out.emplace_back(t, d & bit(t) ? q[t] : Rational(q[t] - eps * m.chi(i, t)));
  return out;
}

inline std::size_t potential_phi_agent(const Market& m, std::size_t i, const OfferProfile& s,
                                       const Rational& eps) {
  std::size_t c = 0;
  for (const auto& [t, v] : best_response_offers(m, i, s, eps))
    if (s.of(m, i, t) != v) ++c;
  return c;
}

// Number of offer coordinates that the agents' best responses would change.
inline std::size_t potential_phi(const Market& m, const OfferProfile& s, const Rational& eps) {
  std::size_t total = 0;
  for (std::size_t i = 0; i < m.num_agents(); ++i) total += potential_phi_agent(m, i, s, eps);
  return total;
}

struct OfferConfig {
  Rational epsilon{1, 2};
  std::size_t max_rounds = 1000000;
  OfferProfile initial;
  bool record_trace = true;
};

struct OfferRound {
  std::size_t round = 0;
  std::optional<std::size_t> agent;
  TradeMask demand = 0;
  OfferProfile offers;
  std::size_t phi = 0;
  std::vector<std::size_t> unsatisfied;
};

struct OfferRunResult {
  std::vector<OfferRound> trace;
  OfferProfile terminal;
  std::size_t rounds = 0;
  bool converged = false;  // U became empty
  bool cap_hit = false;
  bool schedule_exhausted = false;
};

inline OfferRunResult run_offer_dynamics(const Market& m, const OfferConfig& cfg, Scheduler sched) {
  if (cfg.epsilon <= 0) throw Error("epsilon must be positive");
  check_offers(m, cfg.initial);
  for (std::size_t i = 0; i < m.num_agents(); ++i)
    if (!m.all_finite(i)) throw Error("offer dynamics need finite valuations (agent '" + m.agent_id(i) + "')");
  OfferRunResult r;
  OfferProfile s = cfg.initial;
  std::set<std::size_t> unsat;
  for (std::size_t i = 0; i < m.num_agents(); ++i) unsat.insert(i);
  auto record = [&](std::optional<std::size_t> agent, TradeMask d) {
    if (!cfg.record_trace) return;
    r.trace.push_back({r.rounds, agent, d, s, potential_phi(m, s, cfg.epsilon),
                       std::vector<std::size_t>(unsat.begin(), unsat.end())});
  };
  record(std::nullopt, 0);
  while (!unsat.empty()) {
    if (r.rounds >= cfg.max_rounds) {
      r.cap_hit = true;
      break;
    }
    if (sched.exhausted()) {
      r.schedule_exhausted = true;
      break;
    }
    std::size_t i = sched.next(std::vector<std::size_t>(unsat.begin(), unsat.end()));
    TradeMask d = 0;
    auto br = best_response_offers(m, i, s, cfg.epsilon, &d);
    unsat.erase(i);
    for (const auto& [t, v] : br) {
      Rational& cur = s.of(m, i, t);
      if (cur != v) {
        cur = v;
        unsat.insert(m.counterpart(i, t));
      }
    }
    ++r.rounds;
    record(i, d);
  }
  r.converged = unsat.empty();
  r.terminal = s;
  return r;
}

inline Rational lyapunov_L(const Market& m, const PriceVector& p) {
  Rational l = 0;
  for (std::size_t i = 0; i < m.num_agents(); ++i) l += indirect_utility(m, i, p);
  return l;
}

inline Rational ce_gap(const Market& m, const PriceVector& p, const Rational& value) {
  return lyapunov_L(m, p) - value;
}
inline Rational ce_gap(const Market& m, const PriceVector& p) {
  return ce_gap(m, p, market_value(m));
}

// Indirect utility shifted by <chi^i, p>; these sum to L.
inline Rational lyapunov_Li(const Market& m, std::size_t i, const PriceVector& p) {
  Rational l = indirect_utility(m, i, p);
  for (std::size_t t : m.incident_list(i)) l += m.chi(i, t) * p[t];
  return l;
}

// Clock update direction of agent i: -chi^i on rejected incident trades.
inline std::vector<Rational> update_direction(const Market& m, std::size_t i,
                                              const PriceVector& p) {
  TradeMask d = demand_tiebreak(m, i, p);
  std::vector<Rational> dir(m.num_trades(), Rational(0));
  for (std::size_t t : m.incident_list(i))
    if (!(d & bit(t))) dir[t] = -m.chi(i, t);
  return dir;
}

// R * sqrt(2m / (T Delta)), rounded down to a multiple of 2^-20.
inline Rational auto_epsilon(const Market& m, const Rational& R, std::size_t T) {
  std::size_t delta = std::max<std::size_t>(m.max_degree(), 1);
  if (R < 0) throw Error("R must be nonnegative");
  // floor(R sqrt(2m / (T Delta)) 2^20) = isqrt(floor(R^2 2m 2^40 / (T Delta))).
  Rational x = R * R * (2 * static_cast<unsigned long>(m.num_trades())) * (mpz_class(1) << 40) /
               (mpz_class(static_cast<unsigned long>(T)) * static_cast<unsigned long>(delta));
  mpz_class radicand = floor_of(x), root;
  mpz_sqrt(root.get_mpz_t(), radicand.get_mpz_t());
  Rational eps(root, mpz_class(1) << 20);
  eps.canonicalize();
  if (eps <= 0) eps = Rational(1, 1 << 20);
  return eps;
}

// 2 n^2 R^2 m Delta with n the number of agents.
inline Rational horizon_T0(const Market& m, const Rational& R) {
  Rational n = static_cast<unsigned long>(m.num_agents());
  return 2 * n * n * R * R * static_cast<unsigned long>(m.num_trades()) *
         static_cast<unsigned long>(m.max_degree());
}

struct PriceConfig {
  std::optional<Rational> epsilon;  // nullopt selects the automatic step
  std::size_t rounds = 0;
  Rational R = 0;
  PriceVector initial;
  bool record_trace = true;
  bool record_lyapunov = true;
};

struct PriceRound {
  std::size_t round = 0;
  std::optional<std::size_t> agent;
  TradeMask demand = 0;
  PriceVector prices;
  std::optional<Rational> L;
};

struct PriceRunResult {
  std::vector<PriceRound> trace;
  PriceVector final_prices;
  PriceVector average;  // (1/T) sum_{t=1..T} p^t
  Rational epsilon;
  std::size_t rounds = 0;
  bool horizon_ok = false;  // T >= 2 n^2 R^2 m Delta
};

inline PriceRunResult run_price_dynamics(const Market& m, const PriceConfig& cfg, Scheduler sched) {
  check_prices(m, cfg.initial);
  for (const auto& x : cfg.initial)
    if (cfg.R > 0 && abs(x) > cfg.R) throw Error("initial price outside [-R, R]");
  PriceRunResult r;
  r.epsilon = cfg.epsilon ? *cfg.epsilon : auto_epsilon(m, cfg.R, std::max<std::size_t>(cfg.rounds, 1));
  if (r.epsilon <= 0) throw Error("epsilon must be positive");
  r.horizon_ok = Rational(static_cast<unsigned long>(cfg.rounds)) >= horizon_T0(m, cfg.R);
  PriceVector p = cfg.initial;
  PriceVector sum(m.num_trades(), Rational(0));
  std::vector<std::size_t> everyone(m.num_agents());
  for (std::size_t i = 0; i < everyone.size(); ++i) everyone[i] = i;
  auto record = [&](std::optional<std::size_t> agent, TradeMask d) {
    if (!cfg.record_trace) return;
    PriceRound pr{r.rounds, agent, d, p, std::nullopt};
    if (cfg.record_lyapunov) pr.L = lyapunov_L(m, p);
    r.trace.push_back(std::move(pr));
  };
  record(std::nullopt, 0);
  while (r.rounds < cfg.rounds && !sched.exhausted()) {
    std::size_t i = sched.next(everyone);
    TradeMask d = demand_tiebreak(m, i, p);
    for (std::size_t t : m.incident_list(i))
      if (!(d & bit(t))) p[t] -= r.epsilon * m.chi(i, t);
    ++r.rounds;
    for (std::size_t t = 0; t < p.size(); ++t) sum[t] += p[t];
    record(i, d);
  }
  r.final_prices = p;
  r.average = sum;
  if (r.rounds > 0)
    for (auto& x : r.average) x /= static_cast<unsigned long>(r.rounds);
  else
    r.average = p;
  return r;
}

// Exact l-infinity distance from p to the set of CE price vectors (slow).
inline Rational distance_to_ce_prices(const Market& m, const PriceVector& p) {
  check_prices(m, p);
  lp::LinearProgram prog;
  std::size_t tv = prog.add_variable(true);
  std::vector<std::size_t> u(m.num_agents()), q(m.num_trades());
  for (auto& v : u) v = prog.add_variable(true);
  for (auto& v : q) v = prog.add_variable(false);
  for (std::size_t i = 0; i < m.num_agents(); ++i) {
    for_each_bundle(m, i, [&](TradeMask b) {
      const ExtValue& val = m.value(i, b);
      if (!val.finite() || b == 0) return;
      lp::Terms terms{{u[i], Rational(1)}};
      for_each_bit(b, [&](std::size_t t) { terms.emplace_back(q[t], Rational(m.chi(i, t))); });
      prog.add_constraint(std::move(terms), lp::Sense::kGreaterEqual, val.value());
    });
  }
  lp::Terms total;
  for (auto v : u) total.emplace_back(v, Rational(1));
  prog.add_constraint(total, lp::Sense::kEqual, market_value(m));
  for (std::size_t t = 0; t < m.num_trades(); ++t) {
    prog.add_constraint({{tv, Rational(1)}, {q[t], Rational(1)}}, lp::Sense::kGreaterEqual, p[t]);
    prog.add_constraint({{tv, Rational(1)}, {q[t], Rational(-1)}}, lp::Sense::kGreaterEqual, Rational(-p[t]));
  }
  prog.minimize({{tv, Rational(1)}});
  auto sol = prog.solve();
  if (sol.status != lp::Status::kOptimal) throw NoEquilibriumError("market has no CE prices");
  return sol.objective;
}

}  // namespace tradenet
