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

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "tradenet/linalg.hpp"
#include "tradenet/lp.hpp"
#include "tradenet/market.hpp"

namespace tradenet {

// One offer per (agent, incident trade): the buyer's and the seller's.
struct OfferProfile {
  std::vector<Rational> buyer;
  std::vector<Rational> seller;

  static OfferProfile zeros(const Market& m) {
    return {std::vector<Rational>(m.num_trades(), Rational(0)),
            std::vector<Rational>(m.num_trades(), Rational(0))};
  }
  Rational& of(const Market& m, std::size_t i, std::size_t t) {
    int c = m.chi(i, t);
    if (c == 0) throw Error("agent is not party to trade '" + m.trade(t).id + "'");
    return c > 0 ? buyer.at(t) : seller.at(t);
  }
  const Rational& of(const Market& m, std::size_t i, std::size_t t) const {
    return const_cast<OfferProfile*>(this)->of(m, i, t);
  }
  friend bool operator==(const OfferProfile&, const OfferProfile&) = default;
};

inline void check_offers(const Market& m, const OfferProfile& s) {
  if (s.buyer.size() != m.num_trades() || s.seller.size() != m.num_trades())
    throw Error("offer profile is incomplete");
}

struct Arrangement {
  PriceVector prices;
  TradeMask allocation = 0;
};

// Prices indexed only by the allocated trades.
struct MarketOutcome {
  TradeMask allocation = 0;
  std::map<std::size_t, Rational> prices;
};

inline MarketOutcome outcome_of_offers(const Market& m, const OfferProfile& s) {
  check_offers(m, s);
  MarketOutcome o;
  for (std::size_t t = 0; t < m.num_trades(); ++t) {
    if (s.buyer[t] == s.seller[t]) {
      o.allocation |= bit(t);
      o.prices[t] = s.buyer[t];
    }
  }
  return o;
}

// Offers faced by agent i (the counterpart's offer on each incident trade).
inline PriceVector faced_offers(const Market& m, std::size_t i, const OfferProfile& s) {
  check_offers(m, s);
  PriceVector p(m.num_trades(), Rational(0));
  for (std::size_t t : m.incident_list(i)) p[t] = m.chi(i, t) > 0 ? s.seller[t] : s.buyer[t];
  return p;
}

inline ExtValue outcome_utility(const Market& m, std::size_t i, const MarketOutcome& o) {
  TradeMask own = o.allocation & m.incident(i);
  PriceVector p(m.num_trades(), Rational(0));
  for_each_bit(own, [&](std::size_t t) { p[t] = o.prices.at(t); });
  return utility(m, i, own, p);
}

inline ExtValue agent_game_utility(const Market& m, std::size_t i, const OfferProfile& s) {
  return outcome_utility(m, i, outcome_of_offers(m, s));
}

struct Deviation {
  TradeMask bundle = 0;
  Rational utility;
  std::map<std::size_t, Rational> offers;  // trade -> new offer of the agent
};

// Matches the counterpart on the chosen bundle, steps eps away elsewhere.
inline Deviation best_deviation(const Market& m, std::size_t i, const OfferProfile& s,
                                const Rational& eps = 1) {
  PriceVector q = faced_offers(m, i, s);
  Deviation d;
  d.bundle = demand_tiebreak(m, i, q);
  d.utility = utility(m, i, d.bundle, q).value();
  for (std::size_t t : m.incident_list(i))
    d.offers[t] = d.bundle & bit(t) ? q[t] : Rational(q[t] - eps * m.chi(i, t));
  return d;
}

enum class NashStatus { kNotNash, kNash, kEpsTightNash };

struct NashReport {
  NashStatus status = NashStatus::kNotNash;
  std::optional<std::size_t> witness;  // first agent with a profitable deviation
  ExtValue witness_current;
  Rational witness_deviation;
  // Trades whose buyer offer exceeds the seller offer.
  std::vector<std::size_t> misordered_trades;
};

inline NashReport is_nash(const Market& m, const OfferProfile& s, const Rational& eps) {
  check_offers(m, s);
  NashReport r;
  MarketOutcome o = outcome_of_offers(m, s);
  for (std::size_t i = 0; i < m.num_agents(); ++i) {
    ExtValue cur = outcome_utility(m, i, o);
    Rational best = indirect_utility(m, i, faced_offers(m, i, s));
    if (cur < ExtValue(best)) {
      r.witness = i;
      r.witness_current = cur;
      r.witness_deviation = best;
      return r;
    }
  }
  bool tight = true;
  for (std::size_t t = 0; t < m.num_trades(); ++t) {
    if (s.buyer[t] > s.seller[t]) r.misordered_trades.push_back(t);
    if (abs(s.buyer[t] - s.seller[t]) > eps) tight = false;
  }
  r.status = tight ? NashStatus::kEpsTightNash : NashStatus::kNash;
  return r;
}

// First agent whose bundle is more than eps below its best utility.
inline std::optional<std::size_t> ce_violation(const Market& m, const Arrangement& a,
                                               const Rational& eps = 0) {
  check_prices(m, a.prices);
  for (std::size_t i = 0; i < m.num_agents(); ++i) {
    ExtValue mine = utility(m, i, a.allocation & m.incident(i), a.prices);
    if (mine + eps < ExtValue(indirect_utility(m, i, a.prices))) return i;
  }
  return std::nullopt;
}

inline bool is_competitive_equilibrium(const Market& m, const Arrangement& a,
                                       const Rational& eps = 0) {
  if (eps < 0) throw Error("epsilon must be nonnegative");
  return !ce_violation(m, a, eps).has_value();
}

inline OfferProfile ne_from_ce(const Market& m, const Arrangement& a, const Rational& eps) {
  if (eps <= 0) throw Error("epsilon must be positive");
  if (!is_competitive_equilibrium(m, a)) throw Error("arrangement is not a competitive equilibrium");
  OfferProfile s = OfferProfile::zeros(m);
  Rational half = eps / 2;
  for (std::size_t t = 0; t < m.num_trades(); ++t) {
    if (a.allocation & bit(t)) {
      s.buyer[t] = s.seller[t] = a.prices[t];
    } else {
      s.buyer[t] = a.prices[t] - half;
      s.seller[t] = a.prices[t] + half;
    }
  }
  return s;
}

inline Arrangement approx_ce_from_tight_ne(const Market& m, const OfferProfile& s,
                                           const Rational& eps) {
  if (is_nash(m, s, eps).status != NashStatus::kEpsTightNash)
    throw Error("offers are not an epsilon-tight Nash equilibrium");
  Arrangement a;
  a.allocation = outcome_of_offers(m, s).allocation;
  a.prices.resize(m.num_trades());
  for (std::size_t t = 0; t < m.num_trades(); ++t) a.prices[t] = (s.buyer[t] + s.seller[t]) / 2;
  Rational slack = eps * static_cast<unsigned long>(m.max_degree());
  if (!is_competitive_equilibrium(m, a, slack))
    throw Error("internal: midpoint arrangement is not an approximate equilibrium");
  return a;
}

class ExtensionError : public Error {
 public:
  enum class Kind {
    kNotTightNash,
    // eps >= 1/(2 Delta - 2) and no integral extension exists.
    kNoExtensionAtBound,
    // eps below the bound yet no candidate verifies.
    kNoCandidate,
  };
  ExtensionError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct ExtensionResult {
  Arrangement arrangement;
  bool within_bound = true;
  std::size_t candidates_tried = 0;
};

// True when eps < 1/(2 Delta - 2); every eps qualifies when Delta <= 1.
inline bool epsilon_within_bound(const Market& m, const Rational& eps) {
  std::size_t d = m.max_degree();
  if (d <= 1) return true;
  return eps < Rational(1, 2 * static_cast<unsigned long>(d) - 2);
}

// Reduced valuation over the inactive trades of agent i, with the active
// trades optimized out at the standing counterpart offers.
inline std::vector<ExtValue> reduced_valuation(const Market& m, std::size_t i,
                                               const OfferProfile& s, TradeMask active) {
  PriceVector q = faced_offers(m, i, s);
  TradeMask act = active & m.incident(i);
  TradeMask inact = m.incident(i) & ~active;
  std::vector<std::size_t> idx;
  for_each_bit(inact, [&](std::size_t t) { idx.push_back(t); });
  std::vector<ExtValue> out(std::size_t{1} << idx.size(), ExtValue::neg_inf());
  for (std::size_t local = 0; local < out.size(); ++local) {
    TradeMask psi = 0;
    for (std::size_t k = 0; k < idx.size(); ++k)
      if (local >> k & 1) psi |= bit(idx[k]);
    TradeMask xi = 0;
    while (true) {
      ExtValue v = m.value(i, psi | xi);
      for_each_bit(xi, [&](std::size_t t) { v = v - Rational(q[t] * m.chi(i, t)); });
      out[local] = std::max(out[local], v);
      if (xi == act) break;
      xi = (xi - act) & act;
    }
  }
  return out;
}

inline ExtensionResult extend_ne_to_ce(const Market& m, const OfferProfile& s,
                                       const Rational& eps) {
  using Kind = ExtensionError::Kind;
  if (is_nash(m, s, eps).status != NashStatus::kEpsTightNash)
    throw ExtensionError(Kind::kNotTightNash, "offers are not an epsilon-tight Nash equilibrium");
  ExtensionResult res;
  res.within_bound = epsilon_within_bound(m, eps);
  TradeMask active = outcome_of_offers(m, s).allocation;
  std::vector<std::size_t> inactive;
  for (std::size_t t = 0; t < m.num_trades(); ++t)
    if (!(active & bit(t))) inactive.push_back(t);

  std::vector<std::vector<ExtValue>> red(m.num_agents());
  std::vector<std::vector<std::size_t>> agent_inactive(m.num_agents());
  for (std::size_t i = 0; i < m.num_agents(); ++i) {
    red[i] = reduced_valuation(m, i, s, active);
    for (std::size_t t : m.incident_list(i))
      if (!(active & bit(t))) agent_inactive[i].push_back(t);
  }
  // Agent i is checked once its last inactive trade has been assigned.
  std::vector<std::vector<std::size_t>> check_at(inactive.size() + 1);
  for (std::size_t i = 0; i < m.num_agents(); ++i) {
    std::size_t last = 0;
    for (std::size_t k = 0; k < inactive.size(); ++k)
      for (std::size_t t : agent_inactive[i])
        if (t == inactive[k]) last = k + 1;
    check_at[last].push_back(i);
  }
  std::vector<std::vector<Rational>> cands(inactive.size());
  for (std::size_t k = 0; k < inactive.size(); ++k) {
    std::size_t t = inactive[k];
    Rational lo(floor_of(s.seller[t])), hi(ceil_of(s.buyer[t]));
    cands[k].push_back(lo);
    if (hi != lo) cands[k].push_back(hi);
  }
  PriceVector p(m.num_trades(), Rational(0));
  for_each_bit(active, [&](std::size_t t) { p[t] = s.buyer[t]; });

  auto empty_demanded = [&](std::size_t i) {
    const auto& tr = agent_inactive[i];
    for (std::size_t local = 1; local < red[i].size(); ++local) {
      ExtValue u = red[i][local];
      for (std::size_t k = 0; k < tr.size(); ++k)
        if (local >> k & 1) u = u - Rational(p[tr[k]] * m.chi(i, tr[k]));
      if (u > red[i][0]) return false;
    }
    return true;
  };
  std::function<bool(std::size_t)> search = [&](std::size_t k) -> bool {
    for (std::size_t i : check_at[k])
      if (!empty_demanded(i)) return false;
    if (k == inactive.size()) {
      ++res.candidates_tried;
      return is_competitive_equilibrium(m, {p, active});
    }
    for (const Rational& c : cands[k]) {
      p[inactive[k]] = c;
      if (search(k + 1)) return true;
    }
    return false;
  };
  if (search(0)) {
    res.arrangement = {p, active};
    return res;
  }
  if (!res.within_bound)
    throw ExtensionError(Kind::kNoExtensionAtBound,
                         "no integral extension: epsilon is not below 1/(2*Delta-2)");
  throw ExtensionError(Kind::kNoCandidate,
                       "no candidate price vector verifies (market not substitutable?)");
}

class NoEquilibriumError : public Error {
 public:
  using Error::Error;
};

// Minimizes the sum of indirect utilities (dual of the welfare LP) exactly.
inline Arrangement solve_ce_prices(const Market& m) {
  lp::LinearProgram prog;
  std::vector<std::size_t> u(m.num_agents()), pv(m.num_trades());
  for (auto& v : u) v = prog.add_variable(true);
  for (auto& v : pv) v = prog.add_variable(false);
  for (std::size_t i = 0; i < m.num_agents(); ++i) {
    for_each_bundle(m, i, [&](TradeMask b) {
      const ExtValue& val = m.value(i, b);
      if (!val.finite() || b == 0) return;
      lp::Terms terms{{u[i], Rational(1)}};
      for_each_bit(b, [&](std::size_t t) { terms.emplace_back(pv[t], Rational(m.chi(i, t))); });
      prog.add_constraint(std::move(terms), lp::Sense::kGreaterEqual, val.value());
    });
  }
  lp::Terms obj;
  for (auto v : u) obj.emplace_back(v, Rational(1));
  prog.minimize(obj);
  lp::Solution sol = prog.solve();
  if (sol.status != lp::Status::kOptimal) throw Error("internal: dual welfare LP not optimal");
  WelfareOptimum w = optimize_welfare(m, m.all_trades());
  if (sol.objective != w.value)
    throw NoEquilibriumError("no competitive equilibrium: LP value " +
                             format_rational(sol.objective) + " exceeds market value " +
                             format_rational(w.value));
  Arrangement a;
  a.prices.resize(m.num_trades());
  for (std::size_t t = 0; t < m.num_trades(); ++t) a.prices[t] = sol.x[pv[t]];
  for (TradeMask phi : w.efficient) {
    a.allocation = phi;
    if (is_competitive_equilibrium(m, a)) return a;
  }
  throw Error("internal: LP prices support no efficient allocation");
}

// Every square submatrix up to max_size has determinant in {0, 1, -1}.
inline bool unimodularity_check(const std::vector<std::vector<int>>& rows,
                                std::size_t max_size = 6) {
  if (rows.empty()) return true;
  std::size_t cols = rows[0].size();
  for (const auto& r : rows) {
    if (r.size() != cols) throw Error("ragged matrix");
    int plus = 0, minus = 0;
    for (int v : r) {
      if (v == 1) ++plus;
      else if (v == -1) ++minus;
      else if (v != 0) throw Error("entry outside {-1,0,1}");
    }
    if (plus > 1 || minus > 1) throw Error("row has more than one +1 or -1");
  }
  std::size_t n = rows.size();
  std::size_t top = std::min({max_size, n, cols});
  for (std::size_t k = 1; k <= top; ++k) {
    std::vector<std::size_t> ri(k), ci(k);
    std::function<bool(std::size_t, std::size_t)> pick_cols;
    std::function<bool(std::size_t, std::size_t)> pick_rows = [&](std::size_t d, std::size_t from) {
      if (d == k) return pick_cols(0, 0);
      for (std::size_t r = from; r < n; ++r) {
        ri[d] = r;
        if (!pick_rows(d + 1, r + 1)) return false;
      }
      return true;
    };
    pick_cols = [&](std::size_t d, std::size_t from) {
      if (d == k) {
        linalg::Matrix sub(k, linalg::Vector(k));
        for (std::size_t a = 0; a < k; ++a)
          for (std::size_t b = 0; b < k; ++b) sub[a][b] = rows[ri[a]][ci[b]];
        Rational det = linalg::determinant(sub);
        return abs(det) <= 1;
      }
      for (std::size_t c = from; c < cols; ++c) {
        ci[d] = c;
        if (!pick_cols(d + 1, c + 1)) return false;
      }
      return true;
    };
    if (!pick_rows(0, 0)) return false;
  }
  return true;
}

}  // namespace tradenet
