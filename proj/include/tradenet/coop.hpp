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
#include <bit>
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <set>
#include <vector>

#include "tradenet/game.hpp"
#include "tradenet/linalg.hpp"
#include "tradenet/lp.hpp"
#include "tradenet/market.hpp"

namespace tradenet {

using Coalition = std::uint64_t;
using Imputation = std::vector<Rational>;

inline constexpr std::size_t kMaxCoalitionPlayers = 10;

class CharacteristicFunction {
 public:
  CharacteristicFunction(std::size_t n, std::vector<Rational> values)
      : n_(n), values_(std::move(values)) {
    if (n > 20) throw Error("too many players");
    if (values_.size() != (std::size_t{1} << n)) throw Error("need one value per coalition");
    if (values_[0] != 0) throw Error("w(empty) must be 0");
  }
  std::size_t num_players() const { return n_; }
  Coalition grand() const { return (Coalition{1} << n_) - 1; }
  const Rational& operator()(Coalition c) const { return values_.at(c); }
  const std::vector<Rational>& values() const { return values_; }

  // Nonempty coalitions by popcount, then lexicographic member lists.
  std::vector<Coalition> coalition_order() const {
    std::vector<Coalition> cs;
    for (Coalition c = 1; c <= grand(); ++c) cs.push_back(c);
    std::sort(cs.begin(), cs.end(), [](Coalition a, Coalition b) {
      int pa = std::popcount(a), pb = std::popcount(b);
      if (pa != pb) return pa < pb;
      Coalition d = a ^ b;
      return d != 0 && (a & d & (~d + 1)) != 0;
    });
    return cs;
  }

 private:
  std::size_t n_;
  std::vector<Rational> values_;
};

inline CharacteristicFunction characteristic_function(const Market& m) {
  std::size_t n = m.num_agents();
  if (n > kMaxCoalitionPlayers)
    throw Error("characteristic function needs at most " + std::to_string(kMaxCoalitionPlayers) +
                " agents");
  std::vector<Rational> w(std::size_t{1} << n, Rational(0));
  for (Coalition c = 1; c < w.size(); ++c)
    w[c] = optimize_welfare(m, m.internal_trades(c)).value;
  return CharacteristicFunction(n, std::move(w));
}

struct CoreCheck {
  enum class Reason { kNone, kNegative, kGrandMismatch, kCoalition };
  bool in_core = true;
  Reason reason = Reason::kNone;
  std::size_t agent = 0;
  Coalition coalition = 0;
};

inline CoreCheck is_core_imputation(const CharacteristicFunction& cf, const Imputation& x) {
  if (x.size() != cf.num_players()) throw Error("imputation has the wrong length");
  CoreCheck r;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < 0) return {false, CoreCheck::Reason::kNegative, i, 0};
  }
  Rational total = 0;
  for (const auto& v : x) total += v;
  if (total != cf(cf.grand())) return {false, CoreCheck::Reason::kGrandMismatch, 0, cf.grand()};
  for (Coalition c : cf.coalition_order()) {
    Rational s = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (c >> i & 1) s += x[i];
    if (s < cf(c)) return {false, CoreCheck::Reason::kCoalition, 0, c};
  }
  return r;
}

namespace internal {

// Core LP skeleton: x_i >= 0 (variables 0..n-1), coalition rows, grand equality.
inline lp::LinearProgram core_program(const CharacteristicFunction& cf) {
  lp::LinearProgram prog;
  std::size_t n = cf.num_players();
  for (std::size_t i = 0; i < n; ++i) prog.add_variable(true);
  for (Coalition c = 1; c < cf.grand(); ++c) {
    lp::Terms t;
    for (std::size_t i = 0; i < n; ++i)
      if (c >> i & 1) t.emplace_back(i, Rational(1));
    prog.add_constraint(std::move(t), lp::Sense::kGreaterEqual, cf(c));
  }
  lp::Terms all;
  for (std::size_t i = 0; i < n; ++i) all.emplace_back(i, Rational(1));
  prog.add_constraint(std::move(all), lp::Sense::kEqual, cf(cf.grand()));
  return prog;
}

}  // namespace internal

inline bool core_nonempty(const CharacteristicFunction& cf) {
  auto prog = internal::core_program(cf);
  prog.maximize({});
  return prog.solve().status == lp::Status::kOptimal;
}

// Max of x_i over the core; nullopt for an empty core.
inline std::optional<Rational> max_core_utility(const CharacteristicFunction& cf, std::size_t i) {
  auto prog = internal::core_program(cf);
  prog.maximize({{i, Rational(1)}});
  auto sol = prog.solve();
  if (sol.status != lp::Status::kOptimal) return std::nullopt;
  return sol.objective;
}

class EmptyCoreError : public Error {
 public:
  EmptyCoreError() : Error("the core is empty") {}
};

namespace internal {

struct HalfSpace {
  linalg::Vector a;
  Rational b;  // a . x >= b
};

// Coalition rows for every proper nonempty coalition, then x_i >= 0.
inline std::vector<HalfSpace> core_halfspaces(const CharacteristicFunction& cf) {
  std::size_t n = cf.num_players();
  std::vector<HalfSpace> hs;
  for (Coalition c = 1; c < cf.grand(); ++c) {
    linalg::Vector a(n, Rational(0));
    for (std::size_t i = 0; i < n; ++i)
      if (c >> i & 1) a[i] = 1;
    hs.push_back({a, cf(c)});
  }
  for (std::size_t i = 0; i < n; ++i) {
    linalg::Vector a(n, Rational(0));
    a[i] = 1;
    hs.push_back({a, Rational(0)});
  }
  return hs;
}

inline Rational dot(const linalg::Vector& a, const linalg::Vector& x) {
  Rational s = 0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * x[k];
  return s;
}

}  // namespace internal

// Vertices of the core by double description over the coalition half-spaces.
inline std::vector<Imputation> core_vertices(const CharacteristicFunction& cf) {
  using internal::dot;
  std::size_t n = cf.num_players();
  if (n > 8) throw Error("core vertex enumeration needs at most 8 players");
  if (n == 0) return {};
  auto hs = internal::core_halfspaces(cf);
  std::size_t ncoal = hs.size() - n;
  Rational w = cf(cf.grand());
  if (w < 0) return {};
  linalg::Vector ones(n, Rational(1));

  std::vector<linalg::Vector> verts;
  if (w == 0) {
    verts.push_back(linalg::Vector(n, Rational(0)));
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      linalg::Vector v(n, Rational(0));
      v[i] = w;
      verts.push_back(v);
    }
  }
  // Processed constraints: nonnegativity first, then coalitions in order.
  std::vector<std::size_t> processed;
  for (std::size_t i = 0; i < n; ++i) processed.push_back(ncoal + i);
  auto tight = [&](const linalg::Vector& v) {
    std::vector<std::size_t> t;
    for (std::size_t c : processed)
      if (dot(hs[c].a, v) == hs[c].b) t.push_back(c);
    return t;
  };
  for (std::size_t c = 0; c < ncoal; ++c) {
    std::vector<linalg::Vector> pos, neg, next;
    std::vector<Rational> pv, nv;
    for (auto& v : verts) {
      Rational val = dot(hs[c].a, v) - hs[c].b;
      if (val > 0) {
        pos.push_back(v);
        pv.push_back(val);
      } else if (val < 0) {
        neg.push_back(v);
        nv.push_back(val);
      } else {
        next.push_back(v);
      }
    }
    std::vector<std::vector<std::size_t>> tpos, tneg;
    for (auto& v : pos) tpos.push_back(tight(v));
    for (auto& v : neg) tneg.push_back(tight(v));
    for (std::size_t a = 0; a < pos.size(); ++a) {
      for (std::size_t b = 0; b < neg.size(); ++b) {
        std::vector<std::size_t> common;
        std::set_intersection(tpos[a].begin(), tpos[a].end(), tneg[b].begin(), tneg[b].end(),
                              std::back_inserter(common));
        if (common.size() + 1 < n - 1) continue;
        linalg::Matrix rows{ones};
        for (std::size_t k : common) rows.push_back(hs[k].a);
        if (linalg::rank(rows) != n - 1) continue;
        Rational f = pv[a] / (pv[a] - nv[b]);
        linalg::Vector x(n);
        for (std::size_t k = 0; k < n; ++k) x[k] = pos[a][k] + (neg[b][k] - pos[a][k]) * f;
        next.push_back(x);
      }
    }
    for (auto& v : pos) next.push_back(v);
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());
    processed.push_back(c);
    std::sort(processed.begin(), processed.end());
    verts = std::move(next);
    if (verts.empty()) return {};
  }
  return verts;
}

// Unique minimizer of sum x_i^2 over the core, by projecting the origin onto
// the affine hull of every face and keeping the best feasible projection.
inline Imputation minvar_imputation(const CharacteristicFunction& cf) {
  using internal::dot;
  std::size_t n = cf.num_players();
  if (n > 6) throw Error("minvar needs at most 6 players");
  auto verts = core_vertices(cf);
  if (verts.empty()) throw EmptyCoreError();
  auto hs = internal::core_halfspaces(cf);
  using Tight = std::vector<bool>;
  auto tight_of = [&](const linalg::Vector& v) {
    Tight t(hs.size(), false);
    for (std::size_t c = 0; c < hs.size(); ++c) t[c] = dot(hs[c].a, v) == hs[c].b;
    return t;
  };
  std::vector<Tight> gens;
  for (auto& v : verts) gens.push_back(tight_of(v));
  std::set<Tight> faces(gens.begin(), gens.end());
  std::deque<Tight> queue(gens.begin(), gens.end());
  while (!queue.empty()) {
    Tight s = queue.front();
    queue.pop_front();
    for (const auto& g : gens) {
      Tight x(hs.size());
      for (std::size_t c = 0; c < hs.size(); ++c) x[c] = s[c] && g[c];
      if (faces.insert(x).second) queue.push_back(x);
    }
  }
  std::optional<linalg::Vector> best;
  Rational best_norm;
  for (const auto& s : faces) {
    linalg::Matrix a{linalg::Vector(n, Rational(1))};
    linalg::Vector b{cf(cf.grand())};
    for (std::size_t c = 0; c < hs.size(); ++c) {
      if (!s[c]) continue;
      a.push_back(hs[c].a);
      b.push_back(hs[c].b);
    }
    auto x = linalg::min_norm_point(a, b);
    if (!x) continue;
    bool feasible = true;
    for (const auto& h : hs)
      if (dot(h.a, *x) < h.b) { feasible = false; break; }
    if (!feasible) continue;
    Rational norm = dot(*x, *x);
    if (!best || norm < best_norm) {
      best = *x;
      best_norm = norm;
    }
  }
  if (!best) throw Error("internal: no feasible face projection");
  return *best;
}

namespace internal {

// Leximin (maximize_floor) or leximax (minimize ceiling) by successive LPs.
inline Imputation lexi_imputation(const CharacteristicFunction& cf, bool leximin) {
  std::size_t n = cf.num_players();
  std::vector<std::optional<Rational>> fixed(n);
  auto build = [&](std::optional<Rational> bound, std::size_t& tvar) {
    auto prog = core_program(cf);
    for (std::size_t i = 0; i < n; ++i)
      if (fixed[i]) prog.add_constraint({{i, Rational(1)}}, lp::Sense::kEqual, *fixed[i]);
    tvar = prog.add_variable(false);
    for (std::size_t i = 0; i < n; ++i) {
      if (fixed[i]) continue;
      prog.add_constraint({{i, Rational(1)}, {tvar, Rational(-1)}},
                          leximin ? lp::Sense::kGreaterEqual : lp::Sense::kLessEqual, Rational(0));
    }
    if (bound) prog.add_constraint({{tvar, Rational(1)}}, lp::Sense::kEqual, *bound);
    return prog;
  };
  for (std::size_t round = 0; round < n; ++round) {
    bool any_free = false;
    for (auto& f : fixed) any_free |= !f.has_value();
    if (!any_free) break;
    std::size_t tvar;
    auto prog = build(std::nullopt, tvar);
    if (leximin) prog.maximize({{tvar, Rational(1)}});
    else prog.minimize({{tvar, Rational(1)}});
    auto sol = prog.solve();
    if (sol.status != lp::Status::kOptimal) throw EmptyCoreError();
    Rational tstar = sol.objective;
    std::vector<std::size_t> frozen;
    for (std::size_t i = 0; i < n; ++i) {
      if (fixed[i]) continue;
      auto probe = build(tstar, tvar);
      if (leximin) probe.maximize({{i, Rational(1)}});
      else probe.minimize({{i, Rational(1)}});
      auto ps = probe.solve();
      if (ps.status != lp::Status::kOptimal) throw Error("internal: probe LP failed");
      if (ps.objective == tstar) frozen.push_back(i);
    }
    if (frozen.empty()) throw Error("internal: no player fixed in a lexicographic round");
    for (std::size_t i : frozen) fixed[i] = tstar;
  }
  Imputation x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = *fixed[i];
  return x;
}

}  // namespace internal

inline Imputation leximin_imputation(const CharacteristicFunction& cf) {
  return internal::lexi_imputation(cf, true);
}

inline Imputation leximax_imputation(const CharacteristicFunction& cf) {
  return internal::lexi_imputation(cf, false);
}

struct EssentialAgents {
  std::vector<std::size_t> agents;
};

class EssentialDisagreement : public Error {
 public:
  EssentialDisagreement() : Error("internal: essential-agent computations disagree") {}
};

// Intersection over efficient sets of involved agents, cross-checked
// against the removal test w(I \ {i}) < w(I).
inline std::vector<std::size_t> essential_agents(const Market& m) {
  std::size_t n = m.num_agents();
  auto opt = optimize_welfare(m, m.all_trades());
  Coalition everyone = n == 64 ? ~Coalition{0} : (Coalition{1} << n) - 1;
  Coalition inter = everyone;
  for (TradeMask phi : opt.efficient) inter &= m.involved_agents(phi);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i) {
    Coalition rest = everyone & ~(Coalition{1} << i);
    bool removal = optimize_welfare(m, m.internal_trades(rest)).value < opt.value;
    bool member = inter >> i & 1;
    if (removal != member) throw EssentialDisagreement();
    if (member) out.push_back(i);
  }
  return out;
}

// Agent utilities of an outcome; -inf entries mark infeasible bundles.
inline std::vector<ExtValue> outcome_utilities(const Market& m, const MarketOutcome& o) {
  std::vector<ExtValue> u;
  for (std::size_t i = 0; i < m.num_agents(); ++i) u.push_back(outcome_utility(m, i, o));
  return u;
}

inline MarketOutcome restrict_outcome(const Arrangement& a) {
  MarketOutcome o;
  o.allocation = a.allocation;
  for_each_bit(a.allocation, [&](std::size_t t) { o.prices[t] = a.prices[t]; });
  return o;
}

// Prices on the efficient set phi that realize the core imputation x.
inline MarketOutcome implement_imputation(const Market& m, TradeMask phi, const Imputation& x) {
  std::size_t n = m.num_agents();
  if (x.size() != n) throw Error("imputation has the wrong length");
  auto opt = optimize_welfare(m, m.all_trades());
  if (social_welfare(m, phi) != ExtValue(opt.value)) throw Error("allocation is not efficient");
  auto cf = characteristic_function(m);
  if (!is_core_imputation(cf, x).in_core) throw Error("imputation is not in the core");
  Arrangement ce = solve_ce_prices(m);
  ce.allocation = phi;
  if (!is_competitive_equilibrium(m, ce)) throw Error("internal: CE prices do not support phi");
  PriceVector q = ce.prices;
  auto current = [&](std::size_t i) { return utility(m, i, phi & m.incident(i), q).value(); };

  // Components of the graph formed by phi.
  std::vector<std::size_t> comp(n);
  for (std::size_t i = 0; i < n; ++i) comp[i] = i;
  std::function<std::size_t(std::size_t)> find = [&](std::size_t i) {
    return comp[i] == i ? i : comp[i] = find(comp[i]);
  };
  for_each_bit(phi, [&](std::size_t t) { comp[find(m.trade(t).seller)] = find(m.trade(t).buyer); });

  for (std::size_t iter = 0; iter <= 2 * n; ++iter) {
    std::optional<std::pair<std::size_t, std::size_t>> pair;
    for (std::size_t a = 0; a < n && !pair; ++a) {
      if (current(a) <= x[a]) continue;
      for (std::size_t b = 0; b < n; ++b) {
        if (current(b) < x[b] && find(a) == find(b)) {
          pair = {{a, b}};
          break;
        }
      }
    }
    if (!pair) break;
    auto [over, under] = *pair;
    // BFS from the under-paid agent to the over-paid one along phi.
    std::vector<std::optional<std::size_t>> via(n);
    std::vector<bool> seen(n, false);
    std::deque<std::size_t> dq{under};
    seen[under] = true;
    while (!dq.empty() && !seen[over]) {
      std::size_t v = dq.front();
      dq.pop_front();
      for_each_bit(phi & m.incident(v), [&](std::size_t t) {
        std::size_t w = m.counterpart(v, t);
        if (seen[w]) return;
        seen[w] = true;
        via[w] = t;
        dq.push_back(w);
      });
    }
    Rational delta = std::min(Rational(current(over) - x[over]), Rational(x[under] - current(under)));
    // Walk back from over to under; each trade moves delta toward the under end.
    std::size_t v = over;
    while (v != under) {
      std::size_t t = *via[v];
      std::size_t prev = m.counterpart(v, t);
      // The agent nearer the under-paid end gains delta on this trade.
      if (m.trade(t).seller == prev) q[t] += delta;
      else q[t] -= delta;
      v = prev;
    }
  }
  MarketOutcome out;
  out.allocation = phi;
  for_each_bit(phi, [&](std::size_t t) { out.prices[t] = q[t]; });
  for (std::size_t i = 0; i < n; ++i)
    if (outcome_utility(m, i, out) != ExtValue(x[i]))
      throw Error("internal: component sums do not match the imputation");
  return out;
}

inline bool is_core_outcome(const Market& m, const MarketOutcome& o,
                            const CharacteristicFunction& cf) {
  Imputation x;
  for (const auto& u : outcome_utilities(m, o)) {
    if (!u.finite()) return false;
    x.push_back(u.value());
  }
  return is_core_imputation(cf, x).in_core;
}

inline bool is_core_outcome(const Market& m, const MarketOutcome& o) {
  return is_core_outcome(m, o, characteristic_function(m));
}

struct BlockingOutcome {
  TradeMask trades = 0;
  Coalition coalition = 0;
  PriceVector prices;
};

// Literal search for an outcome (q, psi) on C = a(psi) that no member of C
// likes less and some member likes more.
inline std::optional<BlockingOutcome> find_blocking_outcome(const Market& m, const MarketOutcome& o) {
  std::size_t n = m.num_agents();
  if (n > 5) throw Error("blocking oracle needs at most 5 agents");
  auto u = outcome_utilities(m, o);
  // A lone agent below 0 blocks by trading nothing.
  for (std::size_t i = 0; i < n; ++i)
    if (u[i] < ExtValue(0L)) return BlockingOutcome{0, Coalition{1} << i, PriceVector(m.num_trades(), Rational(0))};
  TradeMask all = m.all_trades();
  for (TradeMask psi = 1; psi != 0 && psi <= all; ++psi) {
    if (psi & ~all) continue;
    Coalition c = m.involved_agents(psi);
    ExtValue gain(0L), base(0L);
    for (std::size_t i = 0; i < n; ++i) {
      if (!(c >> i & 1)) continue;
      gain = gain + m.value(i, psi & m.incident(i));
      base = base + u[i];
    }
    if (!gain.finite()) continue;
    if (base.finite() && gain <= base) continue;
    lp::LinearProgram prog;
    std::vector<std::size_t> var(m.num_trades(), SIZE_MAX);
    for_each_bit(psi, [&](std::size_t t) { var[t] = prog.add_variable(false); });
    for (std::size_t i = 0; i < n; ++i) {
      if (!(c >> i & 1) || !u[i].finite()) continue;
      // v^i(psi_i) - sum chi q >= u_i
      lp::Terms terms;
      for_each_bit(psi & m.incident(i), [&](std::size_t t) {
        terms.emplace_back(var[t], Rational(-m.chi(i, t)));
      });
      prog.add_constraint(std::move(terms), lp::Sense::kGreaterEqual,
                          Rational(u[i].value() - m.value(i, psi & m.incident(i)).value()));
    }
    prog.maximize({});
    auto sol = prog.solve();
    if (sol.status != lp::Status::kOptimal) continue;
    BlockingOutcome b{psi, c, PriceVector(m.num_trades(), Rational(0))};
    for_each_bit(psi, [&](std::size_t t) { b.prices[t] = sol.x[var[t]]; });
    return b;
  }
  return std::nullopt;
}

struct TaxedReport {
  bool is_taxed_ce = false;
  bool is_ce = false;
  bool efficient = false;
  bool original_ce_implies_taxed_ce = false;
  bool taxed_allocation_efficient = false;
};

// Taxed utility of agent i choosing bundle psi while the rest of the
// allocation stays fixed: (alpha/n) W + (1 - alpha) u^i.
inline ExtValue taxed_utility(const Market& m, const Arrangement& a, std::size_t i, TradeMask psi,
                              const Rational& alpha) {
  ExtValue out(0L);
  if (alpha != 0) {
    ExtValue w = social_welfare(m, (a.allocation & ~m.incident(i)) | psi);
    if (!w.finite()) return w;
    out = out + Rational(alpha / static_cast<unsigned long>(m.num_agents()) * w.value());
  }
  if (alpha != 1) {
    ExtValue u = utility(m, i, psi, a.prices);
    if (!u.finite()) return u;
    out = out + Rational((1 - alpha) * u.value());
  }
  return out;
}

inline TaxedReport taxed_ce_check(const Market& m, const Arrangement& a, const Rational& alpha) {
  if (alpha < 0 || alpha > 1) throw Error("alpha must lie in [0, 1]");
  TaxedReport r;
  r.is_ce = is_competitive_equilibrium(m, a);
  r.efficient = social_welfare(m, a.allocation) == ExtValue(market_value(m));
  r.is_taxed_ce = true;
  for (std::size_t i = 0; i < m.num_agents() && r.is_taxed_ce; ++i) {
    ExtValue mine = taxed_utility(m, a, i, a.allocation & m.incident(i), alpha);
    for_each_bundle(m, i, [&](TradeMask psi) {
      if (taxed_utility(m, a, i, psi, alpha) > mine) r.is_taxed_ce = false;
    });
  }
  r.original_ce_implies_taxed_ce = !r.is_ce || r.is_taxed_ce;
  r.taxed_allocation_efficient = !r.is_taxed_ce || r.efficient;
  return r;
}

}  // namespace tradenet
