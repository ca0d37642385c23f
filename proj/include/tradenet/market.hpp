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

#include <bit>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tradenet/rational.hpp"

namespace tradenet {

// Sets of trades are bitmasks over global trade indices (declaration order).
using TradeMask = std::uint64_t;
using PriceVector = std::vector<Rational>;

inline constexpr std::size_t kMaxAgentTrades = 20;
inline constexpr std::size_t kMaxMarketTrades = 24;

inline constexpr TradeMask bit(std::size_t t) { return TradeMask{1} << t; }

template <typename F>
void for_each_bit(TradeMask m, F&& f) {
  while (m) {
    std::size_t t = static_cast<std::size_t>(std::countr_zero(m));
    f(t);
    m &= m - 1;
  }
}

struct Trade {
  std::string id;
  std::size_t seller;
  std::size_t buyer;
};

class Market {
 public:
  struct TradeSpec {
    std::string id, seller, buyer;
  };

  Market(std::string name, std::vector<std::string> agents, const std::vector<TradeSpec>& trades)
      : name_(std::move(name)), agents_(std::move(agents)) {
    for (std::size_t i = 0; i < agents_.size(); ++i) {
      if (!agent_index_.emplace(agents_[i], i).second)
        throw Error("duplicate agent id '" + agents_[i] + "'");
    }
    if (trades.size() > kMaxMarketTrades)
      throw Error("market has " + std::to_string(trades.size()) + " trades; cap is " +
                  std::to_string(kMaxMarketTrades));
    incident_.assign(agents_.size(), 0);
    buying_.assign(agents_.size(), 0);
    incident_list_.assign(agents_.size(), {});
    for (const auto& spec : trades) {
      std::size_t t = trades_.size();
      if (!trade_index_.emplace(spec.id, t).second)
        throw Error("duplicate trade id '" + spec.id + "'");
      std::size_t s = agent_index(spec.seller), b = agent_index(spec.buyer);
      if (s == b) throw Error("trade '" + spec.id + "' has the same buyer and seller");
      trades_.push_back({spec.id, s, b});
      incident_[s] |= bit(t);
      incident_[b] |= bit(t);
      buying_[b] |= bit(t);
      incident_list_[s].push_back(t);
      incident_list_[b].push_back(t);
    }
    values_.resize(agents_.size());
    for (std::size_t i = 0; i < agents_.size(); ++i) {
      if (incident_list_[i].size() > kMaxAgentTrades)
        throw Error("agent '" + agents_[i] + "' has more than " +
                    std::to_string(kMaxAgentTrades) + " trades");
      values_[i].assign(std::size_t{1} << incident_list_[i].size(), ExtValue(0L));
    }
  }

  const std::string& name() const { return name_; }
  std::size_t num_agents() const { return agents_.size(); }
  std::size_t num_trades() const { return trades_.size(); }
  const std::vector<std::string>& agents() const { return agents_; }
  const std::string& agent_id(std::size_t i) const { return agents_.at(i); }
  const Trade& trade(std::size_t t) const { return trades_.at(t); }
  const std::vector<Trade>& trades() const { return trades_; }

  std::size_t agent_index(const std::string& id) const {
    auto it = agent_index_.find(id);
    if (it == agent_index_.end()) throw Error("unknown agent id '" + id + "'");
    return it->second;
  }
  std::size_t trade_index(const std::string& id) const {
    auto it = trade_index_.find(id);
    if (it == trade_index_.end()) throw Error("unknown trade id '" + id + "'");
    return it->second;
  }
  TradeMask mask_of(const std::vector<std::string>& ids) const {
    TradeMask m = 0;
    for (const auto& id : ids) m |= bit(trade_index(id));
    return m;
  }

  TradeMask all_trades() const {
    return trades_.size() == 64 ? ~TradeMask{0} : bit(trades_.size()) - 1;
  }
  TradeMask incident(std::size_t i) const { return incident_.at(i); }
  TradeMask buying(std::size_t i) const { return buying_.at(i); }
  TradeMask selling(std::size_t i) const { return incident_.at(i) & ~buying_.at(i); }
  const std::vector<std::size_t>& incident_list(std::size_t i) const {
    return incident_list_.at(i);
  }
  std::size_t degree(std::size_t i) const { return incident_list_.at(i).size(); }
  std::size_t max_degree() const {
    std::size_t d = 0;
    for (const auto& l : incident_list_) d = std::max(d, l.size());
    return d;
  }
  // Trades with both endpoints inside the agent set.
  TradeMask internal_trades(std::uint64_t agent_set) const {
    TradeMask m = 0;
    for (std::size_t t = 0; t < trades_.size(); ++t) {
      if ((agent_set >> trades_[t].seller & 1) && (agent_set >> trades_[t].buyer & 1)) m |= bit(t);
    }
    return m;
  }
  // Agents incident to some trade of the set.
  std::uint64_t involved_agents(TradeMask m) const {
    std::uint64_t a = 0;
    for_each_bit(m, [&](std::size_t t) {
      a |= std::uint64_t{1} << trades_[t].seller;
      a |= std::uint64_t{1} << trades_[t].buyer;
    });
    return a;
  }
  std::size_t counterpart(std::size_t i, std::size_t t) const {
    const Trade& tr = trades_.at(t);
    return tr.buyer == i ? tr.seller : tr.buyer;
  }

  // +1 if i buys t, -1 if i sells t, 0 otherwise.
  int chi(std::size_t i, std::size_t t) const {
    const Trade& tr = trades_.at(t);
    return tr.buyer == i ? 1 : tr.seller == i ? -1 : 0;
  }

  std::uint32_t to_local(std::size_t i, TradeMask bundle) const {
    if (bundle & ~incident_.at(i))
      throw Error("bundle is not a subset of the trades of agent '" + agents_[i] + "'");
    std::uint32_t local = 0;
    const auto& l = incident_list_[i];
    for (std::size_t k = 0; k < l.size(); ++k)
      if (bundle & bit(l[k])) local |= std::uint32_t{1} << k;
    return local;
  }
  TradeMask to_global(std::size_t i, std::uint32_t local) const {
    TradeMask m = 0;
    const auto& l = incident_list_.at(i);
    for (std::size_t k = 0; k < l.size(); ++k)
      if (local >> k & 1) m |= bit(l[k]);
    return m;
  }

  const ExtValue& value(std::size_t i, TradeMask bundle) const {
    return values_.at(i)[to_local(i, bundle)];
  }
  void set_value(std::size_t i, TradeMask bundle, ExtValue v) {
    if (bundle == 0 && v != ExtValue(0L)) throw Error("the empty bundle must have value 0");
    values_.at(i)[to_local(i, bundle)] = std::move(v);
  }
  // Sets every nonempty bundle of agent i.
  void set_default(std::size_t i, const ExtValue& v) {
    auto& tab = values_.at(i);
    for (std::size_t k = 1; k < tab.size(); ++k) tab[k] = v;
  }
  bool all_finite(std::size_t i) const {
    for (const auto& v : values_.at(i))
      if (!v.finite()) return false;
    return true;
  }
  // Largest |v| over finite values of agent i (0 included).
  Rational max_abs_value(std::size_t i) const {
    Rational r = 0;
    for (const auto& v : values_.at(i))
      if (v.finite()) r = std::max(r, Rational(abs(v.value())));
    return r;
  }

  std::vector<std::string> bundle_ids(TradeMask m) const {
    std::vector<std::string> out;
    for_each_bit(m, [&](std::size_t t) { out.push_back(trades_[t].id); });
    return out;
  }
  std::string format_bundle(TradeMask m) const {
    std::string s = "{";
    bool first = true;
    for_each_bit(m, [&](std::size_t t) {
      if (!first) s += ",";
      s += trades_[t].id;
      first = false;
    });
    return s + "}";
  }

 private:
  std::string name_;
  std::vector<std::string> agents_;
  std::vector<Trade> trades_;
  std::map<std::string, std::size_t> agent_index_, trade_index_;
  std::vector<TradeMask> incident_, buying_;
  std::vector<std::vector<std::size_t>> incident_list_;
  std::vector<std::vector<ExtValue>> values_;
};

// Visits every subset of agent i's trades in increasing local-index order.
template <typename F>
void for_each_bundle(const Market& market, std::size_t i, F&& f) {
  std::uint32_t n = std::uint32_t{1} << market.degree(i);
  for (std::uint32_t local = 0; local < n; ++local) f(market.to_global(i, local));
}

inline void check_prices(const Market& market, const PriceVector& p) {
  if (p.size() != market.num_trades())
    throw Error("price vector has " + std::to_string(p.size()) + " entries, market has " +
                std::to_string(market.num_trades()) + " trades");
}

// v^i(bundle) minus net payments at prices p.
inline ExtValue utility(const Market& market, std::size_t i, TradeMask bundle,
                        const PriceVector& p) {
  check_prices(market, p);
  const ExtValue& v = market.value(i, bundle);
  if (!v.finite()) return v;
  Rational u = v.value();
  for_each_bit(bundle, [&](std::size_t t) {
    if (market.chi(i, t) > 0) u -= p[t]; else u += p[t];
  });
  return u;
}

// max over bundles of utility; always finite because the empty bundle is 0.
inline Rational indirect_utility(const Market& market, std::size_t i, const PriceVector& p) {
  ExtValue best(0L);
  for_each_bundle(market, i, [&](TradeMask b) { best = std::max(best, utility(market, i, b, p)); });
  return best.value();
}

inline std::vector<TradeMask> demand_set(const Market& market, std::size_t i,
                                         const PriceVector& p) {
  Rational best = indirect_utility(market, i, p);
  std::vector<TradeMask> out;
  for_each_bundle(market, i, [&](TradeMask b) {
    if (utility(market, i, b, p) == ExtValue(best)) out.push_back(b);
  });
  return out;
}

// Larger cardinality first; equal cardinality compares the sorted index sequences.
inline bool tiebreak_prefers(TradeMask a, TradeMask b) {
  int ca = std::popcount(a), cb = std::popcount(b);
  if (ca != cb) return ca > cb;
  TradeMask diff = a ^ b;
  return diff != 0 && (a & diff & (~diff + 1)) != 0;
}

// d^i(p): lexicographically smallest demanded bundle of maximum cardinality.
inline TradeMask demand_tiebreak(const Market& market, std::size_t i, const PriceVector& p) {
  auto d = demand_set(market, i, p);
  TradeMask best = d.front();
  for (TradeMask b : d)
    if (tiebreak_prefers(b, best)) best = b;
  return best;
}

// Argmax of v + sum_{w_j in bundle} eps / 4^j (j 1-based); nullopt on ties.
inline std::optional<TradeMask> demand_perturbed(const Market& market, std::size_t i,
                                                 const PriceVector& p, const Rational& eps) {
  std::optional<TradeMask> arg;
  ExtValue best = ExtValue::neg_inf();
  bool tie = false;
  for_each_bundle(market, i, [&](TradeMask b) {
    ExtValue u = utility(market, i, b, p);
    if (!u.finite()) return;
    Rational bump = 0;
    for_each_bit(b, [&](std::size_t t) {
      mpz_class pow4;
      mpz_ui_pow_ui(pow4.get_mpz_t(), 4, t + 1);
      bump += eps / Rational(pow4);
    });
    ExtValue w = u + bump;
    if (w > best) {
      best = w;
      arg = b;
      tie = false;
    } else if (w == best) {
      tie = true;
    }
  });
  if (tie) return std::nullopt;
  return arg;
}

struct SubstitutabilityWitness {
  PriceVector p, p_prime;
  TradeMask bundle = 0;
  int condition = 0;  // 1 or 2
};

struct SubstitutabilityReport {
  bool substitutable = true;
  std::optional<SubstitutabilityWitness> witness;
  Rational lo, hi, step;
};

struct PriceBox {
  Rational lo, hi;
};

inline PriceBox default_price_box(const Market& market, std::size_t i) {
  Rational v = market.max_abs_value(i);
  return {Rational(-v - 1), Rational(v + 1)};
}

// Grid check of both conditions of full substitutability. Pairs one grid step
// apart in a single coordinate suffice: the conditions compose along chains.
inline SubstitutabilityReport is_fully_substitutable(const Market& market, std::size_t i,
                                                     std::optional<PriceBox> box = std::nullopt,
                                                     Rational step = Rational(1, 2),
                                                     std::size_t max_points = 4000000) {
  PriceBox b = box ? *box : default_price_box(market, i);
  if (step <= 0) throw Error("substitutability grid step must be positive");
  if (b.hi < b.lo) throw Error("empty price box");
  SubstitutabilityReport rep{true, std::nullopt, b.lo, b.hi, step};
  const auto& trades = market.incident_list(i);
  std::size_t k = trades.size();
  if (k <= 1) return rep;
  std::size_t g = static_cast<std::size_t>(floor_of(Rational((b.hi - b.lo) / step)).get_ui()) + 1;
  std::size_t total = 1;
  for (std::size_t d = 0; d < k; ++d) {
    if (total > max_points / g) throw Error("substitutability grid too large");
    total *= g;
  }
  std::vector<std::vector<TradeMask>> demand(total);
  PriceVector p(market.num_trades(), Rational(0));
  auto load = [&](std::size_t idx, PriceVector& q) {
    for (std::size_t d = 0; d < k; ++d) {
      q[trades[d]] = b.lo + step * static_cast<unsigned long>(idx % g);
      idx /= g;
    }
  };
  for (std::size_t idx = 0; idx < total; ++idx) {
    load(idx, p);
    demand[idx] = demand_set(market, i, p);
  }
  std::size_t stride = 1;
  for (std::size_t d = 0; d < k; ++d, stride *= g) {
    std::size_t t = trades[d];
    bool buy = market.chi(i, t) > 0;
    TradeMask buys = market.buying(i), sells = market.selling(i);
    for (std::size_t idx = 0; idx < total; ++idx) {
      std::size_t coord = idx / stride % g;
      // condition 1: p' lowers the buying trade; condition 2: p' raises the selling trade.
      std::size_t other;
      if (buy) {
        if (coord == 0) continue;
        other = idx - stride;
      } else {
        if (coord + 1 == g) continue;
        other = idx + stride;
      }
      for (TradeMask psi : demand[idx]) {
        bool ok = false;
        for (TradeMask phi : demand[other]) {
          if (buy) {
            ok = ((phi & buys & ~bit(t)) & ~psi) == 0 && ((psi & sells) & ~phi) == 0;
          } else {
            ok = ((phi & sells & ~bit(t)) & ~psi) == 0 && ((psi & buys) & ~phi) == 0;
          }
          if (ok) break;
        }
        if (!ok) {
          SubstitutabilityWitness w;
          w.p.assign(market.num_trades(), Rational(0));
          w.p_prime.assign(market.num_trades(), Rational(0));
          load(idx, w.p);
          load(other, w.p_prime);
          w.bundle = psi;
          w.condition = buy ? 1 : 2;
          rep.substitutable = false;
          rep.witness = std::move(w);
          return rep;
        }
      }
    }
  }
  return rep;
}

inline ExtValue social_welfare(const Market& market, TradeMask allocation) {
  if (allocation & ~market.all_trades()) throw Error("allocation has unknown trades");
  ExtValue w(0L);
  for (std::size_t i = 0; i < market.num_agents(); ++i)
    w = w + market.value(i, allocation & market.incident(i));
  return w;
}

struct WelfareOptimum {
  Rational value;
  std::vector<TradeMask> efficient;  // increasing mask order
};

// Max welfare over subsets of the given trade set (all trades by default).
inline WelfareOptimum optimize_welfare(const Market& market, TradeMask within) {
  WelfareOptimum best{Rational(0), {}};
  ExtValue top = ExtValue::neg_inf();
  // Ascending submask enumeration.
  TradeMask s = 0;
  while (true) {
    ExtValue w = social_welfare(market, s);
    if (w > top) {
      top = w;
      best.efficient.clear();
    }
    if (w == top) best.efficient.push_back(s);
    if (s == within) break;
    s = (s - within) & within;
  }
  best.value = top.value();
  return best;
}

inline Rational market_value(const Market& market) {
  return optimize_welfare(market, market.all_trades()).value;
}

inline std::vector<TradeMask> efficient_allocations(const Market& market) {
  return optimize_welfare(market, market.all_trades()).efficient;
}

}  // namespace tradenet
