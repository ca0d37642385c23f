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
#include <cstdlib>
#include <numeric>
#include <optional>
#include <vector>

#include "tradenet/game.hpp"
#include "tradenet/market.hpp"

namespace tradenet {

// tau^i: keep the buying trades of the bundle, flip the selling ones.
inline TradeMask tau(const Market& m, std::size_t i, TradeMask bundle) {
  if (bundle & ~m.incident(i)) throw Error("bundle is not incident to the agent");
  return (bundle & m.buying(i)) | (m.selling(i) & ~bundle);
}

// Goods are the trades; buyer i values a set of its incident goods psi at
// v^i(tau^i(psi)).
class Auction {
 public:
  explicit Auction(const Market& m) : market_(m) {}

  std::size_t num_buyers() const { return market_.num_agents(); }
  std::size_t num_goods() const { return market_.num_trades(); }
  TradeMask domain(std::size_t i) const { return market_.incident(i); }

  ExtValue value(std::size_t i, TradeMask goods) const {
    return market_.value(i, tau(market_, i, goods));
  }
  ExtValue utility(std::size_t i, TradeMask goods, const PriceVector& p) const {
    ExtValue v = value(i, goods);
    for_each_bit(goods, [&](std::size_t t) { v = v - p[t]; });
    return v;
  }
  std::vector<TradeMask> demand_set(std::size_t i, const PriceVector& p) const {
    check_prices(market_, p);
    ExtValue best = ExtValue::neg_inf();
    std::vector<TradeMask> out;
    for_each_bundle(market_, i, [&](TradeMask g) {
      ExtValue u = utility(i, g, p);
      if (u > best) {
        best = u;
        out.clear();
      }
      if (u == best) out.push_back(g);
    });
    return out;
  }
  ExtValue welfare(const std::vector<TradeMask>& alloc) const {
    ExtValue w(0L);
    for (std::size_t i = 0; i < alloc.size(); ++i) w = w + value(i, alloc[i]);
    return w;
  }

 private:
  const Market& market_;
};

inline Auction to_auction(const Market& m) { return Auction(m); }

inline std::vector<TradeMask> map_allocation(const Market& m, TradeMask phi) {
  std::vector<TradeMask> out(m.num_agents());
  for (std::size_t i = 0; i < m.num_agents(); ++i) out[i] = tau(m, i, phi & m.incident(i));
  return out;
}

// Inverse of map_allocation on feasible auction allocations.
inline TradeMask unmap_allocation(const Market& m, const std::vector<TradeMask>& psi) {
  TradeMask phi = 0;
  for (std::size_t i = 0; i < m.num_agents(); ++i) phi |= tau(m, i, psi[i]) & m.buying(i);
  return phi;
}

inline bool verify_demand_mapping(const Market& m, std::size_t i, const PriceVector& p) {
  auto d = demand_set(m, i, p);
  auto dh = Auction(m).demand_set(i, p);
  if (d.size() != dh.size()) return false;
  std::vector<TradeMask> mapped;
  for (TradeMask b : d) mapped.push_back(tau(m, i, b));
  std::sort(mapped.begin(), mapped.end());
  std::sort(dh.begin(), dh.end());
  return mapped == dh;
}

struct CeMappingReport {
  bool market_ce = false;
  bool auction_ce = false;
  bool agree() const { return market_ce == auction_ce; }
};

inline bool is_auction_ce(const Market& m, const std::vector<TradeMask>& psi, const PriceVector& p) {
  Auction a(m);
  TradeMask covered = 0;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    if (covered & psi[i]) return false;  // feasibility: one unit per good
    covered |= psi[i];
  }
  if (covered != m.all_trades()) return false;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    auto d = a.demand_set(i, p);
    if (std::find(d.begin(), d.end(), psi[i]) == d.end()) return false;
  }
  return true;
}

inline CeMappingReport verify_ce_mapping(const Market& m, const Arrangement& arr) {
  return {is_competitive_equilibrium(m, arr),
          is_auction_ce(m, map_allocation(m, arr.allocation), arr.prices)};
}

struct FacetRecord {
  PriceVector anchor;
  std::vector<int> normal;        // primitive, first nonzero entry positive
  int weight = 0;                 // gcd of the demand change entries
  std::vector<int> demand_change; // x(after) - x(before) in vector notation
};

// Signed vector of a bundle over the agent's trades: +1 bought, -1 sold.
inline std::vector<int> bundle_vector(const Market& m, std::size_t i, TradeMask b) {
  std::vector<int> x;
  for (std::size_t t : m.incident_list(i)) x.push_back(b & bit(t) ? m.chi(i, t) : 0);
  return x;
}

// Facets met by axis-parallel lines through a generic shift of the grid.
inline std::vector<FacetRecord> lip_facets(const Market& m, std::size_t i,
                                           std::optional<PriceBox> box = std::nullopt,
                                           Rational step = Rational(1, 2)) {
  const auto& trades = m.incident_list(i);
  std::size_t d = trades.size();
  if (d > 3) throw Error("facet extraction supports at most 3 trades");
  if (step <= 0 || step > 1) throw Error("facet grid step must lie in (0, 1]");
  PriceBox b = box ? *box : default_price_box(m, i);
  std::size_t g = static_cast<std::size_t>(floor_of(Rational((b.hi - b.lo) / step)).get_ui()) + 1;
  // Offsets step/9, step/27, step/81 keep lines off lower-dimensional LIP pieces.
  std::vector<Rational> offset(d);
  for (std::size_t k = 0; k < d; ++k) {
    mpz_class p3;
    mpz_ui_pow_ui(p3.get_mpz_t(), 3, k + 2);
    offset[k] = step / Rational(p3);
  }
  std::vector<TradeMask> bundles;
  for_each_bundle(m, i, [&](TradeMask bb) {
    if (m.value(i, bb).finite()) bundles.push_back(bb);
  });
  std::vector<FacetRecord> out;
  std::size_t lines = 1;
  for (std::size_t k = 0; k + 1 < d; ++k) lines *= g;
  for (std::size_t axis = 0; axis < d; ++axis) {
    std::size_t ta = trades[axis];
    for (std::size_t idx = 0; idx < lines; ++idx) {
      PriceVector p(m.num_trades(), Rational(0));
      std::size_t rest = idx;
      for (std::size_t k = 0; k < d; ++k) {
        if (k == axis) continue;
        p[trades[k]] = b.lo + step * static_cast<unsigned long>(rest % g) + offset[k];
        rest /= g;
      }
      // u_B(t) = c_B + s_B t along the axis, with s_B = -chi if B holds the trade.
      auto line_of = [&](TradeMask bb) {
        p[ta] = 0;
        Rational c = utility(m, i, bb, p).value();
        Rational s = bb & bit(ta) ? Rational(-m.chi(i, ta)) : Rational(0);
        return std::pair<Rational, Rational>(c, s);
      };
      std::optional<TradeMask> best_with, best_without;
      Rational cw, cwo;
      bool tie_with = false, tie_without = false;
      for (TradeMask bb : bundles) {
        Rational c = line_of(bb).first;
        bool with = bb & bit(ta);
        auto& slot = with ? best_with : best_without;
        Rational& cur = with ? cw : cwo;
        bool& tie = with ? tie_with : tie_without;
        if (!slot || c > cur) {
          slot = bb;
          cur = c;
          tie = false;
        } else if (c == cur) {
          tie = true;
        }
      }
      if (tie_with || tie_without || !best_with || !best_without) continue;
      Rational s = -m.chi(i, ta);
      // crossing where cw + s t = cwo
      Rational t = (cwo - cw) / s;
      if (t < b.lo || t > b.hi) continue;
      TradeMask before = s > 0 ? *best_without : *best_with;
      TradeMask after = s > 0 ? *best_with : *best_without;
      FacetRecord f;
      f.anchor = p;
      f.anchor[ta] = t;
      auto xa = bundle_vector(m, i, after), xb = bundle_vector(m, i, before);
      for (std::size_t k = 0; k < d; ++k) f.demand_change.push_back(xa[k] - xb[k]);
      int gcd = 0;
      for (int v : f.demand_change) gcd = std::gcd(gcd, std::abs(v));
      f.weight = gcd;
      f.normal = f.demand_change;
      if (gcd > 0)
        for (int& v : f.normal) v /= gcd;
      for (int v : f.normal) {
        if (v == 0) continue;
        if (v < 0)
          for (int& w : f.normal) w = -w;
        break;
      }
      out.push_back(std::move(f));
    }
  }
  return out;
}

// A normal is of substitutes type if it is e^w or e^w - e^x up to sign.
inline bool substitutes_normal(const std::vector<int>& n) {
  int plus = 0, minus = 0;
  for (int v : n) {
    if (v == 1) ++plus;
    else if (v == -1) ++minus;
    else if (v != 0) return false;
  }
  return (plus + minus == 1) || (plus == 1 && minus == 1);
}

struct NormalVerdict {
  bool substitutes = true;
  std::optional<FacetRecord> witness;
  std::vector<std::vector<int>> normals;  // distinct, sorted
};

inline NormalVerdict is_substitutes_by_normals(const Market& m, std::size_t i,
                                              std::optional<PriceBox> box = std::nullopt,
                                              Rational step = Rational(1, 2)) {
  NormalVerdict v;
  for (auto& f : lip_facets(m, i, box, step)) {
    if (std::find(v.normals.begin(), v.normals.end(), f.normal) == v.normals.end())
      v.normals.push_back(f.normal);
    if (v.substitutes && !substitutes_normal(f.normal)) {
      v.substitutes = false;
      v.witness = f;
    }
  }
  std::sort(v.normals.begin(), v.normals.end());
  return v;
}

}  // namespace tradenet
