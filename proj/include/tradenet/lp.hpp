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

// Dense two-phase rational simplex with Bland's rule.

#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "tradenet/rational.hpp"

namespace tradenet::lp {

enum class Sense { kLessEqual, kGreaterEqual, kEqual };
enum class Status { kOptimal, kInfeasible, kUnbounded };

using Terms = std::vector<std::pair<std::size_t, Rational>>;

struct Solution {
  Status status = Status::kInfeasible;
  Rational objective;
  std::vector<Rational> x;
};

class LinearProgram {
 public:
  std::size_t add_variable(bool nonnegative = true) {
    nonneg_.push_back(nonnegative);
    return nonneg_.size() - 1;
  }
  std::size_t num_variables() const { return nonneg_.size(); }

  void add_constraint(Terms terms, Sense sense, Rational rhs) {
    rows_.push_back({std::move(terms), sense, std::move(rhs)});
  }
  void maximize(Terms terms) { objective_ = std::move(terms); maximize_ = true; }
  void minimize(Terms terms) { objective_ = std::move(terms); maximize_ = false; }

  Solution solve() const;

 private:
  struct Row {
    Terms terms;
    Sense sense;
    Rational rhs;
  };
  std::vector<bool> nonneg_;
  std::vector<Row> rows_;
  Terms objective_;
  bool maximize_ = true;
};

namespace internal {

// Tableau over columns [structural | slack/surplus | artificial], rhs kept apart.
class Tableau {
 public:
  std::vector<std::vector<Rational>> a;
  std::vector<Rational> b;
  std::vector<std::size_t> basis;
  std::size_t cols = 0;

  void pivot(std::size_t r, std::size_t c) {
    Rational inv = 1 / a[r][c];
    for (std::size_t j = 0; j < cols; ++j)
      if (sgn(a[r][j]) != 0) a[r][j] *= inv;
    b[r] *= inv;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (i == r || sgn(a[i][c]) == 0) continue;
      Rational f = a[i][c];
      for (std::size_t j = 0; j < cols; ++j)
        if (sgn(a[r][j]) != 0) a[i][j] -= f * a[r][j];
      b[i] -= f * b[r];
    }
    basis[r] = c;
  }

  // Maximizes cost . x over columns flagged usable; returns false if unbounded.
  bool optimize(const std::vector<Rational>& cost, const std::vector<bool>& usable) {
    while (true) {
      // reduced cost d_j = c_j - c_B . A_j
      std::size_t enter = cols;
      for (std::size_t j = 0; j < cols && enter == cols; ++j) {
        if (!usable[j]) continue;
        Rational d = cost[j];
        for (std::size_t i = 0; i < a.size(); ++i)
          if (sgn(a[i][j]) != 0) d -= cost[basis[i]] * a[i][j];
        if (sgn(d) > 0) enter = j;
      }
      if (enter == cols) return true;
      std::size_t leave = a.size();
      Rational best;
      for (std::size_t i = 0; i < a.size(); ++i) {
        if (sgn(a[i][enter]) <= 0) continue;
        Rational ratio = b[i] / a[i][enter];
        if (leave == a.size() || ratio < best || (ratio == best && basis[i] < basis[leave])) {
          leave = i;
          best = ratio;
        }
      }
      if (leave == a.size()) return false;
      pivot(leave, enter);
    }
  }
};

}  // namespace internal

inline Solution LinearProgram::solve() const {
  // Structural columns: nonnegative variables use one column, free ones two.
  std::vector<std::size_t> pos_col(nonneg_.size()), neg_col(nonneg_.size(), SIZE_MAX);
  std::size_t ncols = 0;
  for (std::size_t v = 0; v < nonneg_.size(); ++v) {
    pos_col[v] = ncols++;
    if (!nonneg_[v]) neg_col[v] = ncols++;
  }
  std::size_t m = rows_.size();
  std::vector<int> slack_sign(m, 0);
  std::vector<std::size_t> slack_col(m, SIZE_MAX), art_col(m, SIZE_MAX);
  std::vector<bool> flip(m, false);
  for (std::size_t r = 0; r < m; ++r) {
    Sense s = rows_[r].sense;
    if (sgn(rows_[r].rhs) < 0) {
      flip[r] = true;
      if (s == Sense::kLessEqual) s = Sense::kGreaterEqual;
      else if (s == Sense::kGreaterEqual) s = Sense::kLessEqual;
    }
    if (s != Sense::kEqual) {
      slack_col[r] = ncols++;
      slack_sign[r] = s == Sense::kLessEqual ? 1 : -1;
    }
  }
  std::size_t first_art = ncols;
  for (std::size_t r = 0; r < m; ++r)
    if (slack_sign[r] != 1) art_col[r] = ncols++;

  internal::Tableau tab;
  tab.cols = ncols;
  tab.a.assign(m, std::vector<Rational>(ncols, Rational(0)));
  tab.b.assign(m, Rational(0));
  tab.basis.assign(m, 0);
  for (std::size_t r = 0; r < m; ++r) {
    Rational sign = flip[r] ? -1 : 1;
    for (const auto& [v, c] : rows_[r].terms) {
      if (v >= nonneg_.size()) throw Error("LP term references unknown variable");
      tab.a[r][pos_col[v]] += sign * c;
      if (neg_col[v] != SIZE_MAX) tab.a[r][neg_col[v]] -= sign * c;
    }
    tab.b[r] = sign * rows_[r].rhs;
    if (slack_col[r] != SIZE_MAX) tab.a[r][slack_col[r]] = slack_sign[r];
    if (art_col[r] != SIZE_MAX) {
      tab.a[r][art_col[r]] = 1;
      tab.basis[r] = art_col[r];
    } else {
      tab.basis[r] = slack_col[r];
    }
  }

  Solution sol;
  std::vector<bool> usable(ncols, true);
  if (first_art < ncols) {
    std::vector<Rational> cost(ncols, Rational(0));
    for (std::size_t j = first_art; j < ncols; ++j) cost[j] = -1;
    tab.optimize(cost, usable);
    for (std::size_t r = 0; r < m; ++r) {
      if (tab.basis[r] >= first_art && sgn(tab.b[r]) != 0) {
        sol.status = Status::kInfeasible;
        return sol;
      }
    }
    // Drive zero-level artificials out of the basis; drop redundant rows.
    for (std::size_t r = 0; r < tab.a.size();) {
      if (tab.basis[r] < first_art) { ++r; continue; }
      std::size_t c = first_art;
      for (std::size_t j = 0; j < first_art; ++j)
        if (sgn(tab.a[r][j]) != 0) { c = j; break; }
      if (c < first_art) {
        tab.pivot(r, c);
        ++r;
      } else {
        tab.a.erase(tab.a.begin() + static_cast<long>(r));
        tab.b.erase(tab.b.begin() + static_cast<long>(r));
        tab.basis.erase(tab.basis.begin() + static_cast<long>(r));
      }
    }
    for (std::size_t j = first_art; j < ncols; ++j) usable[j] = false;
  }

  std::vector<Rational> cost(ncols, Rational(0));
  for (const auto& [v, c] : objective_) {
    Rational cc = maximize_ ? c : Rational(-c);
    cost[pos_col[v]] += cc;
    if (neg_col[v] != SIZE_MAX) cost[neg_col[v]] -= cc;
  }
  if (!tab.optimize(cost, usable)) {
    sol.status = Status::kUnbounded;
    return sol;
  }
  std::vector<Rational> col_val(ncols, Rational(0));
  for (std::size_t r = 0; r < tab.a.size(); ++r) col_val[tab.basis[r]] = tab.b[r];
  sol.status = Status::kOptimal;
  sol.x.assign(nonneg_.size(), Rational(0));
  for (std::size_t v = 0; v < nonneg_.size(); ++v) {
    sol.x[v] = col_val[pos_col[v]];
    if (neg_col[v] != SIZE_MAX) sol.x[v] -= col_val[neg_col[v]];
  }
  sol.objective = 0;
  for (const auto& [v, c] : objective_) sol.objective += c * sol.x[v];
  return sol;
}

}  // namespace tradenet::lp
