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

#include <optional>
#include <vector>

#include "tradenet/rational.hpp"

namespace tradenet::linalg {

using Vector = std::vector<Rational>;
using Matrix = std::vector<Vector>;

// Row-echelon form in place; returns pivot columns in row order.
inline std::vector<std::size_t> echelon(Matrix& a) {
  std::vector<std::size_t> pivots;
  if (a.empty()) return pivots;
  std::size_t cols = a[0].size(), r = 0;
  for (std::size_t c = 0; c < cols && r < a.size(); ++c) {
    std::size_t p = r;
    while (p < a.size() && sgn(a[p][c]) == 0) ++p;
    if (p == a.size()) continue;
    std::swap(a[p], a[r]);
    for (std::size_t i = r + 1; i < a.size(); ++i) {
      if (sgn(a[i][c]) == 0) continue;
      Rational f = a[i][c] / a[r][c];
      for (std::size_t j = c; j < cols; ++j) a[i][j] -= f * a[r][j];
    }
    pivots.push_back(c);
    ++r;
  }
  return pivots;
}

inline std::size_t rank(Matrix a) { return echelon(a).size(); }

// Indices of a maximal linearly independent subset of rows, greedy in order.
inline std::vector<std::size_t> independent_rows(const Matrix& a) {
  std::vector<std::size_t> keep;
  Matrix basis;
  for (std::size_t i = 0; i < a.size(); ++i) {
    basis.push_back(a[i]);
    if (rank(basis) == basis.size()) {
      keep.push_back(i);
    } else {
      basis.pop_back();
    }
  }
  return keep;
}

inline Rational determinant(Matrix a) {
  std::size_t n = a.size();
  Rational det = 1;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    while (p < n && sgn(a[p][c]) == 0) ++p;
    if (p == n) return 0;
    if (p != c) {
      std::swap(a[p], a[c]);
      det = -det;
    }
    det *= a[c][c];
    for (std::size_t i = c + 1; i < n; ++i) {
      if (sgn(a[i][c]) == 0) continue;
      Rational f = a[i][c] / a[c][c];
      for (std::size_t j = c; j < n; ++j) a[i][j] -= f * a[c][j];
    }
  }
  return det;
}

// Solves a x = b for square nonsingular a.
inline std::optional<Vector> solve(Matrix a, Vector b) {
  std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i) a[i].push_back(b[i]);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    while (p < n && sgn(a[p][c]) == 0) ++p;
    if (p == n) return std::nullopt;
    std::swap(a[p], a[c]);
    Rational inv = 1 / a[c][c];
    for (std::size_t j = c; j <= n; ++j) a[c][j] *= inv;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == c || sgn(a[i][c]) == 0) continue;
      Rational f = a[i][c];
      for (std::size_t j = c; j <= n; ++j) a[i][j] -= f * a[c][j];
    }
  }
  Vector x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = a[i][n];
  return x;
}

// Minimum-norm point of {x : a x = b}; nullopt if inconsistent.
inline std::optional<Vector> min_norm_point(const Matrix& a, const Vector& b) {
  if (a.empty()) return std::nullopt;
  std::size_t n = a[0].size();
  auto keep = independent_rows(a);
  Matrix g(keep.size(), Vector(keep.size()));
  Vector rhs(keep.size());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    rhs[i] = b[keep[i]];
    for (std::size_t j = 0; j < keep.size(); ++j) {
      Rational s = 0;
      for (std::size_t k = 0; k < n; ++k) s += a[keep[i]][k] * a[keep[j]][k];
      g[i][j] = s;
    }
  }
  auto y = solve(g, rhs);
  if (!y) return std::nullopt;
  Vector x(n, Rational(0));
  for (std::size_t i = 0; i < keep.size(); ++i)
    for (std::size_t k = 0; k < n; ++k) x[k] += (*y)[i] * a[keep[i]][k];
  for (std::size_t i = 0; i < a.size(); ++i) {
    Rational s = 0;
    for (std::size_t k = 0; k < n; ++k) s += a[i][k] * x[k];
    if (s != b[i]) return std::nullopt;
  }
  return x;
}

}  // namespace tradenet::linalg
