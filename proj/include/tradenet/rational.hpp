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

#include <gmpxx.h>

#include <algorithm>
#include <cctype>
#include <compare>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tradenet {

using Rational = mpq_class;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// num/den in canonical form; mpq_class(num, den) leaves it unreduced.
inline Rational fraction(long num, long den) {
  if (den == 0) throw Error("zero denominator");
  Rational r(num, den);
  r.canonicalize();
  return r;
}

// Accepts "3", "-2", "1.25", "-0.5", "3/2".
inline Rational parse_rational(std::string_view text) {
  std::string s(text);
  auto bad = [&]() { return Error("malformed rational: '" + s + "'"); };
  if (s.empty()) throw bad();
  if (auto slash = s.find('/'); slash != std::string::npos) {
    Rational r;
    if (r.set_str(s, 10) != 0) throw bad();
    if (r.get_den() == 0) throw bad();
    r.canonicalize();
    return r;
  }
  std::size_t pos = 0;
  bool neg = false;
  if (s[pos] == '-' || s[pos] == '+') neg = s[pos++] == '-';
  std::string digits;
  std::size_t frac_len = 0;
  bool seen_dot = false;
  std::size_t exp_pos = s.find_first_of("eE", pos);
  std::string mant = s.substr(pos, exp_pos == std::string::npos ? std::string::npos : exp_pos - pos);
  for (char c : mant) {
    if (c == '.') {
      if (seen_dot) throw bad();
      seen_dot = true;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      digits.push_back(c);
      if (seen_dot) ++frac_len;
    } else {
      throw bad();
    }
  }
  if (digits.empty()) throw bad();
  long exponent = 0;
  if (exp_pos != std::string::npos) {
    try {
      std::size_t used = 0;
      exponent = std::stol(s.substr(exp_pos + 1), &used);
      if (used != s.size() - exp_pos - 1) throw bad();
    } catch (const std::logic_error&) {
      throw bad();
    }
  }
  mpz_class num(digits, 10);
  long scale = exponent - static_cast<long>(frac_len);
  mpz_class p;
  mpz_ui_pow_ui(p.get_mpz_t(), 10, static_cast<unsigned long>(scale < 0 ? -scale : scale));
  Rational r = scale < 0 ? Rational(num, p) : Rational(num * p);
  r.canonicalize();
  return neg ? Rational(-r) : r;
}

// Exact decimal text when the expansion terminates, otherwise "num/den".
inline std::string format_rational(const Rational& q) {
  mpz_class den = q.get_den();
  int twos = 0, fives = 0;
  while (mpz_divisible_ui_p(den.get_mpz_t(), 2)) { den /= 2; ++twos; }
  while (mpz_divisible_ui_p(den.get_mpz_t(), 5)) { den /= 5; ++fives; }
  if (den != 1) return q.get_str();
  int places = std::max(twos, fives);
  mpz_class scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(places));
  mpz_class scaled = q.get_num() * scale / q.get_den();
  bool neg = scaled < 0;
  std::string digits = mpz_class(abs(scaled)).get_str();
  if (places > 0) {
    if (static_cast<int>(digits.size()) <= places)
      digits.insert(0, static_cast<std::size_t>(places) - digits.size() + 1, '0');
    digits.insert(digits.size() - static_cast<std::size_t>(places), ".");
  }
  return neg ? "-" + digits : digits;
}

inline mpz_class floor_of(const Rational& q) {
  mpz_class r;
  mpz_fdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return r;
}

inline mpz_class ceil_of(const Rational& q) {
  mpz_class r;
  mpz_cdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return r;
}

inline bool is_integral(const Rational& q) { return q.get_den() == 1; }

// True when q is an integer multiple of eps.
inline bool on_lattice(const Rational& q, const Rational& eps) {
  return is_integral(Rational(q / eps));
}

// A rational value or -infinity; -infinity absorbs addition.
class ExtValue {
 public:
  ExtValue() = default;
  ExtValue(Rational v) : value_(std::move(v)) {}  // NOLINT(google-explicit-constructor)
  ExtValue(long v) : value_(v) {}                 // NOLINT(google-explicit-constructor)
  static ExtValue neg_inf() {
    ExtValue e;
    e.finite_ = false;
    return e;
  }

  bool finite() const { return finite_; }
  const Rational& value() const {
    if (!finite_) throw Error("value() on -inf");
    return value_;
  }

  ExtValue operator+(const Rational& x) const {
    return finite_ ? ExtValue(Rational(value_ + x)) : neg_inf();
  }
  ExtValue operator-(const Rational& x) const {
    return finite_ ? ExtValue(Rational(value_ - x)) : neg_inf();
  }
  ExtValue operator+(const ExtValue& o) const {
    return finite_ && o.finite_ ? ExtValue(Rational(value_ + o.value_)) : neg_inf();
  }

  friend bool operator==(const ExtValue& a, const ExtValue& b) {
    if (a.finite_ != b.finite_) return false;
    return !a.finite_ || a.value_ == b.value_;
  }
  friend std::strong_ordering operator<=>(const ExtValue& a, const ExtValue& b) {
    if (!a.finite_ || !b.finite_) return a.finite_ <=> b.finite_;
    int c = cmp(a.value_, b.value_);
    return c < 0 ? std::strong_ordering::less
                 : c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal;
  }

  std::string str() const { return finite_ ? format_rational(value_) : "-inf"; }
  friend std::ostream& operator<<(std::ostream& os, const ExtValue& e) { return os << e.str(); }

 private:
  Rational value_{0};
  bool finite_ = true;
};

}  // namespace tradenet
