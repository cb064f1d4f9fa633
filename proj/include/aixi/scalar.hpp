// Copyright 2026 The aixi-lab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <concepts>
#include <cstdint>
#include <string>
#include <string_view>
#include <type_traits>

#include <boost/multiprecision/cpp_int.hpp>

#include "aixi/errors.hpp"

namespace aixi {

// Exact probabilities for oracle tests; arbitrary precision.
using Rational = boost::multiprecision::cpp_rational;

template <class P>
struct ScalarTraits;

template <>
struct ScalarTraits<double> {
  static constexpr bool is_exact = false;
  // Normalization slack for a single conditional row.
  static constexpr double row_tolerance = 1e-12;
  static double to_double(double v) { return v; }
  static double from_ratio(std::int64_t num, std::int64_t den) {
    return static_cast<double>(num) / static_cast<double>(den);
  }
};

template <>
struct ScalarTraits<Rational> {
  static constexpr bool is_exact = true;
  static constexpr double row_tolerance = 0.0;
  static double to_double(const Rational& v) { return v.convert_to<double>(); }
  static Rational from_ratio(std::int64_t num, std::int64_t den) {
    return Rational(num, den);
  }
};

template <class P>
concept Scalar = requires { ScalarTraits<P>::is_exact; };

template <Scalar P>
double to_double(const P& v) {
  return ScalarTraits<P>::to_double(v);
}

template <Scalar P>
P ratio(std::int64_t num, std::int64_t den) {
  return ScalarTraits<P>::from_ratio(num, den);
}

// True when `a` and `b` agree exactly (exact scalars) or within `tol`.
template <Scalar P>
bool nearly_equal(const P& a, const P& b, double tol) {
  if constexpr (ScalarTraits<P>::is_exact) {
    return a == b;
  } else {
    return std::abs(a - b) <= tol;
  }
}

// Running sum. Neumaier-compensated for floating point, plain for exact.
template <Scalar P>
class Accumulator {
 public:
  void add(const P& v) {
    if constexpr (ScalarTraits<P>::is_exact) {
      sum_ += v;
    } else {
      const double t = sum_ + v;
      if (std::abs(sum_) >= std::abs(v)) {
        comp_ += (sum_ - t) + v;
      } else {
        comp_ += (v - t) + sum_;
      }
      sum_ = t;
    }
  }
  P value() const {
    if constexpr (ScalarTraits<P>::is_exact) {
      return sum_;
    } else {
      return sum_ + comp_;
    }
  }

 private:
  P sum_{0};
  P comp_{0};
};

// Parses "0.7", "7/10", "1" or "1e-3" into a scalar. Decimal literals are
// read exactly in rational mode ("0.7" becomes 7/10, not the nearest double).
template <Scalar P>
P parse_scalar(std::string_view text) {
  auto fail = [&] {
    throw ConfigError("cannot parse probability '" + std::string(text) + "'");
  };
  if (text.empty()) fail();
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    const P num = parse_scalar<P>(text.substr(0, slash));
    const P den = parse_scalar<P>(text.substr(slash + 1));
    if (den == P(0)) fail();
    return num / den;
  }
  if constexpr (ScalarTraits<P>::is_exact) {
    if (text.find_first_of("eE") != std::string_view::npos) fail();
    bool negative = false;
    std::string_view body = text;
    if (body.front() == '-' || body.front() == '+') {
      negative = body.front() == '-';
      body.remove_prefix(1);
    }
    boost::multiprecision::cpp_int num = 0;
    boost::multiprecision::cpp_int den = 1;
    bool seen_point = false;
    bool seen_digit = false;
    for (char c : body) {
      if (c == '.') {
        if (seen_point) fail();
        seen_point = true;
      } else if (c >= '0' && c <= '9') {
        seen_digit = true;
        num = num * 10 + (c - '0');
        if (seen_point) den *= 10;
      } else {
        fail();
      }
    }
    if (!seen_digit) fail();
    Rational r(num, den);
    return negative ? Rational(-r) : r;
  } else {
    std::size_t consumed = 0;
    double v = 0;
    try {
      v = std::stod(std::string(text), &consumed);
    } catch (const std::exception&) {
      fail();
    }
    if (consumed != text.size()) fail();
    return v;
  }
}

}  // namespace aixi
