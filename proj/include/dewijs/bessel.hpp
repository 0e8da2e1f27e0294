// Copyright 2026 The dewijs Authors
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

// Modified Bessel function of the second kind, order zero.

#include <cmath>
#include <limits>
#include <numbers>

namespace dewijs {

namespace detail {

// Ascending series, accurate for 0 < x <= 2:
//   K0(x) = -(log(x/2) + gamma) I0(x) + sum_k (x^2/4)^k / (k!)^2 * H_k
inline double bessel_k0_series(double x) {
  const double q = 0.25 * x * x;
  const double lead = -(std::log(0.5 * x) + std::numbers::egamma);
  double term = 1.0;  // (x^2/4)^k / (k!)^2
  double harmonic = 0.0;
  double i0 = 1.0;
  double tail = 0.0;
  for (int k = 1; k < 60; ++k) {
    term *= q / (static_cast<double>(k) * k);
    harmonic += 1.0 / k;
    i0 += term;
    tail += term * harmonic;
    if (term * (harmonic + std::abs(lead)) < 1e-17 * (std::abs(lead * i0) + tail)) break;
  }
  return lead * i0 + tail;
}

// Steed's continued fraction for K0, x > 2 (Temme's method with mu = 0).
inline double bessel_k0_continued_fraction(double x) {
  constexpr double eps = 1e-17;
  double b = 2.0 * (1.0 + x);
  double d = 1.0 / b;
  double h = d;
  double delh = d;
  double q1 = 0.0;
  double q2 = 1.0;
  const double a1 = 0.25;
  double q = a1;
  double c = a1;
  double a = -a1;
  double s = 1.0 + q * delh;
  for (int i = 1; i < 100000; ++i) {
    a -= 2 * i;
    c = -a * c / (i + 1.0);
    const double qnew = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qnew;
    q += c * qnew;
    b += 2.0;
    d = 1.0 / (b + a * d);
    delh = (b * d - 1.0) * delh;
    h += delh;
    const double dels = q * delh;
    s += dels;
    if (std::abs(dels / s) < eps) break;
  }
  return std::sqrt(std::numbers::pi / (2.0 * x)) * std::exp(-x) / s;
}

}  // namespace detail

/// K0(x) for x > 0; +inf at 0, NaN for negative arguments.
inline double bessel_k0(double x) {
  if (std::isnan(x) || x < 0.0) return std::numeric_limits<double>::quiet_NaN();
  if (x == 0.0) return std::numeric_limits<double>::infinity();
  if (x <= 2.0) return detail::bessel_k0_series(x);
  if (x > 745.0) return 0.0;
  return detail::bessel_k0_continued_fraction(x);
}

}  // namespace dewijs
