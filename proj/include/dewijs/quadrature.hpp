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

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string_view>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "dewijs/error.hpp"

namespace dewijs::quad {

struct Result {
  double value = 0.0;
  double error = 0.0;
};

namespace detail {

inline void require(const Result& r, double fail_above, std::string_view what) {
  const double allowed = fail_above;
  if (!std::isfinite(r.value) || !(r.error <= allowed)) {
    std::ostringstream msg;
    msg << what << ": estimated error " << r.error << " exceeds " << allowed;
    throw Error(ErrorCode::QuadratureFailure, msg.str());
  }
}

}  // namespace detail

// Both integrators refine until the error estimate drops below
// `rel_tol` times the L1 norm of the integrand (or the refinement limit is
// hit) and throw QuadratureFailure if the final estimate exceeds `fail_above`.

/// Adaptive 31-point Gauss-Kronrod for integrands smooth on [a, b] (kinks and
/// log singularities only at the endpoints).
template <class F>
Result gauss_kronrod(F&& f, double a, double b, double rel_tol = 1e-12, double fail_above = 1e-10,
                     std::string_view what = "gauss_kronrod") {
  if (a == b) return {};
  Result r;
  r.value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      f, a, b, 15, std::clamp(rel_tol, 1e-13, 1e-6), &r.error);
  detail::require(r, fail_above, what);
  return r;
}

/// Double-exponential quadrature for integrable endpoint singularities.
template <class F>
Result tanh_sinh(F&& f, double a, double b, double rel_tol = 1e-12, double fail_above = 1e-10,
                 std::string_view what = "tanh_sinh") {
  if (a == b) return {};
  static thread_local boost::math::quadrature::tanh_sinh<double> integrator(15);
  Result r;
  double l1 = 0.0;
  r.value = integrator.integrate(f, a, b, std::clamp(rel_tol, 1e-14, 1e-6), &r.error, &l1);
  detail::require(r, fail_above, what);
  return r;
}

}  // namespace dewijs::quad
