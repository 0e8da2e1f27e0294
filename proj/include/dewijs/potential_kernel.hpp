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

// Potential kernel of the simple random walk on Z^2,
//   a(x) = sum_t [P_0(S_t = 0) - P_0(S_t = x)],
// evaluated from its torus-integral representation with the inner angular
// integral done in closed form:
//   a(m, n) = (2/pi) int_0^pi (1 - cos(n th) z^|m|) / sqrt(A^2 - 1) dth,
//   A = 2 - cos th,  z = A - sqrt(A^2 - 1).

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>
#include <vector>

#include "dewijs/error.hpp"
#include "dewijs/geometry.hpp"
#include "dewijs/quadrature.hpp"

namespace dewijs::lattice {

inline constexpr int kMaxPotentialLag = 64;

/// a(s, t) from a single adaptive quadrature, absolute accuracy ~1e-14.
inline double potential_kernel_value(Lag lag) {
  const Lag c = dihedral_canonical(lag);
  const int m = c.s;
  const int n = c.t;
  if (m == 0) return 0.0;
  auto integrand = [m, n](double th) {
    const double half = std::sin(0.5 * th);
    const double one_minus_cos = 2.0 * half * half;
    const double root = std::sqrt(one_minus_cos * (2.0 + one_minus_cos));
    const double log_z = std::log1p(one_minus_cos - root);
    const double sn = std::sin(0.5 * n * th);
    const double num = -std::expm1(m * log_z) + std::exp(m * log_z) * 2.0 * sn * sn;
    return 2.0 * num / root;
  };
  // Breakpoint at the scale where z^m decays.
  const double knee = std::min(std::numbers::pi / 2, 4.0 / m);
  const double head = quad::gauss_kronrod(integrand, 0.0, knee, 1e-13, 1e-12, "potential kernel").value;
  const double tail =
      quad::gauss_kronrod(integrand, knee, std::numbers::pi, 1e-13, 1e-12, "potential kernel").value;
  return (head + tail) / std::numbers::pi;
}

/// Dense table of a(s, t) for |s|, |t| <= max_lag.
class PotentialKernelTable {
 public:
  explicit PotentialKernelTable(int max_lag) : max_lag_(max_lag), width_(2 * max_lag + 1) {
    if (max_lag < 1 || max_lag > kMaxPotentialLag) {
      throw Error(ErrorCode::InvalidArgument, "potential table max_lag must be in [1, 64]");
    }
    values_.assign(static_cast<std::size_t>(width_) * width_, 0.0);
    for (int major = 0; major <= max_lag; ++major) {
      for (int minor = 0; minor <= major; ++minor) {
        const double a = potential_kernel_value({major, minor});
        for (int sx : {-1, 1}) {
          for (int sy : {-1, 1}) {
            at(sx * major, sy * minor) = a;
            at(sy * minor, sx * major) = a;
          }
        }
      }
    }
  }

  int max_lag() const noexcept { return max_lag_; }

  bool contains(Lag l) const noexcept { return chebyshev(l) <= max_lag_; }

  double operator()(Lag l) const {
    if (!contains(l)) {
      std::ostringstream msg;
      msg << "lag (" << l.s << "," << l.t << ") outside potential table of max_lag " << max_lag_;
      throw Error(ErrorCode::InvalidArgument, msg.str());
    }
    return values_[index(l.s, l.t)];
  }

  /// Largest |mean over neighbours - a(x) - [x == 0]| over interior lags.
  double laplacian_residual() const {
    double worst = 0.0;
    for (int s = -max_lag_ + 1; s < max_lag_; ++s) {
      for (int t = -max_lag_ + 1; t < max_lag_; ++t) {
        double mean = 0.0;
        for (Lag nb : neighbours({s, t})) mean += values_[index(nb.s, nb.t)];
        mean *= 0.25;
        const double source = (s == 0 && t == 0) ? 1.0 : 0.0;
        worst = std::max(worst, std::abs(mean - values_[index(s, t)] - source));
      }
    }
    return worst;
  }

  /// CSV rows `s,t,a`.
  void write_csv(std::ostream& os) const {
    const auto old = os.precision(12);
    os << "s,t,a\n";
    for (int s = -max_lag_; s <= max_lag_; ++s) {
      for (int t = -max_lag_; t <= max_lag_; ++t) os << s << ',' << t << ',' << values_[index(s, t)] << '\n';
    }
    os.precision(old);
  }

 private:
  std::size_t index(int s, int t) const {
    return static_cast<std::size_t>(s + max_lag_) * width_ + (t + max_lag_);
  }
  double& at(int s, int t) { return values_[index(s, t)]; }

  int max_lag_;
  int width_;
  std::vector<double> values_;
};

inline PotentialKernelTable potential_kernel(int max_lag) { return PotentialKernelTable(max_lag); }

}  // namespace dewijs::lattice
