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

// Generalized covariances over contrasts: point logarithmic, Bessel K0,
// unit-cell-averaged logarithmic and the random-walk potential kernel, plus
// the spectral densities of the lattice and continuum Markov models.

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>
#include <ostream>
#include <shared_mutex>
#include <type_traits>
#include <unordered_map>
#include <variant>

#include "dewijs/bessel.hpp"
#include "dewijs/contrast.hpp"
#include "dewijs/error.hpp"
#include "dewijs/geometry.hpp"
#include "dewijs/potential_kernel.hpp"
#include "dewijs/quadrature.hpp"

namespace dewijs {

// ---------------------------------------------------------------------------
// Cell-averaged logarithmic covariance
// ---------------------------------------------------------------------------

namespace detail {

// int_{y0}^{y1} (alpha + beta y) log(c^2 + y^2) dy, closed form.
inline double log_moment(double c, double y0, double y1, double alpha, double beta) {
  auto f0 = [c](double y) {
    const double q = c * c + y * y;
    if (q == 0.0) return 0.0;
    const double arc = (c == 0.0) ? 0.0 : 2.0 * c * std::atan(y / c);
    return y * std::log(q) - 2.0 * y + arc;
  };
  auto f1 = [c](double y) {
    const double q = c * c + y * y;
    return q == 0.0 ? 0.0 : 0.5 * (q * std::log(q) - q);
  };
  return alpha * (f0(y1) - f0(y0)) + beta * (f1(y1) - f1(y0));
}

// The two unit cells at lag (s, t) differ by (s + u, t + v) with (u, v)
// triangularly distributed on [-1, 1]^2, so
//   Gamma(s, t) = int int (1-|u|)(1-|v|) * -log||(s+u, t+v)|| du dv.
// Near lags integrate v in closed form and u adaptively with a breakpoint at
// the singular abscissa; far lags use nested Gauss-Kronrod on the smooth
// integrand.
inline double cell_cov_uncached(Lag lag) {
  const double s = lag.s;
  const double t = lag.t;
  constexpr double tol = 1e-13;
  constexpr double fail = 1e-11;
  if (chebyshev(lag) <= 2) {
    auto outer = [s, t](double u) {
      const double c = s + u;
      // v in [-1, 0]: weight 1 + v = 1 - t + y with y = t + v; v in [0, 1]: 1 + t - y.
      const double lower = log_moment(c, t - 1.0, t, 1.0 - t, 1.0);
      const double upper = log_moment(c, t, t + 1.0, 1.0 + t, -1.0);
      return (1.0 - std::abs(u)) * -0.5 * (lower + upper);
    };
    double breaks[4] = {-1.0, 0.0, 1.0, 0.0};
    int count = 3;
    if (-s > -1.0 && -s < 1.0 && -s != 0.0) breaks[count++] = -s;
    std::sort(breaks, breaks + count);
    double total = 0.0;
    for (int i = 0; i + 1 < count; ++i) {
      total += quad::gauss_kronrod(outer, breaks[i], breaks[i + 1], tol, fail, "cell_cov").value;
    }
    return total;
  }
  auto inner = [s, t](double u) {
    const double c = s + u;
    auto g = [c, t](double v) { return (1.0 - std::abs(v)) * -0.5 * std::log(c * c + (t + v) * (t + v)); };
    return quad::gauss_kronrod(g, -1.0, 0.0, tol, fail, "cell_cov").value +
           quad::gauss_kronrod(g, 0.0, 1.0, tol, fail, "cell_cov").value;
  };
  auto outer = [&inner](double u) { return (1.0 - std::abs(u)) * inner(u); };
  return quad::gauss_kronrod(outer, -1.0, 0.0, tol, fail, "cell_cov").value +
         quad::gauss_kronrod(outer, 0.0, 1.0, tol, fail, "cell_cov").value;
}

}  // namespace detail

/// Thread-safe memo of cell-averaged covariances keyed by the dihedral
/// representative of the lag. Concurrent readers and inserters are allowed;
/// values do not depend on insertion order.
class CellCovarianceTable {
 public:
  double operator()(Lag lag) const {
    const Lag key = dihedral_canonical(lag);
    {
      std::shared_lock lock(mutex_);
      if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    }
    const double value = detail::cell_cov_uncached(key);
    std::unique_lock lock(mutex_);
    return cache_.emplace(key, value).first->second;
  }

  /// Fills every lag with |s|, |t| <= max_lag.
  void prefill(int max_lag) const {
    for (int major = 0; major <= max_lag; ++major) {
      for (int minor = 0; minor <= major; ++minor) (*this)({major, minor});
    }
  }

  std::size_t size() const {
    std::shared_lock lock(mutex_);
    return cache_.size();
  }

  /// CSV rows `s,t,value` for 0 <= t <= s <= max_lag.
  void write_csv(std::ostream& os, int max_lag) const {
    const auto old = os.precision(12);
    os << "s,t,value\n";
    for (int s = 0; s <= max_lag; ++s) {
      for (int t = 0; t <= s; ++t) os << s << ',' << t << ',' << (*this)({s, t}) << '\n';
    }
    os.precision(old);
  }

 private:
  mutable std::shared_mutex mutex_;
  mutable std::unordered_map<Lag, double, LagHash> cache_;
};

inline const CellCovarianceTable& shared_cell_covariance() {
  static const CellCovarianceTable table;
  return table;
}

/// Average of -log||x - y|| over x, y in two unit squares at integer lag.
inline double cell_cov(Lag lag) { return shared_cell_covariance()(lag); }

// ---------------------------------------------------------------------------
// Point kernels
// ---------------------------------------------------------------------------

/// -log r.
struct LogKernel {};

/// K0(a r), a > 0.
struct BesselK0Kernel {
  double a = 1.0;
};

/// Unit-cell-averaged -log r on integer cell centres.
struct CellLogKernel {};

/// -a(x - y) for the simple random walk; the table must cover every lag used.
struct LatticePotentialKernel {
  std::shared_ptr<const lattice::PotentialKernelTable> table;
};

using Kernel = std::variant<LogKernel, BesselK0Kernel, CellLogKernel, LatticePotentialKernel>;

/// Set when a zero-separation convention was used for a point kernel.
struct Diagnostics {
  bool zero_lag_convention = false;
};

namespace detail {

inline Lag integer_lag(Point p, Point q) {
  const Point d = p - q;
  if (!is_integral(d.x) || !is_integral(d.y)) {
    throw Error(ErrorCode::IncompatibleKernel, "kernel needs integer lags");
  }
  return {static_cast<int>(d.x), static_cast<int>(d.y)};
}

}  // namespace detail

/// Generalized covariance between two locations. Point log and K0 kernels
/// take the value 0 at zero separation and flag it in `diag`.
inline double gen_cov(const Kernel& kernel, Point p, Point q, Diagnostics* diag = nullptr) {
  const double r = distance(p, q);
  return std::visit(
      [&](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, LogKernel>) {
          if (r == 0.0) {
            if (diag) diag->zero_lag_convention = true;
            return 0.0;
          }
          return -std::log(r);
        } else if constexpr (std::is_same_v<K, BesselK0Kernel>) {
          if (!(k.a > 0.0)) throw Error(ErrorCode::InvalidArgument, "K0 kernel needs a > 0");
          if (r == 0.0) {
            if (diag) diag->zero_lag_convention = true;
            return 0.0;
          }
          return bessel_k0(k.a * r);
        } else if constexpr (std::is_same_v<K, CellLogKernel>) {
          return cell_cov(detail::integer_lag(p, q));
        } else {
          if (!k.table) throw Error(ErrorCode::InvalidArgument, "lattice kernel without a table");
          return -(*k.table)(detail::integer_lag(p, q));
        }
      },
      kernel);
}

/// Brownian potential kernel g(x, y) = -log||y - x|| / pi.
inline double brownian_potential(Point x, Point y) { return -std::log(distance(x, y)) / std::numbers::pi; }

/// sum_i sum_j sigma_i nu_j cov(x_i, y_j) for an arbitrary covariance callable.
template <class Cov>
double bilinear_form(const Contrast& sigma, const Contrast& nu, Cov&& cov) {
  double total = 0.0;
  for (const Atom& a : sigma.atoms()) {
    double row = 0.0;
    for (const Atom& b : nu.atoms()) row += b.weight * cov(a.location, b.location);
    total += a.weight * row;
  }
  return total;
}

/// <sigma, nu> under `kernel`.
inline double inner_product(const Contrast& sigma, const Contrast& nu, const Kernel& kernel,
                            Diagnostics* diag = nullptr) {
  if (sigma.support() != nu.support() || sigma.space() != nu.space()) {
    throw Error(ErrorCode::MixedSupport, "contrasts differ in support kind or space");
  }
  const bool cell_kernel = std::holds_alternative<CellLogKernel>(kernel);
  if ((sigma.support() == Support::cell) != cell_kernel) {
    throw Error(ErrorCode::IncompatibleKernel,
                cell_kernel ? "cell-log kernel needs cell atoms" : "point kernel needs point atoms");
  }
  if (std::holds_alternative<LatticePotentialKernel>(kernel) && sigma.space() != Space::lattice) {
    throw Error(ErrorCode::IncompatibleKernel, "lattice potential kernel needs lattice contrasts");
  }
  return bilinear_form(sigma, nu, [&](Point p, Point q) { return gen_cov(kernel, p, q, diag); });
}

// ---------------------------------------------------------------------------
// Spectral densities
// ---------------------------------------------------------------------------

/// [1 - beta + beta (sin^2(w/2) + sin^2(e/2))]^-1, 0 <= beta < 1.
struct StationaryAutoregression {
  double beta = 0.5;
};
/// (sin^2(w/2) + sin^2(e/2))^-1.
struct IntrinsicAutoregression {};
/// (alpha^2 + w^2 + e^2)^-1, alpha > 0.
struct GeneralizedOrnsteinUhlenbeck {
  double alpha = 1.0;
};
/// (w^2 + e^2)^-1.
struct DeWijsSpectrum {};

using SpectralModel = std::variant<StationaryAutoregression, IntrinsicAutoregression,
                                   GeneralizedOrnsteinUhlenbeck, DeWijsSpectrum>;

/// Normalizing constant of the de Wijs spectral density under the
/// logarithmic inner product: s(x) = kDeWijsSpectralConstant / ||x||^2.
inline constexpr double kDeWijsSpectralConstant = 1.0 / (2.0 * std::numbers::pi);

inline double spectral_density(const SpectralModel& model, double w, double e) {
  const double sw = std::sin(0.5 * w);
  const double se = std::sin(0.5 * e);
  const double lattice_symbol = sw * sw + se * se;
  const double radial = w * w + e * e;
  return std::visit(
      [&](const auto& m) -> double {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, StationaryAutoregression>) {
          if (!(m.beta >= 0.0 && m.beta < 1.0)) {
            throw Error(ErrorCode::InvalidArgument, "stationary autoregression needs 0 <= beta < 1");
          }
          return 1.0 / (1.0 - m.beta + m.beta * lattice_symbol);
        } else if constexpr (std::is_same_v<M, IntrinsicAutoregression>) {
          if (lattice_symbol == 0.0) throw Error(ErrorCode::PoleAtOrigin, "intrinsic autoregression");
          return 1.0 / lattice_symbol;
        } else if constexpr (std::is_same_v<M, GeneralizedOrnsteinUhlenbeck>) {
          if (!(m.alpha > 0.0)) throw Error(ErrorCode::InvalidArgument, "OU model needs alpha > 0");
          return 1.0 / (m.alpha * m.alpha + radial);
        } else {
          if (radial == 0.0) throw Error(ErrorCode::PoleAtOrigin, "de Wijs spectrum");
          return 1.0 / radial;
        }
      },
      model);
}

/// De Wijs spectral density normalized to the logarithmic inner product.
inline double de_wijs_spectral_density(double w, double e) {
  return kDeWijsSpectralConstant * spectral_density(DeWijsSpectrum{}, w, e);
}

}  // namespace dewijs
