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

// Ordinary (intrinsic) kriging under a generalized covariance: weights that
// sum to one and match site-to-target covariances, from the bordered system
//   [ G  1 ] [ w      ]   [ g0 ]
//   [ 1' 0 ] [ lambda ] = [ 1  ].

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <span>
#include <sstream>
#include <vector>

#include <Eigen/Dense>
#include <lapacke.h>

#include "dewijs/error.hpp"
#include "dewijs/geometry.hpp"
#include "dewijs/kernels.hpp"

namespace dewijs {

inline constexpr double kVarianceFloor = -1e-9;

struct KrigingSolution {
  std::vector<double> weights;
  double lagrange = 0.0;
  /// max(raw_variance, kVarianceFloor).
  double prediction_variance = 0.0;
  double raw_variance = 0.0;
  bool variance_clamped = false;
  /// ||b - A x|| / (||A|| ||x|| + ||b||) for the bordered system.
  double relative_residual = 0.0;

  double weight_sum() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
  }
};

struct KrigingProblem {
  std::vector<Point> sites;
  Point target;
  Kernel kernel;
};

/// Solves the bordered system by symmetric-indefinite (Bunch-Kaufman)
/// factorization. `target_self` is the target's own covariance and only
/// enters the prediction variance.
inline KrigingSolution solve_bordered_system(const Eigen::MatrixXd& gram,
                                             const Eigen::VectorXd& target_cov,
                                             double target_self) {
  const Eigen::Index n = gram.rows();
  if (n < 1 || gram.cols() != n || target_cov.size() != n) {
    throw Error(ErrorCode::InvalidArgument, "kriging needs a square Gram matrix and matching rhs");
  }
  Eigen::MatrixXd a(n + 1, n + 1);
  a.topLeftCorner(n, n) = gram;
  a.col(n).head(n).setOnes();
  a.row(n).head(n).setOnes();
  a(n, n) = 0.0;
  Eigen::VectorXd b(n + 1);
  b.head(n) = target_cov;
  b(n) = 1.0;

  const lapack_int dim = static_cast<lapack_int>(n + 1);
  Eigen::MatrixXd factor = a;
  std::vector<lapack_int> pivots(dim);
  lapack_int info = LAPACKE_dsytrf(LAPACK_COL_MAJOR, 'L', dim, factor.data(), dim, pivots.data());
  if (info > 0) throw Error(ErrorCode::SingularSystem, "bordered kriging matrix is singular");
  if (info < 0) throw Error(ErrorCode::InvalidArgument, "dsytrf rejected its arguments");

  const double anorm = a.cwiseAbs().colwise().sum().maxCoeff();
  double rcond = 0.0;
  LAPACKE_dsycon(LAPACK_COL_MAJOR, 'L', dim, factor.data(), dim, pivots.data(), anorm, &rcond);
  if (!(rcond > 1e3 * std::numeric_limits<double>::epsilon())) {
    std::ostringstream msg;
    msg << "bordered kriging matrix is numerically singular (rcond " << rcond << ")";
    throw Error(ErrorCode::SingularSystem, msg.str());
  }

  auto solve = [&](Eigen::VectorXd rhs) {
    LAPACKE_dsytrs(LAPACK_COL_MAJOR, 'L', dim, 1, factor.data(), dim, pivots.data(), rhs.data(), dim);
    return rhs;
  };
  Eigen::VectorXd x = solve(b);
  // One step of iterative refinement.
  x += solve(b - a * x);

  const double anorm2 = a.norm();
  KrigingSolution sol;
  sol.relative_residual = (b - a * x).norm() / (anorm2 * x.norm() + b.norm());
  sol.weights.assign(x.data(), x.data() + n);
  sol.lagrange = x(n);

  const Eigen::VectorXd w = x.head(n);
  sol.raw_variance = target_self - 2.0 * w.dot(target_cov) + w.dot(gram * w);
  sol.variance_clamped = sol.raw_variance < kVarianceFloor;
  sol.prediction_variance = std::max(sol.raw_variance, kVarianceFloor);
  return sol;
}

/// Ordinary kriging with an arbitrary symmetric covariance callable
/// `cov(Point, Point) -> double`. Duplicate sites are rejected.
template <class Cov>
KrigingSolution solve_ordinary_kriging(std::span<const Point> sites, Point target, Cov&& cov) {
  if (sites.empty()) throw Error(ErrorCode::InvalidArgument, "kriging needs at least one site");
  std::vector<Point> sorted(sites.begin(), sites.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw Error(ErrorCode::SingularSystem, "duplicate kriging sites");
  }
  const auto n = static_cast<Eigen::Index>(sites.size());
  Eigen::MatrixXd gram(n, n);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    gram(i, i) = cov(sites[i], sites[i]);
    for (Eigen::Index j = 0; j < i; ++j) {
      gram(i, j) = gram(j, i) = cov(sites[i], sites[j]);
    }
    rhs(i) = cov(sites[i], target);
  }
  return solve_bordered_system(gram, rhs, cov(target, target));
}

inline KrigingSolution solve_ordinary_kriging(const KrigingProblem& problem, Diagnostics* diag = nullptr) {
  return solve_ordinary_kriging(std::span<const Point>(problem.sites), problem.target,
                                [&](Point p, Point q) { return gen_cov(problem.kernel, p, q, diag); });
}

/// sum |w| over sites farther than `radius` (Chebyshev) from the target.
inline double screening_report(std::span<const Lag> sites, Lag target, const KrigingSolution& sol,
                               int radius) {
  if (sites.size() != sol.weights.size()) {
    throw Error(ErrorCode::InvalidArgument, "sites and weights differ in length");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < sites.size(); ++i) {
    if (chebyshev(sites[i] - target) > radius) total += std::abs(sol.weights[i]);
  }
  return total;
}

// ---------------------------------------------------------------------------
// Cell grid around a missing centre cell
// ---------------------------------------------------------------------------

/// Reference three-decimal weights for the 17 x 17 grid, indexed [s][t - 1]
/// with 0 <= s <= t <= 8 (entries with t < s unused).
inline constexpr double kTable1Reference[9][8] = {
    {0.342, -0.075, 0.017, -0.004, 0.001, 0.000, 0.000, 0.000},
    {-0.032, -0.001, 0.002, -0.001, 0.000, 0.000, 0.000, 0.000},
    {0.0, 0.002, -0.001, 0.000, 0.000, 0.000, 0.000, 0.000},
    {0.0, 0.0, 0.000, 0.000, 0.000, 0.000, 0.000, 0.000},
    {0.0, 0.0, 0.0, 0.000, 0.000, 0.000, 0.000, 0.000},
    {0.0, 0.0, 0.0, 0.0, 0.000, 0.000, 0.000, 0.000},
    {0.0, 0.0, 0.0, 0.0, 0.0, 0.000, 0.000, 0.000},
    {0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.000, 0.000},
    {0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.000},
};

struct Table1Entry {
  int s = 0;
  int t = 0;
  double weight = 0.0;
  /// Largest deviation from `weight` among the orbit's members.
  double orbit_spread = 0.0;
  /// NaN when the grid has no reference counterpart.
  double reference = std::numeric_limits<double>::quiet_NaN();
};

struct Table1Result {
  int half_width = 8;
  std::vector<Lag> sites;
  KrigingSolution solution;
  std::vector<Table1Entry> entries;  // row-major: s ascending, then t
  double max_orbit_spread = 0.0;
  /// NaN unless half_width == 8.
  double max_abs_error = std::numeric_limits<double>::quiet_NaN();
};

/// Kriges the centre cell of a (2h+1)^2 grid of unit cells from the others
/// under the cell-averaged logarithmic covariance, then folds the weights
/// by the symmetries of the square.
inline Table1Result reproduce_table1(int half_width = 8) {
  if (half_width < 1 || half_width > 64) {
    throw Error(ErrorCode::InvalidArgument, "grid half width must be in [1, 64]");
  }
  Table1Result out;
  out.half_width = half_width;
  for (int s = -half_width; s <= half_width; ++s) {
    for (int t = -half_width; t <= half_width; ++t) {
      if (s != 0 || t != 0) out.sites.push_back({s, t});
    }
  }
  shared_cell_covariance().prefill(2 * half_width);

  std::vector<Point> points;
  points.reserve(out.sites.size());
  for (Lag l : out.sites) points.push_back(to_point(l));
  out.solution = solve_ordinary_kriging(KrigingProblem{points, {0.0, 0.0}, CellLogKernel{}});

  const int width = half_width + 1;
  std::vector<double> first(width * width, std::numeric_limits<double>::quiet_NaN());
  std::vector<double> spread(width * width, 0.0);
  for (std::size_t i = 0; i < out.sites.size(); ++i) {
    const Lag c = dihedral_canonical(out.sites[i]);
    const int key = c.t * width + c.s;  // row = minor index, column = major index
    const double w = out.solution.weights[i];
    if (std::isnan(first[key])) {
      first[key] = w;
    } else {
      spread[key] = std::max(spread[key], std::abs(w - first[key]));
    }
  }
  const bool reference_grid = half_width == 8;
  double worst = 0.0;
  for (int s = 0; s <= half_width; ++s) {
    for (int t = std::max(s, 1); t <= half_width; ++t) {
      Table1Entry e;
      e.s = s;
      e.t = t;
      e.weight = first[s * width + t];
      e.orbit_spread = spread[s * width + t];
      if (reference_grid) {
        e.reference = kTable1Reference[s][t - 1];
        worst = std::max(worst, std::abs(e.weight - e.reference));
      }
      out.max_orbit_spread = std::max(out.max_orbit_spread, e.orbit_spread);
      out.entries.push_back(e);
    }
  }
  if (reference_grid) out.max_abs_error = worst;
  return out;
}

/// CSV `s,t,weight` for every site of a lattice-indexed solution.
inline void write_weights_csv(std::ostream& os, std::span<const Lag> sites, const KrigingSolution& sol) {
  const auto old = os.precision(12);
  os << "s,t,weight\n";
  for (std::size_t i = 0; i < sites.size(); ++i) {
    os << sites[i].s << ',' << sites[i].t << ',' << sol.weights[i] << '\n';
  }
  os.precision(old);
}

/// CSV `s,t,weight,weight_3dp,reference` for the folded weights.
inline void write_table1_csv(std::ostream& os, const Table1Result& r) {
  os << "s,t,weight,weight_3dp,reference\n";
  for (const Table1Entry& e : r.entries) {
    std::ostringstream line;
    line << e.s << ',' << e.t << ',' << std::setprecision(12) << e.weight << ',' << std::fixed
         << std::setprecision(3) << (std::abs(e.weight) < 0.0005 ? 0.0 : e.weight) << ',';
    if (!std::isnan(e.reference)) line << e.reference;
    os << line.str() << '\n';
  }
}

/// Row/column layout (rows s, columns t = 1..h) with an error footer.
inline void write_table1_report(std::ostream& os, const Table1Result& r) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(3);
  out << "  s |";
  for (int t = 1; t <= r.half_width; ++t) out << std::setw(8) << t;
  out << '\n';
  out << std::string(5 + 8 * r.half_width, '-') << '\n';
  std::size_t k = 0;
  for (int s = 0; s <= r.half_width; ++s) {
    out << std::setw(3) << s << " |";
    for (int t = 1; t <= r.half_width; ++t) {
      if (t < s) {
        out << std::setw(8) << "";
        continue;
      }
      const double w = r.entries[k++].weight;
      out << std::setw(8) << (std::abs(w) < 0.0005 ? 0.0 : w);
    }
    out << '\n';
  }
  out << std::setprecision(12) << std::defaultfloat;
  out << "weight_sum = " << r.solution.weight_sum() << '\n';
  out << "max_orbit_spread = " << r.max_orbit_spread << '\n';
  if (!std::isnan(r.max_abs_error)) out << "max_abs_error = " << r.max_abs_error << '\n';
  os << out.str();
}

}  // namespace dewijs
