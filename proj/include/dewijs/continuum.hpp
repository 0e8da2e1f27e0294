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

// Brownian motion in the unit disk: the Poisson kernel as the kriging
// coefficient function of the logarithmic covariance on the circle, exit
// samplers, and kriging from arc-averaged boundary segments.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/chi_squared.hpp>

#include "dewijs/error.hpp"
#include "dewijs/geometry.hpp"
#include "dewijs/kriging.hpp"
#include "dewijs/quadrature.hpp"
#include "dewijs/rng.hpp"

namespace dewijs::continuum {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kBoundaryTolerance = 1e-6;
inline constexpr std::size_t kWalkIterationCap = 100000;

struct DiskBoundaryPoint {
  double angle = 0.0;  // [0, 2 pi)

  Point position() const { return {std::cos(angle), std::sin(angle)}; }
};

/// Angle of p in [0, 2 pi).
inline double polar_angle(Point p) {
  double a = std::atan2(p.y, p.x);
  if (a < 0.0) a += kTwoPi;
  if (a >= kTwoPi) a = 0.0;
  return a;
}

namespace detail {

inline void require_interior(Point x0) {
  if (!(norm(x0) < 1.0)) {
    std::ostringstream msg;
    msg << "point (" << x0.x << "," << x0.y << ") is not inside the unit disk";
    throw Error(ErrorCode::NotInterior, msg.str());
  }
}

// ||e^{i theta} - y||^2 without cancellation when ||y|| is close to 1.
inline double circle_distance_sq(double theta, Point y) {
  const double rho = norm(y);
  const double phi = std::atan2(y.y, y.x);
  const double half = std::sin(0.5 * (theta - phi));
  return (1.0 - rho) * (1.0 - rho) + 4.0 * rho * half * half;
}

}  // namespace detail

/// Density of the exit position on the unit circle for Brownian motion
/// started at x0, with respect to arc length:
///   (1 - ||x0||^2) / (2 pi ||x - x0||^2).
inline double poisson_kernel(DiskBoundaryPoint x, Point x0) {
  detail::require_interior(x0);
  const double r2 = x0.x * x0.x + x0.y * x0.y;
  return (1.0 - r2) / (kTwoPi * detail::circle_distance_sq(x.angle, x0));
}

/// Harmonic measure of the arc [theta0, theta1].
inline double poisson_mass(double theta0, double theta1, Point x0) {
  detail::require_interior(x0);
  if (theta1 < theta0) return -poisson_mass(theta1, theta0, x0);
  const double r = norm(x0);
  const double peak = polar_angle(x0);
  const double width = 1.0 - r;
  // Kernel as a function of the angle u from the peak; integrating in u keeps
  // the abscissae finest where the kernel is sharpest.
  auto g = [r, width](double u) {
    const double half = std::sin(0.5 * u);
    return (1.0 + r) * width / (kTwoPi * (width * width + 4.0 * r * half * half));
  };
  // Split at every half period so each piece is measured from its nearest peak.
  std::vector<double> cuts{theta0};
  const double first = std::ceil((theta0 - peak) / std::numbers::pi);
  for (double k = first;; k += 1.0) {
    const double c = peak + k * std::numbers::pi;
    // Cuts within rounding of an end would leave slivers the rule cannot resolve.
    if (c >= theta1 - 1e-12) break;
    if (c > theta0 + 1e-12) cuts.push_back(c);
  }
  cuts.push_back(theta1);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double mid = 0.5 * (cuts[i] + cuts[i + 1]);
    const double centre = peak + kTwoPi * std::round((mid - peak) / kTwoPi);
    const double lo = cuts[i] - centre;
    const double hi = cuts[i + 1] - centre;
    std::vector<double> u{lo, hi};
    for (double k : {-8.0, -1.0, 0.0, 1.0, 8.0}) {
      if (k * width > lo + 1e-12 && k * width < hi - 1e-12) u.push_back(k * width);
    }
    std::sort(u.begin(), u.end());
    for (std::size_t j = 0; j + 1 < u.size(); ++j) {
      total += quad::gauss_kronrod(g, u[j], u[j + 1], 1e-12, 1e-11, "poisson_mass").value;
    }
  }
  return total;
}

/// Integral of the Poisson kernel over the full circle, split at the peak.
inline double poisson_normalization(Point x0) {
  const double peak = polar_angle(x0);
  return poisson_mass(peak, peak + std::numbers::pi, x0) +
         poisson_mass(peak + std::numbers::pi, peak + kTwoPi, x0);
}

/// | int log||x' - y|| v(x', x0) dx' - log||x0 - y|| | for ||y|| >= 1.
inline double harmonic_identity_check(Point x0, Point y) {
  detail::require_interior(x0);
  if (!(norm(y) >= 1.0 - 1e-12)) {
    throw Error(ErrorCode::InvalidArgument, "harmonic identity needs ||y|| >= 1");
  }
  auto f = [&](double th) {
    const double d2 = detail::circle_distance_sq(th, y);
    if (d2 == 0.0) return 0.0;  // y on the circle, hit exactly
    return 0.5 * std::log(d2) * poisson_kernel({th}, x0);
  };
  // Endpoints at arg y absorb the logarithmic singularity when y is on the
  // circle; the interior breakpoint sits at the kernel's peak.
  const double phi = polar_angle(y);
  double peak = polar_angle(x0);
  if (peak <= phi) peak += kTwoPi;
  double integral = 0.0;
  if (peak - phi < 1e-12 || phi + kTwoPi - peak < 1e-12) {
    integral = quad::tanh_sinh(f, phi, phi + kTwoPi, 1e-12, 1e-9, "harmonic identity").value;
  } else {
    integral = quad::tanh_sinh(f, phi, peak, 1e-12, 1e-9, "harmonic identity").value +
               quad::tanh_sinh(f, peak, phi + kTwoPi, 1e-12, 1e-9, "harmonic identity").value;
  }
  return std::abs(integral - std::log(distance(x0, y)));
}

// ---------------------------------------------------------------------------
// Exit samplers
// ---------------------------------------------------------------------------

enum class Method { wos, euler };

struct SamplerOptions {
  Method method = Method::wos;
  /// Per-coordinate variance of one Euler increment.
  double step = 1e-4;
  std::uint64_t seed = 0;
  int workers = 1;
};

/// Empirical exit distribution.
struct HittingDistribution {
  Point x0;
  SamplerOptions options;
  std::vector<double> angles;
  /// Walks stopped by the iteration cap (projected from where they stood).
  std::size_t capped = 0;
  /// max | ||exit|| - 1 | before projection.
  double max_radius_error = 0.0;
};

namespace detail {

struct Exit {
  double angle = 0.0;
  double radius_error = 0.0;
  bool capped = false;
};

// Jump uniformly on the largest circle inside the disk until within the
// capture tolerance of the boundary, then project.
inline Exit walk_on_spheres(Point x0, Engine& engine) {
  std::uniform_real_distribution<double> uniform(0.0, kTwoPi);
  Point p = x0;
  for (std::size_t it = 0; it < kWalkIterationCap; ++it) {
    const double gap = 1.0 - norm(p);
    if (gap < kBoundaryTolerance) return {polar_angle(p), std::abs(gap), false};
    const double phi = uniform(engine);
    p = p + gap * Point{std::cos(phi), std::sin(phi)};
  }
  return {polar_angle(p), std::abs(1.0 - norm(p)), true};
}

// Gaussian increments of variance `step` per coordinate; the first step that
// leaves the disk is cut where the segment crosses the circle. While the walk
// is at least 8 standard deviations of k steps from the boundary, k steps are
// drawn as one Gaussian increment of variance k * step; the probability that
// any of the skipped intermediate positions lies outside is below 1e-14.
inline Exit euler_walk(Point x0, double step, Engine& engine) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const double sd = std::sqrt(step);
  constexpr double guard = 8.0;
  Point p = x0;
  for (std::size_t it = 0; it < 100 * kWalkIterationCap; ++it) {
    const double gap = 1.0 - norm(p);
    const double ratio = gap / (guard * sd);
    const double k = std::floor(ratio * ratio);
    if (k >= 2.0) {
      const double scale = std::sqrt(k) * sd;
      const double dx = normal(engine);
      const double dy = normal(engine);
      p = p + scale * Point{dx, dy};
      continue;
    }
    const double dx = normal(engine);
    const double dy = normal(engine);
    const Point q = p + sd * Point{dx, dy};
    if (norm(q) < 1.0) {
      p = q;
      continue;
    }
    // Solve ||p + lambda (q - p)|| = 1 for lambda in (0, 1].
    const Point d = q - p;
    const double a = d.x * d.x + d.y * d.y;
    const double b = 2.0 * (p.x * d.x + p.y * d.y);
    const double c = p.x * p.x + p.y * p.y - 1.0;
    const double disc = std::sqrt(std::max(0.0, b * b - 4.0 * a * c));
    // c <= 0, so the positive root is (-b + disc) / 2a; use the stable form.
    const double lambda = (b >= 0.0) ? (2.0 * -c) / (b + disc) : (-b + disc) / (2.0 * a);
    const Point hit = p + lambda * d;
    return {polar_angle(hit), std::abs(1.0 - norm(hit)), false};
  }
  return {polar_angle(p), std::abs(1.0 - norm(p)), true};
}

}  // namespace detail

/// n independent exit angles of Brownian motion started at x0.
inline HittingDistribution sample_hitting(Point x0, std::size_t n, const SamplerOptions& options) {
  detail::require_interior(x0);
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "need at least one sample");
  if (options.method == Method::euler && !(options.step > 0.0 && options.step <= 1e-3)) {
    throw Error(ErrorCode::InvalidArgument, "Euler step must be in (0, 1e-3]");
  }
  HittingDistribution out;
  out.x0 = x0;
  out.options = options;
  out.angles.resize(n);
  std::vector<std::size_t> capped(options.workers, 0);
  std::vector<double> radius_error(options.workers, 0.0);
  parallel_streams(n, options.workers, options.seed,
                   [&](int w, Engine& engine, std::size_t lo, std::size_t hi) {
                     for (std::size_t i = lo; i < hi; ++i) {
                       const detail::Exit e = options.method == Method::wos
                                                  ? detail::walk_on_spheres(x0, engine)
                                                  : detail::euler_walk(x0, options.step, engine);
                       out.angles[i] = e.angle;
                       capped[w] += e.capped ? 1 : 0;
                       radius_error[w] = std::max(radius_error[w], e.radius_error);
                     }
                   });
  for (int w = 0; w < options.workers; ++w) {
    out.capped += capped[w];
    out.max_radius_error = std::max(out.max_radius_error, radius_error[w]);
  }
  return out;
}

struct AngularHistogram {
  std::vector<double> edges;          // bins + 1 angles
  std::vector<std::size_t> counts;
  std::vector<double> expected;       // n times the harmonic measure of the bin
  double chi_square = 0.0;
  int degrees_of_freedom = 0;

  std::size_t total() const {
    std::size_t s = 0;
    for (auto c : counts) s += c;
    return s;
  }
};

/// Equal-width angular bins with expected counts from the Poisson kernel.
inline AngularHistogram angular_histogram(const HittingDistribution& dist, int bins) {
  if (bins < 2) throw Error(ErrorCode::InvalidArgument, "need at least two bins");
  AngularHistogram h;
  h.edges.resize(bins + 1);
  for (int b = 0; b <= bins; ++b) h.edges[b] = kTwoPi * b / bins;
  h.counts.assign(bins, 0);
  for (double a : dist.angles) {
    int b = static_cast<int>(a / kTwoPi * bins);
    h.counts[std::clamp(b, 0, bins - 1)] += 1;
  }
  const auto n = static_cast<double>(dist.angles.size());
  h.expected.resize(bins);
  for (int b = 0; b < bins; ++b) {
    h.expected[b] = n * poisson_mass(h.edges[b], h.edges[b + 1], dist.x0);
    const double diff = static_cast<double>(h.counts[b]) - h.expected[b];
    h.chi_square += diff * diff / h.expected[b];
  }
  h.degrees_of_freedom = bins - 1;
  return h;
}

inline double chi_square_quantile(double probability, int degrees_of_freedom) {
  return boost::math::quantile(boost::math::chi_squared_distribution<double>(degrees_of_freedom),
                               probability);
}

/// Half the L1 distance between two normalized histograms.
inline double total_variation(const AngularHistogram& a, const AngularHistogram& b) {
  if (a.counts.size() != b.counts.size()) throw Error(ErrorCode::InvalidArgument, "bin mismatch");
  const double na = static_cast<double>(a.total());
  const double nb = static_cast<double>(b.total());
  double tv = 0.0;
  for (std::size_t i = 0; i < a.counts.size(); ++i) tv += std::abs(a.counts[i] / na - b.counts[i] / nb);
  return 0.5 * tv;
}

/// CSV `bin_start,bin_end,count,expected`.
inline void write_histogram_csv(std::ostream& os, const AngularHistogram& h) {
  const auto old = os.precision(12);
  os << "bin_start,bin_end,count,expected\n";
  for (std::size_t b = 0; b < h.counts.size(); ++b) {
    os << h.edges[b] << ',' << h.edges[b + 1] << ',' << h.counts[b] << ',' << h.expected[b] << '\n';
  }
  os.precision(old);
}

// ---------------------------------------------------------------------------
// Kriging from arc segments
// ---------------------------------------------------------------------------

namespace detail {

// -log|2 sin(u/2)|, the logarithmic covariance between two circle points at
// angular separation u.
inline double chord_log(double u) { return -std::log(std::abs(2.0 * std::sin(0.5 * u))); }

// Average of chord_log over two arcs of length h whose starts differ by k h.
inline double arc_pair_cov(int k, int n) {
  const double h = kTwoPi / n;
  auto f = [k, h](double d) { return (h - std::abs(d)) * chord_log(k * h + d); };
  const bool singular = (k % n == 0) || (k % n == 1) || (k % n == n - 1);
  double total = 0.0;
  if (singular) {
    total = quad::tanh_sinh(f, -h, 0.0, 1e-13, 1e-10 * h * h, "arc covariance").value +
            quad::tanh_sinh(f, 0.0, h, 1e-13, 1e-10 * h * h, "arc covariance").value;
  } else {
    total = quad::gauss_kronrod(f, -h, 0.0, 1e-13, 1e-10 * h * h, "arc covariance").value +
            quad::gauss_kronrod(f, 0.0, h, 1e-13, 1e-10 * h * h, "arc covariance").value;
  }
  return total / (h * h);
}

}  // namespace detail

/// Arc [theta_start, theta_end] of segment j out of n.
inline std::pair<double, double> segment_arc(int j, int n) {
  return {kTwoPi * j / n, kTwoPi * (j + 1) / n};
}

/// Ordinary kriging of the point x0 from n equal arc segments of the unit
/// circle under the logarithmic covariance, every segment averaged over its
/// arc length. The target has no self-covariance under the point convention;
/// the reported variance uses 0 there.
inline KrigingSolution discretized_circle_kriging(Point x0, int n_segments) {
  detail::require_interior(x0);
  if (n_segments < 8) throw Error(ErrorCode::InvalidArgument, "need at least 8 segments");
  const int n = n_segments;
  std::vector<double> circulant(n);
  for (int k = 0; k <= n / 2; ++k) {
    circulant[k] = detail::arc_pair_cov(k, n);
    circulant[(n - k) % n] = circulant[k];
  }
  Eigen::MatrixXd gram(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) gram(i, j) = circulant[((j - i) % n + n) % n];
  }
  const double h = kTwoPi / n;
  Eigen::VectorXd rhs(n);
  for (int j = 0; j < n; ++j) {
    const auto [a, b] = segment_arc(j, n);
    auto f = [&](double th) { return -0.5 * std::log(detail::circle_distance_sq(th, x0)); };
    rhs(j) = quad::gauss_kronrod(f, a, b, 1e-13, 1e-10 * h, "segment covariance").value / h;
  }
  return solve_bordered_system(gram, rhs, 0.0);
}

/// Harmonic measure of each of the n segments.
inline std::vector<double> segment_poisson_masses(Point x0, int n_segments) {
  std::vector<double> out(n_segments);
  for (int j = 0; j < n_segments; ++j) {
    const auto [a, b] = segment_arc(j, n_segments);
    out[j] = poisson_mass(a, b, x0);
  }
  return out;
}

/// max_j |w_j - harmonic measure of segment j|.
inline double segment_kriging_error(Point x0, int n_segments) {
  const KrigingSolution sol = discretized_circle_kriging(x0, n_segments);
  const std::vector<double> masses = segment_poisson_masses(x0, n_segments);
  double worst = 0.0;
  for (int j = 0; j < n_segments; ++j) worst = std::max(worst, std::abs(sol.weights[j] - masses[j]));
  return worst;
}

/// CSV `segment,theta_start,theta_end,weight,poisson_integral`.
inline void write_segment_weights_csv(std::ostream& os, const KrigingSolution& sol,
                                      const std::vector<double>& masses) {
  const auto old = os.precision(12);
  const int n = static_cast<int>(sol.weights.size());
  os << "segment,theta_start,theta_end,weight,poisson_integral\n";
  for (int j = 0; j < n; ++j) {
    const auto [a, b] = segment_arc(j, n);
    os << j << ',' << a << ',' << b << ',' << sol.weights[j] << ',' << masses[j] << '\n';
  }
  os.precision(old);
}

}  // namespace dewijs::continuum
