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

// Simple random walk on Z^2 and the intrinsic autoregression: hitting
// distributions of finite domains, kriging under the potential kernel, and
// the occupation-time representation of the kernel.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "dewijs/contrast.hpp"
#include "dewijs/error.hpp"
#include "dewijs/geometry.hpp"
#include "dewijs/kernels.hpp"
#include "dewijs/kriging.hpp"
#include "dewijs/potential_kernel.hpp"
#include "dewijs/rng.hpp"

namespace dewijs::lattice {

/// Finite interior set enclosed by a boundary set D: every nearest neighbour
/// of an interior site is interior or in D, so each walk from the interior
/// hits D before leaving.
class LatticeDomain {
 public:
  LatticeDomain(std::vector<Lag> interior, std::vector<Lag> boundary)
      : interior_(std::move(interior)), boundary_(std::move(boundary)) {
    if (interior_.empty()) throw Error(ErrorCode::InvalidArgument, "domain has no interior sites");
    for (std::size_t i = 0; i < interior_.size(); ++i) {
      if (!interior_index_.emplace(interior_[i], static_cast<int>(i)).second) {
        throw Error(ErrorCode::InvalidArgument, "duplicate interior site");
      }
    }
    for (std::size_t i = 0; i < boundary_.size(); ++i) {
      if (interior_index_.contains(boundary_[i])) {
        throw Error(ErrorCode::InvalidArgument, "site is both interior and boundary");
      }
      if (!boundary_index_.emplace(boundary_[i], static_cast<int>(i)).second) {
        throw Error(ErrorCode::InvalidArgument, "duplicate boundary site");
      }
    }
    for (Lag x : interior_) {
      for (Lag nb : neighbours(x)) {
        if (!interior_index_.contains(nb) && !boundary_index_.contains(nb)) {
          std::ostringstream msg;
          msg << "interior site (" << x.s << "," << x.t << ") has neighbour (" << nb.s << "," << nb.t
              << ") outside the domain";
          throw Error(ErrorCode::InvalidArgument, msg.str());
        }
      }
    }
  }

  /// Interior set with its nearest-neighbour boundary.
  static LatticeDomain from_interior(std::vector<Lag> interior) {
    std::unordered_set<Lag, LagHash> inside(interior.begin(), interior.end());
    std::set<Lag> rim;
    for (Lag x : interior) {
      for (Lag nb : neighbours(x)) {
        if (!inside.contains(nb)) rim.insert(nb);
      }
    }
    return LatticeDomain(std::move(interior), std::vector<Lag>(rim.begin(), rim.end()));
  }

  /// n x n interior block starting at -(n/2) in each axis (centred for odd n),
  /// with the full square ring as boundary (corners included) or only the
  /// sites adjacent to the block.
  static LatticeDomain box(int n, bool with_corners = true) {
    if (n < 1) throw Error(ErrorCode::InvalidArgument, "box size must be >= 1");
    const int lo = -(n / 2);
    const int hi = lo + n - 1;
    std::vector<Lag> interior;
    std::vector<Lag> boundary;
    for (int s = lo - 1; s <= hi + 1; ++s) {
      for (int t = lo - 1; t <= hi + 1; ++t) {
        const bool in_s = s >= lo && s <= hi;
        const bool in_t = t >= lo && t <= hi;
        if (in_s && in_t) {
          interior.push_back({s, t});
        } else if (with_corners || in_s || in_t) {
          boundary.push_back({s, t});
        }
      }
    }
    return LatticeDomain(std::move(interior), std::move(boundary));
  }

  const std::vector<Lag>& interior() const noexcept { return interior_; }
  const std::vector<Lag>& boundary() const noexcept { return boundary_; }

  bool is_interior(Lag x) const { return interior_index_.contains(x); }
  bool is_boundary(Lag x) const { return boundary_index_.contains(x); }

  /// -1 when x is not interior.
  int interior_index(Lag x) const {
    auto it = interior_index_.find(x);
    return it == interior_index_.end() ? -1 : it->second;
  }
  int boundary_index(Lag x) const {
    auto it = boundary_index_.find(x);
    return it == boundary_index_.end() ? -1 : it->second;
  }

  /// Largest Chebyshev lag between any two sites of the domain.
  int diameter() const {
    int lo_s = interior_[0].s, hi_s = lo_s, lo_t = interior_[0].t, hi_t = lo_t;
    for (const auto* set : {&interior_, &boundary_}) {
      for (Lag x : *set) {
        lo_s = std::min(lo_s, x.s);
        hi_s = std::max(hi_s, x.s);
        lo_t = std::min(lo_t, x.t);
        hi_t = std::max(hi_t, x.t);
      }
    }
    return std::max(hi_s - lo_s, hi_t - lo_t);
  }

 private:
  std::vector<Lag> interior_;
  std::vector<Lag> boundary_;
  std::unordered_map<Lag, int, LagHash> interior_index_;
  std::unordered_map<Lag, int, LagHash> boundary_index_;
};

/// Grows a random 4-connected polyomino of `cells` sites from the origin,
/// fills its holes and returns it with its nearest-neighbour boundary.
inline LatticeDomain random_simply_connected_domain(std::size_t cells, std::uint64_t seed) {
  if (cells < 1) throw Error(ErrorCode::InvalidArgument, "need at least one cell");
  Engine engine = make_stream(seed, 0);
  std::vector<Lag> grown{{0, 0}};
  std::unordered_set<Lag, LagHash> inside{{0, 0}};
  while (grown.size() < cells) {
    std::uniform_int_distribution<std::size_t> pick(0, grown.size() - 1);
    std::uniform_int_distribution<int> dir(0, 3);
    const Lag nb = neighbours(grown[pick(engine)])[dir(engine)];
    if (inside.insert(nb).second) grown.push_back(nb);
  }
  int lo_s = 0, hi_s = 0, lo_t = 0, hi_t = 0;
  for (Lag x : grown) {
    lo_s = std::min(lo_s, x.s);
    hi_s = std::max(hi_s, x.s);
    lo_t = std::min(lo_t, x.t);
    hi_t = std::max(hi_t, x.t);
  }
  --lo_s, --lo_t, ++hi_s, ++hi_t;
  // Flood the complement from a corner of the padded bounding box.
  std::unordered_set<Lag, LagHash> outside;
  std::vector<Lag> stack{{lo_s, lo_t}};
  outside.insert(stack.back());
  while (!stack.empty()) {
    const Lag x = stack.back();
    stack.pop_back();
    for (Lag nb : neighbours(x)) {
      if (nb.s < lo_s || nb.s > hi_s || nb.t < lo_t || nb.t > hi_t) continue;
      if (inside.contains(nb) || outside.contains(nb)) continue;
      outside.insert(nb);
      stack.push_back(nb);
    }
  }
  std::vector<Lag> interior;
  for (int s = lo_s; s <= hi_s; ++s) {
    for (int t = lo_t; t <= hi_t; ++t) {
      if (!outside.contains({s, t})) interior.push_back({s, t});
    }
  }
  return LatticeDomain::from_interior(std::move(interior));
}

// Domain CSV: rows `s,t,role` with role interior|boundary; an optional header
// line `s,t,role` and `#` comments are skipped.

inline LatticeDomain read_domain_csv(std::istream& is) {
  std::vector<Lag> interior;
  std::vector<Lag> boundary;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("s,t,role", 0) == 0) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    Lag x;
    std::string role;
    if (!(ls >> x.s >> x.t >> role)) throw Error(ErrorCode::InvalidArgument, "malformed domain line: " + line);
    if (role == "interior") interior.push_back(x);
    else if (role == "boundary") boundary.push_back(x);
    else throw Error(ErrorCode::InvalidArgument, "unknown domain role: " + role);
  }
  return LatticeDomain(std::move(interior), std::move(boundary));
}

inline void write_domain_csv(std::ostream& os, const LatticeDomain& dom) {
  os << "s,t,role\n";
  for (Lag x : dom.interior()) os << x.s << ',' << x.t << ",interior\n";
  for (Lag x : dom.boundary()) os << x.s << ',' << x.t << ",boundary\n";
}

// ---------------------------------------------------------------------------
// Hitting distributions
// ---------------------------------------------------------------------------

/// Factorizes the interior generator 4I - A once; each hitting distribution
/// is then H(x, .) = B' (4I - A)^-1 e_x, with B the interior-to-boundary
/// adjacency counts.
class HittingSolver {
 public:
  explicit HittingSolver(const LatticeDomain& dom) : dom_(&dom) {
    const auto ni = static_cast<Eigen::Index>(dom.interior().size());
    const auto nb = static_cast<Eigen::Index>(dom.boundary().size());
    std::vector<Eigen::Triplet<double>> gen;
    std::vector<Eigen::Triplet<double>> exits;
    for (Eigen::Index i = 0; i < ni; ++i) {
      gen.emplace_back(i, i, 4.0);
      for (Lag nb_site : neighbours(dom.interior()[i])) {
        if (const int j = dom.interior_index(nb_site); j >= 0) {
          gen.emplace_back(i, j, -1.0);
        } else {
          exits.emplace_back(i, dom.boundary_index(nb_site), 1.0);
        }
      }
    }
    Eigen::SparseMatrix<double> generator(ni, ni);
    generator.setFromTriplets(gen.begin(), gen.end());
    exits_.resize(ni, nb);
    exits_.setFromTriplets(exits.begin(), exits.end());
    factor_.compute(generator);
    if (factor_.info() != Eigen::Success) {
      throw Error(ErrorCode::SingularSystem, "interior generator factorization failed");
    }
  }

  /// P_x(first boundary site hit = y) for every y, in boundary order.
  std::vector<double> distribution(Lag x) const {
    const int i = dom_->interior_index(x);
    if (i < 0) {
      std::ostringstream msg;
      msg << "(" << x.s << "," << x.t << ") is not an interior site";
      throw Error(ErrorCode::NotInterior, msg.str());
    }
    Eigen::VectorXd unit = Eigen::VectorXd::Zero(exits_.rows());
    unit(i) = 1.0;
    const Eigen::VectorXd green = factor_.solve(unit);
    const Eigen::VectorXd h = exits_.transpose() * green;
    return {h.data(), h.data() + h.size()};
  }

 private:
  const LatticeDomain* dom_;
  Eigen::SparseMatrix<double> exits_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> factor_;
};

inline std::vector<double> hitting_probabilities(const LatticeDomain& dom, Lag x) {
  return HittingSolver(dom).distribution(x);
}

// ---------------------------------------------------------------------------
// Kriging under the potential kernel
// ---------------------------------------------------------------------------

/// Ordinary kriging of x from the boundary sites with covariance -a.
inline KrigingSolution boundary_kriging(const LatticeDomain& dom, Lag x, const PotentialKernelTable& table) {
  if (!dom.is_interior(x)) throw Error(ErrorCode::NotInterior, "kriging target is not interior");
  if (dom.diameter() > table.max_lag()) {
    throw Error(ErrorCode::InvalidArgument, "potential table does not cover the domain");
  }
  std::vector<Point> sites;
  sites.reserve(dom.boundary().size());
  for (Lag y : dom.boundary()) sites.push_back(to_point(y));
  auto cov = [&table](Point p, Point q) {
    return -table({static_cast<int>(p.x - q.x), static_cast<int>(p.y - q.y)});
  };
  return solve_ordinary_kriging(std::span<const Point>(sites), to_point(x), cov);
}

struct DynkinResult {
  std::vector<double> weights;
  std::vector<double> hitting;
  double max_deviation = 0.0;
};

/// Compares kriging weights with the hitting distribution of x.
inline DynkinResult dynkin_crosscheck(const LatticeDomain& dom, Lag x, const PotentialKernelTable& table,
                                      const HittingSolver* solver = nullptr) {
  DynkinResult r;
  r.weights = boundary_kriging(dom, x, table).weights;
  r.hitting = solver ? solver->distribution(x) : hitting_probabilities(dom, x);
  for (std::size_t i = 0; i < r.weights.size(); ++i) {
    r.max_deviation = std::max(r.max_deviation, std::abs(r.weights[i] - r.hitting[i]));
  }
  return r;
}

/// Kriged values at every interior site from data on the boundary.
inline std::vector<double> kriged_surface(const LatticeDomain& dom, std::span<const double> boundary_data,
                                          const PotentialKernelTable& table) {
  if (boundary_data.size() != dom.boundary().size()) {
    throw Error(ErrorCode::InvalidArgument, "boundary data has the wrong length");
  }
  std::vector<double> values(dom.interior().size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const KrigingSolution sol = boundary_kriging(dom, dom.interior()[i], table);
    double v = 0.0;
    for (std::size_t j = 0; j < boundary_data.size(); ++j) v += sol.weights[j] * boundary_data[j];
    values[i] = v;
  }
  return values;
}

/// max over interior sites of |mean of the four neighbours - value|, with
/// boundary data standing in for boundary neighbours.
inline double discrete_laplacian_of_kriged_surface(const LatticeDomain& dom,
                                                   std::span<const double> boundary_data,
                                                   const PotentialKernelTable& table) {
  const std::vector<double> values = kriged_surface(dom, boundary_data, table);
  double worst = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    double mean = 0.0;
    for (Lag nb : neighbours(dom.interior()[i])) {
      const int k = dom.interior_index(nb);
      mean += k >= 0 ? values[k] : boundary_data[dom.boundary_index(nb)];
    }
    worst = std::max(worst, std::abs(0.25 * mean - values[i]));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Occupation times
// ---------------------------------------------------------------------------

/// With one walk step per unit of time, sum_x sigma(x) E_x sum_{t<T} nu(S_t)
/// tends to <sigma, nu> under -a with unit proportionality constant.
inline constexpr double kOccupationProportionality = 1.0;

struct OccupationOptions {
  std::uint64_t horizon = 100000;
  std::size_t walks = 1000000;
  std::uint64_t seed = 0;
  int workers = 1;
};

struct OccupationResult {
  double estimate = 0.0;
  double standard_error = 0.0;
  double kernel_value = 0.0;
  /// estimate / kernel_value; NaN when the kernel value is zero.
  double calibrated_constant = 0.0;
  double relative_error = 0.0;
};

namespace detail {

// Fair coin flips drawn 64 at a time.
class CoinFlips {
 public:
  explicit CoinFlips(Engine& engine) : engine_(&engine) {}

  /// Number of heads in k flips, i.e. a Binomial(k, 1/2) draw.
  std::uint64_t heads(std::uint64_t k) {
    std::uint64_t count = 0;
    while (k >= left_) {
      count += std::popcount(word_);
      k -= left_;
      word_ = (*engine_)();
      left_ = 64;
    }
    if (k > 0) {
      const std::uint64_t mask = (std::uint64_t{1} << k) - 1;
      count += std::popcount(word_ & mask);
      word_ >>= k;
      left_ -= k;
    }
    return count;
  }

 private:
  Engine* engine_;
  std::uint64_t word_ = 0;
  std::uint64_t left_ = 0;
};

// Occupation functional sum_{t<T} nu(S_t) of one walk from `start`. While
// the walk is at l1 distance d > 0 from supp(nu) it cannot meet the support
// during the next d - 1 steps, so those d steps are drawn at once: in the
// rotated coordinates u = s + t, v = s - t the walk is a pair of independent
// +-1 walks, and k steps move each by 2 Binomial(k, 1/2) - k.
inline double occupation_walk(Lag start, std::span<const Atom> nu, std::uint64_t horizon, CoinFlips& coins) {
  long long s = start.s;
  long long t = start.t;
  double total = 0.0;
  std::uint64_t time = 0;
  while (time < horizon) {
    long long d = std::numeric_limits<long long>::max();
    double here = 0.0;
    for (const Atom& a : nu) {
      const long long ds = std::llabs(s - static_cast<long long>(a.location.x));
      const long long dt = std::llabs(t - static_cast<long long>(a.location.y));
      if (ds + dt == 0) here = a.weight;
      d = std::min(d, ds + dt);
    }
    std::uint64_t k = 1;
    if (d == 0) {
      total += here;
    } else {
      k = static_cast<std::uint64_t>(d);
    }
    k = std::min<std::uint64_t>(k, horizon - time);
    const long long du = 2 * static_cast<long long>(coins.heads(k)) - static_cast<long long>(k);
    const long long dv = 2 * static_cast<long long>(coins.heads(k)) - static_cast<long long>(k);
    s += (du + dv) / 2;
    t += (du - dv) / 2;
    time += k;
  }
  return total;
}

}  // namespace detail

/// Monte Carlo estimate of sum_x sigma(x) E_x[sum_{t<T} nu(S_t)] against the
/// potential-kernel inner product. Walks are allotted to the atoms of sigma in
/// proportion to |weight|.
inline OccupationResult occupation_identity_check(const Contrast& sigma, const Contrast& nu,
                                                  const OccupationOptions& options,
                                                  const PotentialKernelTable& table) {
  if (sigma.space() != Space::lattice || nu.space() != Space::lattice ||
      sigma.support() != Support::point || nu.support() != Support::point) {
    throw Error(ErrorCode::IncompatibleKernel, "occupation check needs point lattice contrasts");
  }
  if (options.horizon < 1 || options.walks < 1) {
    throw Error(ErrorCode::InvalidArgument, "horizon and walk count must be positive");
  }
  OccupationResult r;
  r.kernel_value = bilinear_form(sigma, nu, [&table](Point p, Point q) {
    return -table({static_cast<int>(p.x - q.x), static_cast<int>(p.y - q.y)});
  });
  if (nu.empty() || sigma.empty()) {
    r.calibrated_constant = std::numeric_limits<double>::quiet_NaN();
    return r;
  }

  const auto atoms = sigma.atoms();
  double mass = 0.0;
  for (const Atom& a : atoms) mass += std::abs(a.weight);
  std::vector<std::size_t> first(atoms.size() + 1, 0);
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const auto share = static_cast<std::size_t>(std::llround(options.walks * std::abs(atoms[i].weight) / mass));
    first[i + 1] = first[i] + std::max<std::size_t>(share, 1);
  }
  const std::size_t total_walks = first.back();
  std::vector<double> results(total_walks);
  const auto nu_atoms = nu.atoms();
  parallel_streams(total_walks, options.workers, options.seed,
                   [&](int, Engine& engine, std::size_t lo, std::size_t hi) {
                     detail::CoinFlips coins(engine);
                     std::size_t atom = std::upper_bound(first.begin(), first.end(), lo) - first.begin() - 1;
                     for (std::size_t k = lo; k < hi; ++k) {
                       while (k >= first[atom + 1]) ++atom;
                       const Point p = atoms[atom].location;
                       results[k] = detail::occupation_walk({static_cast<int>(p.x), static_cast<int>(p.y)},
                                                            nu_atoms, options.horizon, coins);
                     }
                   });
  double variance = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const auto n = static_cast<double>(first[i + 1] - first[i]);
    double mean = 0.0;
    for (std::size_t k = first[i]; k < first[i + 1]; ++k) mean += results[k];
    mean /= n;
    double ss = 0.0;
    for (std::size_t k = first[i]; k < first[i + 1]; ++k) ss += (results[k] - mean) * (results[k] - mean);
    const double var = n > 1 ? ss / (n - 1) : 0.0;
    r.estimate += atoms[i].weight * mean;
    variance += atoms[i].weight * atoms[i].weight * var / n;
  }
  r.standard_error = std::sqrt(variance);
  r.calibrated_constant = r.kernel_value != 0.0 ? r.estimate / r.kernel_value
                                                 : std::numeric_limits<double>::quiet_NaN();
  const double expected = kOccupationProportionality * r.kernel_value;
  r.relative_error = expected != 0.0 ? std::abs(r.estimate - expected) / std::abs(expected)
                                     : std::abs(r.estimate);
  return r;
}

}  // namespace dewijs::lattice
