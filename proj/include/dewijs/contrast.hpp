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

// Finitely supported signed measures with zero total mass.

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <istream>
#include <limits>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "dewijs/error.hpp"
#include "dewijs/geometry.hpp"

namespace dewijs {

enum class Support { point, cell };
enum class Space { continuum, lattice };

inline constexpr double kZeroMassTolerance = 1e-12;

/// A weighted point mass, or a weighted unit square centred at `location`.
struct Atom {
  Point location;
  Support support = Support::point;
  double weight = 0.0;
};

/// Result of the finiteness condition. Point-supported contrasts are finite
/// for cross terms but carry infinite logarithmic self-variance; callers must
/// only use them where the zero-lag convention applies.
struct FinitenessReport {
  bool finite = true;
  bool point_support = false;

  explicit operator bool() const noexcept { return finite; }
};

class Contrast {
 public:
  Contrast(Support support, Space space) : support_(support), space_(space) {}

  std::span<const Atom> atoms() const noexcept { return atoms_; }
  std::size_t size() const noexcept { return atoms_.size(); }
  bool empty() const noexcept { return atoms_.empty(); }
  Support support() const noexcept { return support_; }
  Space space() const noexcept { return space_; }

  double total_mass() const {
    double sum = 0.0;
    for (const Atom& a : atoms_) sum += a.weight;
    return sum;
  }

  /// Weight at `p`, zero if `p` is not in the support.
  double weight_at(Point p) const {
    auto it = std::lower_bound(atoms_.begin(), atoms_.end(), p,
                               [](const Atom& a, Point q) { return a.location < q; });
    return (it != atoms_.end() && it->location == p) ? it->weight : 0.0;
  }

 private:
  friend Contrast canonicalize(std::vector<Atom> atoms, Support support, Space space);

  Support support_;
  Space space_;
  std::vector<Atom> atoms_;  // sorted by location, distinct, nonzero weights
};

namespace detail {

inline bool is_integral(double v) { return std::isfinite(v) && v == std::nearbyint(v); }

}  // namespace detail

/// Sorts, merges coincident atoms and drops the ones that cancel. Weights
/// whose magnitude is at rounding level relative to the merged contributions
/// count as cancelled.
inline Contrast canonicalize(std::vector<Atom> atoms, Support support, Space space) {
  for (const Atom& a : atoms) {
    if (a.support != support) {
      throw Error(ErrorCode::MixedSupport, "point and cell atoms cannot be mixed");
    }
    if (!std::isfinite(a.weight) || !std::isfinite(a.location.x) ||
        !std::isfinite(a.location.y)) {
      throw Error(ErrorCode::InvalidArgument, "non-finite atom");
    }
    if (space == Space::lattice &&
        !(detail::is_integral(a.location.x) && detail::is_integral(a.location.y))) {
      throw Error(ErrorCode::InvalidArgument, "lattice atoms need integer coordinates");
    }
  }
  std::stable_sort(atoms.begin(), atoms.end(),
                   [](const Atom& a, const Atom& b) { return a.location < b.location; });

  Contrast out(support, space);
  for (std::size_t i = 0; i < atoms.size();) {
    std::size_t j = i;
    double sum = 0.0;
    double magnitude = 0.0;
    while (j < atoms.size() && atoms[j].location == atoms[i].location) {
      sum += atoms[j].weight;
      magnitude += std::abs(atoms[j].weight);
      ++j;
    }
    if (std::abs(sum) > 4.0 * std::numeric_limits<double>::epsilon() * magnitude) {
      out.atoms_.push_back({atoms[i].location, support, sum});
    }
    i = j;
  }
  return out;
}

/// Builds a canonical contrast; rejects nonzero total mass.
inline Contrast make_contrast(std::span<const Atom> atoms, Space space = Space::continuum) {
  if (atoms.empty()) throw Error(ErrorCode::InvalidArgument, "contrast needs at least one atom");
  const Support support = atoms.front().support;
  double mass = 0.0;
  for (const Atom& a : atoms) mass += a.weight;
  if (!(std::abs(mass) <= kZeroMassTolerance)) {
    std::ostringstream msg;
    msg << "total mass " << mass << " exceeds " << kZeroMassTolerance;
    throw Error(ErrorCode::NonzeroMass, msg.str());
  }
  return canonicalize(std::vector<Atom>(atoms.begin(), atoms.end()), support, space);
}

inline Contrast make_contrast(std::initializer_list<Atom> atoms,
                              Space space = Space::continuum) {
  return make_contrast(std::span<const Atom>(atoms.begin(), atoms.size()), space);
}

/// b*sigma + d*nu.
inline Contrast linear_combine(double b, const Contrast& sigma, double d, const Contrast& nu) {
  if (sigma.support() != nu.support() || sigma.space() != nu.space()) {
    throw Error(ErrorCode::MixedSupport, "contrasts differ in support kind or space");
  }
  std::vector<Atom> atoms;
  atoms.reserve(sigma.size() + nu.size());
  for (const Atom& a : sigma.atoms()) atoms.push_back({a.location, a.support, b * a.weight});
  for (const Atom& a : nu.atoms()) atoms.push_back({a.location, a.support, d * a.weight});
  return canonicalize(std::move(atoms), sigma.support(), sigma.space());
}

/// Double-integral finiteness of |log r| against |sigma| x |sigma|. Cell
/// averaging bounds the kernel; distinct point atoms keep all cross terms
/// finite.
inline FinitenessReport check_finiteness(const Contrast& sigma) {
  return {true, sigma.support() == Support::point && !sigma.empty()};
}

// CSV: header "# support=point|cell space=continuum|lattice", then x,y,weight.

inline void write_contrast_csv(std::ostream& os, const Contrast& c) {
  os << "# support=" << (c.support() == Support::point ? "point" : "cell")
     << " space=" << (c.space() == Space::continuum ? "continuum" : "lattice") << '\n';
  const auto old_precision = os.precision(17);
  for (const Atom& a : c.atoms()) {
    os << a.location.x << ',' << a.location.y << ',' << a.weight << '\n';
  }
  os.precision(old_precision);
}

inline Contrast read_contrast_csv(std::istream& is) {
  std::string line;
  Support support = Support::point;
  Space space = Space::continuum;
  bool have_header = false;
  std::vector<Atom> atoms;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream hs(line.substr(1));
      std::string field;
      while (hs >> field) {
        if (field == "support=point") support = Support::point;
        else if (field == "support=cell") support = Support::cell;
        else if (field == "space=continuum") space = Space::continuum;
        else if (field == "space=lattice") space = Space::lattice;
        else throw Error(ErrorCode::InvalidArgument, "unknown contrast header field: " + field);
      }
      have_header = true;
      continue;
    }
    if (!have_header) throw Error(ErrorCode::InvalidArgument, "contrast CSV is missing its header");
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    Atom a;
    a.support = support;
    if (!(ls >> a.location.x >> a.location.y >> a.weight)) {
      throw Error(ErrorCode::InvalidArgument, "malformed contrast line: " + line);
    }
    atoms.push_back(a);
  }
  if (!have_header) throw Error(ErrorCode::InvalidArgument, "contrast CSV is missing its header");
  if (atoms.empty()) return Contrast(support, space);
  return make_contrast(atoms, space);
}

}  // namespace dewijs
