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
#include <array>
#include <cmath>
#include <compare>
#include <cstdlib>
#include <functional>

namespace dewijs {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend auto operator<=>(const Point&, const Point&) = default;
};

inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator*(double k, Point a) { return {k * a.x, k * a.y}; }

inline double norm(Point p) { return std::hypot(p.x, p.y); }
inline double distance(Point a, Point b) { return norm(a - b); }

/// Integer lattice site or lag.
struct Lag {
  int s = 0;
  int t = 0;

  friend auto operator<=>(const Lag&, const Lag&) = default;
};

inline Lag operator-(Lag a, Lag b) { return {a.s - b.s, a.t - b.t}; }
inline Lag operator+(Lag a, Lag b) { return {a.s + b.s, a.t + b.t}; }

inline Point to_point(Lag l) { return {static_cast<double>(l.s), static_cast<double>(l.t)}; }

inline int chebyshev(Lag l) { return std::max(std::abs(l.s), std::abs(l.t)); }
inline int manhattan(Lag l) { return std::abs(l.s) + std::abs(l.t); }

/// Representative of the dihedral orbit of a lag: 0 <= minor <= major.
inline Lag dihedral_canonical(Lag l) {
  const int a = std::abs(l.s);
  const int b = std::abs(l.t);
  return a >= b ? Lag{a, b} : Lag{b, a};
}

/// The four nearest neighbours on Z^2.
inline std::array<Lag, 4> neighbours(Lag l) {
  return {Lag{l.s + 1, l.t}, Lag{l.s - 1, l.t}, Lag{l.s, l.t + 1}, Lag{l.s, l.t - 1}};
}

struct LagHash {
  std::size_t operator()(Lag l) const noexcept {
    return std::hash<long long>{}((static_cast<long long>(l.s) << 32) ^
                                  static_cast<unsigned int>(l.t));
  }
};

}  // namespace dewijs
