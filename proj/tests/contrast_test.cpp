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

#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "dewijs/contrast.hpp"

namespace dewijs {
namespace {

Atom pt(double x, double y, double w) { return {{x, y}, Support::point, w}; }
Atom cell(double x, double y, double w) { return {{x, y}, Support::cell, w}; }

TEST(Contrast, DipoleIsValid) {
  const Contrast c = make_contrast({pt(0, 0, 1), pt(1, 0, -1)});
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c.weight_at({0, 0}), 1.0);
  EXPECT_EQ(c.weight_at({1, 0}), -1.0);
  EXPECT_EQ(c.total_mass(), 0.0);
}

TEST(Contrast, CoincidentAtomsCancel) {
  const Contrast c = make_contrast({pt(0, 0, 1), pt(0, 0, -1)});
  EXPECT_TRUE(c.empty());
}

TEST(Contrast, RejectsNonzeroMass) {
  try {
    make_contrast({pt(0, 0, 1)});
    FAIL() << "expected NonzeroMass";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonzeroMass);
  }
  // Within the 1e-12 tolerance.
  EXPECT_NO_THROW(make_contrast({pt(0, 0, 1), pt(1, 0, -1 + 5e-13)}));
  EXPECT_THROW(make_contrast({pt(0, 0, 1), pt(1, 0, -1 + 5e-12)}), Error);
}

TEST(Contrast, RejectsMixedSupport) {
  try {
    make_contrast({pt(0, 0, 1), cell(1, 0, -1)});
    FAIL() << "expected MixedSupport";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MixedSupport);
  }
}

TEST(Contrast, LatticeNeedsIntegerLocations) {
  EXPECT_THROW(make_contrast({pt(0.5, 0, 1), pt(1, 0, -1)}, Space::lattice), Error);
  EXPECT_NO_THROW(make_contrast({pt(2, -3, 1), pt(1, 0, -1)}, Space::lattice));
}

TEST(Contrast, EmptyInputIsRejected) {
  EXPECT_THROW(make_contrast(std::span<const Atom>{}), Error);
}

TEST(LinearCombine, SelfDifferenceIsEmpty) {
  const Contrast s = make_contrast({pt(0, 0, 1), pt(1, 0, -1), pt(3, 2, 0)});
  EXPECT_TRUE(linear_combine(1.0, s, -1.0, s).empty());
}

TEST(LinearCombine, Scaling) {
  const Contrast s = make_contrast({pt(0, 0, 1), pt(1, 0, -1)});
  const Contrast other = make_contrast({pt(5, 5, 3), pt(6, 1, -3)});
  const Contrast r = linear_combine(2.0, s, 0.0, other);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r.weight_at({0, 0}), 2.0);
  EXPECT_EQ(r.weight_at({1, 0}), -2.0);
}

TEST(LinearCombine, Telescoping) {
  const Contrast s = make_contrast({pt(0, 0, 1), pt(1, 0, -1)});
  const Contrast n = make_contrast({pt(1, 0, 1), pt(2, 0, -1)});
  const Contrast r = linear_combine(1.0, s, 1.0, n);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r.weight_at({0, 0}), 1.0);
  EXPECT_EQ(r.weight_at({2, 0}), -1.0);
}

TEST(LinearCombine, RejectsMismatchedKinds) {
  const Contrast s = make_contrast({pt(0, 0, 1), pt(1, 0, -1)});
  const Contrast c = make_contrast({cell(0, 0, 1), cell(1, 0, -1)});
  EXPECT_THROW(linear_combine(1.0, s, 1.0, c), Error);
}

Contrast random_contrast(std::mt19937_64& rng, int atoms) {
  std::uniform_int_distribution<int> coord(-3, 3);
  std::uniform_real_distribution<double> weight(-2.0, 2.0);
  std::vector<Atom> list;
  double sum = 0.0;
  for (int i = 0; i + 1 < atoms; ++i) {
    list.push_back(pt(coord(rng), coord(rng), weight(rng)));
    sum += list.back().weight;
  }
  list.push_back(pt(coord(rng), coord(rng), -sum));
  return make_contrast(list, Space::lattice);
}

TEST(ContrastProperty, BilinearZeroMassAndIdempotent) {
  std::mt19937_64 rng(20261016);
  std::uniform_real_distribution<double> coef(-3.0, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    const Contrast s = random_contrast(rng, 2 + trial % 6);
    const Contrast n = random_contrast(rng, 2 + trial % 5);
    const double b = coef(rng);
    const double d = coef(rng);
    const Contrast r = linear_combine(b, s, d, n);
    EXPECT_LE(std::abs(r.total_mass()), kZeroMassTolerance);
    for (int x = -3; x <= 3; ++x) {
      for (int y = -3; y <= 3; ++y) {
        const Point p{double(x), double(y)};
        EXPECT_NEAR(r.weight_at(p), b * s.weight_at(p) + d * n.weight_at(p), 1e-14);
      }
    }
    if (r.empty()) continue;
    // Canonicalization is idempotent.
    const Contrast again = make_contrast(r.atoms(), Space::lattice);
    ASSERT_EQ(again.size(), r.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
      EXPECT_EQ(again.atoms()[i].location, r.atoms()[i].location);
      EXPECT_EQ(again.atoms()[i].weight, r.atoms()[i].weight);
    }
  }
}

TEST(Finiteness, CellAndPointSupport) {
  const Contrast cells = make_contrast({cell(0, 0, 1), cell(4, 1, -1)}, Space::lattice);
  const FinitenessReport rc = check_finiteness(cells);
  EXPECT_TRUE(rc);
  EXPECT_FALSE(rc.point_support);

  const Contrast points = make_contrast({pt(0, 0, 1), pt(0.5, 0, -1)});
  const FinitenessReport rp = check_finiteness(points);
  EXPECT_TRUE(rp);
  EXPECT_TRUE(rp.point_support);

  const Contrast merged = make_contrast({pt(0, 0, 1), pt(0, 0, 1), pt(2, 0, -2)});
  EXPECT_EQ(merged.size(), 2u);
  EXPECT_TRUE(check_finiteness(merged));
}

TEST(ContrastCsv, ReadWrite) {
  const Contrast c = make_contrast({cell(0, 0, 0.25), cell(1, -2, -0.75), cell(3, 3, 0.5)}, Space::lattice);
  std::stringstream ss;
  write_contrast_csv(ss, c);
  EXPECT_EQ(ss.str().substr(0, 34), "# support=cell space=lattice\n0,0,0");
  const Contrast back = read_contrast_csv(ss);
  EXPECT_EQ(back.support(), Support::cell);
  EXPECT_EQ(back.space(), Space::lattice);
  ASSERT_EQ(back.size(), c.size());
  for (std::size_t i = 0; i < c.size(); ++i) EXPECT_EQ(back.atoms()[i].weight, c.atoms()[i].weight);
}

TEST(ContrastCsv, MissingHeaderAndBadMass) {
  std::istringstream no_header("0,0,1\n1,0,-1\n");
  EXPECT_THROW(read_contrast_csv(no_header), Error);
  std::istringstream bad("# support=point space=continuum\n0,0,1\n1,0,-0.5\n");
  EXPECT_THROW(read_contrast_csv(bad), Error);
}

}  // namespace
}  // namespace dewijs
