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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "dewijs/kriging.hpp"

namespace dewijs {
namespace {

double log_cov(Point p, Point q) { return gen_cov(LogKernel{}, p, q); }

std::vector<Point> random_sites(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::vector<Point> out;
  for (int i = 0; i < n; ++i) out.push_back({u(rng), u(rng)});
  return out;
}

TEST(OrdinaryKriging, SymmetricPairSplitsEvenly) {
  const std::vector<Point> sites{{-1, 0}, {1, 0}};
  const KrigingSolution sol = solve_ordinary_kriging(KrigingProblem{sites, {0, 0}, LogKernel{}});
  ASSERT_EQ(sol.weights.size(), 2u);
  EXPECT_NEAR(sol.weights[0], 0.5, 1e-14);
  EXPECT_NEAR(sol.weights[1], 0.5, 1e-14);
  EXPECT_LT(sol.relative_residual, 1e-14);
}

TEST(OrdinaryKriging, InterpolatesExactlyAtSites) {
  auto table = std::make_shared<const lattice::PotentialKernelTable>(8);
  const std::vector<Point> sites{{0, 0}, {3, 1}, {-2, 4}, {1, -3}, {5, 5}};
  for (std::size_t k = 0; k < sites.size(); ++k) {
    const KrigingSolution sol =
        solve_ordinary_kriging(KrigingProblem{sites, sites[k], LatticePotentialKernel{table}});
    for (std::size_t i = 0; i < sites.size(); ++i) {
      EXPECT_NEAR(sol.weights[i], i == k ? 1.0 : 0.0, 1e-12);
    }
    EXPECT_NEAR(sol.prediction_variance, 0.0, 1e-12);
  }
}

TEST(OrdinaryKriging, SingleSiteGetsAllWeight) {
  const std::vector<Point> sites{{2, 2}};
  const KrigingSolution sol = solve_ordinary_kriging(KrigingProblem{sites, {0, 0}, LogKernel{}});
  EXPECT_EQ(sol.weights.size(), 1u);
  EXPECT_NEAR(sol.weights[0], 1.0, 1e-15);
}

TEST(OrdinaryKriging, DuplicateSitesAreSingular) {
  const std::vector<Point> sites{{0, 1}, {2, 2}, {0, 1}};
  try {
    solve_ordinary_kriging(KrigingProblem{sites, {0, 0}, LogKernel{}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingularSystem);
  }
}

TEST(OrdinaryKriging, RejectsEmptyAndMismatchedInput) {
  const std::vector<Point> none;
  EXPECT_THROW(solve_ordinary_kriging(KrigingProblem{none, {0, 0}, LogKernel{}}), Error);
  EXPECT_THROW(solve_bordered_system(Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Zero(3), 0.0), Error);
}

TEST(OrdinaryKriging, ConstantGramIsSingular) {
  // Identical rows.
  Eigen::MatrixXd gram = Eigen::MatrixXd::Constant(3, 3, 2.0);
  try {
    solve_bordered_system(gram, Eigen::VectorXd::Constant(3, 2.0), 2.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingularSystem);
  }
}

TEST(KrigingProperty, TranslationAndPermutationInvariance) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 3 + trial % 8;
    const std::vector<Point> sites = random_sites(rng, n);
    const Point target{u(rng), u(rng)};
    const KrigingSolution base = solve_ordinary_kriging(std::span<const Point>(sites), target, log_cov);
    EXPECT_NEAR(base.weight_sum(), 1.0, 1e-10);

    const Point shift{u(rng), u(rng)};
    std::vector<Point> shifted;
    for (Point p : sites) shifted.push_back(p + shift);
    const KrigingSolution moved = solve_ordinary_kriging(std::span<const Point>(shifted), target + shift, log_cov);

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<Point> permuted;
    for (std::size_t i : perm) permuted.push_back(sites[i]);
    const KrigingSolution shuffled = solve_ordinary_kriging(std::span<const Point>(permuted), target, log_cov);

    for (int i = 0; i < n; ++i) {
      const double tol = 1e-8 * std::max(1.0, std::abs(base.weights[i]));
      EXPECT_NEAR(moved.weights[i], base.weights[i], tol);
      EXPECT_NEAR(shuffled.weights[i], base.weights[perm[i]], tol);
    }
  }
}

TEST(KrigingProperty, PointKernelIsNotDilationInvariant) {
  // gamma(0) = 0 stays put while log|x| shifts by log c off the diagonal.
  const std::vector<Point> sites{{0, 0}, {1, 0}, {0, 2}, {3, 1}};
  const Point target{0.4, 0.3};
  const KrigingSolution a = solve_ordinary_kriging(std::span<const Point>(sites), target, log_cov);
  std::vector<Point> scaled;
  for (Point p : sites) scaled.push_back(3.0 * p);
  const KrigingSolution b = solve_ordinary_kriging(std::span<const Point>(scaled), 3.0 * target, log_cov);
  double diff = 0.0;
  for (std::size_t i = 0; i < sites.size(); ++i) diff = std::max(diff, std::abs(a.weights[i] - b.weights[i]));
  EXPECT_GT(diff, 1e-3);
}

TEST(KrigingProperty, KernelShiftAndScaleLeaveWeights) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const std::vector<Point> sites = random_sites(rng, 6);
    const Point target{0.1 * trial, -0.05 * trial};
    const KrigingSolution a = solve_ordinary_kriging(std::span<const Point>(sites), target, log_cov);
    const KrigingSolution b = solve_ordinary_kriging(std::span<const Point>(sites), target,
                                                     [](Point p, Point q) { return log_cov(p, q) + 7.5; });
    const KrigingSolution c = solve_ordinary_kriging(std::span<const Point>(sites), target,
                                                     [](Point p, Point q) { return 0.3 * log_cov(p, q); });
    for (std::size_t i = 0; i < sites.size(); ++i) {
      EXPECT_NEAR(a.weights[i], b.weights[i], 1e-9 * std::max(1.0, std::abs(a.weights[i])));
      EXPECT_NEAR(a.weights[i], c.weights[i], 1e-9 * std::max(1.0, std::abs(a.weights[i])));
    }
  }
}

TEST(KrigingProperty, VarianceIsNotNegative) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> coord(-6, 6);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<Point> sites;
    while (sites.size() < 8) {
      const Point p{double(coord(rng)), double(coord(rng))};
      if (std::find(sites.begin(), sites.end(), p) == sites.end() && !(p == Point{0, 0})) sites.push_back(p);
    }
    const KrigingSolution sol = solve_ordinary_kriging(KrigingProblem{sites, {0, 0}, CellLogKernel{}});
    EXPECT_GE(sol.raw_variance, kVarianceFloor);
    EXPECT_FALSE(sol.variance_clamped);
    EXPECT_NEAR(sol.weight_sum(), 1.0, 1e-10);
  }
}

class CentreCellGrid : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { result_ = new Table1Result(reproduce_table1()); }
  static void TearDownTestSuite() { delete result_; }
  static Table1Result* result_;
};
Table1Result* CentreCellGrid::result_ = nullptr;

TEST_F(CentreCellGrid, MatchesReferenceWeights) {
  const Table1Result& r = *result_;
  EXPECT_EQ(r.sites.size(), 288u);
  EXPECT_EQ(r.entries.size(), 44u);
  for (const Table1Entry& e : r.entries) {
    EXPECT_LE(std::abs(e.weight - e.reference), 0.001 + 1e-12) << "(" << e.s << "," << e.t << ")";
  }
  EXPECT_LE(r.max_abs_error, 0.001);
}

TEST_F(CentreCellGrid, FoldedWeightsAgreeWithinOrbits) {
  EXPECT_LT(result_->max_orbit_spread, 1e-8);
}

TEST_F(CentreCellGrid, WeightsSumToOne) {
  EXPECT_NEAR(result_->solution.weight_sum(), 1.0, 1e-10);
  EXPECT_LT(result_->solution.relative_residual, 1e-12);
}

TEST_F(CentreCellGrid, NearestNeighboursDominate) {
  const Table1Result& r = *result_;
  EXPECT_NEAR(r.entries.front().weight, 0.342, 0.001);
  // Sum |w| outside the 5 x 5 block; the reference entries alone give 0.12.
  EXPECT_NEAR(screening_report(r.sites, {0, 0}, r.solution, 2), 0.12, 0.005);
  EXPECT_LT(screening_report(r.sites, {0, 0}, r.solution, 4), 0.01);
  EXPECT_GE(screening_report(r.sites, {0, 0}, r.solution, 0), 1.0);
  EXPECT_EQ(screening_report(r.sites, {0, 0}, r.solution, 8), 0.0);
  EXPECT_EQ(screening_report(r.sites, {0, 0}, r.solution, 16), 0.0);
}

TEST_F(CentreCellGrid, CsvAndReportLayout) {
  std::ostringstream csv;
  write_table1_csv(csv, *result_);
  std::istringstream in(csv.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "s,t,weight,weight_3dp,reference");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 44u);

  std::ostringstream report;
  write_table1_report(report, *result_);
  EXPECT_NE(report.str().find("0.342"), std::string::npos);
  EXPECT_NE(report.str().find("-0.075"), std::string::npos);
  EXPECT_NE(report.str().find("max_abs_error"), std::string::npos);

  std::ostringstream weights;
  write_weights_csv(weights, result_->sites, result_->solution);
  EXPECT_EQ(weights.str().substr(0, 11), "s,t,weight\n");
}

TEST(CentreCellGridSmall, FoldingWorksOffTheReferenceSize) {
  const Table1Result r = reproduce_table1(3);
  EXPECT_TRUE(std::isnan(r.max_abs_error));
  EXPECT_LT(r.max_orbit_spread, 1e-10);
  EXPECT_NEAR(r.solution.weight_sum(), 1.0, 1e-12);
  EXPECT_THROW(reproduce_table1(0), Error);
}

TEST(Screening, RejectsLengthMismatch) {
  KrigingSolution sol;
  sol.weights = {1.0};
  const std::vector<Lag> sites{{1, 0}, {2, 0}};
  EXPECT_THROW(screening_report(sites, {0, 0}, sol, 1), Error);
}

}  // namespace
}  // namespace dewijs
