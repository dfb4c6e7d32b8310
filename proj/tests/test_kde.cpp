#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cdrm/data.hpp"
#include "cdrm/error.hpp"
#include "cdrm/kde.hpp"
#include "support.hpp"

namespace cdrm {
namespace {

KdeStats stats_from(Matrix refs, double h, double mu = 0.0, double sigma = 1.0) {
  KdeStats s;
  s.reference_points = std::move(refs);
  s.bandwidth = h;
  s.mu = mu;
  s.sigma = sigma;
  return s;
}

double direct_density(const Matrix& refs, double h, const Vector& q) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < refs.cols(); ++i) {
    double d2 = 0.0;
    for (Eigen::Index k = 0; k < refs.rows(); ++k) {
      d2 += (q(k) - refs(k, i)) * (q(k) - refs(k, i));
    }
    sum += std::exp(-d2 / (2.0 * h * h));
  }
  return sum / static_cast<double>(refs.cols());
}

TEST(Density, SingleReferenceAtQuery) {
  Matrix r(2, 1);
  r << 0.3, -0.7;
  EXPECT_EQ(density(stats_from(r, 0.5), r.col(0)), 1.0);
}

TEST(Density, DistanceHRootTwoGivesInverseE) {
  Matrix r = Matrix::Zero(1, 1);
  const double h = 0.4;
  EXPECT_NEAR(density(stats_from(r, h), Vector::Constant(1, h * std::sqrt(2.0))),
              std::exp(-1.0), 1e-15);
}

TEST(Density, MatchesDirectSum) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix r(3, 5);
    for (Eigen::Index i = 0; i < r.size(); ++i) r.data()[i] = uniform(rng, -1, 1);
    const Vector q = Vector::Random(3);
    const double h = uniform(rng, 0.1, 2.0);
    EXPECT_LE(test::rel_err(density(stats_from(r, h), q), direct_density(r, h, q), 1e-300),
              1e-12);
  }
}

TEST(Density, PermutationInvariantAndBoundedByOne) {
  Matrix r = Matrix::Random(2, 30);
  Matrix p = r;
  std::vector<int> perm(30);
  std::iota(perm.begin(), perm.end(), 0);
  std::reverse(perm.begin(), perm.end());
  for (int i = 0; i < 30; ++i) p.col(i) = r.col(perm[static_cast<std::size_t>(i)]);
  for (int k = 0; k < 20; ++k) {
    const Vector q = Vector::Random(2) * 2.0;
    const double a = density(stats_from(r, 0.3), q);
    EXPECT_NEAR(a, density(stats_from(p, 0.3), q), 1e-15);
    EXPECT_LE(a, 1.0);
    EXPECT_GE(a, 0.0);
  }
}

TEST(Density, DimensionMismatchThrows) {
  EXPECT_THROW(density(stats_from(Matrix::Zero(2, 3), 1.0), Vector::Zero(3)), InvalidInput);
}

TEST(Fit, IdenticalPointsAreDegenerate) {
  Matrix pts = Matrix::Constant(1, 2, 0.25);
  EXPECT_THROW(fit(pts, BandwidthRule::fixed(1.0)), DegenerateDataset);
}

TEST(Fit, SymmetricPairIsDegenerate) {
  Matrix pts(1, 2);
  pts << 0.0, 1.0;
  // Both self-densities equal (1 + e^-1/2) / 2, so the spread is zero.
  const double each = (1.0 + std::exp(-0.5)) / 2.0;
  EXPECT_NEAR(density(stats_from(pts, 1.0), pts.col(0)), each, 1e-15);
  EXPECT_THROW(fit(pts, BandwidthRule::fixed(1.0)), DegenerateDataset);
}

TEST(Fit, NeedsTwoPointsAndPositiveBandwidth) {
  EXPECT_THROW(fit(Matrix::Zero(1, 1), BandwidthRule::fixed(1.0)), InvalidInput);
  Matrix pts(1, 3);
  pts << 0, 1, 3;
  EXPECT_THROW(fit(pts, BandwidthRule::fixed(0.0)), InvalidInput);
}

TEST(Fit, StatisticsAreMeanAndSdOfSelfDensities) {
  Matrix pts(1, 4);
  pts << 0.0, 0.1, 0.5, 2.0;
  const auto s = fit(pts, BandwidthRule::fixed(0.3));
  std::vector<double> d;
  for (int i = 0; i < 4; ++i) d.push_back(direct_density(pts, 0.3, pts.col(i)));
  const double mu = std::accumulate(d.begin(), d.end(), 0.0) / 4.0;
  double var = 0.0;
  for (double v : d) var += (v - mu) * (v - mu);
  EXPECT_NEAR(s.mu, mu, 1e-15);
  EXPECT_NEAR(s.sigma, std::sqrt(var / 4.0), 1e-15);
  EXPECT_EQ(s.bandwidth, 0.3);
}

TEST(Fit, ToyDatasetGivesFinitePositiveStatistics) {
  const auto ds = gen_toy(kDefaultToyPerRegion, kDefaultSigmaEta, false, 0);
  const auto s = fit(ds.condition_matrix(), BandwidthRule::median(), 0);
  EXPECT_TRUE(std::isfinite(s.mu));
  EXPECT_GT(s.mu, 0.0);
  EXPECT_TRUE(std::isfinite(s.sigma));
  EXPECT_GT(s.sigma, 0.0);
  EXPECT_GT(s.bandwidth, 0.0);
}

TEST(Fit, LargeInputsAreSubsampled) {
  Rng rng(1);
  Matrix pts(2, 5000);
  for (Eigen::Index i = 0; i < pts.size(); ++i) pts.data()[i] = uniform(rng, 0, 1);
  const auto s = fit(pts, BandwidthRule::median(), 4);
  EXPECT_EQ(s.reference_points.cols(), kKdeMaxReferences);
  const auto again = fit(pts, BandwidthRule::median(), 4);
  EXPECT_EQ(s.reference_points, again.reference_points);
  EXPECT_EQ(s.bandwidth, again.bandwidth);
}

TEST(Bandwidth, MedianHeuristicOnSmallSet) {
  Matrix pts(1, 3);
  pts << 0.0, 1.0, 3.0;  // pairwise distances 1, 2, 3
  EXPECT_NEAR(median_heuristic_bandwidth(pts, 0), 2.0 / std::sqrt(2.0), 1e-15);
}

TEST(Bandwidth, ScottOnSmallSets) {
  Matrix one(1, 4);
  one << 0, 1, 2, 3;
  // Population sd sqrt(1.25), n = 4, d = 1.
  EXPECT_NEAR(scott_bandwidth(one), std::sqrt(1.25) * std::pow(4.0, -0.2), 1e-15);
  Matrix two(2, 2);
  two << 0, 2,
         5, 5;
  // Per-dim sds 1 and 0 average to 0.5; n = 2, d = 2.
  EXPECT_NEAR(scott_bandwidth(two), 0.5 * std::pow(2.0, -1.0 / 6.0), 1e-15);
}

TEST(Bandwidth, ScottRuleUsedByFit) {
  const auto ds = gen_room(600, RoomLayout{}, 4);
  const Matrix x = ds.condition_matrix();
  const KdeStats st = fit(x, BandwidthRule::scott(), 1);
  EXPECT_DOUBLE_EQ(st.bandwidth, scott_bandwidth(x));
  EXPECT_LT(st.bandwidth, fit(x, BandwidthRule::median(), 1).bandwidth);
  EXPECT_THROW(fit(Matrix::Ones(2, 5), BandwidthRule::scott(), 0), DegenerateDataset);
}

TEST(BaseEu, AtMeanIsOneHalf) {
  const auto s = stats_from(Matrix::Zero(1, 1), 1.0, 0.4, 0.1);
  EXPECT_EQ(base_eu_from_density(s, 0.4), 0.5);
}

TEST(BaseEu, OneSigmaAboveMean) {
  const auto s = stats_from(Matrix::Zero(1, 1), 1.0, 0.4, 0.1);
  EXPECT_NEAR(base_eu_from_density(s, 0.5), 1.0 / (1.0 + std::exp(1.0)), 1e-15);
  EXPECT_NEAR(1.0 / (1.0 + std::exp(1.0)), 0.2689, 1e-4);
}

TEST(BaseEu, FarQueryApproachesZeroDensityLimit) {
  const auto ds = gen_toy(100, 0.3, false, 5);
  const auto s = fit(ds.condition_matrix(), BandwidthRule::median(), 5);
  const double limit = 1.0 / (1.0 + std::exp(-s.mu / s.sigma));
  EXPECT_NEAR(base_eu(s, Vector::Constant(1, 1e3)), limit, 1e-15);
}

TEST(BaseEu, SortedMonotoneAgainstDensity) {
  const auto ds = gen_toy(100, 0.3, false, 6);
  const auto s = fit(ds.condition_matrix(), BandwidthRule::median(), 6);
  std::vector<std::pair<double, double>> pairs;
  for (int i = 0; i < 100; ++i) {
    const Vector q = Vector::Constant(1, -2.0 + 4.0 * i / 99.0);
    pairs.emplace_back(density(s, q), base_eu(s, q));
  }
  std::sort(pairs.begin(), pairs.end());
  for (std::size_t i = 1; i < pairs.size(); ++i) {
    EXPECT_LE(pairs[i].second, pairs[i - 1].second);
  }
}

}  // namespace
}  // namespace cdrm
