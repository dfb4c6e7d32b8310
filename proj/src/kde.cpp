#include "cdrm/kde.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "cdrm/error.hpp"
#include "cdrm/random.hpp"

namespace cdrm {

namespace {

// Seeded partial Fisher-Yates; returns k distinct column indices in draw order.
std::vector<Eigen::Index> sample_columns(Eigen::Index n, Eigen::Index k,
                                         std::uint64_t seed) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  if (k >= n) return idx;
  Rng rng(seed);
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto span = static_cast<std::uint64_t>(n - i);
    const auto j = i + static_cast<Eigen::Index>(rng() % span);
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  idx.resize(static_cast<std::size_t>(k));
  std::sort(idx.begin(), idx.end());
  return idx;
}

Matrix gather(const Matrix& points, const std::vector<Eigen::Index>& cols) {
  Matrix out(points.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    out.col(static_cast<Eigen::Index>(j)) = points.col(cols[j]);
  }
  return out;
}

}  // namespace

double density(const KdeStats& stats, const Vector& query) {
  if (query.size() != stats.reference_points.rows()) {
    throw InvalidInput("KDE query has " + std::to_string(query.size()) +
                       " dims, expected " +
                       std::to_string(stats.reference_points.rows()));
  }
  const Eigen::Index n = stats.reference_points.cols();
  if (n == 0) throw InvalidInput("KDE has no reference points");
  const double inv = 1.0 / (2.0 * stats.bandwidth * stats.bandwidth);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    sum += std::exp(-(stats.reference_points.col(i) - query).squaredNorm() * inv);
  }
  return sum / static_cast<double>(n);
}

double median_heuristic_bandwidth(const Matrix& points, std::uint64_t seed) {
  const auto cols = sample_columns(points.cols(), kKdeBandwidthSubsample,
                                   derive_seed(seed, 0x6277ULL));
  const Matrix sub = gather(points, cols);
  std::vector<double> dists;
  dists.reserve(static_cast<std::size_t>(sub.cols() * (sub.cols() - 1) / 2));
  for (Eigen::Index i = 0; i < sub.cols(); ++i) {
    for (Eigen::Index j = i + 1; j < sub.cols(); ++j) {
      dists.push_back((sub.col(i) - sub.col(j)).norm());
    }
  }
  if (dists.empty()) return 0.0;
  const auto mid = dists.begin() + static_cast<std::ptrdiff_t>(dists.size() / 2);
  std::nth_element(dists.begin(), mid, dists.end());
  double med = *mid;
  if (dists.size() % 2 == 0) {
    med = 0.5 * (med + *std::max_element(dists.begin(), mid));
  }
  return med / std::sqrt(2.0);
}

double scott_bandwidth(const Matrix& points) {
  double sd = 0.0;
  for (Eigen::Index d = 0; d < points.rows(); ++d) {
    const double mean = points.row(d).mean();
    sd += std::sqrt((points.row(d).array() - mean).square().mean());
  }
  sd /= static_cast<double>(points.rows());
  const double n = static_cast<double>(points.cols());
  return sd * std::pow(n, -1.0 / static_cast<double>(points.rows() + 4));
}

KdeStats fit(const Matrix& inputs, BandwidthRule rule, std::uint64_t seed) {
  if (inputs.cols() < 2) throw InvalidInput("KDE fit needs at least two points");
  if (inputs.rows() < 1) throw InvalidInput("KDE fit needs at least one input dim");

  KdeStats stats;
  stats.reference_points =
      gather(inputs, sample_columns(inputs.cols(), kKdeMaxReferences,
                                    derive_seed(seed, 0x726566ULL)));
  if (rule.kind == BandwidthRule::Kind::kFixed) {
    if (!(rule.value > 0.0) || !std::isfinite(rule.value)) {
      throw InvalidInput("fixed KDE bandwidth must be positive and finite");
    }
    stats.bandwidth = rule.value;
  } else if (rule.kind == BandwidthRule::Kind::kScott) {
    stats.bandwidth = scott_bandwidth(stats.reference_points);
  } else {
    stats.bandwidth = median_heuristic_bandwidth(stats.reference_points, seed);
  }
  if (!(stats.bandwidth > 0.0) || !std::isfinite(stats.bandwidth)) {
    throw DegenerateDataset("KDE bandwidth resolved to a non-positive value");
  }

  const Eigen::Index n = stats.reference_points.cols();
  Vector self(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    self(i) = density(stats, stats.reference_points.col(i));
  }
  stats.mu = self.mean();
  stats.sigma = std::sqrt((self.array() - stats.mu).square().mean());
  // Relative spread below rounding noise counts as identical densities.
  if (!(stats.sigma > 1e-12 * std::max(1.0, std::abs(stats.mu)))) {
    throw DegenerateDataset("all reference densities are identical");
  }
  return stats;
}

double base_eu_from_density(const KdeStats& stats, double density_value) {
  return 1.0 / (1.0 + std::exp((density_value - stats.mu) / stats.sigma));
}

double base_eu(const KdeStats& stats, const Vector& query) {
  return base_eu_from_density(stats, density(stats, query));
}

}  // namespace cdrm
