#pragma once

#include <cstdint>

#include "cdrm/nnet.hpp"

namespace cdrm {

// How the RBF bandwidth is chosen at fit time.
struct BandwidthRule {
  enum class Kind { kMedianHeuristic, kFixed, kScott };
  Kind kind = Kind::kMedianHeuristic;
  double value = 0.0;  // used when kind == kFixed

  static BandwidthRule median() { return {}; }
  static BandwidthRule fixed(double h) { return {Kind::kFixed, h}; }
  static BandwidthRule scott() { return {Kind::kScott, 0.0}; }
};

// RBF kernel density over (s, a) inputs, standardised by the mean and
// standard deviation of the density at every reference point.
struct KdeStats {
  Matrix reference_points;  // input dim x n
  double bandwidth = 1.0;
  double mu = 0.0;
  double sigma = 1.0;

  int dim() const { return static_cast<int>(reference_points.rows()); }
};

inline constexpr int kKdeMaxReferences = 4096;
inline constexpr int kKdeBandwidthSubsample = 1024;

// (1/N) sum_i exp(-|q - x_i|^2 / (2 h^2)).
double density(const KdeStats& stats, const Vector& query);

// Median pairwise distance of (a seeded subsample of) points, over sqrt(2).
double median_heuristic_bandwidth(const Matrix& points, std::uint64_t seed);

// Mean per-dimension population sd times n^(-1 / (d + 4)).
double scott_bandwidth(const Matrix& points);

// Needs at least two points. Larger sets are subsampled to
// kKdeMaxReferences references. Throws DegenerateDataset when every
// reference has the same density.
KdeStats fit(const Matrix& inputs, BandwidthRule rule, std::uint64_t seed = 0);

// (1 + exp((density(q) - mu) / sigma))^-1
double base_eu(const KdeStats& stats, const Vector& query);
double base_eu_from_density(const KdeStats& stats, double density_value);

}  // namespace cdrm
