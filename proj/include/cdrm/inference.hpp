#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "cdrm/cdrm.hpp"
#include "cdrm/langevin.hpp"

namespace cdrm {

// Candidate next states whose score exceeded the threshold, deduplicated
// under a per-dimension L-infinity tolerance.
class ValidSet {
 public:
  ValidSet() = default;
  explicit ValidSet(Vector dedup_tol) : dedup_tol_(std::move(dedup_tol)) {}

  // Inserts x unless a member lies within dedup_tol in every dim.
  // Returns whether x was added.
  bool insert(const Vector& x, double score);

  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  const std::vector<Vector>& samples() const { return samples_; }
  const std::vector<double>& scores() const { return scores_; }
  const Vector& dedup_tol() const { return dedup_tol_; }

 private:
  bool near_existing(const Vector& x) const;

  using CellKey = std::vector<std::int64_t>;
  struct CellHash {
    std::size_t operator()(const CellKey& k) const;
  };
  CellKey cell_of(const Vector& x) const;

  Vector dedup_tol_;
  std::vector<Vector> samples_;
  std::vector<double> scores_;
  // Tolerance-sized grid cell -> indices of members inside it.
  std::unordered_map<CellKey, std::vector<std::size_t>, CellHash> cells_;
};

struct InferenceResult {
  std::optional<Vector> prediction;
  double eu = 1.0;
  std::optional<double> au;
  std::size_t valid_count = 0;
  std::vector<double> per_step_max;  // m_1 .. m_L
};

struct InferenceConfig {
  int n_samples = 512;
  int steps = 50;
  double step_size = 0.1;
  double noise_scale = 0.01;
  double alpha = 0.5;
  // Dedup tolerance as a fraction of each next-state dim's range.
  double dedup_fraction = 1e-3;

  void validate() const;
};

// Scans steps 1..L of the trace; free_dims picks the next-state coordinates.
ValidSet collect_valid(const ChainTrace& trace, const std::vector<int>& free_dims,
                       double alpha, const Vector& dedup_tol);

// Highest-scoring member; ties go to the earliest inserted.
const Vector& predict(const ValidSet& valid);

// sqrt(trace of the population covariance of the members).
double aleatoric(const ValidSet& valid);

// 1 for an empty set, else (kde_base + (1 - max score) * sd(per_step_max)) / 2.
double epistemic(const ValidSet& valid, const std::vector<double>& per_step_max,
                 double kde_base);

// Full inference for one (s, a) condition vector.
InferenceResult infer(const CdrmModel& model, const Vector& condition,
                      const InferenceConfig& cfg, std::uint64_t seed);

}  // namespace cdrm
