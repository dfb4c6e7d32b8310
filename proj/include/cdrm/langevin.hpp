#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "cdrm/nnet.hpp"
#include "cdrm/random.hpp"

namespace cdrm {

struct Interval {
  double low = 0.0;
  double high = 0.0;

  double width() const { return high - low; }
  bool contains(double v) const { return v >= low && v <= high; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

using Bounds = std::vector<Interval>;

enum class Direction { kAscent, kDescent };

// Batched score field: fills scores (1 x B) and, when grad is non-null,
// d score / dx (D x B) for every column of x.
using BatchScoreFn =
    std::function<void(const Matrix& x, RowVector& scores, Matrix* grad)>;

struct LangevinConfig {
  int n_samples = 512;
  int steps = 50;
  double step_size = 0.1;
  double noise_scale = 0.01;
  Direction direction = Direction::kAscent;
  std::vector<int> free_dims;  // coordinates updated by the chain
  Bounds bounds;               // one interval per free dim

  // Throws InvalidInput if the config cannot drive a chain over `dim`
  // coordinates.
  void validate(int dim) const;
};

// One independent generator per chain, seeded from (seed, chain index) so a
// chain's stream does not depend on how many other chains run beside it.
class ChainStreams {
 public:
  ChainStreams(std::uint64_t seed, int n);
  Rng& operator[](int i) { return engines_[static_cast<std::size_t>(i)]; }
  int size() const { return static_cast<int>(engines_.size()); }

 private:
  std::vector<Rng> engines_;
};

struct ChainTrace {
  std::vector<Matrix> samples;     // steps + 1 batches, index 0 = init
  std::vector<RowVector> scores;   // matching scores
  std::vector<double> batch_max;   // max score per recorded batch

  int steps() const { return static_cast<int>(samples.size()) - 1; }
};

// Uniform initialisation of the free dims; frozen dims copy fixed_values.
Matrix init_uniform(const LangevinConfig& cfg, const Vector& fixed_values,
                    ChainStreams& streams);

// x <- clip(x +/- step_size * grad + N(0, noise^2)) on free dims, using a
// gradient already evaluated at x. Throws SamplingFailure on a non-finite
// gradient.
void step(Matrix& batch, const Matrix& grad, const LangevinConfig& cfg,
          ChainStreams& streams);

// Convenience form that evaluates the gradient itself.
Matrix step(const BatchScoreFn& score_fn, const Matrix& batch,
            const LangevinConfig& cfg, ChainStreams& streams);

// init, then cfg.steps updates; one batched score+gradient evaluation per
// step. Deterministic for a fixed seed.
ChainTrace run(const BatchScoreFn& score_fn, const LangevinConfig& cfg,
               const Vector& fixed_values, std::uint64_t seed);

}  // namespace cdrm
