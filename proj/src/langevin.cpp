#include "cdrm/langevin.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cdrm/error.hpp"

namespace cdrm {

void LangevinConfig::validate(int dim) const {
  if (n_samples <= 0) throw InvalidInput("n_samples must be positive");
  if (steps < 0) throw InvalidInput("steps must be non-negative");
  if (!(step_size > 0.0) || !std::isfinite(step_size)) {
    throw InvalidInput("step_size must be positive and finite");
  }
  if (!(noise_scale >= 0.0) || !std::isfinite(noise_scale)) {
    throw InvalidInput("noise_scale must be non-negative and finite");
  }
  if (free_dims.empty()) throw InvalidInput("free_dims must not be empty");
  if (bounds.size() != free_dims.size()) {
    throw InvalidInput("one bound per free dim is required");
  }
  for (std::size_t k = 0; k < free_dims.size(); ++k) {
    if (free_dims[k] < 0 || free_dims[k] >= dim) {
      throw InvalidInput("free dim " + std::to_string(free_dims[k]) + " out of range");
    }
    const auto& b = bounds[k];
    if (!std::isfinite(b.low) || !std::isfinite(b.high) || b.low > b.high) {
      throw InvalidInput("bounds must be finite with low <= high");
    }
  }
}

ChainStreams::ChainStreams(std::uint64_t seed, int n) {
  engines_.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    engines_.emplace_back(derive_seed(seed, static_cast<std::uint64_t>(i)));
  }
}

Matrix init_uniform(const LangevinConfig& cfg, const Vector& fixed_values,
                    ChainStreams& streams) {
  const int dim = static_cast<int>(fixed_values.size());
  cfg.validate(dim);
  if (streams.size() != cfg.n_samples) {
    throw InvalidInput("stream count must equal n_samples");
  }
  Matrix batch = fixed_values.replicate(1, cfg.n_samples);
  for (int j = 0; j < cfg.n_samples; ++j) {
    for (std::size_t k = 0; k < cfg.free_dims.size(); ++k) {
      batch(cfg.free_dims[k], j) =
          uniform(streams[j], cfg.bounds[k].low, cfg.bounds[k].high);
    }
  }
  return batch;
}

void step(Matrix& batch, const Matrix& grad, const LangevinConfig& cfg,
          ChainStreams& streams) {
  const double sign = cfg.direction == Direction::kAscent ? 1.0 : -1.0;
  for (Eigen::Index j = 0; j < batch.cols(); ++j) {
    auto& rng = streams[static_cast<int>(j)];
    for (std::size_t k = 0; k < cfg.free_dims.size(); ++k) {
      const int d = cfg.free_dims[k];
      const double g = grad(d, j);
      if (!std::isfinite(g)) {
        throw SamplingFailure("non-finite score gradient at sample " + std::to_string(j),
                              static_cast<std::size_t>(j));
      }
      double v = batch(d, j) + sign * cfg.step_size * g;
      if (cfg.noise_scale > 0.0) v += cfg.noise_scale * standard_normal(rng);
      batch(d, j) = std::clamp(v, cfg.bounds[k].low, cfg.bounds[k].high);
    }
  }
}

Matrix step(const BatchScoreFn& score_fn, const Matrix& batch,
            const LangevinConfig& cfg, ChainStreams& streams) {
  RowVector scores;
  Matrix grad;
  score_fn(batch, scores, &grad);
  Matrix next = batch;
  step(next, grad, cfg, streams);
  return next;
}

ChainTrace run(const BatchScoreFn& score_fn, const LangevinConfig& cfg,
               const Vector& fixed_values, std::uint64_t seed) {
  ChainStreams streams(seed, cfg.n_samples);
  Matrix x = init_uniform(cfg, fixed_values, streams);

  ChainTrace trace;
  trace.samples.reserve(static_cast<std::size_t>(cfg.steps) + 1);
  trace.scores.reserve(static_cast<std::size_t>(cfg.steps) + 1);
  trace.batch_max.reserve(static_cast<std::size_t>(cfg.steps) + 1);

  RowVector scores;
  Matrix grad;
  for (int l = 0; l <= cfg.steps; ++l) {
    // The last batch only needs scores.
    score_fn(x, scores, l < cfg.steps ? &grad : nullptr);
    trace.samples.push_back(x);
    trace.scores.push_back(scores);
    trace.batch_max.push_back(scores.maxCoeff());
    if (l < cfg.steps) step(x, grad, cfg, streams);
  }
  return trace;
}

}  // namespace cdrm
