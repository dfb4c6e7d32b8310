#include "cdrm/inference.hpp"

#include <cmath>
#include <cstring>
#include <string>

#include "cdrm/error.hpp"

namespace cdrm {

std::size_t ValidSet::CellHash::operator()(const CellKey& k) const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (auto v : k) {
    h ^= static_cast<std::uint64_t>(v);
    h *= 0x100000001b3ULL;
  }
  return static_cast<std::size_t>(h);
}

ValidSet::CellKey ValidSet::cell_of(const Vector& x) const {
  CellKey key(static_cast<std::size_t>(x.size()));
  for (Eigen::Index d = 0; d < x.size(); ++d) {
    const double tol = dedup_tol_(d);
    if (tol > 0.0) {
      key[static_cast<std::size_t>(d)] = static_cast<std::int64_t>(std::floor(x(d) / tol));
    } else {
      // Zero tolerance: only bit-identical coordinates collide.
      std::int64_t bits;
      std::memcpy(&bits, &x(d), sizeof(bits));
      key[static_cast<std::size_t>(d)] = bits;
    }
  }
  return key;
}

bool ValidSet::near_existing(const Vector& x) const {
  auto close = [&](std::size_t i) {
    return ((samples_[i] - x).cwiseAbs().array() <= dedup_tol_.array()).all();
  };

  int spread_dims = 0;
  for (Eigen::Index d = 0; d < x.size(); ++d) spread_dims += dedup_tol_(d) > 0.0;
  const double neighbours = std::pow(3.0, spread_dims);
  if (neighbours >= static_cast<double>(samples_.size())) {
    for (std::size_t i = 0; i < samples_.size(); ++i) {
      if (close(i)) return true;
    }
    return false;
  }

  // Enumerate the 3^k neighbouring cells as a base-3 counter.
  const CellKey centre = cell_of(x);
  CellKey probe = centre;
  std::vector<int> offset(centre.size(), 0);
  const auto total = static_cast<long>(neighbours);
  for (long n = 0; n < total; ++n) {
    long rem = n;
    for (std::size_t d = 0; d < centre.size(); ++d) {
      if (dedup_tol_(static_cast<Eigen::Index>(d)) > 0.0) {
        probe[d] = centre[d] + (rem % 3) - 1;
        rem /= 3;
      }
    }
    const auto it = cells_.find(probe);
    if (it == cells_.end()) continue;
    for (std::size_t i : it->second) {
      if (close(i)) return true;
    }
  }
  return false;
}

bool ValidSet::insert(const Vector& x, double score) {
  if (dedup_tol_.size() == 0 && samples_.empty()) {
    dedup_tol_ = Vector::Zero(x.size());
  }
  if (x.size() != dedup_tol_.size()) {
    throw InvalidInput("valid-set sample dim does not match the dedup tolerance");
  }
  if (near_existing(x)) return false;
  cells_[cell_of(x)].push_back(samples_.size());
  samples_.push_back(x);
  scores_.push_back(score);
  return true;
}

void InferenceConfig::validate() const {
  if (n_samples <= 0) throw InvalidInput("n_samples must be positive");
  if (steps < 0) throw InvalidInput("steps must be >= 0");
  if (!(step_size > 0.0)) throw InvalidInput("step_size must be > 0");
  if (!(noise_scale >= 0.0)) throw InvalidInput("noise_scale must be >= 0");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidInput("alpha must lie in (0, 1)");
  if (!(dedup_fraction >= 0.0)) throw InvalidInput("dedup_fraction must be >= 0");
}

ValidSet collect_valid(const ChainTrace& trace, const std::vector<int>& free_dims,
                       double alpha, const Vector& dedup_tol) {
  if (dedup_tol.size() != static_cast<Eigen::Index>(free_dims.size())) {
    throw InvalidInput("one dedup tolerance per free dim is required");
  }
  ValidSet valid(dedup_tol);
  Vector x(static_cast<Eigen::Index>(free_dims.size()));
  for (std::size_t l = 1; l < trace.samples.size(); ++l) {
    const Matrix& batch = trace.samples[l];
    const RowVector& scores = trace.scores[l];
    for (Eigen::Index j = 0; j < batch.cols(); ++j) {
      if (!(scores(j) > alpha)) continue;
      for (std::size_t k = 0; k < free_dims.size(); ++k) {
        x(static_cast<Eigen::Index>(k)) = batch(free_dims[k], j);
      }
      valid.insert(x, scores(j));
    }
  }
  return valid;
}

const Vector& predict(const ValidSet& valid) {
  if (valid.empty()) throw EmptyValidSet("cannot predict from an empty valid set");
  std::size_t best = 0;
  for (std::size_t i = 1; i < valid.size(); ++i) {
    if (valid.scores()[i] > valid.scores()[best]) best = i;
  }
  return valid.samples()[best];
}

double aleatoric(const ValidSet& valid) {
  if (valid.empty()) throw EmptyValidSet("aleatoric spread of an empty valid set");
  const auto& xs = valid.samples();
  Vector mean = Vector::Zero(xs.front().size());
  for (const auto& x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double sum_sq = 0.0;
  for (const auto& x : xs) sum_sq += (x - mean).squaredNorm();
  return std::sqrt(sum_sq / static_cast<double>(xs.size()));
}

double epistemic(const ValidSet& valid, const std::vector<double>& per_step_max,
                 double kde_base) {
  if (valid.empty()) return 1.0;
  double max_score = valid.scores().front();
  for (double s : valid.scores()) max_score = std::max(max_score, s);

  double spread = 0.0;
  if (!per_step_max.empty()) {
    const Eigen::Map<const Vector> m(per_step_max.data(),
                                     static_cast<Eigen::Index>(per_step_max.size()));
    spread = std::sqrt((m.array() - m.mean()).square().mean());
  }
  return (kde_base + (1.0 - max_score) * spread) / 2.0;
}

InferenceResult infer(const CdrmModel& model, const Vector& condition,
                      const InferenceConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  if (!model.kde) throw UnpreparedModel("model has no fitted KDE statistics");
  const auto& layout = model.layout;
  if (condition.size() != layout.condition_dim()) {
    throw InvalidInput("condition has " + std::to_string(condition.size()) +
                       " dims, expected " + std::to_string(layout.condition_dim()));
  }
  if (!condition.allFinite()) throw InvalidInput("condition has non-finite entries");

  LangevinConfig lc;
  lc.n_samples = cfg.n_samples;
  lc.steps = cfg.steps;
  lc.step_size = cfg.step_size;
  lc.noise_scale = cfg.noise_scale;
  lc.direction = Direction::kAscent;
  Vector dedup_tol(layout.next_dim);
  for (int k = 0; k < layout.next_dim; ++k) {
    const int d = layout.condition_dim() + k;
    lc.free_dims.push_back(d);
    lc.bounds.push_back(model.input_bounds[static_cast<std::size_t>(d)]);
    dedup_tol(k) = cfg.dedup_fraction * lc.bounds.back().width();
  }

  Vector fixed = Vector::Zero(layout.total());
  fixed.head(layout.condition_dim()) = condition;

  const ChainTrace trace = run(score_fn(model), lc, fixed, seed);
  const ValidSet valid = collect_valid(trace, lc.free_dims, cfg.alpha, dedup_tol);

  InferenceResult result;
  result.per_step_max.assign(trace.batch_max.begin() + 1, trace.batch_max.end());
  result.valid_count = valid.size();
  if (valid.empty()) {
    result.eu = 1.0;
    return result;
  }
  result.prediction = predict(valid);
  result.au = aleatoric(valid);
  result.eu = epistemic(valid, result.per_step_max, base_eu(*model.kde, condition));
  return result;
}

}  // namespace cdrm
