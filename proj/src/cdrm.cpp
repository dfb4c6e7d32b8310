#include "cdrm/cdrm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "cdrm/error.hpp"
#include "cdrm/random.hpp"

namespace cdrm {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

CdrmModel CdrmModel::create(const InputLayout& layout, const Bounds& bounds,
                            const std::vector<int>& hidden_dims, std::uint64_t seed) {
  std::vector<int> dims;
  dims.push_back(layout.total());
  dims.insert(dims.end(), hidden_dims.begin(), hidden_dims.end());
  dims.push_back(1);

  CdrmModel model;
  model.net = MlpNetwork::xavier(std::move(dims), seed);
  model.input_bounds = bounds;
  model.layout = layout;
  model.validate();
  return model;
}

double CdrmModel::score_min() const { return sigmoid(-logit_clip); }
double CdrmModel::score_max() const { return sigmoid(logit_clip); }

void CdrmModel::validate() const {
  net.validate();
  if (layout.total() != net.input_dim()) {
    throw InvalidInput("network input dim does not match the tuple layout");
  }
  if (!(logit_clip > 0.0) || !std::isfinite(logit_clip)) {
    throw InvalidInput("logit_clip must be positive and finite");
  }
  if (static_cast<int>(input_bounds.size()) != layout.total()) {
    throw InvalidInput("input_bounds must cover every joint dim");
  }
  for (const auto& b : input_bounds) {
    if (!(b.low < b.high) || !std::isfinite(b.low) || !std::isfinite(b.high)) {
      throw InvalidInput("input_bounds need finite low < high");
    }
  }
  if (kde && kde->dim() != layout.condition_dim()) {
    throw InvalidInput("KDE dim does not match the (s, a) layout");
  }
}

Matrix normalize_inputs(const CdrmModel& model, const Matrix& x) {
  if (x.rows() != model.layout.total()) {
    throw InvalidInput("tuple batch has " + std::to_string(x.rows()) +
                       " dims, expected " + std::to_string(model.layout.total()));
  }
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index d = 0; d < x.rows(); ++d) {
    const auto& b = model.input_bounds[static_cast<std::size_t>(d)];
    const double center = 0.5 * (b.low + b.high);
    const double half = 0.5 * b.width();
    out.row(d) = (x.row(d).array() - center) * (1.0 / half);
  }
  return out;
}

void score_batch(const CdrmModel& model, const Matrix& x, RowVector& scores,
                 Matrix* grad) {
  const double clip = model.logit_clip;
  const Matrix xn = normalize_inputs(model, x);
  RowVector logits;
  if (grad != nullptr) {
    auto eval = forward_and_grad_input(model.net, xn);
    logits = std::move(eval.logits);
    *grad = std::move(eval.grad);
    for (Eigen::Index d = 0; d < grad->rows(); ++d) {
      grad->row(d) /= 0.5 * model.input_bounds[static_cast<std::size_t>(d)].width();
    }
  } else {
    logits = forward_batch(model.net, xn);
  }
  scores.resize(logits.size());
  for (Eigen::Index j = 0; j < logits.size(); ++j) {
    const double z = logits(j);
    scores(j) = sigmoid(std::clamp(z, -clip, clip));
    if (grad != nullptr) {
      const double slope =
          std::abs(z) <= clip ? scores(j) * (1.0 - scores(j)) : 0.0;
      grad->col(j) *= slope;
    }
  }
}

double score_joint(const CdrmModel& model, const Vector& x) {
  if (x.size() != model.layout.total()) {
    throw InvalidInput("tuple has " + std::to_string(x.size()) + " dims, expected " +
                       std::to_string(model.layout.total()));
  }
  if (!x.allFinite()) throw InvalidInput("tuple has non-finite entries");
  RowVector s;
  score_batch(model, x, s, nullptr);
  return s(0);
}

double score(const CdrmModel& model, const Vector& s, const Vector& a,
             const Vector& s_next) {
  const auto& l = model.layout;
  if (s.size() != l.state_dim || a.size() != l.action_dim || s_next.size() != l.next_dim) {
    throw InvalidInput("(s, a, s') dims do not match the model layout");
  }
  Vector x(l.total());
  x << s, a, s_next;
  return score_joint(model, x);
}

BatchScoreFn score_fn(const CdrmModel& model) {
  return [&model](const Matrix& x, RowVector& scores, Matrix* grad) {
    score_batch(model, x, scores, grad);
  };
}

double contrastive_loss(const RowVector& rho_pos, const RowVector& rho_neg, double eps) {
  if (rho_pos.size() == 0 || rho_neg.size() == 0) {
    throw InvalidInput("contrastive loss needs non-empty batches");
  }
  const double pos = (rho_pos.array() + eps).log().mean();
  const double neg = (1.0 - rho_neg.array() + eps).log().mean();
  return -pos - neg;
}

void TrainConfig::validate() const {
  if (epochs < 0) throw InvalidInput("epochs must be >= 0");
  if (positive_batch <= 0 || negative_batch <= 0) {
    throw InvalidInput("batch sizes must be positive");
  }
  if (steps_per_epoch < 0) throw InvalidInput("steps_per_epoch must be >= 0");
  if (langevin.steps < 0) throw InvalidInput("Langevin steps must be >= 0");
  if (!(langevin.step_size > 0.0)) throw InvalidInput("Langevin step size must be > 0");
  if (!(langevin.noise_scale >= 0.0)) throw InvalidInput("Langevin noise must be >= 0");
  if (!(learning_rate > 0.0)) throw InvalidInput("learning_rate must be > 0");
  if (!(stability_eps > 0.0 && stability_eps < 0.5)) {
    throw InvalidInput("stability_eps must lie in (0, 0.5)");
  }
}

Matrix generate_negatives(const CdrmModel& model, int n, const TrainLangevin& cfg,
                          std::uint64_t seed) {
  LangevinConfig lc;
  lc.n_samples = n;
  lc.steps = cfg.steps;
  lc.step_size = cfg.step_size;
  lc.noise_scale = cfg.noise_scale;
  lc.direction = Direction::kAscent;
  lc.bounds = model.input_bounds;
  for (int d = 0; d < model.layout.total(); ++d) lc.free_dims.push_back(d);

  ChainStreams streams(seed, n);
  Matrix x = init_uniform(lc, Vector::Zero(model.layout.total()), streams);
  RowVector scores;
  Matrix grad;
  for (int l = 0; l < cfg.steps; ++l) {
    score_batch(model, x, scores, &grad);
    step(x, grad, lc, streams);
  }
  return x;
}

TrainResult train(CdrmModel model, const TransitionDataset& dataset,
                  const TrainConfig& cfg) {
  cfg.validate();
  model.validate();
  if (dataset.empty()) throw InvalidInput("training dataset is empty");
  if (dataset.dims != model.layout) {
    throw InvalidInput("dataset dims do not match the model layout");
  }

  const Matrix data = dataset.joint_matrix();
  const auto n_data = static_cast<std::uint64_t>(data.cols());
  const int steps = cfg.steps_per_epoch > 0
                        ? cfg.steps_per_epoch
                        : static_cast<int>((n_data + cfg.positive_batch - 1) /
                                           static_cast<std::uint64_t>(cfg.positive_batch));
  const int n_pos = cfg.positive_batch;
  const int n_neg = cfg.negative_batch;
  const double eps = cfg.stability_eps;

  Rng pick(derive_seed(cfg.seed, 0x706f73ULL));
  AdamState adam = AdamState::for_network(model.net);
  long adam_step = 0;
  const double total_steps = static_cast<double>(cfg.epochs) * steps;

  TrainResult result;
  result.epoch_loss.reserve(static_cast<std::size_t>(cfg.epochs));
  Matrix batch(data.rows(), n_pos + n_neg);
  RowVector upstream(n_pos + n_neg);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double loss_sum = 0.0;
    for (int k = 0; k < steps; ++k) {
      for (int j = 0; j < n_pos; ++j) {
        batch.col(j) = data.col(static_cast<Eigen::Index>(pick() % n_data));
      }
      try {
        batch.rightCols(n_neg) = generate_negatives(
            model, n_neg, cfg.langevin,
            derive_seed(cfg.seed, static_cast<std::uint64_t>(epoch),
                        static_cast<std::uint64_t>(k)));
      } catch (const SamplingFailure&) {
        // Only a non-finite network can produce a non-finite score gradient.
        throw TrainingDivergence(
            "non-finite score gradient at epoch " + std::to_string(epoch), epoch);
      }

      const Matrix normalized = normalize_inputs(model, batch);
      const RowVector logits = forward_batch(model.net, normalized);
      RowVector rho(logits.size());
      RowVector slope(logits.size());
      for (Eigen::Index j = 0; j < logits.size(); ++j) {
        const double z = logits(j);
        rho(j) = sigmoid(std::clamp(z, -model.logit_clip, model.logit_clip));
        slope(j) = std::abs(z) <= model.logit_clip ? rho(j) * (1.0 - rho(j)) : 0.0;
      }
      const double loss = contrastive_loss(rho.head(n_pos), rho.tail(n_neg), eps);
      if (!std::isfinite(loss)) {
        throw TrainingDivergence("non-finite loss at epoch " + std::to_string(epoch),
                                 epoch);
      }
      loss_sum += loss;

      for (int j = 0; j < n_pos; ++j) {
        upstream(j) = -slope(j) / (n_pos * (rho(j) + eps));
      }
      for (int j = n_pos; j < n_pos + n_neg; ++j) {
        upstream(j) = slope(j) / (n_neg * (1.0 - rho(j) + eps));
      }
      const ParamGradient grads = grad_params_batch(model.net, normalized, upstream);
      try {
        double lr_now = cfg.learning_rate;
        if (cfg.lr_schedule == LrSchedule::kCosine) {
          lr_now *= 0.5 * (1.0 + std::cos(std::numbers::pi * adam_step / total_steps));
        }
        adam_update(model.net, grads, adam, ++adam_step, lr_now);
      } catch (const TrainingDivergence&) {
        throw TrainingDivergence(
            "non-finite gradient at epoch " + std::to_string(epoch), epoch);
      }
    }
    result.epoch_loss.push_back(loss_sum / steps);
  }
  result.model = std::move(model);
  return result;
}

}  // namespace cdrm
