#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "cdrm/data.hpp"
#include "cdrm/kde.hpp"
#include "cdrm/langevin.hpp"
#include "cdrm/nnet.hpp"

namespace cdrm {

// logit(1 - 1e-6): sigmoid outputs stay inside [1e-6, 1 - 1e-6].
inline const double kDefaultLogitClip = std::log((1.0 - 1e-6) / 1e-6);

inline const std::vector<int> kDefaultHiddenDims = {64, 128, 64};

// Scalar field over joint (s, a, s') tuples: sigmoid(clamp(mlp(x))).
struct CdrmModel {
  MlpNetwork net;
  double logit_clip = kDefaultLogitClip;
  Bounds input_bounds;  // one interval per joint dim
  InputLayout layout;
  std::optional<KdeStats> kde;

  static CdrmModel create(const InputLayout& layout, const Bounds& bounds,
                          const std::vector<int>& hidden_dims, std::uint64_t seed);

  double score_min() const;
  double score_max() const;
  void validate() const;
};

double score(const CdrmModel& model, const Vector& s, const Vector& a,
             const Vector& s_next);
double score_joint(const CdrmModel& model, const Vector& x);

// Affine map of each joint dim from input_bounds onto [-1, 1]; the network
// sees normalised inputs.
Matrix normalize_inputs(const CdrmModel& model, const Matrix& x);

// Scores for every column of x; fills d score / dx when grad is non-null.
// The clamp passes gradient 1 inside [-clip, clip] and 0 outside.
void score_batch(const CdrmModel& model, const Matrix& x, RowVector& scores,
                 Matrix* grad);

// Bind the model as a BatchScoreFn for the Langevin sampler.
BatchScoreFn score_fn(const CdrmModel& model);

// -mean(log(rho_pos + eps)) - mean(log(1 - rho_neg + eps))
double contrastive_loss(const RowVector& rho_pos, const RowVector& rho_neg, double eps);

struct TrainLangevin {
  int steps = 10;
  double step_size = 0.1;
  double noise_scale = 0.01;
};

enum class LrSchedule { kConstant, kCosine };

struct TrainConfig {
  int epochs = 100;
  int positive_batch = 32;
  int negative_batch = 32;
  // Optimiser steps per epoch; 0 means ceil(dataset size / positive_batch).
  int steps_per_epoch = 100;
  TrainLangevin langevin;
  double learning_rate = 5e-3;
  // kCosine decays the rate to 0 over epochs * steps_per_epoch Adam steps.
  LrSchedule lr_schedule = LrSchedule::kCosine;
  double stability_eps = 1e-6;
  std::uint64_t seed = 0;

  void validate() const;
};

// n joint tuples, uniform over the model's input bounds, moved by Langevin
// ascent on the score and clipped to the bounds.
Matrix generate_negatives(const CdrmModel& model, int n, const TrainLangevin& cfg,
                          std::uint64_t seed);

struct TrainResult {
  CdrmModel model;
  std::vector<double> epoch_loss;  // mean minibatch loss per epoch
};

// Contrastive training with Langevin negatives and Adam. Bit-reproducible
// for a fixed cfg.seed. Throws TrainingDivergence naming the epoch.
TrainResult train(CdrmModel model, const TransitionDataset& dataset,
                  const TrainConfig& cfg);

}  // namespace cdrm
