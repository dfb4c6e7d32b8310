#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "cdrm/cdrm.hpp"
#include "cdrm/data.hpp"
#include "cdrm/nnet.hpp"

namespace cdrm::test {

// Fresh empty directory under the system temp dir.
std::filesystem::path temp_dir(const std::string& name);

std::string read_file(const std::filesystem::path& path);

// Straight-line re-evaluation of the layer recurrence with scalar loops.
double reference_forward(const MlpNetwork& net, const Vector& x);

// Central differences of reference_forward.
Vector fd_grad_input(const MlpNetwork& net, const Vector& x, double h = 1e-5);
ParamGradient fd_grad_params(const MlpNetwork& net, const Vector& x, double h = 1e-5);

// |a - b| / max(|a|, |b|, floor).
double rel_err(double a, double b, double floor = 1e-8);

// Seeded network with every parameter drawn uniformly from [-scale, scale].
MlpNetwork random_network(const std::vector<int>& dims, std::uint64_t seed,
                          double scale = 1.0);

struct TrainedToy {
  TransitionDataset dataset;
  CdrmModel model;  // KDE statistics fitted
  std::vector<double> epoch_loss;
  double train_seconds = 0.0;
};

// Toy dataset and model trained with default settings; memoised per
// (multimodal, seed) within one process.
const TrainedToy& trained_toy(bool multimodal, std::uint64_t seed);

}  // namespace cdrm::test
