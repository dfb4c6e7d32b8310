#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace cdrm {

using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
// Batches are stored column-major: one sample per column.
using Matrix = Eigen::MatrixXd;

enum class Activation { kTanh };

// Dense feed-forward network with tanh hidden layers and a single linear
// output unit. layer_dims = {input, hidden..., 1}.
struct MlpNetwork {
  std::vector<int> layer_dims;
  std::vector<Matrix> weights;  // weights[i]: layer_dims[i+1] x layer_dims[i]
  std::vector<Vector> biases;   // biases[i]: layer_dims[i+1]
  Activation hidden_activation = Activation::kTanh;

  static MlpNetwork zeros(std::vector<int> layer_dims);
  // Xavier-uniform weights, zero biases.
  static MlpNetwork xavier(std::vector<int> layer_dims, std::uint64_t seed);

  int input_dim() const { return layer_dims.front(); }
  int num_layers() const { return static_cast<int>(weights.size()); }
  long param_count() const;

  // Throws InvalidInput when shapes disagree with layer_dims or any
  // parameter is non-finite.
  void validate() const;
};

// Parameter-shaped gradient carrier.
struct ParamGradient {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;

  static ParamGradient zeros_like(const MlpNetwork& net);
  ParamGradient& operator+=(const ParamGradient& other);
  bool all_finite() const;
};

double forward(const MlpNetwork& net, const Vector& x);
Vector grad_input(const MlpNetwork& net, const Vector& x);
ParamGradient grad_params(const MlpNetwork& net, const Vector& x,
                          double upstream);

// Batched forms. x holds one sample per column.
RowVector forward_batch(const MlpNetwork& net, const Matrix& x);

// Logits plus d(sum_j upstream_j * logit_j)/dx as a matrix shaped like x.
struct InputGradBatch {
  RowVector logits;
  Matrix grad;
};
InputGradBatch forward_and_grad_input(const MlpNetwork& net, const Matrix& x);

// Gradient of sum_j upstream_j * logit(x_j) with respect to every parameter.
ParamGradient grad_params_batch(const MlpNetwork& net, const Matrix& x,
                                const RowVector& upstream);

struct AdamState {
  ParamGradient first_moment;
  ParamGradient second_moment;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState for_network(const MlpNetwork& net);
};

// One Adam step with bias correction. step_index counts from 1.
// Throws TrainingDivergence (epoch -1) on non-finite gradients.
void adam_update(MlpNetwork& net, const ParamGradient& grads, AdamState& state,
                 long step_index, double learning_rate);

}  // namespace cdrm
