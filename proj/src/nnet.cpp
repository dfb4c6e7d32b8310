#include "cdrm/nnet.hpp"

#include <cmath>
#include <string>

#include "cdrm/error.hpp"
#include "cdrm/random.hpp"

namespace cdrm {

namespace {

void check_input(const MlpNetwork& net, Eigen::Index rows) {
  if (rows != net.input_dim()) {
    throw InvalidInput("network input has " + std::to_string(rows) +
                       " dims, expected " + std::to_string(net.input_dim()));
  }
}

// Post-activation values of every layer; acts[0] is the input and
// acts.back() the logits.
std::vector<Matrix> forward_all(const MlpNetwork& net, const Matrix& x) {
  std::vector<Matrix> acts;
  acts.reserve(net.weights.size() + 1);
  acts.push_back(x);
  const int last = net.num_layers() - 1;
  for (int i = 0; i <= last; ++i) {
    Matrix z = net.weights[i] * acts.back();
    z.colwise() += net.biases[i];
    if (i < last) z = z.array().tanh().matrix();
    acts.push_back(std::move(z));
  }
  return acts;
}

// Walks the error signal from the output back to the input, calling
// visit(layer, delta) with delta = dL/dz for each layer's pre-activation.
// Returns dL/dx.
template <typename Visit>
Matrix backward(const MlpNetwork& net, const std::vector<Matrix>& acts,
                const RowVector& upstream, Visit&& visit) {
  Matrix delta = upstream;
  for (int i = net.num_layers() - 1; i >= 0; --i) {
    visit(i, delta);
    Matrix prev = net.weights[i].transpose() * delta;
    if (i > 0) {
      prev.array() *= 1.0 - acts[i].array().square();
    }
    delta = std::move(prev);
  }
  return delta;
}

}  // namespace

MlpNetwork MlpNetwork::zeros(std::vector<int> layer_dims) {
  if (layer_dims.size() < 2 || layer_dims.back() != 1) {
    throw InvalidInput("layer_dims needs >= 2 entries ending in 1");
  }
  MlpNetwork net;
  net.layer_dims = std::move(layer_dims);
  for (std::size_t i = 0; i + 1 < net.layer_dims.size(); ++i) {
    if (net.layer_dims[i] <= 0 || net.layer_dims[i + 1] <= 0) {
      throw InvalidInput("layer_dims entries must be positive");
    }
    net.weights.push_back(Matrix::Zero(net.layer_dims[i + 1], net.layer_dims[i]));
    net.biases.push_back(Vector::Zero(net.layer_dims[i + 1]));
  }
  return net;
}

MlpNetwork MlpNetwork::xavier(std::vector<int> layer_dims, std::uint64_t seed) {
  MlpNetwork net = zeros(std::move(layer_dims));
  Rng rng(derive_seed(seed, 0x786176ULL));
  for (auto& w : net.weights) {
    const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
    // Row-major fill order keeps the draw sequence independent of storage.
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) {
        w(r, c) = uniform(rng, -limit, limit);
      }
    }
  }
  return net;
}

long MlpNetwork::param_count() const {
  long n = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    n += static_cast<long>(weights[i].size() + biases[i].size());
  }
  return n;
}

void MlpNetwork::validate() const {
  if (layer_dims.size() < 2 || layer_dims.back() != 1) {
    throw InvalidInput("layer_dims needs >= 2 entries ending in 1");
  }
  if (weights.size() + 1 != layer_dims.size() || biases.size() != weights.size()) {
    throw InvalidInput("layer count does not match layer_dims");
  }
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i].rows() != layer_dims[i + 1] || weights[i].cols() != layer_dims[i] ||
        biases[i].size() != layer_dims[i + 1]) {
      throw InvalidInput("layer " + std::to_string(i) + " has the wrong shape");
    }
    if (!weights[i].allFinite() || !biases[i].allFinite()) {
      throw InvalidInput("layer " + std::to_string(i) + " has non-finite parameters");
    }
  }
}

ParamGradient ParamGradient::zeros_like(const MlpNetwork& net) {
  ParamGradient g;
  for (std::size_t i = 0; i < net.weights.size(); ++i) {
    g.weights.push_back(Matrix::Zero(net.weights[i].rows(), net.weights[i].cols()));
    g.biases.push_back(Vector::Zero(net.biases[i].size()));
  }
  return g;
}

ParamGradient& ParamGradient::operator+=(const ParamGradient& other) {
  for (std::size_t i = 0; i < weights.size(); ++i) {
    weights[i] += other.weights[i];
    biases[i] += other.biases[i];
  }
  return *this;
}

bool ParamGradient::all_finite() const {
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!weights[i].allFinite() || !biases[i].allFinite()) return false;
  }
  return true;
}

RowVector forward_batch(const MlpNetwork& net, const Matrix& x) {
  check_input(net, x.rows());
  Matrix a = x;
  const int last = net.num_layers() - 1;
  for (int i = 0; i <= last; ++i) {
    Matrix z = net.weights[i] * a;
    z.colwise() += net.biases[i];
    if (i < last) z = z.array().tanh().matrix();
    a = std::move(z);
  }
  return a.row(0);
}

InputGradBatch forward_and_grad_input(const MlpNetwork& net, const Matrix& x) {
  check_input(net, x.rows());
  const auto acts = forward_all(net, x);
  InputGradBatch out;
  out.logits = acts.back().row(0);
  out.grad = backward(net, acts, RowVector::Ones(x.cols()), [](int, const Matrix&) {});
  return out;
}

ParamGradient grad_params_batch(const MlpNetwork& net, const Matrix& x,
                                const RowVector& upstream) {
  check_input(net, x.rows());
  if (upstream.size() != x.cols()) {
    throw InvalidInput("upstream length must equal batch size");
  }
  const auto acts = forward_all(net, x);
  ParamGradient g = ParamGradient::zeros_like(net);
  backward(net, acts, upstream, [&](int i, const Matrix& delta) {
    g.weights[i].noalias() = delta * acts[i].transpose();
    g.biases[i] = delta.rowwise().sum();
  });
  return g;
}

double forward(const MlpNetwork& net, const Vector& x) {
  return forward_batch(net, x)(0);
}

Vector grad_input(const MlpNetwork& net, const Vector& x) {
  return forward_and_grad_input(net, x).grad.col(0);
}

ParamGradient grad_params(const MlpNetwork& net, const Vector& x, double upstream) {
  RowVector u(1);
  u(0) = upstream;
  return grad_params_batch(net, x, u);
}

AdamState AdamState::for_network(const MlpNetwork& net) {
  AdamState s;
  s.first_moment = ParamGradient::zeros_like(net);
  s.second_moment = ParamGradient::zeros_like(net);
  return s;
}

void adam_update(MlpNetwork& net, const ParamGradient& grads, AdamState& state,
                 long step_index, double learning_rate) {
  if (!grads.all_finite()) {
    throw TrainingDivergence("non-finite gradient in Adam update", -1);
  }
  if (step_index < 1) throw InvalidInput("Adam step_index counts from 1");
  if (state.first_moment.weights.size() != net.weights.size()) {
    state = AdamState::for_network(net);
  }
  const double b1 = state.beta1;
  const double b2 = state.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_index));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_index));

  auto apply = [&](auto& param, const auto& g, auto& m, auto& v) {
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
    param.array() -= learning_rate * (m.array() / c1) /
                     ((v.array() / c2).sqrt() + state.epsilon);
  };
  for (std::size_t i = 0; i < net.weights.size(); ++i) {
    apply(net.weights[i], grads.weights[i], state.first_moment.weights[i],
          state.second_moment.weights[i]);
    apply(net.biases[i], grads.biases[i], state.first_moment.biases[i],
          state.second_moment.biases[i]);
  }
}

}  // namespace cdrm
