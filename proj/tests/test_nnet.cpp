#include <gtest/gtest.h>

#include <cmath>

#include "cdrm/error.hpp"
#include "cdrm/nnet.hpp"
#include "support.hpp"

namespace cdrm {
namespace {

using test::fd_grad_input;
using test::fd_grad_params;
using test::random_network;
using test::reference_forward;
using test::rel_err;

MlpNetwork affine_2_to_1() {
  MlpNetwork net = MlpNetwork::zeros({2, 1});
  net.weights[0] << 2.0, 3.0;
  net.biases[0] << 1.0;
  return net;
}

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

TEST(Forward, ZeroNetworkGivesZero) {
  const auto net = MlpNetwork::zeros({3, 8, 1});
  EXPECT_EQ(forward(net, vec({0.3, -2.0, 7.0})), 0.0);
}

TEST(Forward, AffineLayer) {
  EXPECT_EQ(forward(affine_2_to_1(), vec({1.0, 1.0})), 6.0);
}

TEST(Forward, MatchesReferenceRecurrence) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto net = random_network({3, 7, 5, 1}, seed);
    const Vector x = Vector::Random(3);
    EXPECT_LE(rel_err(forward(net, x), reference_forward(net, x)), 1e-13);
  }
}

TEST(Forward, IsPure) {
  const auto net = MlpNetwork::xavier({4, 16, 1}, 3);
  const Vector x = vec({0.1, 0.2, 0.3, 0.4});
  EXPECT_EQ(forward(net, x), forward(net, x));
}

TEST(Forward, BatchMatchesSingle) {
  const auto net = random_network({2, 9, 4, 1}, 17);
  Matrix xs = Matrix::Random(2, 11);
  const RowVector batch = forward_batch(net, xs);
  for (Eigen::Index j = 0; j < xs.cols(); ++j) {
    EXPECT_DOUBLE_EQ(batch(j), forward(net, xs.col(j)));
  }
}

TEST(Forward, DimensionMismatchThrows) {
  const auto net = MlpNetwork::zeros({3, 1});
  EXPECT_THROW(forward(net, Vector::Zero(2)), InvalidInput);
  EXPECT_THROW(grad_input(net, Vector::Zero(4)), InvalidInput);
  EXPECT_THROW(grad_params(net, Vector::Zero(1), 1.0), InvalidInput);
}

TEST(GradInput, AffineLayer) {
  const Vector g = grad_input(affine_2_to_1(), vec({-4.0, 9.0}));
  EXPECT_EQ(g(0), 2.0);
  EXPECT_EQ(g(1), 3.0);
}

TEST(GradInput, ZeroNetwork) {
  EXPECT_TRUE(grad_input(MlpNetwork::zeros({3, 5, 1}), Vector::Ones(3)).isZero(0.0));
}

TEST(GradInput, MatchesFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto net = random_network({3, 6, 1}, seed);
    const Vector x = Vector::Random(3);
    const Vector g = grad_input(net, x);
    const Vector fd = fd_grad_input(net, x);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (std::abs(fd(i)) > 1e-8) {
        EXPECT_LT(rel_err(g(i), fd(i)), 1e-4);
      }
    }
  }
}

TEST(GradInput, BatchMatchesSingle) {
  const auto net = random_network({3, 5, 5, 1}, 4);
  const Matrix xs = Matrix::Random(3, 6);
  const auto both = forward_and_grad_input(net, xs);
  for (Eigen::Index j = 0; j < xs.cols(); ++j) {
    EXPECT_DOUBLE_EQ(both.logits(j), forward(net, xs.col(j)));
    EXPECT_TRUE(both.grad.col(j).isApprox(grad_input(net, xs.col(j)), 1e-14));
  }
}

TEST(GradParams, ZeroUpstream) {
  const auto net = random_network({2, 4, 1}, 1);
  const auto g = grad_params(net, vec({0.5, -0.5}), 0.0);
  for (std::size_t l = 0; l < g.weights.size(); ++l) {
    EXPECT_TRUE(g.weights[l].isZero(0.0));
    EXPECT_TRUE(g.biases[l].isZero(0.0));
  }
}

TEST(GradParams, AffineLayer) {
  const auto g = grad_params(affine_2_to_1(), vec({1.0, 1.0}), 1.0);
  EXPECT_EQ(g.weights[0](0, 0), 1.0);
  EXPECT_EQ(g.weights[0](0, 1), 1.0);
  EXPECT_EQ(g.biases[0](0), 1.0);
}

TEST(GradParams, MatchesFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto net = random_network({2, 4, 3, 1}, 100 + seed);
    const Vector x = Vector::Random(2);
    const auto g = grad_params(net, x, 1.0);
    const auto fd = fd_grad_params(net, x);
    for (std::size_t l = 0; l < g.weights.size(); ++l) {
      for (Eigen::Index i = 0; i < g.weights[l].size(); ++i) {
        const double a = g.weights[l].data()[i], b = fd.weights[l].data()[i];
        if (std::abs(b) > 1e-8) {
          EXPECT_LT(rel_err(a, b), 1e-4);
        }
      }
      for (Eigen::Index i = 0; i < g.biases[l].size(); ++i) {
        const double a = g.biases[l](i), b = fd.biases[l](i);
        if (std::abs(b) > 1e-8) {
          EXPECT_LT(rel_err(a, b), 1e-4);
        }
      }
    }
  }
}

TEST(GradParams, ScalesWithUpstream) {
  const auto net = random_network({2, 3, 1}, 8);
  const Vector x = vec({0.2, 0.7});
  const auto g1 = grad_params(net, x, 1.0);
  const auto g3 = grad_params(net, x, -3.0);
  for (std::size_t l = 0; l < g1.weights.size(); ++l) {
    EXPECT_TRUE(g3.weights[l].isApprox(-3.0 * g1.weights[l], 1e-14));
  }
}

TEST(GradParams, BatchEqualsSumOfSamples) {
  const auto net = random_network({3, 6, 4, 1}, 21);
  const Matrix xs = Matrix::Random(3, 7);
  RowVector up = RowVector::Random(7);
  const auto batch = grad_params_batch(net, xs, up);
  auto sum = ParamGradient::zeros_like(net);
  for (Eigen::Index j = 0; j < xs.cols(); ++j) sum += grad_params(net, xs.col(j), up(j));
  for (std::size_t l = 0; l < sum.weights.size(); ++l) {
    EXPECT_TRUE(batch.weights[l].isApprox(sum.weights[l], 1e-12));
    EXPECT_TRUE(batch.biases[l].isApprox(sum.biases[l], 1e-12));
  }
}

TEST(Xavier, SeededShapesAndRange) {
  const auto a = MlpNetwork::xavier({3, 64, 128, 64, 1}, 5);
  const auto b = MlpNetwork::xavier({3, 64, 128, 64, 1}, 5);
  a.validate();
  EXPECT_EQ(a.param_count(), 3 * 64 + 64 + 64 * 128 + 128 + 128 * 64 + 64 + 64 + 1);
  for (std::size_t l = 0; l < a.weights.size(); ++l) {
    EXPECT_EQ(a.weights[l], b.weights[l]);
    const double limit = std::sqrt(6.0 / (a.layer_dims[l] + a.layer_dims[l + 1]));
    EXPECT_LE(a.weights[l].cwiseAbs().maxCoeff(), limit);
    EXPECT_TRUE(a.biases[l].isZero(0.0));
  }
  EXPECT_NE(MlpNetwork::xavier({2, 4, 1}, 1).weights[0], MlpNetwork::xavier({2, 4, 1}, 2).weights[0]);
}

TEST(Validate, RejectsBadShapesAndNonFinite) {
  auto net = MlpNetwork::zeros({2, 3, 1});
  net.weights[1] = Matrix::Zero(2, 3);
  EXPECT_THROW(net.validate(), InvalidInput);
  net = MlpNetwork::zeros({2, 3, 1});
  net.biases[0](1) = std::nan("");
  EXPECT_THROW(net.validate(), InvalidInput);
  EXPECT_THROW(MlpNetwork::zeros({2, 3, 2}).validate(), InvalidInput);
}

TEST(Adam, ZeroGradientLeavesEverythingUnchanged) {
  auto net = random_network({2, 3, 1}, 2);
  const auto before = net;
  auto state = AdamState::for_network(net);
  adam_update(net, ParamGradient::zeros_like(net), state, 1, 1e-2);
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    EXPECT_EQ(net.weights[l], before.weights[l]);
    EXPECT_EQ(net.biases[l], before.biases[l]);
    EXPECT_TRUE(state.first_moment.weights[l].isZero(0.0));
    EXPECT_TRUE(state.second_moment.weights[l].isZero(0.0));
  }
}

TEST(Adam, FirstStepMovesByLearningRateAgainstSign) {
  auto net = random_network({2, 3, 1}, 3);
  const auto before = net;
  auto g = ParamGradient::zeros_like(net);
  for (auto& w : g.weights) w.setRandom();
  for (auto& b : g.biases) b.setRandom();
  auto state = AdamState::for_network(net);
  const double lr = 0.01;
  adam_update(net, g, state, 1, lr);
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    for (Eigen::Index i = 0; i < g.weights[l].size(); ++i) {
      const double gi = g.weights[l].data()[i];
      const double delta = net.weights[l].data()[i] - before.weights[l].data()[i];
      EXPECT_NEAR(delta, -lr * (gi > 0 ? 1.0 : -1.0), lr * 1e-6 / std::abs(gi) + 1e-15);
    }
  }
}

TEST(Adam, TwoStepsMatchHandRecurrence) {
  MlpNetwork net = MlpNetwork::zeros({1, 1});
  net.weights[0](0, 0) = 0.5;
  auto state = AdamState::for_network(net);
  const double lr = 0.1, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  const double g[2] = {0.3, -1.2};

  double theta = 0.5, m = 0.0, v = 0.0;
  for (int t = 1; t <= 2; ++t) {
    auto grad = ParamGradient::zeros_like(net);
    grad.weights[0](0, 0) = g[t - 1];
    adam_update(net, grad, state, t, lr);

    m = b1 * m + (1 - b1) * g[t - 1];
    v = b2 * v + (1 - b2) * g[t - 1] * g[t - 1];
    const double m_hat = m / (1 - std::pow(b1, t));
    const double v_hat = v / (1 - std::pow(b2, t));
    theta -= lr * m_hat / (std::sqrt(v_hat) + eps);
    EXPECT_NEAR(net.weights[0](0, 0), theta, 1e-15);
  }
  EXPECT_NEAR(state.first_moment.weights[0](0, 0), m, 1e-16);
  EXPECT_NEAR(state.second_moment.weights[0](0, 0), v, 1e-16);
}

TEST(Adam, NonFiniteGradientThrows) {
  auto net = MlpNetwork::zeros({2, 1});
  auto state = AdamState::for_network(net);
  auto g = ParamGradient::zeros_like(net);
  g.biases[0](0) = INFINITY;
  EXPECT_THROW(adam_update(net, g, state, 1, 1e-3), TrainingDivergence);
}

}  // namespace
}  // namespace cdrm
