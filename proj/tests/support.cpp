#include "support.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <utility>

#include "cdrm/kde.hpp"

namespace cdrm::test {

std::filesystem::path temp_dir(const std::string& name) {
  static std::random_device rd;
  const auto dir = std::filesystem::temp_directory_path() /
                   ("cdrm_" + name + "_" + std::to_string(rd()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

double reference_forward(const MlpNetwork& net, const Vector& x) {
  std::vector<double> a(x.data(), x.data() + x.size());
  const std::size_t layers = net.weights.size();
  for (std::size_t l = 0; l < layers; ++l) {
    const Matrix& w = net.weights[l];
    std::vector<double> z(static_cast<std::size_t>(w.rows()));
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      double acc = net.biases[l](r);
      for (Eigen::Index c = 0; c < w.cols(); ++c) acc += w(r, c) * a[static_cast<std::size_t>(c)];
      z[static_cast<std::size_t>(r)] = l + 1 < layers ? std::tanh(acc) : acc;
    }
    a = std::move(z);
  }
  return a[0];
}

Vector fd_grad_input(const MlpNetwork& net, const Vector& x, double h) {
  Vector g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vector xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    g(i) = (reference_forward(net, xp) - reference_forward(net, xm)) / (2 * h);
  }
  return g;
}

ParamGradient fd_grad_params(const MlpNetwork& net, const Vector& x, double h) {
  ParamGradient g = ParamGradient::zeros_like(net);
  MlpNetwork probe = net;
  auto central = [&](double& p) {
    const double saved = p;
    p = saved + h;
    const double up = reference_forward(probe, x);
    p = saved - h;
    const double down = reference_forward(probe, x);
    p = saved;
    return (up - down) / (2 * h);
  };
  for (std::size_t l = 0; l < probe.weights.size(); ++l) {
    for (Eigen::Index r = 0; r < probe.weights[l].rows(); ++r) {
      for (Eigen::Index c = 0; c < probe.weights[l].cols(); ++c) {
        g.weights[l](r, c) = central(probe.weights[l](r, c));
      }
      g.biases[l](r) = central(probe.biases[l](r));
    }
  }
  return g;
}

double rel_err(double a, double b, double floor) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

MlpNetwork random_network(const std::vector<int>& dims, std::uint64_t seed, double scale) {
  MlpNetwork net = MlpNetwork::zeros(dims);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    for (Eigen::Index i = 0; i < net.weights[l].size(); ++i) net.weights[l].data()[i] = u(rng);
    for (Eigen::Index i = 0; i < net.biases[l].size(); ++i) net.biases[l](i) = u(rng);
  }
  return net;
}

const TrainedToy& trained_toy(bool multimodal, std::uint64_t seed) {
  static std::map<std::pair<bool, std::uint64_t>, TrainedToy> cache;
  const auto key = std::make_pair(multimodal, seed);
  if (auto it = cache.find(key); it != cache.end()) return it->second;

  TrainedToy t;
  t.dataset = gen_toy(kDefaultToyPerRegion, kDefaultSigmaEta, multimodal, seed);
  TrainConfig cfg;
  cfg.seed = seed;
  const auto t0 = std::chrono::steady_clock::now();
  TrainResult r = train(CdrmModel::create(t.dataset.dims, t.dataset.bounds,
                                          kDefaultHiddenDims, seed),
                        t.dataset, cfg);
  t.train_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.model.kde = fit(t.dataset.condition_matrix(), BandwidthRule::median(), seed);
  t.model = std::move(r.model);
  t.epoch_loss = std::move(r.epoch_loss);
  return cache.emplace(key, std::move(t)).first->second;
}

}  // namespace cdrm::test
