#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "cdrm/langevin.hpp"
#include "cdrm/nnet.hpp"

namespace cdrm {

// How a transition tuple is concatenated into a network input:
// [s (state_dim) | a (action_dim) | s' (next_dim)].
struct InputLayout {
  int state_dim = 0;
  int action_dim = 0;
  int next_dim = 0;

  int condition_dim() const { return state_dim + action_dim; }
  int total() const { return state_dim + action_dim + next_dim; }
  friend bool operator==(const InputLayout&, const InputLayout&) = default;
};

struct Transition {
  Vector s;
  Vector a;
  Vector s_next;

  Vector joint() const;
  Vector condition() const;  // (s, a)
  friend bool operator==(const Transition& x, const Transition& y) {
    auto same = [](const Vector& u, const Vector& v) {
      return u.size() == v.size() && u == v;
    };
    return same(x.s, y.s) && same(x.a, y.a) && same(x.s_next, y.s_next);
  }
};

// Regression data is stored with action_dim = 0, s = input, s' = output.
struct TransitionDataset {
  InputLayout dims;
  std::vector<Transition> tuples;
  Bounds bounds;  // one interval per joint dim

  std::size_t size() const { return tuples.size(); }
  bool empty() const { return tuples.empty(); }
  Matrix joint_matrix() const;      // total() x N
  Matrix condition_matrix() const;  // condition_dim() x N

  // Throws InvalidInput on inconsistent dims, OutOfBounds on a tuple
  // outside bounds.
  void validate() const;
  friend bool operator==(const TransitionDataset&, const TransitionDataset&) = default;
};

// Per-dim [min - pad, max + pad] with pad = 10% of the range (0.5 when the
// range is zero). Empty datasets get [-1, 1].
Bounds padded_bounds(const InputLayout& dims, const std::vector<Transition>& tuples);

// Toy regression problem: y = sin(x) on [-1, -0.33), nothing on
// [-0.33, 0.33), y = sin(x) + N(0, sigma_eta^2) on [0.33, 1].
inline constexpr double kToyGapLow = -0.33;
inline constexpr double kToyGapHigh = 0.33;
inline constexpr double kDefaultSigmaEta = 0.3;
inline constexpr int kDefaultToyPerRegion = 200;

TransitionDataset gen_toy(int n_per_region, double sigma_eta, bool multimodal,
                          std::uint64_t seed);

struct Rect {
  double x_low, x_high, y_low, y_high;

  bool contains(double x, double y) const {
    return x >= x_low && x <= x_high && y >= y_low && y <= y_high;
  }
  double center_x() const { return 0.5 * (x_low + x_high); }
  double center_y() const { return 0.5 * (y_low + y_high); }
  bool overlaps(const Rect& o) const {
    return x_low <= o.x_high && o.x_low <= x_high && y_low <= o.y_high &&
           o.y_low <= y_high;
  }
  friend bool operator==(const Rect&, const Rect&) = default;
};

// Base temperature is a * (x + y) + c.
struct RoomLayout {
  Rect room{0.0, 1.0, 0.0, 1.0};
  Rect noisy_region{0.0, 0.3, 0.0, 0.3};
  Rect hidden_region{0.7, 1.0, 0.7, 1.0};
  double noise_mean = 1.0;
  double noise_std = 0.5;
  double base_slope = 0.5;
  double base_offset = 0.0;

  double base_temperature(double x, double y) const {
    return base_slope * (x + y) + base_offset;
  }
  // Regions inside the room and disjoint; throws InvalidInput otherwise.
  void validate() const;
};

inline constexpr double kDefaultWalkStep = 0.1;

// Random walk with uniform steps in [-walk_step, walk_step]^2; moves that
// leave the room or enter the hidden region are redrawn. Records
// (position, temperature) at every step.
TransitionDataset gen_room(int n_steps, const RoomLayout& layout, std::uint64_t seed,
                           double walk_step = kDefaultWalkStep);

enum class RegionLabel { kAuPositive, kEuPositive, kClean };

RegionLabel label_probe(const RoomLayout& layout, double x, double y);

// CSV: "# dims=d_s,d_a,d_out" then one row per tuple (s, a, s').
void save_csv(const TransitionDataset& dataset, const std::filesystem::path& path);
TransitionDataset load_csv(const std::filesystem::path& path);

}  // namespace cdrm
