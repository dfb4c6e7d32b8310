#include "cdrm/binref.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cdrm/error.hpp"

namespace cdrm {

namespace {

// Largest grid build() will allocate.
constexpr std::uint64_t kMaxCells = std::uint64_t{1} << 30;

// a * b, saturating.
std::uint64_t mul_sat(std::uint64_t a, std::uint64_t b, bool& saturated) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) {
    saturated = true;
    return std::numeric_limits<std::uint64_t>::max();
  }
  return a * b;
}

std::uint64_t pow_sat(std::uint64_t base, int exp, bool& saturated) {
  std::uint64_t r = 1;
  for (int i = 0; i < exp; ++i) r = mul_sat(r, base, saturated);
  return r;
}

}  // namespace

BinGrid BinGrid::build(const TransitionDataset& dataset, int bins, const Bounds& bounds) {
  if (bins < 1) throw InvalidInput("bins must be >= 1");
  const int total = dataset.dims.total();
  if (static_cast<int>(bounds.size()) != total) {
    throw InvalidInput("bin grid bounds must cover every joint dim");
  }
  for (const auto& b : bounds) {
    if (!(b.low < b.high)) throw InvalidInput("bin grid bounds need low < high");
  }
  bool saturated = false;
  const std::uint64_t cells = pow_sat(static_cast<std::uint64_t>(bins), total, saturated);
  if (saturated || cells > kMaxCells) {
    throw InvalidInput("bin grid with " + std::to_string(bins) + "^" +
                       std::to_string(total) + " cells is too large");
  }

  BinGrid grid;
  grid.bins_ = bins;
  grid.dims_ = dataset.dims;
  grid.bounds_ = bounds;
  grid.next_block_ = static_cast<std::size_t>(
      pow_sat(static_cast<std::uint64_t>(bins), dataset.dims.next_dim, saturated));
  grid.flags_.assign(static_cast<std::size_t>(cells), 0);
  grid.counts_.assign(static_cast<std::size_t>(cells), 0);

  for (std::size_t i = 0; i < dataset.tuples.size(); ++i) {
    const Vector x = dataset.tuples[i].joint();
    if (x.size() != total) {
      throw InvalidInput("tuple " + std::to_string(i) + " has inconsistent dims");
    }
    std::size_t cell = 0;
    for (int d = 0; d < total; ++d) {
      const auto idx = grid.bin_index(d, x(d));
      if (!idx) {
        throw OutOfBounds("tuple " + std::to_string(i) + " lies outside the grid bounds", i);
      }
      cell = cell * static_cast<std::size_t>(bins) + static_cast<std::size_t>(*idx);
    }
    grid.flags_[cell] = 1;
    ++grid.counts_[cell];
  }
  return grid;
}

std::size_t BinGrid::occupied_count() const {
  return static_cast<std::size_t>(std::count(flags_.begin(), flags_.end(), 1));
}

std::optional<int> BinGrid::bin_index(int d, double v) const {
  const auto& b = bounds_[static_cast<std::size_t>(d)];
  if (!(v >= b.low && v <= b.high)) return std::nullopt;
  const auto idx = static_cast<int>(std::floor((v - b.low) / b.width() * bins_));
  return std::min(idx, bins_ - 1);
}

double BinGrid::bin_width(int d) const {
  return bounds_[static_cast<std::size_t>(d)].width() / bins_;
}

double BinGrid::bin_center(int d, int index) const {
  return bounds_[static_cast<std::size_t>(d)].low + (index + 0.5) * bin_width(d);
}

std::size_t BinGrid::condition_block(const Vector& condition) const {
  if (condition.size() != dims_.condition_dim()) {
    throw InvalidInput("condition has " + std::to_string(condition.size()) +
                       " dims, expected " + std::to_string(dims_.condition_dim()));
  }
  std::size_t cell = 0;
  for (int d = 0; d < dims_.condition_dim(); ++d) {
    const auto idx = bin_index(d, condition(d));
    if (!idx) throw OutOfBounds("condition lies outside the grid bounds", 0);
    cell = cell * static_cast<std::size_t>(bins_) + static_cast<std::size_t>(*idx);
  }
  return cell * next_block_;
}

Vector BinGrid::next_center(std::size_t offset) const {
  Vector c(dims_.next_dim);
  for (int k = dims_.next_dim - 1; k >= 0; --k) {
    const auto idx = static_cast<int>(offset % static_cast<std::size_t>(bins_));
    offset /= static_cast<std::size_t>(bins_);
    c(k) = bin_center(dims_.condition_dim() + k, idx);
  }
  return c;
}

std::vector<BinCell> query(const BinGrid& grid, const Vector& condition) {
  const std::size_t base = grid.condition_block(condition);
  std::vector<BinCell> out;
  for (std::size_t k = 0; k < grid.next_block_size(); ++k) {
    if (grid.flag(base + k)) out.push_back({k, grid.next_center(k)});
  }
  return out;
}

BinInferenceResult bin_infer(const BinGrid& grid, const Vector& condition) {
  const std::size_t base = grid.condition_block(condition);
  const auto cells = query(grid, condition);

  BinInferenceResult r;
  r.valid_count = cells.size();
  if (cells.empty()) {
    r.eu = 1.0;
    return r;
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < cells.size(); ++i) {
    if (grid.count(base + cells[i].offset) > grid.count(base + cells[best].offset)) {
      best = i;
    }
  }
  r.prediction = cells[best].center;

  Vector mean = Vector::Zero(grid.dims().next_dim);
  for (const auto& c : cells) mean += c.center;
  mean /= static_cast<double>(cells.size());
  double sum_sq = 0.0;
  for (const auto& c : cells) sum_sq += (c.center - mean).squaredNorm();
  r.au = std::sqrt(sum_sq / static_cast<double>(cells.size()));
  r.eu = 0.0;
  return r;
}

MemoryReport memory_report(int state_dim, int action_dim, int bins) {
  if (state_dim < 1 || action_dim < 0 || bins < 1) {
    throw InvalidInput("memory_report needs d_s >= 1, d_a >= 0, b >= 1");
  }
  MemoryReport m;
  const auto b = static_cast<std::uint64_t>(bins);
  m.joint_cells = pow_sat(b, 2 * state_dim + action_dim, m.joint_saturated);
  const auto ds = static_cast<std::uint64_t>(state_dim);
  m.flag_formula_cells =
      mul_sat(mul_sat(ds * ds, static_cast<std::uint64_t>(action_dim), m.formula_saturated),
              pow_sat(b, 3, m.formula_saturated), m.formula_saturated);
  return m;
}

}  // namespace cdrm
