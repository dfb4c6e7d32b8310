#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "cdrm/data.hpp"
#include "cdrm/langevin.hpp"

namespace cdrm {

// Joint flag grid with b bins per dimension over (s, a, s'). Cells are laid
// out in mixed radix with the s' dims least significant, so every (s, a)
// owns one contiguous block of b^next_dim cells.
class BinGrid {
 public:
  static BinGrid build(const TransitionDataset& dataset, int bins, const Bounds& bounds);

  int bins() const { return bins_; }
  const InputLayout& dims() const { return dims_; }
  const Bounds& bounds() const { return bounds_; }
  std::size_t cell_count() const { return flags_.size(); }
  std::size_t occupied_count() const;
  bool flag(std::size_t cell) const { return flags_[cell] != 0; }
  std::uint32_t count(std::size_t cell) const { return counts_[cell]; }

  // Bin of v along joint dim d; [low, high) per bin, top edge closed.
  // Returns nullopt outside the bounds.
  std::optional<int> bin_index(int d, double v) const;
  double bin_center(int d, int index) const;
  double bin_width(int d) const;

  // First cell of the next-state block for a (s, a) condition.
  std::size_t condition_block(const Vector& condition) const;
  std::size_t next_block_size() const { return next_block_; }
  // Centre of a next-state cell, given its offset inside a block.
  Vector next_center(std::size_t offset) const;

 private:
  int bins_ = 1;
  InputLayout dims_;
  Bounds bounds_;
  std::size_t next_block_ = 1;
  std::vector<std::uint8_t> flags_;
  std::vector<std::uint32_t> counts_;
};

struct BinCell {
  std::size_t offset;  // position inside the next-state block
  Vector center;
};

// Occupied next-state cells for (s, a), in cell order.
std::vector<BinCell> query(const BinGrid& grid, const Vector& condition);

struct BinInferenceResult {
  std::optional<Vector> prediction;  // centre of the most populated cell
  double eu = 1.0;                   // 1 if nothing found, else 0 (no confidence analog)
  std::optional<double> au;
  std::size_t valid_count = 0;
};

BinInferenceResult bin_infer(const BinGrid& grid, const Vector& condition);

struct MemoryReport {
  std::uint64_t joint_cells = 0;          // b^(2 d_s + d_a)
  std::uint64_t flag_formula_cells = 0;  // d_s^2 * d_a * b^3, per-dimension flag indexing
  bool joint_saturated = false;
  bool formula_saturated = false;
};

// Counts saturate at UINT64_MAX with the matching flag set.
MemoryReport memory_report(int state_dim, int action_dim, int bins);

}  // namespace cdrm
