#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "cdrm/binref.hpp"
#include "cdrm/error.hpp"

namespace cdrm {
namespace {

Vector v1(double a) { return Vector::Constant(1, a); }

TransitionDataset one_d(std::vector<std::pair<double, double>> xy, Bounds bounds) {
  TransitionDataset ds;
  ds.dims = {1, 0, 1};
  for (auto [x, y] : xy) ds.tuples.push_back({v1(x), Vector(0), v1(y)});
  ds.bounds = std::move(bounds);
  return ds;
}

// Independent bin index: floor((v - lo) / width * b) with the top edge folded in.
int floor_bin(double v, const Interval& iv, int b) {
  const int i = static_cast<int>(std::floor((v - iv.low) / (iv.high - iv.low) * b));
  return i == b ? b - 1 : i;
}

TEST(Build, EmptyDatasetHasNoFlags) {
  const auto g = BinGrid::build(one_d({}, {{0, 1}, {0, 1}}), 4, {{0, 1}, {0, 1}});
  EXPECT_EQ(g.cell_count(), 16u);
  EXPECT_EQ(g.occupied_count(), 0u);
}

TEST(Build, OneTupleOneBin) {
  const auto g = BinGrid::build(one_d({{0.3, 0.6}}, {{0, 1}, {0, 1}}), 1, {{0, 1}, {0, 1}});
  EXPECT_EQ(g.cell_count(), 1u);
  EXPECT_EQ(g.occupied_count(), 1u);
}

TEST(Build, DuplicatesAreIdempotentForFlags) {
  const Bounds b = {{0, 1}, {0, 1}};
  const auto once = BinGrid::build(one_d({{0.3, 0.6}}, b), 8, b);
  const auto twice = BinGrid::build(one_d({{0.3, 0.6}, {0.3, 0.6}}, b), 8, b);
  EXPECT_EQ(once.occupied_count(), twice.occupied_count());
  const auto cell = twice.condition_block(v1(0.3)) + 4;
  EXPECT_EQ(twice.count(cell), 2u);
  EXPECT_TRUE(once.flag(cell));
}

TEST(Build, OutOfBoundsNamesTuple) {
  const Bounds b = {{0, 1}, {0, 1}};
  try {
    BinGrid::build(one_d({{0.5, 0.5}, {0.5, 1.5}}, b), 4, b);
    FAIL();
  } catch (const OutOfBounds& e) {
    EXPECT_EQ(e.index(), 1u);
  }
}

TEST(Build, RejectsBadArguments) {
  const Bounds b = {{0, 1}, {0, 1}};
  EXPECT_THROW(BinGrid::build(one_d({}, b), 0, b), InvalidInput);
  EXPECT_THROW(BinGrid::build(one_d({}, b), 4, {{0, 1}}), InvalidInput);
  EXPECT_THROW(BinGrid::build(one_d({}, b), 1 << 20, b), InvalidInput);
}

TEST(Build, HalfOpenBinsWithClosedTopEdge) {
  const Bounds b = {{0, 1}, {0, 1}};
  const auto g = BinGrid::build(one_d({}, b), 4, b);
  EXPECT_EQ(g.bin_index(0, 0.0), 0);
  EXPECT_EQ(g.bin_index(0, 0.25), 1);
  EXPECT_EQ(g.bin_index(0, 0.2499999), 0);
  EXPECT_EQ(g.bin_index(0, 1.0), 3);
  EXPECT_FALSE(g.bin_index(0, 1.0000001));
  EXPECT_FALSE(g.bin_index(0, -1e-12));
}

TEST(Build, ToyOccupancyMatchesFloorIndexLoop) {
  const auto ds = gen_toy(200, 0.3, false, 3);
  const int b = 50;
  const auto g = BinGrid::build(ds, b, ds.bounds);
  std::set<std::pair<int, int>> cells;
  for (const auto& t : ds.tuples) {
    cells.insert({floor_bin(t.s(0), ds.bounds[0], b), floor_bin(t.s_next(0), ds.bounds[1], b)});
  }
  EXPECT_EQ(g.occupied_count(), cells.size());
  for (auto [i, j] : cells) EXPECT_TRUE(g.flag(static_cast<std::size_t>(i * b + j)));
}

TEST(Query, EmptyColumn) {
  const Bounds b = {{0, 1}, {0, 1}};
  const auto g = BinGrid::build(one_d({{0.9, 0.1}}, b), 10, b);
  EXPECT_TRUE(query(g, v1(0.1)).empty());
}

TEST(Query, SingleTupleRoundTripWithinHalfCell) {
  const Bounds b = {{-1, 1}, {-2, 2}};
  const auto g = BinGrid::build(one_d({{0.37, -1.23}}, b), 17, b);
  const auto cells = query(g, v1(0.37));
  ASSERT_EQ(cells.size(), 1u);
  EXPECT_LE(std::abs(cells[0].center(0) - (-1.23)), 0.5 * g.bin_width(1) + 1e-15);
}

TEST(Query, EveryStoredTupleIsFoundWithinHalfCell) {
  const auto ds = gen_toy(100, 0.3, true, 9);
  const auto g = BinGrid::build(ds, 40, ds.bounds);
  for (const auto& t : ds.tuples) {
    const auto cells = query(g, t.s);
    bool near = false;
    for (const auto& c : cells) {
      ASSERT_TRUE(g.flag(g.condition_block(t.s) + c.offset));
      near = near || std::abs(c.center(0) - t.s_next(0)) <= 0.5 * g.bin_width(1) + 1e-12;
    }
    EXPECT_TRUE(near);
  }
}

TEST(Query, MultimodalColumnMatchesDatasetScan) {
  const auto ds = gen_toy(200, 0.3, true, 4);
  const int b = 50;
  const auto g = BinGrid::build(ds, b, ds.bounds);
  const int col = floor_bin(-0.7, ds.bounds[0], b);
  std::set<int> expected;
  for (const auto& t : ds.tuples) {
    if (floor_bin(t.s(0), ds.bounds[0], b) == col) {
      expected.insert(floor_bin(t.s_next(0), ds.bounds[1], b));
    }
  }
  const auto cells = query(g, v1(-0.7));
  std::set<int> got;
  bool upper = false, lower = false;
  for (const auto& c : cells) {
    got.insert(static_cast<int>(c.offset));
    upper = upper || std::abs(c.center(0) - std::sin(0.7)) < 0.15;
    lower = lower || std::abs(c.center(0) + std::sin(0.7)) < 0.15;
    EXPECT_GT(std::abs(c.center(0)), 0.3);
  }
  EXPECT_EQ(got, expected);
  EXPECT_TRUE(upper);
  EXPECT_TRUE(lower);
}

TEST(Query, OutOfBoundsCondition) {
  const Bounds b = {{0, 1}, {0, 1}};
  const auto g = BinGrid::build(one_d({}, b), 4, b);
  EXPECT_THROW(query(g, v1(2.0)), OutOfBounds);
  EXPECT_THROW(query(g, Vector::Zero(2)), InvalidInput);
}

TEST(BinInfer, EmptyGivesEuOne) {
  const Bounds b = {{0, 1}, {0, 1}};
  const auto r = bin_infer(BinGrid::build(one_d({}, b), 4, b), v1(0.5));
  EXPECT_EQ(r.eu, 1.0);
  EXPECT_FALSE(r.prediction);
  EXPECT_FALSE(r.au);
  EXPECT_EQ(r.valid_count, 0u);
}

TEST(BinInfer, OneCellHasZeroSpread) {
  const Bounds b = {{0, 1}, {0, 1}};
  const auto r = bin_infer(BinGrid::build(one_d({{0.5, 0.4}, {0.5, 0.41}}, b), 4, b), v1(0.5));
  ASSERT_TRUE(r.au);
  EXPECT_EQ(*r.au, 0.0);
  EXPECT_EQ(r.eu, 0.0);
  EXPECT_DOUBLE_EQ((*r.prediction)(0), 0.375);
}

TEST(BinInfer, TwoCellsQuarterSpreadAndMostPopulatedPrediction) {
  const Bounds b = {{0, 1}, {0, 1}};
  const auto ds = one_d({{0.1, 0.2}, {0.1, 0.8}, {0.2, 0.9}}, b);
  const auto r = bin_infer(BinGrid::build(ds, 2, b), v1(0.3));
  ASSERT_EQ(r.valid_count, 2u);
  EXPECT_DOUBLE_EQ(*r.au, 0.25);
  EXPECT_DOUBLE_EQ((*r.prediction)(0), 0.75);
}

TEST(Memory, UnitDimsCoincide) {
  const auto m = memory_report(1, 1, 10);
  EXPECT_EQ(m.joint_cells, 1000u);
  EXPECT_EQ(m.flag_formula_cells, 1000u);
}

TEST(Memory, FormulasDivergeForVectorStates) {
  const auto m = memory_report(2, 1, 10);
  EXPECT_EQ(m.joint_cells, 100000u);
  EXPECT_EQ(m.flag_formula_cells, 4000u);
}

TEST(Memory, SingleBin) { EXPECT_EQ(memory_report(3, 2, 1).joint_cells, 1u); }

TEST(Memory, SaturatesWithFlag) {
  const auto m = memory_report(20, 5, 1000);
  EXPECT_TRUE(m.joint_saturated);
  EXPECT_EQ(m.joint_cells, UINT64_MAX);
  EXPECT_FALSE(m.formula_saturated);
  EXPECT_THROW(memory_report(0, 1, 2), InvalidInput);
}

}  // namespace
}  // namespace cdrm
