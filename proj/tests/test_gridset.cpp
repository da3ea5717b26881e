#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <set>

#include "perimetry/gridset.hpp"

using namespace perimetry;

namespace {

GridSet random_grid(CounterRng& rng, GridIndex dims, double fill) {
  const int n = dims[2] > 1 ? 3 : 2;
  GridSet G(Vector(n), 1.0, dims);
  for (std::int64_t k = 0; k < dims[2]; ++k)
    for (std::int64_t j = 0; j < dims[1]; ++j)
      for (std::int64_t i = 0; i < dims[0]; ++i)
        if (rng.uniform() < fill) G.set({i, j, k});
  return G;
}

std::uint64_t brute_shift_loss(const GridSet& G, int axis, std::int64_t k) {
  std::uint64_t n = 0;
  for (const auto& x : G.voxels()) {
    GridIndex y = x;
    y[static_cast<std::size_t>(axis)] += k;
    if (!G.in_range(y) || !G.get(y)) ++n;
  }
  return n;
}

}  // namespace

TEST(GridSet, RasterizedSquareVolume) {
  const Shape A = Polytope::box(Vector{0.0, 0.0}, Vector{1.0, 1.0});
  const auto G = rasterize(A, 1.0 / 64.0, 0.1);
  EXPECT_NEAR(G.volume(), 1.0, 1e-12);
  EXPECT_TRUE(G.get(G.index_of(Vector{0.5, 0.5})));
  EXPECT_FALSE(G.get(G.index_of(Vector{1.05, 0.5})));
}

TEST(GridSet, RasterizedDiscVolumeConverges) {
  const Shape A = Ball(Vector{0.0, 0.0}, 1.0);
  const double coarse = std::abs(rasterize(A, 0.05, 0.1).volume() - std::numbers::pi);
  const double fine = std::abs(rasterize(A, 0.0125, 0.1).volume() - std::numbers::pi);
  EXPECT_LT(fine, 2e-3);
  EXPECT_LT(fine, coarse + 1e-12);
}

TEST(GridSet, BudgetErrorBeforeAllocation) {
  EXPECT_THROW(GridSet(Vector(3), 1e-4, GridIndex{10000, 10000, 10000}), BudgetError);
  const Shape A = Polytope::box(Vector{0.0, 0.0}, Vector{1.0, 1.0});
  EXPECT_THROW(rasterize(A, 1e-3, 0.0, 1000), BudgetError);
  EXPECT_THROW(GridSet(Vector(2), -1.0, GridIndex{4, 4, 1}), ValidationError);
}

TEST(GridSet, SaveLoadRoundTrip) {
  CounterRng rng(3, 0);
  auto G = random_grid(rng, {37, 11, 5}, 0.4);
  const auto dir = std::filesystem::temp_directory_path() / "perimetry_grid_test";
  std::filesystem::create_directories(dir);
  const auto header = (dir / "grid.json").string();
  save_grid(G, header);
  const auto H = load_grid(header);
  ASSERT_EQ(H.dims(), G.dims());
  EXPECT_EQ(H.count(), G.count());
  EXPECT_EQ(H.voxels(), G.voxels());
  std::filesystem::resize_file(header + ".raw", 10);
  EXPECT_THROW(load_grid(header), ValidationError);
  std::filesystem::remove_all(dir);
}

TEST(Dilate, MatchesBruteForceUnion) {
  CounterRng rng(5, 0);
  auto G = random_grid(rng, {40, 30, 1}, 0.05);
  const StructuringElement Q{Vector{5.0, 0.0}, Vector{-3.0, 4.0}};
  const auto D = dilate(G, Q, 1.0);
  EXPECT_GE(D.count(), G.count());
  std::size_t expected = 0;
  std::set<std::pair<double, double>> centres;
  for (const auto& x : G.voxels()) {
    const auto c = G.center(x);
    for (const Vector& t : {Vector{0.0, 0.0}, Vector{5.0, 0.0}, Vector{-3.0, 4.0}}) centres.insert({c[0] + t[0], c[1] + t[1]});
  }
  expected = centres.size();
  EXPECT_EQ(D.count(), expected);
  for (const auto& [x, y] : centres) EXPECT_TRUE(D.get(D.index_of(Vector{x, y})));
}

TEST(Dilate, RejectsOffsetsBelowFourVoxels) {
  GridSet G(Vector(2), 0.1, GridIndex{10, 10, 1});
  EXPECT_THROW(dilate(G, StructuringElement{Vector{1.0, 0.0}}, 0.2), ValidationError);
  EXPECT_NO_THROW(dilate(G, StructuringElement{Vector{1.0, 0.0}}, 0.4));
  EXPECT_EQ(dilate(G, StructuringElement{Vector{1.0, 0.0}}, 0.0).count(), 0u);
}

TEST(ShiftLoss, MatchesBruteForce) {
  CounterRng rng(9, 0);
  for (int t = 0; t < 20; ++t) {
    const auto G = random_grid(rng, {70, 9, 4}, 0.3 + 0.02 * t);
    for (int axis = 0; axis < 3; ++axis)
      for (std::int64_t k : {-5, -1, 1, 2, 7, 65}) EXPECT_EQ(shift_loss(G, axis, k), brute_shift_loss(G, axis, k));
  }
}

TEST(ShiftLoss, BoundedByExitsTimesShift) {
  CounterRng rng(11, 0);
  for (int t = 0; t < 50; ++t) {
    const auto G = random_grid(rng, {50, 20, 1}, 0.5);
    for (int axis = 0; axis < 2; ++axis)
      for (int sign : {-1, 1})
        for (std::int64_t k = 1; k <= 8; ++k)
          EXPECT_LE(shift_loss(G, axis, sign * k), static_cast<std::uint64_t>(k) * directional_exits(G, axis, sign));
  }
}

TEST(Transitions, BalancedForClosedSets) {
  const Shape A = Ball(Vector{0.3, -0.2}, 0.7);
  const auto G = rasterize(A, 0.01, 0.05);
  for (int axis = 0; axis < 2; ++axis) EXPECT_EQ(directional_exits(G, axis, 1), directional_exits(G, axis, -1));
}

TEST(LatticeDirection, PicksPrimitiveClosestVector) {
  EXPECT_EQ(lattice_direction(Vector{1.0, 0.0}), (GridIndex{1, 0, 0}));
  EXPECT_EQ(lattice_direction(Vector{1.0, 1.0}), (GridIndex{1, 1, 0}));
  EXPECT_EQ(lattice_direction(Vector{2.0, 1.0}, 3), (GridIndex{2, 1, 0}));
  EXPECT_EQ(lattice_direction(Vector{0.0, -3.0, 0.0}), (GridIndex{0, -1, 0}));
}

TEST(PerimeterEstimate, UnitDiscWithinOnePercent) {
  const Shape A = Ball(Vector{0.0, 0.0}, 1.0);
  const auto G = rasterize(A, 0.004, 0.05);
  const double P = perimeter_estimate(G, sphere_quadrature(2, 64));
  EXPECT_NEAR(P, 2.0 * std::numbers::pi, 0.01 * 2.0 * std::numbers::pi);
}

TEST(PerimeterEstimate, AxisSquareIsExact) {
  const Shape A = Polytope::box(Vector{0.0, 0.0}, Vector{1.0, 0.5});
  const auto G = rasterize(A, 1.0 / 128.0, 0.1);
  EXPECT_NEAR(directional_variation(G, 0), 1.0, 1e-12);
  EXPECT_NEAR(directional_variation(G, 1), 2.0, 1e-12);
}
