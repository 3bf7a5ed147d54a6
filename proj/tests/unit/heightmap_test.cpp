#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "grading/heightmap.hpp"

using namespace grading;

namespace {

FovSpec small_fov(std::size_t rows, std::size_t cols, std::size_t ar, std::size_t ac, unsigned n = 0) {
  FovSpec s;
  s.rows = rows;
  s.cols = cols;
  s.anchor_row = ar;
  s.anchor_col = ac;
  s.downsample_exponent = n;
  return s;
}

DiffMap zero_diff(std::size_t rows, std::size_t cols, double cell) { return DiffMap(rows, cols, cell); }

}  // namespace

TEST(NewFlat, FillsEveryCell) {
  const HeightMap m = new_flat(10, 10, 0.1, 0.0);
  EXPECT_EQ(m.size(), 100u);
  for (double v : m.values()) EXPECT_EQ(v, 0.0);
  const HeightMap one = new_flat(1, 1, 1.0, 2.5);
  EXPECT_EQ(one.at(0, 0), 2.5);
}

TEST(NewFlat, RejectsZeroRows) {
  try {
    new_flat(0, 5, 0.1, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::invalid_dimension);
  }
  EXPECT_THROW(new_flat(5, 5, 0.0, 0.0), Error);
  EXPECT_THROW(new_flat(5, 5, -1.0, 0.0), Error);
}

TEST(AddPile, PeakAtCenterCell) {
  const HeightMap m = add_pile(new_flat(9, 9, 0.1, 0.0), {0.45, 0.45, 0.2, 0.2, 1.0, 0.0});
  EXPECT_EQ(m.at(4, 4), 1.0);
}

TEST(AddPile, NeighbourRatioMatchesClosedForm) {
  const HeightMap m = add_pile(new_flat(9, 9, 0.1, 0.0), {0.45, 0.45, 0.2, 0.2, 1.0, 0.0});
  const double expected = std::exp(-0.5 * (0.1 / 0.2) * (0.1 / 0.2));
  EXPECT_NEAR(m.at(4, 5) / m.at(4, 4), expected, 1e-12);
  EXPECT_NEAR(expected, 0.8825, 1e-4);
}

TEST(AddPile, TwoIdenticalPilesDouble) {
  const GaussianPile p{0.37, 0.52, 0.3, 0.2, 0.7, 0.4};
  const HeightMap once = add_pile(new_flat(12, 12, 0.1, 0.0), p);
  const HeightMap twice = add_pile(once, p);
  for (std::size_t i = 0; i < once.size(); ++i) EXPECT_EQ(twice.values()[i], 2.0 * once.values()[i]);
}

TEST(AddPile, CommutesBitwise) {
  const GaussianPile a{0.3, 0.6, 0.2, 0.35, 0.4, 0.1};
  const GaussianPile b{0.9, 0.2, 0.5, 0.25, 0.3, -0.7};
  const HeightMap base = new_flat(16, 16, 0.1, 0.0);
  EXPECT_EQ(add_pile(add_pile(base, a), b), add_pile(add_pile(base, b), a));
}

TEST(AddPile, RotationSwapsAxes) {
  // A pile rotated by 90 degrees with sigmas (a, b) equals an unrotated one with (b, a).
  const HeightMap r = add_pile(new_flat(20, 20, 0.1, 0.0), {1.0, 1.0, 0.4, 0.2, 1.0, std::numbers::pi / 2});
  const HeightMap s = add_pile(new_flat(20, 20, 0.1, 0.0), {1.0, 1.0, 0.2, 0.4, 1.0, 0.0});
  for (std::size_t i = 0; i < r.size(); ++i) EXPECT_NEAR(r.values()[i], s.values()[i], 1e-12);
}

TEST(PileVolume, ClosedFormAgainstGridSum) {
  const GaussianPile p{4.0, 4.0, 0.3, 0.5, 0.25, 0.3};
  const HeightMap m = add_pile(new_flat(160, 160, 0.05, 0.0), p);
  double sum = 0.0;
  for (double v : m.values()) sum += v * 0.05 * 0.05;
  EXPECT_NEAR(pile_volume(p), 2.0 * std::numbers::pi * 0.3 * 0.5 * 0.25, 1e-15);
  EXPECT_NEAR(sum, pile_volume(p), 1e-6);
}

TEST(DiffMap, Subtracts) {
  HeightMap h = new_flat(3, 3, 0.1, 0.0);
  const HeightMap t = new_flat(3, 3, 0.1, 0.0);
  const DiffMap zero = diff_map(h, h);
  for (double v : zero.values()) EXPECT_EQ(v, 0.0);
  h.at(1, 2) = 0.3;
  const DiffMap d = diff_map(h, t);
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(d.at(r, c), (r == 1 && c == 2) ? 0.3 : 0.0);
}

TEST(DiffMap, GeometryMismatch) {
  try {
    diff_map(new_flat(3, 3, 0.1, 0.0), new_flat(3, 4, 0.1, 0.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::geometry_mismatch);
  }
  EXPECT_THROW(diff_map(new_flat(3, 3, 0.1, 0.0), new_flat(3, 3, 0.2, 0.0)), Error);
}

TEST(ExcessVolume, HandSums) {
  DiffMap d = zero_diff(4, 4, 0.1);
  EXPECT_EQ(excess_volume(d), 0.0);
  d.at(2, 1) = 0.5;
  EXPECT_NEAR(excess_volume(d), 0.005, 1e-15);
  DiffMap e = zero_diff(2, 1, 0.1);
  e.at(0, 0) = 0.2;
  e.at(1, 0) = -0.2;
  EXPECT_NEAR(excess_volume(e), 0.2 * 0.01, 1e-15);
}

TEST(MaxExcessHeight, Clamps) {
  EXPECT_EQ(max_excess_height(zero_diff(3, 3, 1.0)), 0.0);
  const DiffMap d(1, 3, 1.0, std::vector<double>{-0.3, 0.1, 0.25});
  EXPECT_EQ(max_excess_height(d), 0.25);
  const DiffMap n(1, 2, 1.0, std::vector<double>{-0.3, -0.1});
  EXPECT_EQ(max_excess_height(n), 0.0);
}

TEST(MeanExcessHeight, AveragesPositivePart) {
  const DiffMap d(1, 4, 1.0, std::vector<double>{0.4, -0.2, 0.0, 0.2});
  EXPECT_NEAR(mean_excess_height(d), 0.15, 1e-15);
}

TEST(Downsample, StateSpaceSizes) {
  const DiffMap d = zero_diff(600, 600, 0.05);
  const std::size_t expected[] = {600, 300, 150, 75, 38};
  for (unsigned n = 0; n <= 4; ++n) {
    const DiffMap p = downsample(d, n);
    EXPECT_EQ(p.rows(), expected[n]);
    EXPECT_EQ(p.cols(), expected[n]);
  }
  EXPECT_EQ(downsample(zero_diff(75, 75, 0.4), 1).rows(), 38u);
}

TEST(Downsample, ConstantStaysConstant) {
  const DiffMap d(37, 23, 0.1, 0.125);
  for (unsigned n = 0; n <= 4; ++n) {
    const DiffMap pooled = downsample(d, n);
    for (double v : pooled.values()) EXPECT_EQ(v, 0.125);
  }
}

TEST(Downsample, MeanOfBlocksWithReplicatePadding) {
  // 3x3 pooled by 2: the last row/col are replicated into the padding.
  const DiffMap d(3, 3, 1.0, std::vector<double>{1, 2, 3, 4, 5, 6, 7, 8, 9});
  const DiffMap p = downsample(d, 1);
  ASSERT_EQ(p.rows(), 2u);
  EXPECT_DOUBLE_EQ(p.at(0, 0), (1 + 2 + 4 + 5) / 4.0);
  EXPECT_DOUBLE_EQ(p.at(0, 1), (3 + 3 + 6 + 6) / 4.0);
  EXPECT_DOUBLE_EQ(p.at(1, 0), (7 + 8 + 7 + 8) / 4.0);
  EXPECT_DOUBLE_EQ(p.at(1, 1), 9.0);
  EXPECT_DOUBLE_EQ(p.cell_size(), 2.0);
}

TEST(Downsample, PreservesMassWhenBlocksTile) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 0.3);
  for (std::size_t size : {64u, 96u, 160u}) {
    DiffMap d = zero_diff(size, size, 0.05);
    for (double& v : d.values()) v = u(rng);
    for (unsigned n = 1; n <= 4; ++n) {
      const double pooled = excess_volume(downsample(d, n));
      EXPECT_NEAR(pooled / excess_volume(d), 1.0, 1e-12) << size << " N=" << n;
    }
  }
}

TEST(EgoFov, FlatWorldIsZero) {
  const DiffMap d = zero_diff(40, 40, 0.1);
  const DiffMap o = ego_fov(d, {2.0, 2.0, 0.7}, small_fov(20, 20, 5, 10));
  EXPECT_EQ(o.rows(), 20u);
  for (double v : o.values()) EXPECT_EQ(v, 0.0);
}

TEST(EgoFov, PoseOutsideMap) {
  try {
    ego_fov(zero_diff(10, 10, 0.1), {1.5, 0.5, 0.0}, small_fov(4, 4, 1, 2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::pose_out_of_bounds);
  }
}

TEST(EgoFov, PileAheadLandsOnAnchorColumn) {
  const double cell = 0.1;
  const FovSpec spec = small_fov(60, 41, 10, 20);
  for (double heading : {0.0, std::numbers::pi / 2, 2.3, -1.1}) {
    const DozerPose pose{3.05, 3.05, heading};
    for (int k : {5, 12, 30}) {
      const double px = pose.x + k * cell * std::cos(heading);
      const double py = pose.y + k * cell * std::sin(heading);
      const HeightMap h = add_pile(new_flat(61, 61, cell, 0.0), {px, py, 0.15, 0.15, 1.0, 0.0});
      const DiffMap o = ego_fov(diff_map(h, new_flat(61, 61, cell, 0.0)), pose, spec);
      std::size_t best = 0;
      for (std::size_t i = 1; i < o.size(); ++i)
        if (o.values()[i] > o.values()[best]) best = i;
      const long r = static_cast<long>(best / o.cols());
      const long c = static_cast<long>(best % o.cols());
      EXPECT_LE(std::abs(r - (10 + k)), 1) << heading << " " << k;
      EXPECT_LE(std::abs(c - 20), 1) << heading << " " << k;
    }
  }
}

TEST(EgoFov, LeftOfHeadingIsPositiveColumn) {
  const double cell = 0.1;
  const HeightMap h = add_pile(new_flat(40, 40, cell, 0.0), {2.05, 2.55, 0.1, 0.1, 1.0, 0.0});
  // Facing +x, a pile at +y is on the left.
  const DiffMap o = ego_fov(diff_map(h, new_flat(40, 40, cell, 0.0)), {2.05, 2.05, 0.0}, small_fov(21, 21, 10, 10));
  EXPECT_NEAR(o.at(10, 15), 1.0, 1e-12);
}

TEST(EgoFov, TranslationInvariantBitwise) {
  const double cell = 0.125;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  DiffMap a = zero_diff(40, 40, cell);
  for (std::size_t r = 5; r < 20; ++r)
    for (std::size_t c = 5; c < 20; ++c) a.at(r, c) = u(rng) - 0.3;
  const std::size_t dr = 7;
  const std::size_t dc = 11;
  DiffMap b = zero_diff(40, 40, cell);
  for (std::size_t r = 0; r + dr < 40; ++r)
    for (std::size_t c = 0; c + dc < 40; ++c) b.at(r + dr, c + dc) = a.at(r, c);
  const FovSpec spec = small_fov(16, 16, 4, 8);
  for (double heading : {0.0, 0.3, 2.0}) {
    // dyadic poses keep the fractional cell offset exact
    const DozerPose pa{1.3125, 1.71875, heading};
    const DozerPose pb{1.3125 + dc * cell, 1.71875 + dr * cell, heading};
    EXPECT_EQ(ego_fov(a, pa, spec), ego_fov(b, pb, spec)) << heading;
  }
}

TEST(EgoFov, RotatingWorldAndDozerTogether) {
  // Rotation by multiples of 90 degrees about the map center maps cell centers to
  // cell centers, so the rotated world can be built exactly.
  const double cell = 0.1;
  const std::size_t n = 50;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-0.2, 0.4);
  DiffMap world = zero_diff(n, n, cell);
  for (double& v : world.values()) v = u(rng);
  const FovSpec spec = small_fov(18, 18, 4, 9);
  const DozerPose pose{2.1, 1.9, 0.35};
  const DiffMap base = ego_fov(world, pose, spec);
  const double c0 = n * cell / 2.0;
  DiffMap rotated = world;
  DozerPose rpose = pose;
  for (int quarter = 1; quarter <= 3; ++quarter) {
    // rotate +90 degrees: (x, y) -> (c0 - (y - c0), c0 + (x - c0)); cell (r, c) -> (c, n-1-r)
    DiffMap next = zero_diff(n, n, cell);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c) next.at(c, n - 1 - r) = rotated.at(r, c);
    rotated = next;
    rpose = {c0 - (rpose.y - c0), c0 + (rpose.x - c0), rpose.heading + std::numbers::pi / 2};
    const DiffMap o = ego_fov(rotated, rpose, spec);
    for (std::size_t i = 0; i < o.size(); ++i) EXPECT_NEAR(o.values()[i], base.values()[i], 1e-6) << quarter;
  }
}

TEST(EgoFov, OutsideMapReadsZero) {
  DiffMap d(10, 10, 0.1, 0.5);
  const DiffMap o = ego_fov(d, {0.05, 0.05, 0.0}, small_fov(30, 30, 15, 15));
  EXPECT_EQ(o.at(0, 0), 0.0);
  EXPECT_EQ(o.at(15, 15), 0.5);
}

TEST(QuantizeF32, RoundsToFloat) {
  const DiffMap d(1, 2, 0.05, std::vector<double>{0.1, 1.0 / 3.0});
  const DiffMap q = quantize_f32(d);
  EXPECT_EQ(q.at(0, 0), static_cast<double>(0.1f));
  EXPECT_EQ(q.at(0, 1), static_cast<double>(1.0f / 3.0f));
  EXPECT_EQ(q.cell_size(), static_cast<double>(0.05f));
  EXPECT_EQ(quantize_f32(q), q);
}
