#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>

#include "grading/mask.hpp"

using namespace grading;

namespace {

FovSpec grid5() {
  FovSpec s;
  s.rows = 5;
  s.cols = 5;
  s.anchor_row = 2;
  s.anchor_col = 2;
  s.downsample_exponent = 0;
  return s;
}

std::size_t support(const GaussianMask& m) {
  std::size_t n = 0;
  for (double v : m.values) n += v > 0.5 ? 1 : 0;
  return n;
}

}  // namespace

TEST(GaussianMask, AnchorIsOneAndMaximal) {
  const FovSpec spec;  // 600x600, N = 3
  for (double ls : {0.5, 1.0, 2.0, 3.0, 4.0, 7.5}) {
    const GaussianMask m = gaussian_mask(spec, ls, 0.5);
    ASSERT_EQ(m.rows, 75u);
    ASSERT_EQ(m.cols, 75u);
    EXPECT_EQ(m.at(18, 37), 1.0);
    for (double v : m.values) {
      EXPECT_GT(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(GaussianMask, MatchesFormula) {
  const FovSpec spec;
  const GaussianMask m = gaussian_mask(spec, 3.0, 0.5);
  const double sr = 75.0 / 3.0 * 0.5;
  for (std::size_t r : {0u, 10u, 18u, 40u, 74u}) {
    for (std::size_t c : {0u, 20u, 37u, 74u}) {
      const double zr = (static_cast<double>(r) - 18.0) / sr;
      const double zc = (static_cast<double>(c) - 37.0) / sr;
      EXPECT_NEAR(m.at(r, c), std::exp(-0.5 * (zr * zr + zc * zc)), 1e-15);
    }
  }
}

TEST(GaussianMask, SymmetricAboutAnchor) {
  const GaussianMask m = gaussian_mask(FovSpec{}, 2.0, 0.5);
  for (std::size_t k = 1; k <= 18; ++k) {
    EXPECT_EQ(m.at(18 - k, 37), m.at(18 + k, 37));
    EXPECT_EQ(m.at(18, 37 - k), m.at(18, 37 + k));
  }
}

TEST(GaussianMask, SupportNestsAsFactorGrows) {
  const FovSpec spec;
  std::size_t prev = spec.pooled_rows() * spec.pooled_cols() + 1;
  for (double ls : {1.0, 2.0, 3.0, 4.0}) {
    const GaussianMask m = gaussian_mask(spec, ls, 0.5);
    const std::size_t n = support(m);
    EXPECT_LT(n, prev) << ls;
    prev = n;
    if (ls > 1.0) {
      const GaussianMask wider = gaussian_mask(spec, ls - 1.0, 0.5);
      for (std::size_t i = 0; i < m.values.size(); ++i)
        if (m.values[i] > 0.5) {
          EXPECT_GT(wider.values[i], 0.5);
        }
    }
  }
}

TEST(GaussianMask, RejectsNonPositiveFactor) {
  EXPECT_THROW(gaussian_mask(FovSpec{}, 0.0, 0.5), Error);
  EXPECT_THROW(gaussian_mask(FovSpec{}, -1.0, 0.5), Error);
}

TEST(ApplyMask, UniformBecomesMaskShape) {
  const FovSpec spec = grid5();
  const GaussianMask m = gaussian_mask(spec, 2.0, 0.5);
  const ProbabilityGrid g = apply_mask(ProbabilityGrid::uniform(5, 5), m);
  double total = 0.0;
  for (double v : m.values) total += v;
  for (std::size_t i = 0; i < 25; ++i) EXPECT_NEAR(g.prob[i], m.values[i] / total, 1e-15);
  EXPECT_NEAR(g.sum(), 1.0, 1e-12);
}

TEST(ApplyMask, PointMassAtAnchorUnchanged) {
  ProbabilityGrid g{5, 5, std::vector<double>(25, 0.0)};
  g.prob[2 * 5 + 2] = 1.0;
  const PolicyDistribution d{g, g};
  EXPECT_EQ(apply_mask(d, gaussian_mask(grid5(), 4.0, 0.5)), d);
}

TEST(ApplyMask, DegenerateWhenAllMassUnderflows) {
  ProbabilityGrid g{5, 5, std::vector<double>(25, 0.0)};
  g.prob[0] = 1e-320;
  try {
    apply_mask(g, gaussian_mask(grid5(), 40.0, 0.5));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::degenerate_distribution);
  }
}

TEST(ApplyMask, GeometryMismatch) {
  EXPECT_THROW(apply_mask(ProbabilityGrid::uniform(4, 5), gaussian_mask(grid5(), 1.0, 0.5)), Error);
}

TEST(ApplyMask, ArgmaxMovesTowardAnchorAsFactorGrows) {
  // Uniform background plus a spike at a far corner; enumerate the masked argmax.
  ProbabilityGrid g{5, 5, std::vector<double>(25, 1.0)};
  g.prob[0] = 2.0;
  const double total = 26.0;
  for (double& v : g.prob) v /= total;

  auto oracle_argmax = [&](double ls) {
    const double s = 5.0 / ls * 0.5;
    std::size_t best = 0;
    double best_v = -1.0;
    for (std::size_t r = 0; r < 5; ++r) {
      for (std::size_t c = 0; c < 5; ++c) {
        const double zr = (static_cast<double>(r) - 2.0) / s;
        const double zc = (static_cast<double>(c) - 2.0) / s;
        const double v = g.prob[r * 5 + c] * std::exp(-0.5 * (zr * zr + zc * zc));
        if (v > best_v) {
          best_v = v;
          best = r * 5 + c;
        }
      }
    }
    return best;
  };
  auto argmax = [](const ProbabilityGrid& p) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < p.prob.size(); ++i)
      if (p.prob[i] > p.prob[best]) best = i;
    return best;
  };
  auto dist = [](std::size_t i) { return std::abs(static_cast<int>(i / 5) - 2) + std::abs(static_cast<int>(i % 5) - 2); };

  int prev = 100;
  for (double ls : {1.0, 2.0, 3.0, 4.0}) {
    const std::size_t got = argmax(apply_mask(g, gaussian_mask(grid5(), ls, 0.5)));
    EXPECT_EQ(got, oracle_argmax(ls)) << ls;
    EXPECT_LE(dist(got), prev);
    prev = dist(got);
  }
  EXPECT_EQ(argmax(apply_mask(g, gaussian_mask(grid5(), 1.0, 0.5))), 0u);
  EXPECT_EQ(argmax(apply_mask(g, gaussian_mask(grid5(), 4.0, 0.5))), 12u);
}
