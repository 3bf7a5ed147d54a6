#include "grading/mask.hpp"

#include <cmath>
#include <numeric>

namespace grading {

ProbabilityGrid ProbabilityGrid::uniform(std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0) throw Error(ErrorCode::invalid_dimension, "empty probability grid");
  return {rows, cols, std::vector<double>(rows * cols, 1.0 / static_cast<double>(rows * cols))};
}

double ProbabilityGrid::sum() const noexcept { return std::accumulate(prob.begin(), prob.end(), 0.0); }

GaussianMask gaussian_mask(const FovSpec& spec, double sigma_factor, double base_scale) {
  spec.validate();
  if (!(sigma_factor > 0.0) || !(base_scale > 0.0)) {
    throw Error(ErrorCode::invalid_parameter, "mask sigma factor and base scale must be positive");
  }
  GaussianMask mask;
  mask.rows = spec.pooled_rows();
  mask.cols = spec.pooled_cols();
  mask.sigma_factor = sigma_factor;
  mask.values.resize(mask.rows * mask.cols);
  const double sigma_r = static_cast<double>(mask.rows) / sigma_factor * base_scale;
  const double sigma_c = static_cast<double>(mask.cols) / sigma_factor * base_scale;
  const auto ar = static_cast<double>(spec.pooled_anchor_row());
  const auto ac = static_cast<double>(spec.pooled_anchor_col());
  for (std::size_t r = 0; r < mask.rows; ++r) {
    const double zr = (static_cast<double>(r) - ar) / sigma_r;
    for (std::size_t c = 0; c < mask.cols; ++c) {
      const double zc = (static_cast<double>(c) - ac) / sigma_c;
      mask.values[r * mask.cols + c] = std::exp(-0.5 * (zr * zr + zc * zc));
    }
  }
  return mask;
}

ProbabilityGrid apply_mask(const ProbabilityGrid& grid, const GaussianMask& mask) {
  if (grid.rows != mask.rows || grid.cols != mask.cols || grid.prob.size() != mask.values.size()) {
    throw Error(ErrorCode::geometry_mismatch, "distribution and mask grids differ");
  }
  ProbabilityGrid out = grid;
  double total = 0.0;
  for (std::size_t i = 0; i < out.prob.size(); ++i) {
    out.prob[i] = grid.prob[i] * mask.values[i];
    total += out.prob[i];
  }
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw Error(ErrorCode::degenerate_distribution, "masked distribution has no mass left");
  }
  for (double& p : out.prob) p /= total;
  return out;
}

PolicyDistribution apply_mask(const PolicyDistribution& dist, const GaussianMask& mask) {
  return {apply_mask(dist.destination, mask), apply_mask(dist.start, mask)};
}

}  // namespace grading
