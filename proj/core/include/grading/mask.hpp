#pragma once

#include <cstddef>
#include <vector>

#include "grading/heightmap.hpp"

namespace grading {

/// Probabilities over an m^ x n^ pixel grid, row-major.
struct ProbabilityGrid {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> prob;

  static ProbabilityGrid uniform(std::size_t rows, std::size_t cols);
  double at(std::size_t r, std::size_t c) const { return prob[r * cols + c]; }
  double sum() const noexcept;

  friend bool operator==(const ProbabilityGrid&, const ProbabilityGrid&) = default;
};

/// One categorical per sub-action: the push destination p and the next start s.
struct PolicyDistribution {
  ProbabilityGrid destination;
  ProbabilityGrid start;

  friend bool operator==(const PolicyDistribution&, const PolicyDistribution&) = default;
};

struct GaussianMask {
  std::size_t rows = 0;
  std::size_t cols = 0;
  double sigma_factor = 1.0;
  std::vector<double> values;

  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

/// exp(-1/2 [((r - ar)/sr)^2 + ((c - ac)/sc)^2]) over the pooled grid, with
/// sr = rows / sigma_factor * base_scale (likewise sc) and the anchor at the
/// pooled dozer pixel.
GaussianMask gaussian_mask(const FovSpec& spec, double sigma_factor, double base_scale);

/// Multiplies each head by the mask and renormalizes it.
PolicyDistribution apply_mask(const PolicyDistribution& dist, const GaussianMask& mask);
ProbabilityGrid apply_mask(const ProbabilityGrid& grid, const GaussianMask& mask);

}  // namespace grading
