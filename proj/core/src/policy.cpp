#include "grading/policy.hpp"

#include "grading/rng.hpp"

namespace grading {

PolicyAction SnpPolicy::act(const DiffMap& observation, const GradingEnv& env) {
  const OracleDecision d = oracle_act(observation, oracle_view(env), state_);
  return {d.action, d.stuck};
}

Pixel sample_pixel(const ProbabilityGrid& grid, double u) {
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < grid.prob.size(); ++i) {
    if (grid.prob[i] <= 0.0) continue;
    last = i;
    acc += grid.prob[i];
    if (u < acc) break;
  }
  return {static_cast<std::int64_t>(last / grid.cols), static_cast<std::int64_t>(last % grid.cols)};
}

ProbabilityGrid masked_operable_distribution(const GradingEnv& env) {
  const Config& cfg = env.config();
  const FovSpec& fov = cfg.fov;
  ProbabilityGrid grid{fov.pooled_rows(), fov.pooled_cols(), {}};
  grid.prob.assign(grid.rows * grid.cols, 0.0);
  const Rect box = env.operable();
  for (std::size_t r = 0; r < grid.rows; ++r) {
    for (std::size_t c = 0; c < grid.cols; ++c) {
      const Pixel px{static_cast<std::int64_t>(r), static_cast<std::int64_t>(c)};
      const WorldPoint w = pixel_to_world(px, env.dozer().pose, fov, env.map().cell_size());
      if (box.contains(w.x, w.y)) grid.prob[r * grid.cols + c] = 1.0;
    }
  }
  return apply_mask(grid, gaussian_mask(fov, cfg.mask_sigma_factor, cfg.mask_base_scale));
}

void RandomPolicy::begin(const GradingEnv&, const ScenarioSpec&, std::uint64_t seed) {
  rng_state_ = SplitMix64(seed ^ 0x5DEECE66DULL).next();
}

PolicyAction RandomPolicy::act(const DiffMap&, const GradingEnv& env) {
  const ProbabilityGrid dist = masked_operable_distribution(env);
  SplitMix64 rng(rng_state_);
  const Pixel p = sample_pixel(dist, rng.uniform01());
  const Pixel s = sample_pixel(dist, rng.uniform01());
  rng_state_ = rng.state();
  return {WaypointAction{p, s}, false};
}

PolicyAction ScriptedPolicy::act(const DiffMap&, const GradingEnv&) {
  if (next_ >= actions_.size()) return {};
  return {actions_[next_++], false};
}

}  // namespace grading
