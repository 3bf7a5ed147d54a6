#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "grading/config.hpp"
#include "grading/dynamics.hpp"
#include "grading/heightmap.hpp"
#include "grading/mask.hpp"
#include "grading/scenario.hpp"

namespace grading {

/// Pixel of the down-sampled observation grid. Signed so that scripted
/// callers can name pixels off the grid; those are unreachable.
struct Pixel {
  std::int64_t row = 0;
  std::int64_t col = 0;
  friend bool operator==(const Pixel&, const Pixel&) = default;
};

/// High-level action: push destination p, then start point s of the next push.
struct WaypointAction {
  Pixel p;
  Pixel s;
  friend bool operator==(const WaypointAction&, const WaypointAction&) = default;
};

struct RewardComponents {
  double f_v = 0.0;  // m^3 of excess removed this step
  double f_t = 0.0;  // s, leg duration
  double f_h = 0.0;  // m, drop of the max excess height
  double done_bonus = 0.0;
  double fail_penalty = 0.0;
  friend bool operator==(const RewardComponents&, const RewardComponents&) = default;
};

struct StepInfo {
  double duration = 0.0;
  double moved_volume = 0.0;
  double spilled_out = 0.0;
  double dumped_volume = 0.0;  // ground volume added by dumps after the leg
  double dumped_excess = 0.0;  // excess volume added by those dumps
  std::size_t piles_dumped = 0;
  std::string reason;  // "", "done", "unreachable", "timeout"
};

struct StepResult {
  DiffMap observation;
  double reward = 0.0;
  RewardComponents components;
  bool done = false;
  bool failed = false;
  StepInfo info;
};

/// Axis-aligned world rectangle, inclusive bounds.
struct Rect {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;
  bool contains(double x, double y) const noexcept {
    return x >= x_min && x <= x_max && y >= y_min && y <= y_max;
  }
};

/// lv*f_v - lt*f_t + lh*f_h + ld*[done] - lf*[failed], left to right.
double compose_reward(const RewardWeights& w, double f_v, double f_t, double f_h, bool done,
                      bool failed) noexcept;
/// Same sum from stored components.
double compose_reward(const RewardWeights& w, const RewardComponents& c) noexcept;

/// excess_volume(prev) - excess_volume(curr).
double diff_reward(const DiffMap& prev, const DiffMap& curr);

/// max_excess_height(d) <= epsilon (inclusive).
bool check_done(const DiffMap& d, double epsilon) noexcept;

struct WorldPoint {
  double x = 0.0;
  double y = 0.0;
};

/// Center of a down-sampled pixel in world coordinates: the anchor pixel maps
/// to the dozer, each pixel row is 2^N cells along the heading and each pixel
/// column 2^N cells to the left.
WorldPoint pixel_to_world(const Pixel& pixel, const DozerPose& pose, const FovSpec& spec,
                          double cell_size) noexcept;
/// Nearest pixel to a world point (may lie off the grid).
Pixel world_to_pixel(const WorldPoint& point, const DozerPose& pose, const FovSpec& spec,
                     double cell_size) noexcept;

bool pixel_in_grid(const Pixel& pixel, const FovSpec& spec) noexcept;

/// World rectangle the dozer may be sent to: the map shrunk by `margin`.
Rect operable_area(const HeightMap& map, double margin) noexcept;

struct LegContext {
  FovSpec fov;
  double cell_size = 0.05;
  double nominal_heading = 0.0;
  Rect operable;
};

/// The six-step leg realizing a waypoint action from `pose`:
/// rotate to face p, grade forward to p, reverse to the start B, rotate to
/// face s, travel forward (blade up) to s, rotate to the nominal heading.
/// Throws unreachable_pixel if either pixel is off the grid or maps outside
/// the operable area.
std::array<LowLevelAction, 6> plan_leg(const DozerPose& pose, const WaypointAction& action,
                                       const LegContext& ctx);

/// Down-sampled egocentric observation as stored and sent on the wire.
DiffMap observe(const HeightMap& current, const HeightMap& target, const DozerPose& pose,
                const FovSpec& spec);

/// Grading MDP over waypoint actions. Single-threaded; copying forks the
/// complete world state.
class GradingEnv {
 public:
  explicit GradingEnv(Config config = {});

  DiffMap reset(const ScenarioSpec& spec, std::uint64_t seed);
  DiffMap reset(Scenario scenario);

  StepResult step(const WaypointAction& action);

  /// Executes one low-level action on the world, outside the MDP step
  /// accounting (used by scripted drivers and conservation checks).
  StepOutcome execute(const LowLevelAction& action);

  /// Adds the piles scheduled at `step_index`; returns how many were added.
  std::size_t apply_dumps(std::size_t step_index);

  std::array<LowLevelAction, 6> plan(const WaypointAction& action) const;
  DiffMap observation() const;
  GradingEnv fork() const { return *this; }

  const Config& config() const noexcept { return config_; }
  const HeightMap& map() const noexcept { return map_; }
  const HeightMap& target() const noexcept { return target_; }
  const DozerState& dozer() const noexcept { return dozer_; }
  DiffMap delta() const { return diff_map(map_, target_); }
  const Scenario& scenario() const noexcept { return scenario_; }
  LegContext leg_context() const;
  Rect operable() const noexcept { return operable_area(map_, config_.operable_margin); }

  std::size_t step_count() const noexcept { return steps_; }
  bool done() const noexcept { return done_; }
  bool failed() const noexcept { return failed_; }
  bool terminated() const noexcept { return done_ || failed_; }
  bool active() const noexcept { return active_; }

  double total_duration() const noexcept { return total_duration_; }
  double spilled_out() const noexcept { return spilled_out_; }
  double dumped_in() const noexcept { return dumped_in_; }

  /// ground volume + blade load + spilled out - dumped in. Constant over any
  /// sequence of actions and dumps.
  double conserved_quantity() const noexcept;

 private:
  void require_active() const;

  Config config_;
  Scenario scenario_;
  HeightMap map_;
  HeightMap target_;
  DozerState dozer_;
  std::size_t next_dump_ = 0;
  std::size_t steps_ = 0;
  bool active_ = false;
  bool done_ = false;
  bool failed_ = false;
  double total_duration_ = 0.0;
  double spilled_out_ = 0.0;
  double dumped_in_ = 0.0;
};

}  // namespace grading
