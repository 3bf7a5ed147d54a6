#pragma once

#include <variant>

#include "grading/heightmap.hpp"

namespace grading {

/// Blade, drive and soil constants. None of these come from measurement;
/// they are tunables loaded from the flat config file.
struct DozerParams {
  double blade_width = 1.2;      // m, swath width
  double blade_capacity = 0.3;   // m^3
  double v_max = 1.0;            // m/s, empty blade
  double v_min = 0.1;            // m/s, floor of the loaded speed
  double omega = 0.5;            // rad/s, turn rate
  double alpha = 0.7;            // speed loss at full blade
  double spill_ratio = 0.5;      // share of overflow pushed to the flanks
  double deposit_rate = 0.03;    // m^3 released per cell travelled

  void validate() const;

  friend bool operator==(const DozerParams&, const DozerParams&) = default;
};

struct DozerState {
  DozerPose pose;
  double blade_load = 0.0;  // m^3
  DozerParams params;

  friend bool operator==(const DozerState&, const DozerState&) = default;
};

struct Rotate {
  double angle = 0.0;  // rad, signed
  friend bool operator==(const Rotate&, const Rotate&) = default;
};

/// Forward drive. With the blade down the dozer grades; with the blade up it
/// only travels (the repositioning leg).
struct Forward {
  double distance = 0.0;  // m, >= 0
  bool blade_down = true;
  friend bool operator==(const Forward&, const Forward&) = default;
};

struct Reverse {
  double distance = 0.0;  // m, >= 0
  friend bool operator==(const Reverse&, const Reverse&) = default;
};

using LowLevelAction = std::variant<Rotate, Forward, Reverse>;

struct StepOutcome {
  DozerState state;
  HeightMap map;
  double moved_volume = 0.0;  // m^3 cut from the ground into the blade
  double spilled_out = 0.0;   // m^3 that left the map
  double duration = 0.0;      // s
};

/// Wraps an angle to (-pi, pi].
double wrap_angle(double angle) noexcept;

/// v = max(v_min, v_max * (1 - alpha * load / capacity)).
double velocity(const DozerState& state) noexcept;

StepOutcome apply_rotate(const DozerState& state, const HeightMap& map, double angle);
StepOutcome apply_reverse(const DozerState& state, const HeightMap& map, double distance);
StepOutcome apply_forward_travel(const DozerState& state, const HeightMap& map, double distance);

/// Drives `distance` meters along the heading with the blade down.
///
/// The path is split into ceil(distance / cell) equal sub-steps. Per sub-step
/// the swath is every cell whose center lies within blade_width/2 of the
/// heading line and whose along-track coordinate falls in the sub-step:
///  - all excess above `target` in the swath is cut into the blade;
///  - if the blade then exceeds capacity, spill_ratio of the overflow goes in
///    equal halves to the two flank cells (or off the map) and the rest is
///    dropped back on the swath, filling below-target cells first;
///  - if no swath cell was above target, up to min(load, deposit_rate) is
///    released into the swath's deficit below target.
/// Ground volume + blade load + spilled_out is conserved.
StepOutcome apply_forward_grading(const DozerState& state, const HeightMap& map,
                                  const HeightMap& target, double distance);

StepOutcome apply_action(const DozerState& state, const HeightMap& map, const HeightMap& target,
                         const LowLevelAction& action);

/// Sum of heights times cell area, in m^3.
double ground_volume(const HeightMap& map) noexcept;

}  // namespace grading
