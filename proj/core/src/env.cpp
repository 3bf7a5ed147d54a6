#include "grading/env.hpp"

#include <cmath>
#include <utility>

namespace grading {

double compose_reward(const RewardWeights& w, double f_v, double f_t, double f_h, bool done,
                      bool failed) noexcept {
  return w.volume * f_v - w.time * f_t + w.height * f_h + (done ? w.done : 0.0) -
         (failed ? w.fail : 0.0);
}

double compose_reward(const RewardWeights& w, const RewardComponents& c) noexcept {
  return w.volume * c.f_v - w.time * c.f_t + w.height * c.f_h + c.done_bonus - c.fail_penalty;
}

double diff_reward(const DiffMap& prev, const DiffMap& curr) {
  if (!prev.same_geometry(curr)) {
    throw Error(ErrorCode::geometry_mismatch, "difference maps differ in geometry");
  }
  return excess_volume(prev) - excess_volume(curr);
}

bool check_done(const DiffMap& d, double epsilon) noexcept { return max_excess_height(d) <= epsilon; }

WorldPoint pixel_to_world(const Pixel& pixel, const DozerPose& pose, const FovSpec& spec,
                          double cell_size) noexcept {
  const double step = static_cast<double>(spec.pool_factor()) * cell_size;
  const double along = static_cast<double>(pixel.row - static_cast<std::int64_t>(spec.pooled_anchor_row())) * step;
  const double lateral = static_cast<double>(pixel.col - static_cast<std::int64_t>(spec.pooled_anchor_col())) * step;
  const double c = std::cos(pose.heading);
  const double s = std::sin(pose.heading);
  return {pose.x + along * c - lateral * s, pose.y + along * s + lateral * c};
}

Pixel world_to_pixel(const WorldPoint& point, const DozerPose& pose, const FovSpec& spec,
                     double cell_size) noexcept {
  const double step = static_cast<double>(spec.pool_factor()) * cell_size;
  const double dx = point.x - pose.x;
  const double dy = point.y - pose.y;
  const double c = std::cos(pose.heading);
  const double s = std::sin(pose.heading);
  const double along = (dx * c + dy * s) / step;
  const double lateral = (-dx * s + dy * c) / step;
  return {static_cast<std::int64_t>(std::llround(along)) + static_cast<std::int64_t>(spec.pooled_anchor_row()),
          static_cast<std::int64_t>(std::llround(lateral)) + static_cast<std::int64_t>(spec.pooled_anchor_col())};
}

bool pixel_in_grid(const Pixel& pixel, const FovSpec& spec) noexcept {
  return pixel.row >= 0 && pixel.col >= 0 &&
         pixel.row < static_cast<std::int64_t>(spec.pooled_rows()) &&
         pixel.col < static_cast<std::int64_t>(spec.pooled_cols());
}

Rect operable_area(const HeightMap& map, double margin) noexcept {
  return {margin, margin, map.width() - margin, map.length() - margin};
}

namespace {

constexpr double kSnap = 1e-9;

double snap(double v) noexcept { return std::abs(v) < kSnap ? 0.0 : v; }

// Heading change that points `from` at `to`; zero if the points coincide.
double turn_towards(const DozerPose& from, const WorldPoint& to) noexcept {
  const double dx = to.x - from.x;
  const double dy = to.y - from.y;
  if (std::hypot(dx, dy) < kSnap) return 0.0;
  return snap(wrap_angle(std::atan2(dy, dx) - from.heading));
}

WorldPoint resolve(const Pixel& pixel, const DozerPose& pose, const LegContext& ctx, const char* which) {
  if (!pixel_in_grid(pixel, ctx.fov)) {
    throw Error(ErrorCode::unreachable_pixel, std::string(which) + " pixel lies off the observation grid");
  }
  const WorldPoint w = pixel_to_world(pixel, pose, ctx.fov, ctx.cell_size);
  if (!ctx.operable.contains(w.x, w.y)) {
    throw Error(ErrorCode::unreachable_pixel, std::string(which) + " pixel maps outside the operable area");
  }
  return w;
}

}  // namespace

std::array<LowLevelAction, 6> plan_leg(const DozerPose& pose, const WaypointAction& action,
                                       const LegContext& ctx) {
  const WorldPoint p = resolve(action.p, pose, ctx, "destination");
  const WorldPoint s = resolve(action.s, pose, ctx, "start");

  DozerPose at = pose;
  const double face_p = turn_towards(at, p);
  at.heading = wrap_angle(at.heading + face_p);
  const double push = snap(std::hypot(p.x - pose.x, p.y - pose.y));

  // after reversing the dozer is back at B = pose, still facing p
  const double face_s = turn_towards(at, s);
  at.heading = wrap_angle(at.heading + face_s);
  const double travel = snap(std::hypot(s.x - pose.x, s.y - pose.y));
  const double restore = snap(wrap_angle(ctx.nominal_heading - at.heading));

  return {Rotate{face_p}, Forward{push, true}, Reverse{push},
          Rotate{face_s}, Forward{travel, false}, Rotate{restore}};
}

DiffMap observe(const HeightMap& current, const HeightMap& target, const DozerPose& pose,
                const FovSpec& spec) {
  return quantize_f32(downsample(ego_fov(current, target, pose, spec), spec.downsample_exponent));
}

GradingEnv::GradingEnv(Config config) : config_(std::move(config)) { config_.validate(); }

DiffMap GradingEnv::reset(const ScenarioSpec& spec, std::uint64_t seed) {
  return reset(generate(spec, seed, config_));
}

DiffMap GradingEnv::reset(Scenario scenario) {
  if (!scenario.initial.same_geometry(scenario.target)) {
    throw Error(ErrorCode::invalid_scenario, "initial and target maps differ in geometry");
  }
  if (!pose_in_bounds(scenario.initial, scenario.dozer.pose)) {
    throw Error(ErrorCode::invalid_scenario, "dozer starts outside the map");
  }
  scenario_ = std::move(scenario);
  map_ = scenario_.initial;
  target_ = scenario_.target;
  dozer_ = scenario_.dozer;
  next_dump_ = 0;
  steps_ = 0;
  active_ = true;
  failed_ = false;
  total_duration_ = 0.0;
  spilled_out_ = 0.0;
  dumped_in_ = 0.0;
  done_ = check_done(delta(), config_.epsilon_done);
  return observation();
}

void GradingEnv::require_active() const {
  if (!active_) throw Error(ErrorCode::episode_finished, "environment has not been reset");
  if (terminated()) throw Error(ErrorCode::episode_finished, "episode already terminated");
}

LegContext GradingEnv::leg_context() const {
  return {config_.fov, map_.cell_size(), scenario_.nominal_heading, operable()};
}

std::array<LowLevelAction, 6> GradingEnv::plan(const WaypointAction& action) const {
  return plan_leg(dozer_.pose, action, leg_context());
}

DiffMap GradingEnv::observation() const { return observe(map_, target_, dozer_.pose, config_.fov); }

StepOutcome GradingEnv::execute(const LowLevelAction& action) {
  StepOutcome out = apply_action(dozer_, map_, target_, action);
  dozer_ = out.state;
  map_ = out.map;
  spilled_out_ += out.spilled_out;
  total_duration_ += out.duration;
  return out;
}

std::size_t GradingEnv::apply_dumps(std::size_t step_index) {
  std::size_t added = 0;
  const double before = ground_volume(map_);
  const double fx = std::cos(scenario_.nominal_heading);
  const double fy = std::sin(scenario_.nominal_heading);
  for (const auto& event : scenario_.dumps) {
    if (event.step != step_index) continue;
    for (GaussianPile pile : event.piles) {
      const double clear = 0.5 * scenario_.spacing;
      if (std::hypot(pile.center_x - dozer_.pose.x, pile.center_y - dozer_.pose.y) < clear) {
        pile.center_x += scenario_.spacing * fx;
        pile.center_y += scenario_.spacing * fy;
      }
      map_ = add_pile(std::move(map_), pile);
      ++added;
    }
  }
  if (added > 0) dumped_in_ += ground_volume(map_) - before;
  return added;
}

double GradingEnv::conserved_quantity() const noexcept {
  return ground_volume(map_) + dozer_.blade_load + spilled_out_ - dumped_in_;
}

StepResult GradingEnv::step(const WaypointAction& action) {
  require_active();
  StepResult result;
  const DiffMap before = delta();

  std::array<LowLevelAction, 6> leg;
  try {
    leg = plan(action);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::unreachable_pixel) throw;
    ++steps_;
    failed_ = true;
    result.failed = true;
    result.components.fail_penalty = config_.weights.fail;
    result.reward = compose_reward(config_.weights, 0.0, 0.0, 0.0, false, true);
    result.info.reason = "unreachable";
    result.observation = observation();
    return result;
  }

  for (const auto& a : leg) {
    const StepOutcome out = execute(a);
    result.info.duration += out.duration;
    result.info.moved_volume += out.moved_volume;
    result.info.spilled_out += out.spilled_out;
  }
  const DiffMap after_leg = delta();
  ++steps_;

  const double excess_before_dump = excess_volume(after_leg);
  const double ground_before_dump = dumped_in_;
  result.info.piles_dumped = apply_dumps(steps_);
  const DiffMap after = result.info.piles_dumped > 0 ? delta() : after_leg;
  result.info.dumped_volume = dumped_in_ - ground_before_dump;
  result.info.dumped_excess = excess_volume(after) - excess_before_dump;

  done_ = check_done(after, config_.epsilon_done);
  if (!done_ && steps_ >= config_.timeout_steps) {
    failed_ = true;
    result.info.reason = "timeout";
  } else if (done_) {
    result.info.reason = "done";
  }

  auto& c = result.components;
  c.f_v = diff_reward(before, after_leg);
  c.f_t = result.info.duration;
  c.f_h = max_excess_height(before) - max_excess_height(after_leg);
  c.done_bonus = done_ ? config_.weights.done : 0.0;
  c.fail_penalty = failed_ ? config_.weights.fail : 0.0;
  result.reward = compose_reward(config_.weights, c.f_v, c.f_t, c.f_h, done_, failed_);
  result.done = done_;
  result.failed = failed_;
  result.observation = observation();
  return result;
}

}  // namespace grading
