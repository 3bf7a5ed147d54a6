#include "grading/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace grading {

void DozerParams::validate() const {
  const bool ok = blade_width > 0.0 && blade_capacity > 0.0 && v_max > 0.0 && v_min > 0.0 &&
                  v_min < v_max && omega > 0.0 && alpha >= 0.0 && spill_ratio >= 0.0 &&
                  spill_ratio <= 1.0 && deposit_rate >= 0.0;
  if (!ok) throw Error(ErrorCode::invalid_config, "inconsistent dozer parameters");
}

double wrap_angle(double angle) noexcept {
  double a = std::remainder(angle, 2.0 * std::numbers::pi);
  if (a <= -std::numbers::pi) a += 2.0 * std::numbers::pi;
  return a;
}

double velocity(const DozerState& state) noexcept {
  const auto& p = state.params;
  const double fill = state.blade_load / p.blade_capacity;
  return std::max(p.v_min, p.v_max * (1.0 - p.alpha * fill));
}

double ground_volume(const HeightMap& map) noexcept {
  // Neumaier-compensated sum
  double sum = 0.0;
  double carry = 0.0;
  for (double v : map.values()) {
    const double t = sum + v;
    carry += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  return (sum + carry) * map.cell_area();
}

namespace {

void require_distance(double distance) {
  if (!(distance >= 0.0) || !std::isfinite(distance)) {
    throw Error(ErrorCode::out_of_bounds, "drive distance must be finite and non-negative");
  }
}

DozerPose advance(const DozerPose& pose, double distance) noexcept {
  return {pose.x + distance * std::cos(pose.heading), pose.y + distance * std::sin(pose.heading),
          pose.heading};
}

void require_inside(const HeightMap& map, const DozerPose& pose) {
  if (!pose_in_bounds(map, pose)) {
    throw Error(ErrorCode::out_of_bounds, "dozer would leave the map");
  }
}

struct CellRef {
  std::size_t row;
  std::size_t col;
};

// Distributes `volume` over the cells, first raising cells that are below
// target (proportionally to their deficit), then spreading any remainder
// evenly. Returns nothing; every bit of volume lands in the map.
void drop_fill_first(HeightMap& map, const HeightMap& target, const std::vector<CellRef>& cells,
                     double volume) {
  if (cells.empty() || volume <= 0.0) return;
  const double area = map.cell_area();
  double deficit = 0.0;
  for (const auto& c : cells) {
    deficit += std::max(target.at(c.row, c.col) - map.at(c.row, c.col), 0.0) * area;
  }
  if (deficit >= volume) {
    const double share = volume / deficit;
    for (const auto& c : cells) {
      const double gap = std::max(target.at(c.row, c.col) - map.at(c.row, c.col), 0.0);
      map.at(c.row, c.col) += gap * share;
    }
    return;
  }
  const double rest = (volume - deficit) / (area * static_cast<double>(cells.size()));
  for (const auto& c : cells) {
    const double gap = std::max(target.at(c.row, c.col) - map.at(c.row, c.col), 0.0);
    map.at(c.row, c.col) += gap + rest;
  }
}

}  // namespace

StepOutcome apply_rotate(const DozerState& state, const HeightMap& map, double angle) {
  StepOutcome out{state, map, 0.0, 0.0, 0.0};
  if (angle == 0.0) return out;
  out.state.pose.heading = wrap_angle(state.pose.heading + angle);
  out.duration = std::abs(angle) / state.params.omega;
  return out;
}

StepOutcome apply_reverse(const DozerState& state, const HeightMap& map, double distance) {
  require_distance(distance);
  StepOutcome out{state, map, 0.0, 0.0, 0.0};
  if (distance == 0.0) return out;
  out.state.pose = advance(state.pose, -distance);
  require_inside(map, out.state.pose);
  // the blade is raised while reversing
  out.duration = distance / state.params.v_max;
  return out;
}

StepOutcome apply_forward_travel(const DozerState& state, const HeightMap& map, double distance) {
  require_distance(distance);
  StepOutcome out{state, map, 0.0, 0.0, 0.0};
  if (distance == 0.0) return out;
  out.state.pose = advance(state.pose, distance);
  require_inside(map, out.state.pose);
  out.duration = distance / velocity(state);
  return out;
}

StepOutcome apply_forward_grading(const DozerState& state, const HeightMap& map,
                                  const HeightMap& target, double distance) {
  require_distance(distance);
  if (!map.same_geometry(target)) {
    throw Error(ErrorCode::geometry_mismatch, "map and target differ in geometry");
  }
  StepOutcome out{state, map, 0.0, 0.0, 0.0};
  if (distance == 0.0) return out;
  const DozerPose end = advance(state.pose, distance);
  require_inside(map, end);

  const auto& p = state.params;
  HeightMap& ground = out.map;
  const double cell = map.cell_size();
  const double area = map.cell_area();
  const double half_width = 0.5 * p.blade_width;
  const double dir_x = std::cos(state.pose.heading);
  const double dir_y = std::sin(state.pose.heading);
  const double left_x = -dir_y;
  const double left_y = dir_x;
  const double x0 = state.pose.x;
  const double y0 = state.pose.y;

  const auto substeps = static_cast<std::size_t>(std::max(1.0, std::ceil(distance / cell - 1e-9)));
  const double step_len = distance / static_cast<double>(substeps);
  const auto max_row = static_cast<std::int64_t>(map.rows()) - 1;
  const auto max_col = static_cast<std::int64_t>(map.cols()) - 1;

  double load = state.blade_load;
  std::vector<CellRef> swath;
  for (std::size_t k = 1; k <= substeps; ++k) {
    const double t0 = step_len * static_cast<double>(k - 1);
    const double t1 = step_len * static_cast<double>(k);
    {
      DozerState at_step = state;
      at_step.blade_load = load;
      out.duration += step_len / velocity(at_step);
    }

    // candidate cells: bounding box of the swept rectangle
    const double reach = half_width + cell;
    const double ax = x0 + t0 * dir_x;
    const double ay = y0 + t0 * dir_y;
    const double bx = x0 + t1 * dir_x;
    const double by = y0 + t1 * dir_y;
    const auto c_lo = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor((std::min(ax, bx) - reach) / cell)));
    const auto c_hi = std::min<std::int64_t>(max_col, static_cast<std::int64_t>(std::floor((std::max(ax, bx) + reach) / cell)));
    const auto r_lo = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor((std::min(ay, by) - reach) / cell)));
    const auto r_hi = std::min<std::int64_t>(max_row, static_cast<std::int64_t>(std::floor((std::max(ay, by) + reach) / cell)));

    swath.clear();
    for (auto r = r_lo; r <= r_hi; ++r) {
      const double cy = (static_cast<double>(r) + 0.5) * cell - y0;
      for (auto c = c_lo; c <= c_hi; ++c) {
        const double cx = (static_cast<double>(c) + 0.5) * cell - x0;
        const double along = cx * dir_x + cy * dir_y;
        const double lateral = cx * left_x + cy * left_y;
        const bool in_step = (k == 1) ? (along >= t0 && along <= t1) : (along > t0 && along <= t1);
        if (in_step && std::abs(lateral) <= half_width) {
          swath.push_back({static_cast<std::size_t>(r), static_cast<std::size_t>(c)});
        }
      }
    }

    double cut = 0.0;
    for (const auto& c : swath) {
      double& h = ground.at(c.row, c.col);
      const double goal = target.at(c.row, c.col);
      if (h > goal) {
        cut += (h - goal) * area;
        h = goal;
      }
    }
    load += cut;
    out.moved_volume += cut;

    if (load > p.blade_capacity) {
      const double overflow = load - p.blade_capacity;
      load = p.blade_capacity;
      const double to_flanks = p.spill_ratio * overflow;
      const double to_trail = overflow - to_flanks;
      for (double side : {1.0, -1.0}) {
        const double offset = side * (half_width + cell);
        const double fx = bx + offset * left_x;
        const double fy = by + offset * left_y;
        const auto fc = static_cast<std::int64_t>(std::floor(fx / cell));
        const auto fr = static_cast<std::int64_t>(std::floor(fy / cell));
        if (fc < 0 || fr < 0 || fc > max_col || fr > max_row) {
          out.spilled_out += 0.5 * to_flanks;
        } else {
          ground.at(static_cast<std::size_t>(fr), static_cast<std::size_t>(fc)) +=
              0.5 * to_flanks / area;
        }
      }
      if (swath.empty()) {
        out.spilled_out += to_trail;
      } else {
        drop_fill_first(ground, target, swath, to_trail);
      }
    } else if (cut == 0.0 && load > 0.0 && !swath.empty()) {
      double deficit = 0.0;
      for (const auto& c : swath) {
        deficit += std::max(target.at(c.row, c.col) - ground.at(c.row, c.col), 0.0) * area;
      }
      const double released = std::min({load, p.deposit_rate, deficit});
      if (released > 0.0) {
        drop_fill_first(ground, target, swath, released);
        load -= released;
      }
    }
  }

  out.state.pose = end;
  out.state.blade_load = load;
  return out;
}

StepOutcome apply_action(const DozerState& state, const HeightMap& map, const HeightMap& target,
                         const LowLevelAction& action) {
  return std::visit(
      [&](const auto& a) -> StepOutcome {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, Rotate>) {
          return apply_rotate(state, map, a.angle);
        } else if constexpr (std::is_same_v<T, Reverse>) {
          return apply_reverse(state, map, a.distance);
        } else {
          return a.blade_down ? apply_forward_grading(state, map, target, a.distance)
                              : apply_forward_travel(state, map, a.distance);
        }
      },
      action);
}

}  // namespace grading
