#include "grading/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace grading {

namespace {

struct Labeled {
  std::vector<int> label;  // -1: background, else index into detections
  std::vector<PileDetection> detections;
};

Labeled label_components(const DiffMap& obs, const FovSpec& spec, double threshold) {
  const std::size_t rows = obs.rows();
  const std::size_t cols = obs.cols();
  const double area = obs.cell_area();
  Labeled out{std::vector<int>(rows * cols, -1), {}};
  std::vector<std::size_t> stack;
  std::vector<std::vector<std::size_t>> members;

  for (std::size_t start = 0; start < rows * cols; ++start) {
    if (out.label[start] != -1 || !(obs.values()[start] > threshold)) continue;
    const int id = static_cast<int>(members.size());
    members.emplace_back();
    out.label[start] = id;
    stack.assign(1, start);
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      members.back().push_back(i);
      const std::size_t r = i / cols;
      const std::size_t c = i % cols;
      auto visit = [&](std::size_t j) {
        if (out.label[j] == -1 && obs.values()[j] > threshold) {
          out.label[j] = id;
          stack.push_back(j);
        }
      };
      if (r > 0) visit(i - cols);
      if (r + 1 < rows) visit(i + cols);
      if (c > 0) visit(i - 1);
      if (c + 1 < cols) visit(i + 1);
    }
  }

  for (auto& m : members) {
    std::sort(m.begin(), m.end());
    PileDetection d;
    d.row_min = rows;
    d.col_min = cols;
    double weight = 0.0;
    double wr = 0.0;
    double wc = 0.0;
    for (std::size_t i : m) {
      const std::size_t r = i / cols;
      const std::size_t c = i % cols;
      const double v = obs.values()[i];
      weight += v;
      wr += v * static_cast<double>(r);
      wc += v * static_cast<double>(c);
      d.peak = std::max(d.peak, v);
      d.row_min = std::min(d.row_min, r);
      d.row_max = std::max(d.row_max, r);
      d.col_min = std::min(d.col_min, c);
      d.col_max = std::max(d.col_max, c);
    }
    d.pixels = m.size();
    d.volume = weight * area;
    d.centroid_row = wr / weight;
    d.centroid_col = wc / weight;
    d.center = {static_cast<std::int64_t>(std::llround(d.centroid_row)),
                static_cast<std::int64_t>(std::llround(d.centroid_col))};
    out.detections.push_back(d);
  }

  // stable order by distance from the anchor, then by volume
  const auto ar = static_cast<double>(spec.pooled_anchor_row());
  const auto ac = static_cast<double>(spec.pooled_anchor_col());
  std::vector<std::size_t> order(out.detections.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  auto dist = [&](const PileDetection& d) {
    return std::hypot(d.centroid_row - ar, d.centroid_col - ac);
  };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double da = dist(out.detections[a]);
    const double db = dist(out.detections[b]);
    if (da != db) return da < db;
    return out.detections[a].volume > out.detections[b].volume;
  });
  std::vector<int> remap(order.size());
  std::vector<PileDetection> sorted;
  for (std::size_t k = 0; k < order.size(); ++k) {
    remap[order[k]] = static_cast<int>(k);
    sorted.push_back(out.detections[order[k]]);
  }
  for (int& l : out.label) {
    if (l >= 0) l = remap[static_cast<std::size_t>(l)];
  }
  out.detections = std::move(sorted);
  return out;
}

struct Geometry {
  std::int64_t rows;
  std::int64_t cols;
  std::int64_t ar;
  std::int64_t ac;
  std::int64_t band;   // blade width in pixels
  double pixel_area;
};

Geometry geometry(const DiffMap& obs, const OracleView& view) {
  const auto& fov = view.leg.fov;
  const double pixel = static_cast<double>(fov.pool_factor()) * view.leg.cell_size;
  return {static_cast<std::int64_t>(obs.rows()),
          static_cast<std::int64_t>(obs.cols()),
          static_cast<std::int64_t>(fov.pooled_anchor_row()),
          static_cast<std::int64_t>(fov.pooled_anchor_col()),
          std::max<std::int64_t>(1, std::llround(view.dozer.params.blade_width / pixel)),
          pixel * pixel};
}

double value(const DiffMap& obs, std::int64_t r, std::int64_t c) {
  if (r < 0 || c < 0 || r >= static_cast<std::int64_t>(obs.rows()) ||
      c >= static_cast<std::int64_t>(obs.cols())) {
    return 0.0;
  }
  return obs.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
}

// Excess and deficit volume of row r within band columns [c0, c0 + width).
std::pair<double, double> band_row(const DiffMap& obs, const Geometry& g, std::int64_t r,
                                   std::int64_t c0) {
  double excess = 0.0;
  double deficit = 0.0;
  for (std::int64_t c = c0; c < c0 + g.band; ++c) {
    const double v = value(obs, r, c);
    if (v > 0.0) excess += v * g.pixel_area;
    else deficit -= v * g.pixel_area;
  }
  return {excess, deficit};
}

bool band_has_excess(const DiffMap& obs, const Geometry& g, std::int64_t r, std::int64_t c0,
                     double threshold) {
  for (std::int64_t c = c0; c < c0 + g.band; ++c) {
    if (value(obs, r, c) > threshold) return true;
  }
  return false;
}

bool operable(const Pixel& px, const OracleView& view) {
  if (!pixel_in_grid(px, view.leg.fov)) return false;
  const WorldPoint w = pixel_to_world(px, view.dozer.pose, view.leg.fov, view.leg.cell_size);
  return view.leg.operable.contains(w.x, w.y);
}

// Nearest operable pixel to px, found by clamping in world space and then
// stepping towards the anchor.
Pixel pull_inside(Pixel px, const OracleView& view, const Geometry& g) {
  if (operable(px, view)) return px;
  const auto& box = view.leg.operable;
  WorldPoint w = pixel_to_world(px, view.dozer.pose, view.leg.fov, view.leg.cell_size);
  w.x = std::clamp(w.x, box.x_min, box.x_max);
  w.y = std::clamp(w.y, box.y_min, box.y_max);
  px = world_to_pixel(w, view.dozer.pose, view.leg.fov, view.leg.cell_size);
  for (int guard = 0; guard < 4 * static_cast<int>(g.rows + g.cols); ++guard) {
    if (operable(px, view)) return px;
    if (px.row != g.ar) px.row += px.row < g.ar ? 1 : -1;
    if (px.col != g.ac) px.col += px.col < g.ac ? 1 : -1;
    if (px.row == g.ar && px.col == g.ac) break;
  }
  if (operable(px, view)) return px;
  throw Error(ErrorCode::no_valid_action, "no operable pixel near the requested waypoint");
}

}  // namespace

std::vector<PileDetection> detect_piles(const DiffMap& obs, const FovSpec& spec, double threshold) {
  if (!(threshold > 0.0)) throw Error(ErrorCode::invalid_parameter, "detection threshold must be positive");
  return label_components(obs, spec, threshold).detections;
}

OracleView oracle_view(const GradingEnv& env) {
  const FovSpec& fov = env.config().fov;
  return {env.dozer(), env.leg_context(), env.config().epsilon_done / static_cast<double>(fov.pool_factor()),
          env.config().fill_fraction};
}

WaypointAction select_waypoints(const DiffMap& obs, const std::vector<PileDetection>& detections,
                                const OracleView& view, OracleState& state) {
  if (detections.empty()) throw Error(ErrorCode::no_valid_action, "no pile to grade");
  const Geometry g = geometry(obs, view);
  const double threshold = view.threshold;
  const double capacity = view.dozer.params.blade_capacity;
  const Pixel anchor{g.ar, g.ac};

  // push along the dozer's own lane
  const std::int64_t own = g.ac - (g.band - 1) / 2;
  Pixel p = anchor;
  std::int64_t near = -1;
  for (std::int64_t r = g.ar; r < g.rows; ++r) {
    if (band_has_excess(obs, g, r, own, threshold)) {
      near = r;
      break;
    }
  }
  DiffMap predicted = obs;
  if (near >= 0) {
    std::int64_t far = near;
    while (far + 1 < g.rows && band_has_excess(obs, g, far + 1, own, threshold)) ++far;
    double need = view.dozer.blade_load;
    for (std::int64_t r = g.ar; r <= far; ++r) need += band_row(obs, g, r, own).first;
    double avail = 0.0;
    std::int64_t end = far;
    while (end + 1 < g.rows && (avail < need || end < far + g.band)) {
      ++end;
      const auto [excess, deficit] = band_row(obs, g, end, own);
      need += excess;
      avail += deficit;
    }
    Pixel target{end, g.ac};
    while (target.row > g.ar && !operable(target, view)) --target.row;
    if (target.row > g.ar) {
      p = target;
      for (std::int64_t r = g.ar; r <= target.row; ++r) {
        for (std::int64_t c = std::max<std::int64_t>(own, 0); c < std::min(own + g.band, g.cols); ++c) {
          double& v = predicted.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
          v = std::min(v, 0.0);
        }
      }
    }
  }

  // next lane on the nearest remaining pile
  const Labeled rest = label_components(predicted, view.leg.fov, threshold);
  if (rest.detections.empty()) return {p, anchor};
  const PileDetection& d = rest.detections.front();
  const auto c_min = static_cast<std::int64_t>(d.col_min);
  const auto c_max = static_cast<std::int64_t>(d.col_max);
  const auto r_min = static_cast<std::int64_t>(d.row_min);
  const auto r_max = static_cast<std::int64_t>(d.row_max);

  auto bite = [&](std::int64_t c0) {
    double sum = 0.0;
    for (std::int64_t r = r_min; r <= r_max; ++r) sum += band_row(predicted, g, r, c0).first;
    return sum;
  };
  // the band reaches one pixel past the detected rim on the side it sweeps from
  const std::int64_t width = c_max - c_min + 1;
  std::int64_t lane = 0;
  if (width <= g.band - 2) {
    lane = c_min - 1;
  } else if (width <= g.band - 1) {
    lane = state.sweep_from_right ? c_min - 1 : c_max + 2 - g.band;
  } else {
    for (std::int64_t overlap = g.band - 1; overlap >= 1; --overlap) {
      lane = state.sweep_from_right ? c_max + 1 - overlap : c_min - 1 - (g.band - 1 - overlap);
      if (bite(lane) <= view.fill_fraction * capacity) break;
    }
  }
  std::int64_t start_row = r_max + 1;
  for (std::int64_t r = r_min; r <= r_max && start_row > r_max; ++r) {
    for (std::int64_t c = lane; c < lane + g.band; ++c) {
      if (c >= 0 && c < g.cols &&
          rest.label[static_cast<std::size_t>(r * g.cols + c)] == 0) {
        start_row = r;
        break;
      }
    }
  }
  if (start_row > r_max) start_row = r_min;
  const Pixel s = pull_inside({start_row - g.band, lane + (g.band - 1) / 2}, view, g);
  return {p, s};
}

OracleDecision oracle_act(const DiffMap& obs, const OracleView& view, OracleState& state) {
  const auto detections = detect_piles(obs, view.leg.fov, view.threshold);
  if (detections.empty()) return {};

  double excess = 0.0;
  for (const auto& d : detections) excess += d.volume;
  if (state.last_excess >= 0.0 && excess >= state.last_excess) {
    ++state.stalls;
    if (state.stalls % 3 == 0) state.sweep_from_right = !state.sweep_from_right;
  } else {
    state.stalls = 0;
  }
  state.last_excess = excess;
  if (state.stalls >= 12) return {std::nullopt, true};

  try {
    return {select_waypoints(obs, detections, view, state), false};
  } catch (const Error& e) {
    if (e.code() != ErrorCode::no_valid_action) throw;
    return {std::nullopt, true};
  }
}

}  // namespace grading
