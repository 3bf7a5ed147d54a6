#include "grading/heightmap.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace grading {

void FovSpec::validate() const {
  if (rows == 0 || cols == 0) {
    throw Error(ErrorCode::invalid_dimension, "FOV needs at least one row and column");
  }
  if (anchor_row >= rows || anchor_col >= cols) {
    throw Error(ErrorCode::invalid_dimension, "FOV anchor must lie inside the window");
  }
  if (downsample_exponent > 16) {
    throw Error(ErrorCode::invalid_dimension, "down-sampling exponent too large");
  }
}

HeightMap new_flat(std::size_t rows, std::size_t cols, double cell_size, double level) {
  if (!std::isfinite(level)) {
    throw Error(ErrorCode::invalid_dimension, "flat level must be finite");
  }
  return HeightMap(rows, cols, cell_size, level);
}

HeightMap add_pile(HeightMap map, const GaussianPile& pile) {
  const double cell = map.cell_size();
  const double cr = std::cos(pile.rotation);
  const double sr = std::sin(pile.rotation);
  const double inv_sx = 1.0 / pile.sigma_x;
  const double inv_sy = 1.0 / pile.sigma_y;
  for (std::size_t r = 0; r < map.rows(); ++r) {
    const double dy = (static_cast<double>(r) + 0.5) * cell - pile.center_y;
    for (std::size_t c = 0; c < map.cols(); ++c) {
      const double dx = (static_cast<double>(c) + 0.5) * cell - pile.center_x;
      // rotate the offset into the pile frame
      const double u = (cr * dx + sr * dy) * inv_sx;
      const double v = (-sr * dx + cr * dy) * inv_sy;
      map.at(r, c) += pile.peak_height * std::exp(-0.5 * (u * u + v * v));
    }
  }
  return map;
}

double pile_volume(const GaussianPile& pile) noexcept {
  return 2.0 * std::numbers::pi * pile.sigma_x * pile.sigma_y * pile.peak_height;
}

DiffMap diff_map(const HeightMap& current, const HeightMap& target) {
  if (!current.same_geometry(target)) {
    throw Error(ErrorCode::geometry_mismatch, "height maps differ in geometry");
  }
  std::vector<double> out(current.size());
  const auto a = current.values();
  const auto b = target.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] - b[i];
  return DiffMap(current.rows(), current.cols(), current.cell_size(), std::move(out));
}

double excess_volume(const DiffMap& d) noexcept {
  double sum = 0.0;
  for (double v : d.values()) {
    if (v > 0.0) sum += v;
  }
  return sum * d.cell_area();
}

double max_excess_height(const DiffMap& d) noexcept {
  double best = 0.0;
  for (double v : d.values()) best = std::max(best, v);
  return best;
}

double mean_excess_height(const DiffMap& d) noexcept {
  double sum = 0.0;
  for (double v : d.values()) {
    if (v > 0.0) sum += v;
  }
  return d.size() == 0 ? 0.0 : sum / static_cast<double>(d.size());
}

DiffMap downsample(const DiffMap& d, unsigned exponent) {
  if (exponent == 0) return d;
  const std::size_t f = std::size_t{1} << exponent;
  const std::size_t out_rows = (d.rows() + f - 1) / f;
  const std::size_t out_cols = (d.cols() + f - 1) / f;
  DiffMap out(out_rows, out_cols, d.cell_size() * static_cast<double>(f));
  const double inv = 1.0 / static_cast<double>(f * f);
  for (std::size_t br = 0; br < out_rows; ++br) {
    for (std::size_t bc = 0; bc < out_cols; ++bc) {
      double sum = 0.0;
      for (std::size_t i = 0; i < f; ++i) {
        const std::size_t r = std::min(br * f + i, d.rows() - 1);
        for (std::size_t j = 0; j < f; ++j) {
          const std::size_t c = std::min(bc * f + j, d.cols() - 1);
          sum += d.at(r, c);
        }
      }
      out.at(br, bc) = sum * inv;
    }
  }
  return out;
}

namespace {

double value_or_zero(const DiffMap& d, std::int64_t row, std::int64_t col) noexcept {
  if (row < 0 || col < 0 || row >= static_cast<std::int64_t>(d.rows()) ||
      col >= static_cast<std::int64_t>(d.cols())) {
    return 0.0;
  }
  return d.at(static_cast<std::size_t>(row), static_cast<std::size_t>(col));
}

double bilinear_split(const DiffMap& d, std::int64_t base_col, double frac_u,
                      std::int64_t base_row, double frac_v) noexcept {
  const double fu_floor = std::floor(frac_u);
  const double fv_floor = std::floor(frac_v);
  const auto c0 = base_col + static_cast<std::int64_t>(fu_floor);
  const auto r0 = base_row + static_cast<std::int64_t>(fv_floor);
  const double tu = frac_u - fu_floor;
  const double tv = frac_v - fv_floor;
  const double v00 = value_or_zero(d, r0, c0);
  const double v01 = value_or_zero(d, r0, c0 + 1);
  const double v10 = value_or_zero(d, r0 + 1, c0);
  const double v11 = value_or_zero(d, r0 + 1, c0 + 1);
  return (1.0 - tv) * ((1.0 - tu) * v00 + tu * v01) + tv * ((1.0 - tu) * v10 + tu * v11);
}

}  // namespace

double sample_bilinear(const DiffMap& d, double u, double v) noexcept {
  return bilinear_split(d, 0, u, 0, v);
}

bool pose_in_bounds(const HeightMap& map, const DozerPose& pose) noexcept {
  return pose.x >= 0.0 && pose.y >= 0.0 && pose.x <= map.width() && pose.y <= map.length();
}

DiffMap ego_fov(const DiffMap& delta, const DozerPose& pose, const FovSpec& spec) {
  spec.validate();
  if (!(pose.x >= 0.0 && pose.y >= 0.0 && pose.x <= delta.width() &&
        pose.y <= delta.length())) {
    throw Error(ErrorCode::pose_out_of_bounds, "dozer pose lies outside the map");
  }
  // Pose in continuous grid coordinates, split into an integer base and a
  // fractional part so that integer-cell translations reproduce bitwise.
  const double gu = pose.x / delta.cell_size() - 0.5;
  const double gv = pose.y / delta.cell_size() - 0.5;
  const double base_u = std::floor(gu);
  const double base_v = std::floor(gv);
  const double frac_u = gu - base_u;
  const double frac_v = gv - base_v;
  const auto col0 = static_cast<std::int64_t>(base_u);
  const auto row0 = static_cast<std::int64_t>(base_v);

  const double ch = std::cos(pose.heading);
  const double sh = std::sin(pose.heading);

  DiffMap out(spec.rows, spec.cols, delta.cell_size());
  for (std::size_t i = 0; i < spec.rows; ++i) {
    const double fwd = static_cast<double>(i) - static_cast<double>(spec.anchor_row);
    for (std::size_t j = 0; j < spec.cols; ++j) {
      const double lat = static_cast<double>(j) - static_cast<double>(spec.anchor_col);
      // forward = (cos, sin), left = (-sin, cos)
      const double du = fwd * ch - lat * sh;
      const double dv = fwd * sh + lat * ch;
      out.at(i, j) = bilinear_split(delta, col0, frac_u + du, row0, frac_v + dv);
    }
  }
  return out;
}

DiffMap ego_fov(const HeightMap& current, const HeightMap& target, const DozerPose& pose,
                const FovSpec& spec) {
  return ego_fov(diff_map(current, target), pose, spec);
}

DiffMap quantize_f32(DiffMap d) {
  for (double& v : d.values()) v = static_cast<double>(static_cast<float>(v));
  const auto cell = static_cast<double>(static_cast<float>(d.cell_size()));
  return DiffMap(d.rows(), d.cols(), cell,
                 std::vector<double>(d.values().begin(), d.values().end()));
}

}  // namespace grading
