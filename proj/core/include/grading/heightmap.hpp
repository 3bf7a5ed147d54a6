#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "grading/error.hpp"

namespace grading {

/// Dense row-major grid of reals with a square cell of `cell_size` meters.
/// Row r / column c has its center at world (x, y) = ((c + 0.5) * cell,
/// (r + 0.5) * cell): columns run along +x and rows along +y.
template <class Tag>
class Grid {
 public:
  Grid() = default;

  Grid(std::size_t rows, std::size_t cols, double cell_size, double fill = 0.0)
      : rows_(rows), cols_(cols), cell_size_(cell_size), values_(rows * cols, fill) {
    validate();
  }

  Grid(std::size_t rows, std::size_t cols, double cell_size, std::vector<double> values)
      : rows_(rows), cols_(cols), cell_size_(cell_size), values_(std::move(values)) {
    validate();
    if (values_.size() != rows_ * cols_) {
      throw Error(ErrorCode::invalid_dimension, "grid value count does not match rows*cols");
    }
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return values_.size(); }
  double cell_size() const noexcept { return cell_size_; }
  double cell_area() const noexcept { return cell_size_ * cell_size_; }
  double width() const noexcept { return static_cast<double>(cols_) * cell_size_; }
  double length() const noexcept { return static_cast<double>(rows_) * cell_size_; }

  double& at(std::size_t r, std::size_t c) noexcept { return values_[r * cols_ + c]; }
  double at(std::size_t r, std::size_t c) const noexcept { return values_[r * cols_ + c]; }

  std::span<double> values() & noexcept { return values_; }
  std::span<const double> values() const& noexcept { return values_; }
  std::span<const double> values() const&& = delete;

  template <class Other>
  bool same_geometry(const Grid<Other>& other) const noexcept {
    return rows_ == other.rows() && cols_ == other.cols() && cell_size_ == other.cell_size();
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  void validate() const {
    if (rows_ == 0 || cols_ == 0 || !(cell_size_ > 0.0)) {
      throw Error(ErrorCode::invalid_dimension, "grid needs rows >= 1, cols >= 1, cell_size > 0");
    }
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  double cell_size_ = 0.0;
  std::vector<double> values_;
};

struct HeightTag {};
struct DiffTag {};

/// Terrain heights in meters (H_init, H_des, H_t).
using HeightMap = Grid<HeightTag>;
/// Signed height difference to the target, H_t - H_des, in meters.
using DiffMap = Grid<DiffTag>;

struct GaussianPile {
  double center_x = 0.0;  // m
  double center_y = 0.0;  // m
  double sigma_x = 1.0;   // m, along the pile's rotated x axis
  double sigma_y = 1.0;   // m
  double peak_height = 1.0;
  double rotation = 0.0;  // rad

  friend bool operator==(const GaussianPile&, const GaussianPile&) = default;
};

struct DozerPose {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;  // rad, 0 = +x, pi/2 = +y

  friend bool operator==(const DozerPose&, const DozerPose&) = default;
};

/// Egocentric observation window. The dozer sits at (anchor_row, anchor_col)
/// facing +row; FOV cells have the world map's cell size before pooling.
struct FovSpec {
  std::size_t rows = 600;
  std::size_t cols = 600;
  std::size_t anchor_row = 150;
  std::size_t anchor_col = 300;
  unsigned downsample_exponent = 3;

  std::size_t pool_factor() const noexcept { return std::size_t{1} << downsample_exponent; }
  std::size_t pooled_rows() const noexcept { return (rows + pool_factor() - 1) / pool_factor(); }
  std::size_t pooled_cols() const noexcept { return (cols + pool_factor() - 1) / pool_factor(); }
  std::size_t pooled_anchor_row() const noexcept { return anchor_row >> downsample_exponent; }
  std::size_t pooled_anchor_col() const noexcept { return anchor_col >> downsample_exponent; }

  void validate() const;

  friend bool operator==(const FovSpec&, const FovSpec&) = default;
};

HeightMap new_flat(std::size_t rows, std::size_t cols, double cell_size, double level);

/// Adds peak * exp(-1/2 d^T S^-1 d) at every cell center, d being the offset
/// from the pile center expressed in the pile's rotated frame.
HeightMap add_pile(HeightMap map, const GaussianPile& pile);

/// Total volume of the pile over the infinite plane: 2 pi sx sy peak.
double pile_volume(const GaussianPile& pile) noexcept;

DiffMap diff_map(const HeightMap& current, const HeightMap& target);

/// Sum over cells of max(d, 0) * cell area, in m^3.
double excess_volume(const DiffMap& d) noexcept;
/// max(0, max d), in m.
double max_excess_height(const DiffMap& d) noexcept;
/// Mean over all cells of max(d, 0), in m.
double mean_excess_height(const DiffMap& d) noexcept;

/// Mean-pools 2^N x 2^N blocks. Partial edge blocks are padded by replicating
/// the last row/column, so the output is ceil(rows/2^N) x ceil(cols/2^N) with
/// cell size cell * 2^N.
DiffMap downsample(const DiffMap& d, unsigned exponent);

/// Bilinear sample of d at continuous grid coordinates (u along columns, v
/// along rows; integer values are cell centers). Values outside the map read
/// as 0.
double sample_bilinear(const DiffMap& d, double u, double v) noexcept;

bool pose_in_bounds(const HeightMap& map, const DozerPose& pose) noexcept;

/// Full-resolution FOV (spec.rows x spec.cols) of delta in the dozer frame.
DiffMap ego_fov(const DiffMap& delta, const DozerPose& pose, const FovSpec& spec);
DiffMap ego_fov(const HeightMap& current, const HeightMap& target, const DozerPose& pose,
                const FovSpec& spec);

/// Rounds every value (and the cell size) to single precision, i.e. to what
/// the HMAP1 format can carry.
DiffMap quantize_f32(DiffMap d);

}  // namespace grading
