#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "grading/config.hpp"
#include "grading/dynamics.hpp"
#include "grading/heightmap.hpp"

namespace grading {

enum class Family { init, continuous, edge, random };

std::string_view to_string(Family family) noexcept;
Family parse_family(std::string_view name);

struct Range {
  double lo = 0.0;
  double hi = 0.0;
  friend bool operator==(const Range&, const Range&) = default;
};

struct CountRange {
  std::size_t lo = 0;
  std::size_t hi = 0;
  friend bool operator==(const CountRange&, const CountRange&) = default;
};

/// Piles dropped onto the map once `step` waypoint steps have completed.
struct DumpEvent {
  std::size_t step = 0;
  std::vector<GaussianPile> piles;
  friend bool operator==(const DumpEvent&, const DumpEvent&) = default;
};

/// Scenario family parameters. Distances are meters measured from the dozer
/// start along the nominal push heading ("ahead") unless noted.
///
///  - init: the whole ground lies fill_depth below target; pile rows start
///    first_row_distance ahead.
///  - continuous: ground ahead of edge_distance is fill_depth below target,
///    the rest is graded; pile rows start beyond the edge and a new row is
///    dumped every dump_every steps (dump_rows times).
///  - edge: graded up to edge_distance, low strip beyond, a single pile row
///    straddling the edge.
///  - random: pile_rows * piles_per_row piles scattered uniformly.
struct ScenarioSpec {
  Family family = Family::init;
  double width = 16.0;   // m, map extent along x
  double length = 16.0;  // m, map extent along y
  CountRange pile_rows{2, 4};
  CountRange piles_per_row{3, 5};
  Range peak{0.15, 0.35};
  Range sigma{0.3, 0.6};
  double spacing = 1.5;
  double first_row_distance = 4.0;
  double edge_distance = 0.0;
  double fill_depth = 0.1;
  std::size_t dump_every = 0;
  std::size_t dump_rows = 0;
  DozerPose start{8.0, 2.0, 1.5707963267948966};
  std::vector<DumpEvent> extra_dumps;

  static ScenarioSpec defaults(Family family);
  void validate() const;

  friend bool operator==(const ScenarioSpec&, const ScenarioSpec&) = default;
};

struct Scenario {
  HeightMap initial;
  HeightMap target;
  DozerState dozer;
  std::vector<DumpEvent> dumps;  // sorted by step
  double nominal_heading = 0.0;
  double spacing = 1.5;  // dumps landing on the dozer shift forward by this much
};

/// Pure function of (spec, seed, config): the config supplies the cell size
/// and the dozer parameters.
Scenario generate(const ScenarioSpec& spec, std::uint64_t seed, const Config& config);

/// Signed distance of (x, y) ahead of the spec's start pose.
double distance_ahead(const ScenarioSpec& spec, double x, double y) noexcept;

std::string scenario_to_text(const ScenarioSpec& spec);
ScenarioSpec scenario_from_text(std::string_view text);

}  // namespace grading
