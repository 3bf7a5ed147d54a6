#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "grading/env.hpp"

namespace grading {

struct PileDetection {
  Pixel center;              // rounded centroid
  double centroid_row = 0.0;  // excess-weighted, in pixels
  double centroid_col = 0.0;
  std::size_t row_min = 0;
  std::size_t row_max = 0;
  std::size_t col_min = 0;
  std::size_t col_max = 0;
  std::size_t pixels = 0;
  double volume = 0.0;  // m^3 of excess
  double peak = 0.0;    // m
};

/// 4-connected components of {obs > threshold}, nearest to the observation
/// anchor first (ties: larger volume first).
std::vector<PileDetection> detect_piles(const DiffMap& obs, const FovSpec& spec, double threshold);

/// What the oracle knows besides the observation.
struct OracleView {
  DozerState dozer;
  LegContext leg;
  double threshold = 0.02;
  double fill_fraction = 0.9;
};

OracleView oracle_view(const GradingEnv& env);

/// Lane memory carried between calls of one episode.
struct OracleState {
  std::size_t stalls = 0;
  double last_excess = -1.0;
  bool sweep_from_right = false;
};

struct OracleDecision {
  std::optional<WaypointAction> action;  // empty: nothing left to grade
  bool stuck = false;                     // gave up although piles remain
};

/// Lane-stepping waypoint choice for the nearest detection.
///
/// p: if the dozer's own lane (blade-wide column band through the anchor)
/// holds excess ahead, p lies on the anchor column beyond the far end of that
/// excess, far enough for the band's deficit to absorb the collected soil;
/// otherwise p is the dozer's own pixel (no push).
/// s: with the pushed lane assumed clear, the start of the next lane behind
/// the nearest remaining detection. Lanes sweep across the detection one band
/// at a time; the band's overlap with the pile shrinks until the estimated
/// bite is at most fill_fraction * blade capacity.
/// Both pixels are pulled into the operable area; throws no_valid_action if
/// that is impossible.
WaypointAction select_waypoints(const DiffMap& obs, const std::vector<PileDetection>& detections,
                                const OracleView& view, OracleState& state);

/// detect_piles then select_waypoints; empty action when nothing is detected.
OracleDecision oracle_act(const DiffMap& obs, const OracleView& view, OracleState& state);

}  // namespace grading
