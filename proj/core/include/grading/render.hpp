#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "grading/config.hpp"
#include "grading/episode.hpp"

namespace grading {

/// Binary PGM (P5) of a difference map, +y up. Values map linearly from
/// [-range, range] to [0, 255]; 128 is on target.
std::vector<std::uint8_t> encode_pgm(const DiffMap& delta, double range);

struct RenderSummary {
  std::size_t frames = 0;
  std::size_t trajectory_points = 0;
};

/// Re-runs a record and writes delta_<t>.pgm for t = 0..T plus
/// trajectory.txt ("t x y heading" per low-level pose) into `out`.
RenderSummary render_episode(const EpisodeRecord& record, const Config& config,
                             const std::filesystem::path& out);

}  // namespace grading
