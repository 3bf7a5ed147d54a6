#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>

#include "grading/dynamics.hpp"
#include "grading/heightmap.hpp"

namespace grading {

struct RewardWeights {
  double volume = 1.0;
  double time = 0.01;
  double height = 10.0;
  double done = 100.0;
  double fail = 100.0;
  double gamma = 0.99;

  void validate() const;
  friend bool operator==(const RewardWeights&, const RewardWeights&) = default;
};

/// Everything a run depends on besides the scenario and the seed. Loaded from
/// a flat `key = value` file; unknown keys are rejected.
struct Config {
  double cell_size = 0.05;  // m
  FovSpec fov;
  RewardWeights weights;
  DozerParams dozer;
  double epsilon_done = 0.02;       // m
  std::size_t timeout_steps = 200;  // waypoint steps
  double mask_sigma_factor = 3.0;
  double mask_base_scale = 0.5;
  double operable_margin = 0.6;  // m kept clear of the map edge
  double fill_fraction = 0.9;    // oracle bite size relative to blade capacity

  void validate() const;
  friend bool operator==(const Config&, const Config&) = default;
};

Config parse_config(std::string_view text);
Config load_config(const std::filesystem::path& path);

/// Canonical dump: every key in fixed order, shortest round-trip numbers.
/// parse_config(dump_config(c)) == c.
std::string dump_config(const Config& config);

/// CRC32 of the canonical dump, as 8 lowercase hex digits.
std::string config_hash(const Config& config);

/// Overrides a single key (same names as in the file).
void set_config_value(Config& config, std::string_view key, std::string_view value);

}  // namespace grading
