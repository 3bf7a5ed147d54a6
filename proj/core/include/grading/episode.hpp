#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "grading/config.hpp"
#include "grading/env.hpp"
#include "grading/policy.hpp"
#include "grading/scenario.hpp"

namespace grading {

struct RecordedStep {
  WaypointAction action;
  double reward = 0.0;
  RewardComponents components;
  bool done = false;
  bool failed = false;
  double duration = 0.0;
  double moved_volume = 0.0;
  double dumped_volume = 0.0;
  double dumped_excess = 0.0;
  friend bool operator==(const RecordedStep&, const RecordedStep&) = default;
};

struct Terminal {
  bool done = false;
  bool failed = false;
  std::string reason;  // done | timeout | unreachable | policy_stop | stuck | open
  friend bool operator==(const Terminal&, const Terminal&) = default;
};

/// Full-resolution statistics of the world, taken while recording.
struct WorldSummary {
  double initial_volume = 0.0;  // excess volume at reset, m^3
  double final_volume = 0.0;
  double final_max_height = 0.0;
  double final_mean_height = 0.0;
  double dumped_excess = 0.0;  // excess added by dumps over the episode
  friend bool operator==(const WorldSummary&, const WorldSummary&) = default;
};

struct EpisodeRecord {
  ScenarioSpec spec;
  std::uint64_t seed = 0;
  Config config;
  std::string config_hash;
  std::string policy;
  std::vector<DiffMap> observations;  // t = 0..T
  std::vector<RecordedStep> steps;    // t = 1..T
  Terminal terminal;
  WorldSummary world;
  std::vector<HeightMap> heights;  // optional full-resolution H_t, t = 0..T
  friend bool operator==(const EpisodeRecord&, const EpisodeRecord&) = default;
};

struct MetricsRow {
  std::uint64_t seed = 0;
  double volume_left = 0.0;
  double max_height_left = 0.0;
  double mean_height_left = 0.0;
  double total_time = 0.0;
  double total_reward = 0.0;
  double initial_volume = 0.0;
  double removed_fraction = 0.0;  // 1 - left / (initial + dumped)
  std::size_t steps = 0;
  bool done = false;
  bool failed = false;
};

struct RolloutOptions {
  /// Steps after which the rollout gives up even if the env would continue.
  std::optional<std::size_t> max_steps;
  /// Also keep the full-resolution height-map of every step.
  bool store_heights = false;
};

/// Resets an env to (spec, seed) and lets the policy act until the episode
/// terminates or the policy stops. A stop before the env is done ends the
/// record as failed with reason "policy_stop" (or "stuck").
EpisodeRecord record_episode(const ScenarioSpec& spec, std::uint64_t seed, const Config& config,
                             Policy& policy, const RolloutOptions& options = {});

MetricsRow metrics(const EpisodeRecord& record);

std::filesystem::path episode_dir_name(std::uint64_t seed);

/// Writes episode_<seed>/ under `root`; returns its path.
std::filesystem::path write_episode(const EpisodeRecord& record, const std::filesystem::path& root);
/// Reads and checksum-verifies one episode directory.
EpisodeRecord read_episode(const std::filesystem::path& dir);

struct ReplayReport {
  bool ok = true;
  std::optional<std::size_t> divergence_step;  // 0: reset observation
  std::string detail;
};

/// Re-executes the record's actions from (spec, seed). Throws config_mismatch
/// if the record was produced under a different config.
ReplayReport replay(const EpisodeRecord& record, const Config& config);

struct DatasetEntry {
  std::string path;  // relative to the dataset root
  std::string crc32;  // of the episode manifest
  std::uint64_t seed = 0;
};

struct DatasetManifest {
  std::string policy;
  std::string family;
  std::uint64_t seed0 = 0;
  std::size_t count = 0;
  std::vector<DatasetEntry> episodes;
};

/// Records n episodes (seeds seed0..seed0+n-1) and writes dataset.txt.
DatasetManifest build_dataset(const ScenarioSpec& spec, const Config& config, Policy& policy,
                              std::size_t n, std::uint64_t seed0, const std::filesystem::path& root);
void write_dataset_manifest(const DatasetManifest& manifest, const std::filesystem::path& root);
/// Loads dataset.txt and verifies that every episode exists, parses and
/// matches its checksum.
DatasetManifest load_dataset(const std::filesystem::path& root);

}  // namespace grading
