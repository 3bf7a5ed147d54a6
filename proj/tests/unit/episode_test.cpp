#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "grading/episode.hpp"

using namespace grading;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name)
      : path(fs::temp_directory_path() / ("grading_" + name + "_" + std::to_string(::getpid()))) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

EpisodeRecord snp_record(std::uint64_t seed, const Config& config = {}, RolloutOptions opts = {}) {
  SnpPolicy policy;
  return record_episode(ScenarioSpec::defaults(Family::init), seed, config, policy, opts);
}

void flip_byte(const fs::path& file, std::size_t offset) {
  std::fstream f(file, std::ios::in | std::ios::out | std::ios::binary);
  f.seekg(static_cast<std::streamoff>(offset));
  char b = 0;
  f.read(&b, 1);
  b = static_cast<char>(b ^ 0x5a);
  f.seekp(static_cast<std::streamoff>(offset));
  f.write(&b, 1);
}

}  // namespace

TEST(RecordEpisode, DeterministicAndReplayable) {
  const EpisodeRecord a = snp_record(7);
  const EpisodeRecord b = snp_record(7);
  EXPECT_EQ(a, b);
  ASSERT_TRUE(a.terminal.done || a.terminal.failed);
  EXPECT_EQ(a.observations.size(), a.steps.size() + 1);
  const ReplayReport r = replay(a, Config{});
  EXPECT_TRUE(r.ok) << r.detail;
  EXPECT_FALSE(r.divergence_step.has_value());
}

TEST(RecordEpisode, FlatWorldIsDoneWithoutSteps) {
  ScenarioSpec spec = ScenarioSpec::defaults(Family::random);
  spec.pile_rows = {0, 0};
  SnpPolicy policy;
  const EpisodeRecord rec = record_episode(spec, 3, Config{}, policy);
  EXPECT_TRUE(rec.steps.empty());
  EXPECT_TRUE(rec.terminal.done);
  EXPECT_FALSE(rec.terminal.failed);
  EXPECT_EQ(rec.observations.size(), 1u);
  const MetricsRow m = metrics(rec);
  EXPECT_EQ(m.volume_left, 0.0);
  EXPECT_EQ(m.total_reward, 0.0);
  EXPECT_EQ(m.removed_fraction, 1.0);
}

TEST(RecordEpisode, MaxStepsLeavesOpenRecord) {
  RolloutOptions opts;
  opts.max_steps = 2;
  const EpisodeRecord rec = snp_record(7, Config{}, opts);
  EXPECT_EQ(rec.steps.size(), 2u);
  EXPECT_EQ(rec.terminal.reason, "open");
  try {
    metrics(rec);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::non_terminal_record);
  }
}

TEST(Replay, PerturbedActionDivergesAtThatStep) {
  EpisodeRecord rec = snp_record(7);
  ASSERT_GE(rec.steps.size(), 3u);
  rec.steps[2].action.p.row -= 1;
  const ReplayReport r = replay(rec, Config{});
  EXPECT_FALSE(r.ok);
  ASSERT_TRUE(r.divergence_step.has_value());
  EXPECT_EQ(*r.divergence_step, 3u);
}

TEST(Replay, PerturbedRewardIsDetected) {
  EpisodeRecord rec = snp_record(7);
  ASSERT_GE(rec.steps.size(), 1u);
  rec.steps[0].reward = std::nextafter(rec.steps[0].reward, 1e9);
  const ReplayReport r = replay(rec, Config{});
  EXPECT_FALSE(r.ok);
  EXPECT_EQ(r.divergence_step, std::optional<std::size_t>(1));
}

TEST(Replay, ConfigMismatch) {
  const EpisodeRecord rec = snp_record(7);
  Config other;
  other.weights.time = 0.02;
  try {
    replay(rec, other);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::config_mismatch);
  }
}

TEST(EpisodeIo, RoundTripIsExact) {
  TempDir tmp("episode_io");
  RolloutOptions opts;
  opts.store_heights = true;
  const EpisodeRecord rec = snp_record(5, Config{}, opts);
  const fs::path dir = write_episode(rec, tmp.path);
  EXPECT_EQ(dir.filename(), "episode_5");
  EXPECT_TRUE(fs::exists(dir / "manifest.txt"));
  EXPECT_TRUE(fs::exists(dir / "steps.txt"));
  EXPECT_TRUE(fs::exists(dir / "world" / "0.hmap"));
  const EpisodeRecord back = read_episode(dir);
  EXPECT_EQ(back, rec);
  EXPECT_TRUE(replay(back, Config{}).ok);
}

TEST(EpisodeIo, TamperedFileFailsChecksum) {
  TempDir tmp("episode_tamper");
  const fs::path dir = write_episode(snp_record(5), tmp.path);
  flip_byte(dir / "obs" / "1.hmap", 40);
  try {
    read_episode(dir);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::checksum_mismatch);
  }
}

TEST(EpisodeIo, MissingDirectory) {
  EXPECT_THROW(read_episode("/nonexistent/episode_0"), Error);
}

TEST(Dataset, BuildsAndVerifiesEveryEpisode) {
  TempDir tmp("dataset");
  SnpPolicy policy;
  const ScenarioSpec spec = ScenarioSpec::defaults(Family::init);
  const DatasetManifest built = build_dataset(spec, Config{}, policy, 12, 100, tmp.path);
  EXPECT_EQ(built.count, 12u);
  ASSERT_EQ(built.episodes.size(), 12u);
  const DatasetManifest loaded = load_dataset(tmp.path);
  EXPECT_EQ(loaded.count, 12u);
  EXPECT_EQ(loaded.policy, "snp");
  EXPECT_EQ(loaded.family, "init");
  for (std::size_t i = 0; i < loaded.episodes.size(); ++i) {
    EXPECT_EQ(loaded.episodes[i].seed, 100 + i);
    const EpisodeRecord rec = read_episode(tmp.path / loaded.episodes[i].path);
    EXPECT_TRUE(replay(rec, Config{}).ok);
  }
  flip_byte(tmp.path / "episode_103" / "manifest.txt", 10);
  EXPECT_THROW(load_dataset(tmp.path), Error);
}

TEST(Metrics, RewardAndTimeAreSums) {
  const EpisodeRecord rec = snp_record(9);
  const MetricsRow m = metrics(rec);
  double reward = 0.0;
  double time = 0.0;
  for (const auto& s : rec.steps) {
    reward += s.reward;
    time += s.duration;
  }
  EXPECT_NEAR(m.total_reward, reward, 1e-9);
  EXPECT_NEAR(m.total_time, time, 1e-9);
  EXPECT_EQ(m.steps, rec.steps.size());
  EXPECT_EQ(m.volume_left, rec.world.final_volume);
  EXPECT_GE(m.removed_fraction, 0.0);
  EXPECT_LE(m.removed_fraction, 1.0);
}

TEST(Metrics, StandingStillTimesOutWithVolumeUnchanged) {
  Config config;
  config.timeout_steps = 4;
  GradingEnv probe(config);
  probe.reset(ScenarioSpec::defaults(Family::init), 2);
  const Pixel anchor{static_cast<std::int64_t>(config.fov.pooled_anchor_row()),
                     static_cast<std::int64_t>(config.fov.pooled_anchor_col())};
  ScriptedPolicy policy(std::vector<WaypointAction>(10, {anchor, anchor}), "still");
  const EpisodeRecord rec = record_episode(ScenarioSpec::defaults(Family::init), 2, config, policy);
  ASSERT_TRUE(rec.terminal.failed);
  EXPECT_EQ(rec.terminal.reason, "timeout");
  const MetricsRow m = metrics(rec);
  EXPECT_EQ(m.volume_left, m.initial_volume);
  EXPECT_EQ(m.removed_fraction, 0.0);
  EXPECT_LE(m.total_reward, -config.weights.time * m.total_time);
  EXPECT_LE(m.total_reward, -config.weights.fail + 1e-9);
}
