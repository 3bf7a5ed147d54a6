#include "grading/episode.hpp"

#include <bit>
#include <fstream>
#include <sstream>

#include "grading/codec.hpp"
#include "grading/hmap_io.hpp"
#include "json_io.hpp"

namespace grading {

namespace fs = std::filesystem;

json to_json(const RewardComponents& c) {
  return json{{"f_v", c.f_v},
              {"f_t", c.f_t},
              {"f_h", c.f_h},
              {"done_bonus", c.done_bonus},
              {"fail_penalty", c.fail_penalty}};
}

RewardComponents components_from_json(const json& j) {
  return {j.at("f_v").get<double>(), j.at("f_t").get<double>(), j.at("f_h").get<double>(),
          j.at("done_bonus").get<double>(), j.at("fail_penalty").get<double>()};
}

json to_json(const Pixel& p) { return json::array({p.row, p.col}); }

Pixel pixel_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) throw Error(ErrorCode::parse_error, "pixel must be [row, col]");
  return {j.at(0).get<std::int64_t>(), j.at(1).get<std::int64_t>()};
}

namespace {

HeightMap quantize_heights(HeightMap map) {
  for (double& v : map.values()) v = static_cast<double>(static_cast<float>(v));
  return HeightMap(map.rows(), map.cols(), static_cast<double>(static_cast<float>(map.cell_size())),
                   std::vector<double>(map.values().begin(), map.values().end()));
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_failure, "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text(const fs::path& path, const std::string& text) {
  write_file_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

json step_to_json(std::size_t t, const RecordedStep& s) {
  json j{{"t", t},
         {"p", to_json(s.action.p)},
         {"s", to_json(s.action.s)},
         {"reward", s.reward}};
  const json components = to_json(s.components);
  for (const auto& [k, v] : components.items()) j[k] = v;
  j["done"] = s.done;
  j["failed"] = s.failed;
  j["duration"] = s.duration;
  j["moved_volume"] = s.moved_volume;
  j["dumped_volume"] = s.dumped_volume;
  j["dumped_excess"] = s.dumped_excess;
  j["obs"] = "obs/" + std::to_string(t) + ".hmap";
  return j;
}

RecordedStep step_from_json(const json& j) {
  RecordedStep s;
  s.action = {pixel_from_json(j.at("p")), pixel_from_json(j.at("s"))};
  s.reward = j.at("reward").get<double>();
  s.components = components_from_json(j);
  s.done = j.at("done").get<bool>();
  s.failed = j.at("failed").get<bool>();
  s.duration = j.at("duration").get<double>();
  s.moved_volume = j.at("moved_volume").get<double>();
  s.dumped_volume = j.at("dumped_volume").get<double>();
  s.dumped_excess = j.at("dumped_excess").get<double>();
  return s;
}

bool same_bits(double a, double b) { return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b); }

bool same_bits(const RewardComponents& a, const RewardComponents& b) {
  return same_bits(a.f_v, b.f_v) && same_bits(a.f_t, b.f_t) && same_bits(a.f_h, b.f_h) &&
         same_bits(a.done_bonus, b.done_bonus) && same_bits(a.fail_penalty, b.fail_penalty);
}

}  // namespace

EpisodeRecord record_episode(const ScenarioSpec& spec, std::uint64_t seed, const Config& config,
                             Policy& policy, const RolloutOptions& options) {
  GradingEnv env(config);
  EpisodeRecord rec;
  rec.spec = spec;
  rec.seed = seed;
  rec.config = config;
  rec.config_hash = config_hash(config);
  rec.policy = policy.name();
  rec.observations.push_back(env.reset(spec, seed));
  if (options.store_heights) rec.heights.push_back(quantize_heights(env.map()));
  rec.world.initial_volume = excess_volume(env.delta());
  policy.begin(env, spec, seed);

  while (!env.terminated()) {
    if (options.max_steps && rec.steps.size() >= *options.max_steps) break;
    const PolicyAction decision = policy.act(rec.observations.back(), env);
    if (!decision.action) {
      rec.terminal.reason = decision.stuck ? "stuck" : "policy_stop";
      rec.terminal.failed = true;
      break;
    }
    StepResult r = env.step(*decision.action);
    RecordedStep s{*decision.action, r.reward,  r.components,        r.done,
                   r.failed,         r.info.duration, r.info.moved_volume, r.info.dumped_volume,
                   r.info.dumped_excess};
    rec.steps.push_back(s);
    rec.observations.push_back(std::move(r.observation));
    if (options.store_heights) rec.heights.push_back(quantize_heights(env.map()));
    rec.world.dumped_excess += r.info.dumped_excess;
    if (env.terminated()) {
      rec.terminal = {r.done, r.failed, r.info.reason};
    }
  }
  if (env.done() && rec.steps.empty()) rec.terminal = {true, false, "done"};
  if (!rec.terminal.done && !rec.terminal.failed) rec.terminal.reason = "open";

  const DiffMap final_delta = env.delta();
  rec.world.final_volume = excess_volume(final_delta);
  rec.world.final_max_height = max_excess_height(final_delta);
  rec.world.final_mean_height = mean_excess_height(final_delta);
  return rec;
}

MetricsRow metrics(const EpisodeRecord& record) {
  if (!record.terminal.done && !record.terminal.failed) {
    throw Error(ErrorCode::non_terminal_record, "episode record has no terminal step");
  }
  MetricsRow m;
  m.seed = record.seed;
  m.volume_left = record.world.final_volume;
  m.max_height_left = record.world.final_max_height;
  m.mean_height_left = record.world.final_mean_height;
  m.initial_volume = record.world.initial_volume;
  for (const auto& s : record.steps) {
    m.total_time += s.duration;
    m.total_reward += s.reward;
  }
  const double supplied = record.world.initial_volume + record.world.dumped_excess;
  m.removed_fraction = supplied > 0.0 ? 1.0 - m.volume_left / supplied : 1.0;
  m.steps = record.steps.size();
  m.done = record.terminal.done;
  m.failed = record.terminal.failed;
  return m;
}

fs::path episode_dir_name(std::uint64_t seed) { return "episode_" + std::to_string(seed); }

fs::path write_episode(const EpisodeRecord& record, const fs::path& root) {
  const fs::path dir = root / episode_dir_name(record.seed);
  std::error_code ec;
  fs::create_directories(dir / "obs", ec);
  if (!record.heights.empty()) fs::create_directories(dir / "world", ec);
  if (ec) throw Error(ErrorCode::io_failure, "cannot create " + dir.string() + ": " + ec.message());

  json files = json::array();
  auto add_file = [&](const std::string& rel, std::span<const std::uint8_t> bytes) {
    write_file_bytes(dir / rel, bytes);
    files.push_back({{"path", rel}, {"crc32", hex32(crc32(bytes))}});
  };

  std::string steps;
  for (std::size_t t = 0; t < record.steps.size(); ++t) {
    steps += step_to_json(t + 1, record.steps[t]).dump();
    steps += '\n';
  }
  add_file("steps.txt", std::span(reinterpret_cast<const std::uint8_t*>(steps.data()), steps.size()));
  for (std::size_t t = 0; t < record.observations.size(); ++t) {
    add_file("obs/" + std::to_string(t) + ".hmap", encode_hmap(record.observations[t]));
  }
  for (std::size_t t = 0; t < record.heights.size(); ++t) {
    add_file("world/" + std::to_string(t) + ".hmap", encode_hmap(record.heights[t]));
  }

  json manifest{{"format", "grading-episode/1"},
                {"seed", record.seed},
                {"policy", record.policy},
                {"config_hash", record.config_hash},
                {"config", dump_config(record.config)},
                {"scenario", to_json(record.spec)},
                {"steps", record.steps.size()},
                {"terminal",
                 {{"done", record.terminal.done},
                  {"failed", record.terminal.failed},
                  {"reason", record.terminal.reason}}},
                {"world",
                 {{"initial_volume", record.world.initial_volume},
                  {"final_volume", record.world.final_volume},
                  {"final_max_height", record.world.final_max_height},
                  {"final_mean_height", record.world.final_mean_height},
                  {"dumped_excess", record.world.dumped_excess}}},
                {"files", files}};
  write_text(dir / "manifest.txt", manifest.dump(2) + "\n");
  return dir;
}

EpisodeRecord read_episode(const fs::path& dir) {
  const json m = parse_json(read_text(dir / "manifest.txt"));
  try {
    for (const auto& f : m.at("files")) {
      const auto rel = f.at("path").get<std::string>();
      const auto bytes = read_file_bytes(dir / rel);
      if (hex32(crc32(bytes)) != f.at("crc32").get<std::string>()) {
        throw Error(ErrorCode::checksum_mismatch, "checksum mismatch in " + (dir / rel).string());
      }
    }
    EpisodeRecord rec;
    rec.seed = m.at("seed").get<std::uint64_t>();
    rec.policy = m.at("policy").get<std::string>();
    rec.config = parse_config(m.at("config").get<std::string>());
    rec.config_hash = m.at("config_hash").get<std::string>();
    rec.spec = spec_from_json(m.at("scenario"));
    const auto& t = m.at("terminal");
    rec.terminal = {t.at("done").get<bool>(), t.at("failed").get<bool>(), t.at("reason").get<std::string>()};
    const auto& w = m.at("world");
    rec.world = {w.at("initial_volume").get<double>(), w.at("final_volume").get<double>(),
                 w.at("final_max_height").get<double>(), w.at("final_mean_height").get<double>(),
                 w.at("dumped_excess").get<double>()};

    std::istringstream lines(read_text(dir / "steps.txt"));
    for (std::string line; std::getline(lines, line);) {
      if (!line.empty()) rec.steps.push_back(step_from_json(parse_json(line)));
    }
    const auto n = m.at("steps").get<std::size_t>();
    if (rec.steps.size() != n) throw Error(ErrorCode::parse_error, "step count does not match manifest");
    for (std::size_t i = 0; i <= n; ++i) {
      rec.observations.push_back(read_hmap<DiffTag>(dir / "obs" / (std::to_string(i) + ".hmap")));
    }
    if (fs::exists(dir / "world")) {
      for (std::size_t i = 0; i <= n; ++i) {
        rec.heights.push_back(read_hmap<HeightTag>(dir / "world" / (std::to_string(i) + ".hmap")));
      }
    }
    return rec;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse_error, "malformed episode manifest: " + std::string(e.what()));
  }
}

ReplayReport replay(const EpisodeRecord& record, const Config& config) {
  if (record.config_hash != config_hash(config)) {
    throw Error(ErrorCode::config_mismatch, "record config " + record.config_hash +
                                                " differs from current config " + config_hash(config));
  }
  auto diverged = [](std::size_t t, std::string what) { return ReplayReport{false, t, std::move(what)}; };

  GradingEnv env(config);
  const DiffMap first = env.reset(record.spec, record.seed);
  if (record.observations.empty() || encode_hmap(first) != encode_hmap(record.observations[0])) {
    return diverged(0, "reset observation differs");
  }
  for (std::size_t i = 0; i < record.steps.size(); ++i) {
    const std::size_t t = i + 1;
    const RecordedStep& s = record.steps[i];
    if (env.terminated()) return diverged(t, "environment terminated before the recorded step");
    const StepResult r = env.step(s.action);
    if (t >= record.observations.size() || encode_hmap(r.observation) != encode_hmap(record.observations[t])) {
      return diverged(t, "observation differs");
    }
    if (!same_bits(r.reward, s.reward)) return diverged(t, "reward differs");
    if (!same_bits(r.components, s.components)) return diverged(t, "reward components differ");
    if (r.done != s.done || r.failed != s.failed) return diverged(t, "termination flags differ");
  }
  return {};
}

DatasetManifest build_dataset(const ScenarioSpec& spec, const Config& config, Policy& policy,
                              std::size_t n, std::uint64_t seed0, const fs::path& root) {
  DatasetManifest manifest{policy.name(), std::string(to_string(spec.family)), seed0, n, {}};
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t seed = seed0 + i;
    const fs::path dir = write_episode(record_episode(spec, seed, config, policy), root);
    manifest.episodes.push_back(
        {episode_dir_name(seed).string(), hex32(crc32(read_text(dir / "manifest.txt"))), seed});
  }
  write_dataset_manifest(manifest, root);
  return manifest;
}

void write_dataset_manifest(const DatasetManifest& manifest, const fs::path& root) {
  json episodes = json::array();
  for (const auto& e : manifest.episodes) {
    episodes.push_back({{"path", e.path}, {"seed", e.seed}, {"crc32", e.crc32}});
  }
  const json j{{"format", "grading-dataset/1"},
               {"policy", manifest.policy},
               {"family", manifest.family},
               {"seed0", manifest.seed0},
               {"count", manifest.count},
               {"episodes", episodes}};
  std::error_code ec;
  fs::create_directories(root, ec);
  write_text(root / "dataset.txt", j.dump(2) + "\n");
}

DatasetManifest load_dataset(const fs::path& root) {
  const json j = parse_json(read_text(root / "dataset.txt"));
  try {
    DatasetManifest m;
    m.policy = j.at("policy").get<std::string>();
    m.family = j.at("family").get<std::string>();
    m.seed0 = j.at("seed0").get<std::uint64_t>();
    m.count = j.at("count").get<std::size_t>();
    for (const auto& e : j.at("episodes")) {
      DatasetEntry entry{e.at("path").get<std::string>(), e.at("crc32").get<std::string>(),
                         e.at("seed").get<std::uint64_t>()};
      const fs::path dir = root / entry.path;
      if (hex32(crc32(read_text(dir / "manifest.txt"))) != entry.crc32) {
        throw Error(ErrorCode::checksum_mismatch, "checksum mismatch for " + dir.string());
      }
      read_episode(dir);
      m.episodes.push_back(std::move(entry));
    }
    if (m.episodes.size() != m.count) {
      throw Error(ErrorCode::parse_error, "dataset count does not match its episode list");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse_error, "malformed dataset manifest: " + std::string(e.what()));
  }
}

}  // namespace grading
