#include <CLI11.hpp>

#include <algorithm>
#include <csignal>
#include <stdexcept>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "grading/config.hpp"
#include "grading/episode.hpp"
#include "grading/harness.hpp"
#include "grading/hmap_io.hpp"
#include "grading/protocol.hpp"
#include "grading/render.hpp"
#include "grading/scenario.hpp"

namespace fs = std::filesystem;
using namespace grading;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitDivergence = 3;

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
};

struct ScenarioArgs {
  std::string family = "init";
  std::string spec_path;
};

Config resolve_config(const Common& common) {
  Config config = common.config_path.empty() ? Config{} : load_config(common.config_path);
  for (const auto& kv : common.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::invalid_config, "--set expects key=value, got '" + kv + "'");
    set_config_value(config, kv.substr(0, eq), kv.substr(eq + 1));
  }
  config.validate();
  return config;
}

ScenarioSpec resolve_spec(const ScenarioArgs& args) {
  if (!args.spec_path.empty()) {
    std::ifstream in(args.spec_path);
    if (!in) throw Error(ErrorCode::io_failure, "cannot read " + args.spec_path);
    std::stringstream buf;
    buf << in.rdbuf();
    return scenario_from_text(buf.str());
  }
  return ScenarioSpec::defaults(parse_family(args.family));
}

void add_scenario_options(CLI::App* cmd, ScenarioArgs& args) {
  cmd->add_option("--family", args.family, "init | continuous | edge | random");
  cmd->add_option("--scenario", args.spec_path, "scenario spec file (overrides --family)");
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io_failure, "cannot write " + path.string());
  out << text;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_dimension:
    case ErrorCode::invalid_scenario:
    case ErrorCode::invalid_spec:
    case ErrorCode::invalid_config:
    case ErrorCode::invalid_parameter:
    case ErrorCode::unknown_policy:
    case ErrorCode::parse_error:
      return kExitInvalid;
    case ErrorCode::config_mismatch:
    case ErrorCode::checksum_mismatch:
      return kExitDivergence;
    default:
      return kExitRuntime;
  }
}

std::vector<fs::path> episode_dirs(const fs::path& path) {
  if (fs::exists(path / "manifest.txt")) return {path};
  std::vector<fs::path> dirs;
  if (fs::exists(path / "dataset.txt")) {
    for (const auto& e : load_dataset(path).episodes) dirs.push_back(path / e.path);
    return dirs;
  }
  for (const auto& entry : fs::directory_iterator(path)) {
    if (entry.is_directory() && fs::exists(entry.path() / "manifest.txt")) dirs.push_back(entry.path());
  }
  std::sort(dirs.begin(), dirs.end());
  if (dirs.empty()) throw Error(ErrorCode::invalid_parameter, "no episode records under " + path.string());
  return dirs;
}

void wait_forever() {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  int sig = 0;
  sigwait(&set, &sig);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Autonomous grading simulator and evaluation harness"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--config", common.config_path, "flat key = value config file");
  app.add_option("--set", common.overrides, "override a config key (key=value), repeatable");

  // config --dump
  auto* config_cmd = app.add_subcommand("config", "show the resolved config");
  bool dump = false;
  config_cmd->add_flag("--dump", dump, "print every key with its value")->required();

  // scenario generate
  auto* scenario_cmd = app.add_subcommand("scenario", "scenario tools");
  scenario_cmd->require_subcommand(1);
  auto* generate_cmd = scenario_cmd->add_subcommand("generate", "write H_init, H_des and the spec");
  ScenarioArgs gen_args;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  add_scenario_options(generate_cmd, gen_args);
  generate_cmd->add_option("--seed", gen_seed);
  generate_cmd->add_option("--out", gen_out)->required();

  // oracle run
  auto* oracle_cmd = app.add_subcommand("oracle", "SnP oracle");
  oracle_cmd->require_subcommand(1);
  auto* oracle_run = oracle_cmd->add_subcommand("run", "roll out the oracle");
  ScenarioArgs oracle_args;
  std::uint64_t oracle_seed = 0;
  std::size_t oracle_n = 1;
  std::string oracle_record;
  bool oracle_world = false;
  add_scenario_options(oracle_run, oracle_args);
  oracle_run->add_option("--seed", oracle_seed, "first seed");
  oracle_run->add_option("--n", oracle_n, "number of consecutive seeds");
  oracle_run->add_option("--record", oracle_record, "write episode records here");
  oracle_run->add_flag("--store-world", oracle_world, "also store full-resolution height-maps");

  // dataset build
  auto* dataset_cmd = app.add_subcommand("dataset", "behaviour datasets");
  dataset_cmd->require_subcommand(1);
  auto* dataset_build = dataset_cmd->add_subcommand("build", "record n episodes and a manifest");
  ScenarioArgs dataset_args;
  std::string dataset_policy = "snp";
  std::size_t dataset_n = 150;
  std::uint64_t dataset_seed0 = 0;
  std::string dataset_out;
  add_scenario_options(dataset_build, dataset_args);
  dataset_build->add_option("--policy", dataset_policy);
  dataset_build->add_option("--n", dataset_n);
  dataset_build->add_option("--seed0", dataset_seed0);
  dataset_build->add_option("--out", dataset_out)->required();

  // evaluate / sweep share these
  ScenarioArgs eval_args;
  EvaluateOptions eval;
  std::string external;
  std::string replay_root;
  std::string csv_path;
  std::string eval_record;
  auto add_eval_options = [&](CLI::App* cmd) {
    add_scenario_options(cmd, eval_args);
    cmd->add_option("--policy", eval.policy, "snp | random | external | replay");
    cmd->add_option("--runs", eval.runs);
    cmd->add_option("--seed0", eval.seed0);
    cmd->add_option("--workers", eval.workers);
    cmd->add_option("--external", external, "host:port of a policy server");
    cmd->add_option("--replay-root", replay_root, "directory of records for the replay policy");
    cmd->add_option("--csv", csv_path, "also write the table as CSV");
    cmd->add_option("--record", eval_record, "write every episode record here");
  };
  auto* evaluate_cmd = app.add_subcommand("evaluate", "run the n-seed evaluation protocol");
  add_eval_options(evaluate_cmd);

  auto* sweep_cmd = app.add_subcommand("sweep", "ablation over one parameter");
  std::string sweep_param;
  std::vector<std::string> sweep_values;
  add_eval_options(sweep_cmd);
  sweep_cmd->add_option("--parameter", sweep_param, "downsample | mask_sigma | fill_fraction")->required();
  sweep_cmd->add_option("--values", sweep_values)->required()->delimiter(',');

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "serve environment sessions (or a policy) over TCP");
  std::string serve_host = "127.0.0.1";
  std::uint16_t serve_port = 7777;
  std::string serve_policy;
  serve_cmd->add_option("--host", serve_host);
  serve_cmd->add_option("--port", serve_port);
  serve_cmd->add_option("--policy", serve_policy, "serve this policy to external clients instead");

  // replay
  auto* replay_cmd = app.add_subcommand("replay", "verify records by re-execution");
  std::string replay_path;
  replay_cmd->add_option("path", replay_path, "episode directory, dataset root or directory of records")->required();

  // render
  auto* render_cmd = app.add_subcommand("render", "PGM frames and trajectory of a record");
  std::string render_path;
  std::string render_out;
  render_cmd->add_option("path", render_path, "episode directory")->required();
  render_cmd->add_option("--out", render_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInvalid;
  }

  try {
    const Config config = resolve_config(common);

    if (config_cmd->parsed()) {
      std::cout << dump_config(config);
      return kExitOk;
    }

    if (generate_cmd->parsed()) {
      const ScenarioSpec spec = resolve_spec(gen_args);
      const Scenario sc = generate(spec, gen_seed, config);
      fs::create_directories(gen_out);
      write_hmap(fs::path(gen_out) / "initial.hmap", sc.initial);
      write_hmap(fs::path(gen_out) / "target.hmap", sc.target);
      write_text(fs::path(gen_out) / "scenario.txt", scenario_to_text(spec));
      std::cout << "wrote " << gen_out << " (" << sc.initial.rows() << "x" << sc.initial.cols() << ", "
                << sc.dumps.size() << " dump events)\n";
      return kExitOk;
    }

    if (oracle_run->parsed()) {
      const ScenarioSpec spec = resolve_spec(oracle_args);
      SnpPolicy policy;
      RolloutOptions opts;
      opts.store_heights = oracle_world;
      for (std::size_t i = 0; i < oracle_n; ++i) {
        const std::uint64_t seed = oracle_seed + i;
        const EpisodeRecord rec = record_episode(spec, seed, config, policy, opts);
        if (!oracle_record.empty()) write_episode(rec, oracle_record);
        const MetricsRow m = metrics(rec);
        std::cout << "seed " << seed << ": " << rec.terminal.reason << ", " << m.steps << " steps, removed "
                  << m.removed_fraction * 100.0 << "%, volume left " << m.volume_left << " m3, reward "
                  << m.total_reward << "\n";
      }
      return kExitOk;
    }

    if (dataset_build->parsed()) {
      const ScenarioSpec spec = resolve_spec(dataset_args);
      auto policy = make_policy(dataset_policy);
      const DatasetManifest m = build_dataset(spec, config, *policy, dataset_n, dataset_seed0, dataset_out);
      std::cout << "wrote " << m.count << " episodes to " << dataset_out << "\n";
      return kExitOk;
    }

    if (evaluate_cmd->parsed() || sweep_cmd->parsed()) {
      eval.spec = resolve_spec(eval_args);
      if (!external.empty()) {
        const auto colon = external.rfind(':');
        if (colon == std::string::npos) throw Error(ErrorCode::invalid_parameter, "--external expects host:port");
        eval.source.external_host = external.substr(0, colon);
        eval.source.external_port = static_cast<std::uint16_t>(std::stoul(external.substr(colon + 1)));
      }
      eval.source.replay_root = replay_root;
      if (!eval_record.empty()) eval.record_root = fs::path(eval_record);
      if (evaluate_cmd->parsed()) {
        const MetricsTable table = evaluate(config, eval);
        std::cout << format_table_text(table);
        if (!csv_path.empty()) write_text(csv_path, format_table_csv(table));
      } else {
        const AblationTable table = sweep(sweep_param, sweep_values, config, eval);
        std::cout << format_ablation_text(table);
        if (!csv_path.empty()) write_text(csv_path, format_ablation_csv(table));
      }
      return kExitOk;
    }

    if (serve_cmd->parsed()) {
      if (serve_policy.empty()) {
        ProtocolServer server(config, serve_host, serve_port);
        std::cout << "serving environment sessions on " << serve_host << ":" << server.port() << std::endl;
        server.run();
      } else {
        PolicyServer server(make_policy(serve_policy), config, serve_host, serve_port);
        server.start();
        std::cout << "serving policy " << serve_policy << " on " << serve_host << ":" << server.port() << std::endl;
        wait_forever();
        server.stop();
      }
      return kExitOk;
    }

    if (replay_cmd->parsed()) {
      bool all_ok = true;
      for (const auto& dir : episode_dirs(replay_path)) {
        const EpisodeRecord rec = read_episode(dir);
        const ReplayReport report = replay(rec, config);
        if (report.ok) {
          std::cout << dir.filename().string() << ": ok (" << rec.steps.size() << " steps)\n";
        } else {
          all_ok = false;
          std::cout << dir.filename().string() << ": divergence at step " << report.divergence_step.value_or(0)
                    << ": " << report.detail << "\n";
        }
      }
      return all_ok ? kExitOk : kExitDivergence;
    }

    if (render_cmd->parsed()) {
      const EpisodeRecord rec = read_episode(render_path);
      const RenderSummary s = render_episode(rec, config, render_out);
      std::cout << "wrote " << s.frames << " frames and " << s.trajectory_points << " trajectory points to "
                << render_out << "\n";
      return kExitOk;
    }
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.code()) << "): " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::logic_error& e) {
    std::cerr << "error: invalid argument: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}
