#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "grading/config.hpp"
#include "grading/episode.hpp"
#include "grading/policy.hpp"
#include "grading/scenario.hpp"

namespace grading {

/// Where non-local policies come from.
struct PolicySource {
  std::string external_host = "127.0.0.1";
  std::uint16_t external_port = 0;
  std::filesystem::path replay_root;  // directory holding episode_<seed>/ records
};

/// Registered policies: snp, random, external, replay.
std::unique_ptr<Policy> make_policy(const std::string& name, const PolicySource& source = {});
const std::vector<std::string>& policy_names();

struct EvaluateOptions {
  std::string policy = "snp";
  ScenarioSpec spec = ScenarioSpec::defaults(Family::init);
  std::size_t runs = 50;
  std::uint64_t seed0 = 0;
  std::size_t workers = 1;
  PolicySource source;
  std::optional<std::filesystem::path> record_root;  // also write every record here
};

struct Aggregate {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (n - 1)
};

/// Column-wise mean/std over MetricsRow fields, in metric_names() order.
struct MetricsTable {
  std::string policy;
  std::string family;
  std::vector<MetricsRow> rows;  // ordered by seed
  std::vector<Aggregate> aggregate;
};

const std::vector<std::string>& metric_names();
/// Value of metric `index` (metric_names() order) for one row.
double metric_value(const MetricsRow& row, std::size_t index);

Aggregate aggregate(const std::vector<double>& values);
MetricsTable tabulate(std::string policy, std::string family, std::vector<MetricsRow> rows);

/// Runs seeds seed0 .. seed0 + runs - 1, possibly in parallel; rows come back
/// ordered by seed.
MetricsTable evaluate(const Config& config, const EvaluateOptions& options);

struct SweepColumn {
  std::string value;        // as given
  std::string state_space;  // pooled grid, e.g. "75x75"
  MetricsTable table;
};

struct AblationTable {
  std::string parameter;
  std::vector<SweepColumn> columns;
};

/// parameter: downsample | mask_sigma | fill_fraction.
AblationTable sweep(const std::string& parameter, const std::vector<std::string>& values,
                    const Config& base, const EvaluateOptions& options);

std::string format_table_text(const MetricsTable& table);
std::string format_table_csv(const MetricsTable& table);
std::string format_ablation_text(const AblationTable& table);
std::string format_ablation_csv(const AblationTable& table);

}  // namespace grading
