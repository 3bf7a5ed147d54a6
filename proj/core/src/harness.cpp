#include "grading/harness.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include "grading/codec.hpp"
#include "grading/protocol.hpp"

namespace grading {

namespace {

// Plays back the actions recorded for the current seed.
class RecordReplayPolicy final : public Policy {
 public:
  explicit RecordReplayPolicy(std::filesystem::path root) : root_(std::move(root)) {}
  std::string name() const override { return "replay"; }
  void begin(const GradingEnv&, const ScenarioSpec&, std::uint64_t seed) override {
    const EpisodeRecord rec = read_episode(root_ / episode_dir_name(seed));
    actions_.clear();
    for (const auto& s : rec.steps) actions_.push_back(s.action);
    next_ = 0;
  }
  PolicyAction act(const DiffMap&, const GradingEnv&) override {
    if (next_ >= actions_.size()) return {};
    return {actions_[next_++], false};
  }

 private:
  std::filesystem::path root_;
  std::vector<WaypointAction> actions_;
  std::size_t next_ = 0;
};

std::string fixed(double v, int digits) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(digits) << v;
  return out.str();
}

}  // namespace

const std::vector<std::string>& policy_names() {
  static const std::vector<std::string> names{"snp", "random", "external", "replay"};
  return names;
}

std::unique_ptr<Policy> make_policy(const std::string& name, const PolicySource& source) {
  if (name == "snp") return std::make_unique<SnpPolicy>();
  if (name == "random") return std::make_unique<RandomPolicy>();
  if (name == "external") {
    if (source.external_port == 0) throw Error(ErrorCode::invalid_parameter, "external policy needs a port");
    return std::make_unique<ExternalPolicy>(source.external_host, source.external_port);
  }
  if (name == "replay") {
    if (source.replay_root.empty()) throw Error(ErrorCode::invalid_parameter, "replay policy needs a record directory");
    return std::make_unique<RecordReplayPolicy>(source.replay_root);
  }
  throw Error(ErrorCode::unknown_policy, "unknown policy '" + name + "'");
}

const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> names{"volume_left", "max_height_left", "mean_height_left",
                                              "total_time",  "total_reward",    "removed_fraction",
                                              "steps",       "done"};
  return names;
}

double metric_value(const MetricsRow& row, std::size_t index) {
  switch (index) {
    case 0: return row.volume_left;
    case 1: return row.max_height_left;
    case 2: return row.mean_height_left;
    case 3: return row.total_time;
    case 4: return row.total_reward;
    case 5: return row.removed_fraction;
    case 6: return static_cast<double>(row.steps);
    case 7: return row.done ? 1.0 : 0.0;
    default: throw Error(ErrorCode::invalid_parameter, "metric index out of range");
  }
}

Aggregate aggregate(const std::vector<double>& values) {
  if (values.empty()) return {};
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  if (values.size() < 2) return {mean, 0.0};
  double sq = 0.0;
  for (double v : values) sq += (v - mean) * (v - mean);
  return {mean, std::sqrt(sq / static_cast<double>(values.size() - 1))};
}

MetricsTable tabulate(std::string policy, std::string family, std::vector<MetricsRow> rows) {
  MetricsTable t{std::move(policy), std::move(family), std::move(rows), {}};
  for (std::size_t m = 0; m < metric_names().size(); ++m) {
    std::vector<double> column;
    for (const auto& r : t.rows) column.push_back(metric_value(r, m));
    t.aggregate.push_back(aggregate(column));
  }
  return t;
}

MetricsTable evaluate(const Config& config, const EvaluateOptions& options) {
  make_policy(options.policy, options.source);  // reject unknown names before any work
  std::vector<MetricsRow> rows(options.runs);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    try {
      auto policy = make_policy(options.policy, options.source);
      for (std::size_t i = next++; i < options.runs; i = next++) {
        const std::uint64_t seed = options.seed0 + i;
        const EpisodeRecord rec = record_episode(options.spec, seed, config, *policy);
        if (options.record_root) write_episode(rec, *options.record_root);
        rows[i] = metrics(rec);
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next = options.runs;
    }
  };

  const std::size_t n_workers = std::max<std::size_t>(1, std::min(options.workers, options.runs));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (std::size_t w = 0; w < n_workers; ++w) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return tabulate(options.policy, std::string(to_string(options.spec.family)), std::move(rows));
}

AblationTable sweep(const std::string& parameter, const std::vector<std::string>& values,
                    const Config& base, const EvaluateOptions& options) {
  static const std::vector<std::pair<std::string, std::string>> keys{
      {"downsample", "downsample_exponent"}, {"mask_sigma", "mask_sigma_factor"}, {"fill_fraction", "fill_fraction"}};
  std::string key;
  for (const auto& [name, config_key] : keys) {
    if (name == parameter) key = config_key;
  }
  if (key.empty()) throw Error(ErrorCode::invalid_parameter, "cannot sweep '" + parameter + "'");
  if (values.empty()) throw Error(ErrorCode::invalid_parameter, "sweep needs at least one value");

  AblationTable table{parameter, {}};
  for (const auto& v : values) {
    Config config = base;
    try {
      set_config_value(config, key, v);
      config.validate();
    } catch (const Error& e) {
      throw Error(ErrorCode::invalid_parameter, "bad " + parameter + " value '" + v + "': " + e.what());
    }
    const std::string space = std::to_string(config.fov.pooled_rows()) + "x" + std::to_string(config.fov.pooled_cols());
    table.columns.push_back({v, space, evaluate(config, options)});
  }
  return table;
}

std::string format_table_text(const MetricsTable& table) {
  const auto& names = metric_names();
  std::ostringstream out;
  out << "policy " << table.policy << "  family " << table.family << "  runs " << table.rows.size() << "\n";
  out << std::left << std::setw(8) << "seed";
  for (const auto& n : names) out << std::right << std::setw(18) << n;
  out << "\n";
  for (const auto& r : table.rows) {
    out << std::left << std::setw(8) << r.seed;
    for (std::size_t m = 0; m < names.size(); ++m) out << std::right << std::setw(18) << fixed(metric_value(r, m), 4);
    out << "\n";
  }
  if (!table.rows.empty()) {
    out << std::left << std::setw(8) << "mean";
    for (const auto& a : table.aggregate) out << std::right << std::setw(18) << fixed(a.mean, 4);
    out << "\n" << std::left << std::setw(8) << "std";
    for (const auto& a : table.aggregate) out << std::right << std::setw(18) << fixed(a.std, 4);
    out << "\n";
  }
  return out.str();
}

std::string format_table_csv(const MetricsTable& table) {
  std::string out = "seed";
  for (const auto& n : metric_names()) out += "," + n;
  out += "\n";
  for (const auto& r : table.rows) {
    out += std::to_string(r.seed);
    for (std::size_t m = 0; m < metric_names().size(); ++m) out += "," + format_double(metric_value(r, m));
    out += "\n";
  }
  if (!table.rows.empty()) {
    out += "mean";
    for (const auto& a : table.aggregate) out += "," + format_double(a.mean);
    out += "\nstd";
    for (const auto& a : table.aggregate) out += "," + format_double(a.std);
    out += "\n";
  }
  return out;
}

std::string format_ablation_text(const AblationTable& table) {
  static const std::vector<std::size_t> shown{0, 4, 2};  // volume, reward, mean height
  std::ostringstream out;
  out << std::left << std::setw(22) << table.parameter;
  for (const auto& c : table.columns) out << std::right << std::setw(22) << c.value;
  out << "\n" << std::left << std::setw(22) << "state space";
  for (const auto& c : table.columns) out << std::right << std::setw(22) << c.state_space;
  out << "\n";
  for (std::size_t m : shown) {
    out << std::left << std::setw(22) << metric_names()[m];
    for (const auto& c : table.columns) {
      const auto& a = c.table.aggregate[m];
      out << std::right << std::setw(22) << (fixed(a.mean, 3) + " +- " + fixed(a.std, 3));
    }
    out << "\n";
  }
  return out.str();
}

std::string format_ablation_csv(const AblationTable& table) {
  std::string out = table.parameter + ",state_space";
  for (const auto& n : metric_names()) out += "," + n + "_mean," + n + "_std";
  out += "\n";
  for (const auto& c : table.columns) {
    out += c.value + "," + c.state_space;
    for (const auto& a : c.table.aggregate) out += "," + format_double(a.mean) + "," + format_double(a.std);
    out += "\n";
  }
  return out;
}

}  // namespace grading
