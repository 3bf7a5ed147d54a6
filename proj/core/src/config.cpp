#include "grading/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <fstream>
#include <sstream>
#include <variant>
#include <vector>

#include "grading/codec.hpp"

namespace grading {

void RewardWeights::validate() const {
  const bool ok = volume >= 0.0 && time >= 0.0 && height >= 0.0 && done >= 0.0 && fail >= 0.0 &&
                  gamma >= 0.0 && gamma < 1.0;
  if (!ok) throw Error(ErrorCode::invalid_config, "reward weights must be >= 0 and gamma in [0,1)");
}

void Config::validate() const {
  if (!(cell_size > 0.0)) throw Error(ErrorCode::invalid_config, "cell_size must be positive");
  fov.validate();
  weights.validate();
  dozer.validate();
  if (!(epsilon_done > 0.0)) throw Error(ErrorCode::invalid_config, "epsilon_done must be positive");
  if (timeout_steps == 0) throw Error(ErrorCode::invalid_config, "timeout_steps must be positive");
  if (!(mask_sigma_factor > 0.0) || !(mask_base_scale > 0.0)) {
    throw Error(ErrorCode::invalid_config, "mask parameters must be positive");
  }
  if (!(operable_margin >= 0.0)) throw Error(ErrorCode::invalid_config, "operable_margin < 0");
  if (!(fill_fraction > 0.0 && fill_fraction <= 1.0)) {
    throw Error(ErrorCode::invalid_config, "fill_fraction must lie in (0, 1]");
  }
}

namespace {


struct Entry {
  std::string_view key;
  // nested members are reached through small accessors
  double* (*real)(Config&);
  std::size_t* (*count)(Config&);
};

#define REAL(name, expr) \
  Entry { name, [](Config& c) -> double* { return &(expr); }, nullptr }
#define COUNT(name, expr) \
  Entry { name, nullptr, [](Config& c) -> std::size_t* { return &(expr); } }

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = {
      REAL("cell_size", c.cell_size),
      COUNT("fov_rows", c.fov.rows),
      COUNT("fov_cols", c.fov.cols),
      COUNT("anchor_row", c.fov.anchor_row),
      COUNT("anchor_col", c.fov.anchor_col),
      Entry{"downsample_exponent", nullptr, nullptr},
      REAL("lambda_volume", c.weights.volume),
      REAL("lambda_time", c.weights.time),
      REAL("lambda_height", c.weights.height),
      REAL("lambda_done", c.weights.done),
      REAL("lambda_fail", c.weights.fail),
      REAL("gamma", c.weights.gamma),
      REAL("epsilon_done", c.epsilon_done),
      COUNT("timeout_steps", c.timeout_steps),
      REAL("mask_sigma_factor", c.mask_sigma_factor),
      REAL("mask_base_scale", c.mask_base_scale),
      REAL("operable_margin", c.operable_margin),
      REAL("blade_width", c.dozer.blade_width),
      REAL("blade_capacity", c.dozer.blade_capacity),
      REAL("v_max", c.dozer.v_max),
      REAL("v_min", c.dozer.v_min),
      REAL("omega", c.dozer.omega),
      REAL("alpha", c.dozer.alpha),
      REAL("spill_ratio", c.dozer.spill_ratio),
      REAL("deposit_rate", c.dozer.deposit_rate),
      REAL("fill_fraction", c.fill_fraction),
  };
  return table;
}

#undef REAL
#undef COUNT

std::size_t parse_count(std::string_view key, std::string_view text) {
  std::size_t value = 0;
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, value);
  if (res.ec != std::errc{} || res.ptr != end) {
    throw Error(ErrorCode::invalid_config,
                "key '" + std::string(key) + "' expects a non-negative integer");
  }
  return value;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

void set_config_value(Config& config, std::string_view key, std::string_view raw) {
  const std::string value = trim(raw);
  if (key == "downsample_exponent") {
    config.fov.downsample_exponent = static_cast<unsigned>(parse_count(key, value));
    return;
  }
  for (const auto& e : entries()) {
    if (e.key != key) continue;
    if (e.real != nullptr) {
      try {
        *e.real(config) = parse_double(value);
      } catch (const Error&) {
        throw Error(ErrorCode::invalid_config, "key '" + std::string(key) + "' expects a number");
      }
    } else {
      *e.count(config) = parse_count(key, value);
    }
    return;
  }
  throw Error(ErrorCode::invalid_config, "unknown config key '" + std::string(key) + "'");
}

Config parse_config(std::string_view text) {
  boost::property_tree::ptree tree;
  std::istringstream in{std::string(text)};
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw Error(ErrorCode::invalid_config, e.what());
  }
  Config config;
  for (const auto& [key, node] : tree) {
    if (!node.empty()) {
      throw Error(ErrorCode::invalid_config, "sections are not supported: [" + key + "]");
    }
    set_config_value(config, key, node.data());
  }
  config.validate();
  return config;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_failure, "cannot open config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string dump_config(const Config& config) {
  Config copy = config;
  std::string out;
  for (const auto& e : entries()) {
    out += e.key;
    out += " = ";
    if (e.key == "downsample_exponent") {
      out += std::to_string(config.fov.downsample_exponent);
    } else if (e.real != nullptr) {
      out += format_double(*e.real(copy));
    } else {
      out += std::to_string(*e.count(copy));
    }
    out += '\n';
  }
  return out;
}

std::string config_hash(const Config& config) { return hex32(crc32(dump_config(config))); }

}  // namespace grading
