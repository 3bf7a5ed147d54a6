#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "grading/env.hpp"
#include "grading/oracle.hpp"

namespace grading {

struct PolicyAction {
  std::optional<WaypointAction> action;  // empty: the policy ends the episode
  bool stuck = false;
};

/// A decision rule over observations. One instance serves one episode at a
/// time; begin() is called after every reset.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  virtual void begin(const GradingEnv& env, const ScenarioSpec& spec, std::uint64_t seed) = 0;
  virtual PolicyAction act(const DiffMap& observation, const GradingEnv& env) = 0;
};

class SnpPolicy final : public Policy {
 public:
  std::string name() const override { return "snp"; }
  void begin(const GradingEnv&, const ScenarioSpec&, std::uint64_t) override { state_ = {}; }
  PolicyAction act(const DiffMap& observation, const GradingEnv& env) override;

 private:
  OracleState state_;
};

/// Samples both pixels from the Gaussian-masked uniform distribution,
/// restricted to pixels inside the operable area. Seeded per episode.
class RandomPolicy final : public Policy {
 public:
  std::string name() const override { return "random"; }
  void begin(const GradingEnv& env, const ScenarioSpec& spec, std::uint64_t seed) override;
  PolicyAction act(const DiffMap& observation, const GradingEnv& env) override;

 private:
  std::uint64_t rng_state_ = 0;
};

/// Plays back a fixed action list, then stops.
class ScriptedPolicy final : public Policy {
 public:
  explicit ScriptedPolicy(std::vector<WaypointAction> actions, std::string name = "replay")
      : actions_(std::move(actions)), name_(std::move(name)) {}
  std::string name() const override { return name_; }
  void begin(const GradingEnv&, const ScenarioSpec&, std::uint64_t) override { next_ = 0; }
  PolicyAction act(const DiffMap& observation, const GradingEnv& env) override;

 private:
  std::vector<WaypointAction> actions_;
  std::string name_;
  std::size_t next_ = 0;
};

/// Samples one pixel from `grid` using u in [0, 1) (inverse CDF, row-major).
Pixel sample_pixel(const ProbabilityGrid& grid, double u);

/// Uniform over operable pixels, multiplied by the Gaussian mask.
ProbabilityGrid masked_operable_distribution(const GradingEnv& env);

}  // namespace grading
