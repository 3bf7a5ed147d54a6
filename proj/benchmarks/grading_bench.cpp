#include <benchmark/benchmark.h>

#include <numbers>

#include "grading/dynamics.hpp"
#include "grading/env.hpp"
#include "grading/oracle.hpp"

using namespace grading;

static void BM_EgoFov(benchmark::State& state) {
  GradingEnv env;
  env.reset(ScenarioSpec::defaults(Family::init), 7);
  const DiffMap delta = env.delta();
  FovSpec spec;
  DozerPose pose = env.dozer().pose;
  pose.heading += 0.3;
  for (auto _ : state) benchmark::DoNotOptimize(ego_fov(delta, pose, spec));
}
BENCHMARK(BM_EgoFov);

static void BM_Observe(benchmark::State& state) {
  GradingEnv env;
  env.reset(ScenarioSpec::defaults(Family::init), 7);
  for (auto _ : state) benchmark::DoNotOptimize(env.observation());
}
BENCHMARK(BM_Observe);

static void BM_ForwardGrading(benchmark::State& state) {
  const HeightMap target = new_flat(320, 320, 0.05, 0.0);
  const HeightMap map = add_pile(target, {8.0, 6.0, 0.6, 0.6, 0.4, 0.0});
  DozerState dozer;
  dozer.pose = {8.0, 2.0, std::numbers::pi / 2};
  for (auto _ : state) benchmark::DoNotOptimize(apply_forward_grading(dozer, map, target, 8.0));
}
BENCHMARK(BM_ForwardGrading);

static void BM_EnvStepOracle(benchmark::State& state) {
  GradingEnv env;
  const DiffMap obs = env.reset(ScenarioSpec::defaults(Family::init), 7);
  OracleState oracle;
  const WaypointAction action = *oracle_act(obs, oracle_view(env), oracle).action;
  for (auto _ : state) {
    GradingEnv fork = env.fork();
    benchmark::DoNotOptimize(fork.step(action));
  }
}
BENCHMARK(BM_EnvStepOracle);

static void BM_Episode(benchmark::State& state) {
  for (auto _ : state) {
    GradingEnv env;
    DiffMap obs = env.reset(ScenarioSpec::defaults(Family::init), 7);
    OracleState oracle;
    while (!env.terminated()) {
      const OracleDecision d = oracle_act(obs, oracle_view(env), oracle);
      if (!d.action) break;
      obs = env.step(*d.action).observation;
    }
  }
}
BENCHMARK(BM_Episode)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
