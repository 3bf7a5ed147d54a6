#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "grading/harness.hpp"

using namespace grading;

namespace {

EvaluateOptions small(std::string policy, std::size_t runs) {
  EvaluateOptions o;
  o.policy = std::move(policy);
  o.runs = runs;
  o.seed0 = 20;
  return o;
}

}  // namespace

TEST(Registry, KnownAndUnknownPolicies) {
  EXPECT_EQ(make_policy("snp")->name(), "snp");
  EXPECT_EQ(make_policy("random")->name(), "random");
  for (const char* name : {"ppo", "", "SNP"}) {
    try {
      make_policy(name);
      FAIL() << name;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::unknown_policy);
    }
  }
  EXPECT_THROW(make_policy("external"), Error);
  EXPECT_EQ(policy_names().size(), 4u);
}

TEST(Aggregate, SampleStatistics) {
  const Aggregate a = aggregate({1.0, 2.0, 3.0, 4.0});
  EXPECT_DOUBLE_EQ(a.mean, 2.5);
  EXPECT_DOUBLE_EQ(a.std, std::sqrt(5.0 / 3.0));
  const Aggregate one = aggregate({3.0});
  EXPECT_EQ(one.mean, 3.0);
  EXPECT_EQ(one.std, 0.0);
}

TEST(Evaluate, ZeroRunsGiveEmptyTable) {
  const MetricsTable t = evaluate(Config{}, small("snp", 0));
  EXPECT_TRUE(t.rows.empty());
  EXPECT_EQ(t.aggregate.size(), metric_names().size());
}

TEST(Evaluate, AggregatesAreRecomputable) {
  const MetricsTable t = evaluate(Config{}, small("snp", 8));
  ASSERT_EQ(t.rows.size(), 8u);
  EXPECT_EQ(t.policy, "snp");
  EXPECT_EQ(t.family, "init");
  for (std::size_t i = 0; i < t.rows.size(); ++i) EXPECT_EQ(t.rows[i].seed, 20 + i);
  for (std::size_t m = 0; m < metric_names().size(); ++m) {
    std::vector<double> col;
    for (const auto& r : t.rows) col.push_back(metric_value(r, m));
    const double mean = std::accumulate(col.begin(), col.end(), 0.0) / static_cast<double>(col.size());
    double ss = 0.0;
    for (double v : col) ss += (v - mean) * (v - mean);
    EXPECT_NEAR(t.aggregate[m].mean, mean, 1e-12 * (1.0 + std::abs(mean))) << metric_names()[m];
    EXPECT_NEAR(t.aggregate[m].std, std::sqrt(ss / static_cast<double>(col.size() - 1)), 1e-9) << metric_names()[m];
  }
}

TEST(Evaluate, WorkersDoNotChangeRows) {
  EvaluateOptions one = small("snp", 4);
  EvaluateOptions many = one;
  many.workers = 3;
  const MetricsTable a = evaluate(Config{}, one);
  const MetricsTable b = evaluate(Config{}, many);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    for (std::size_t m = 0; m < metric_names().size(); ++m)
      EXPECT_EQ(metric_value(a.rows[i], m), metric_value(b.rows[i], m));
  }
}

TEST(Evaluate, OracleBeatsRandom) {
  const MetricsTable snp = evaluate(Config{}, small("snp", 4));
  const MetricsTable rnd = evaluate(Config{}, small("random", 4));
  // random pushes eventually clear a small map too, but take far longer
  const std::size_t time = 3;
  const std::size_t removed = 5;
  EXPECT_LT(2.0 * snp.aggregate[time].mean, rnd.aggregate[time].mean);
  EXPECT_GT(snp.aggregate[removed].mean, 0.9);
}

TEST(Sweep, DownsampleStateSpaces) {
  EvaluateOptions o = small("random", 1);
  Config base;
  base.timeout_steps = 2;
  const AblationTable t = sweep("downsample", {"1", "2", "3", "4"}, base, o);
  ASSERT_EQ(t.columns.size(), 4u);
  EXPECT_EQ(t.columns[0].state_space, "300x300");
  EXPECT_EQ(t.columns[1].state_space, "150x150");
  EXPECT_EQ(t.columns[2].state_space, "75x75");
  EXPECT_EQ(t.columns[3].state_space, "38x38");
}

TEST(Sweep, MaskSigmaColumns) {
  Config base;
  base.timeout_steps = 2;
  const AblationTable t = sweep("mask_sigma", {"1", "2", "3", "4"}, base, small("random", 2));
  ASSERT_EQ(t.columns.size(), 4u);
  for (const auto& c : t.columns) EXPECT_EQ(c.table.rows.size(), 2u);
  const std::string text = format_ablation_text(t);
  EXPECT_NE(text.find("+-"), std::string::npos);
  EXPECT_NE(text.find("volume_left"), std::string::npos);
}

TEST(Sweep, SingleValueEqualsEvaluate) {
  const EvaluateOptions o = small("snp", 2);
  const AblationTable t = sweep("fill_fraction", {"0.9"}, Config{}, o);
  const MetricsTable e = evaluate(Config{}, o);
  ASSERT_EQ(t.columns.size(), 1u);
  ASSERT_EQ(t.columns[0].table.rows.size(), e.rows.size());
  for (std::size_t i = 0; i < e.rows.size(); ++i)
    EXPECT_EQ(t.columns[0].table.rows[i].total_reward, e.rows[i].total_reward);
}

TEST(Sweep, InvalidParameterOrValue) {
  auto expect_invalid = [](const std::string& p, const std::vector<std::string>& v) {
    try {
      sweep(p, v, Config{}, small("random", 1));
      FAIL() << p;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::invalid_parameter);
    }
  };
  expect_invalid("gamma", {"0.9"});
  expect_invalid("downsample", {"x"});
  expect_invalid("mask_sigma", {"-1"});
}

TEST(Format, TextAndCsv) {
  MetricsRow r;
  r.seed = 3;
  r.volume_left = 0.25;
  r.done = true;
  const MetricsTable t = tabulate("snp", "init", {r});
  const std::string csv = format_table_csv(t);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "seed,volume_left,max_height_left,mean_height_left,total_time,total_reward,removed_fraction,steps,done");
  EXPECT_NE(csv.find("\n3,0.25,"), std::string::npos);
  const std::string text = format_table_text(t);
  EXPECT_NE(text.find("0.2500"), std::string::npos);
  EXPECT_NE(text.find("mean"), std::string::npos);
}
