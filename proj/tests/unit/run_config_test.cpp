// Copyright 2026 The vizpriv Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "test_util.hpp"
#include "vizpriv/run_config.hpp"

namespace vizpriv {
namespace {

Json fixture_config() {
  return Json::parse(testing::read_text(testing::fixture_dir() / "adult_like.config.json"));
}

TEST(RunConfig, ParsesFixture) {
  const RunConfig c = load_run_config(testing::fixture_dir() / "adult_like.config.json");
  EXPECT_EQ(c.input, testing::fixture_dir() / "adult_like.csv");
  EXPECT_EQ(c.epsilons, std::vector<double>{2.0});
  EXPECT_EQ(c.k, 2);
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.repeats, 25);
  ASSERT_EQ(c.patterns.size(), 3u);
  EXPECT_EQ(c.patterns[1].selection, Selection::rectangle(50, 12000, 60, 18000));
  EXPECT_EQ(c.charts[2].x_step, 2.5);
}

TEST(RunConfig, MissingEpsilonNamesField) {
  Json j = fixture_config();
  j.erase("epsilon");
  try {
    parse_run_config(j, testing::fixture_dir()).validate();
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("epsilon"), std::string::npos);
  }
}

TEST(RunConfig, RejectsBadValues) {
  for (const auto& [key, value] : std::vector<std::pair<std::string, Json>>{
           {"repeats", 0}, {"k", -1}, {"epsilon", -2}, {"structure_fraction", 1.5}, {"epsilon", "two"}}) {
    Json j = fixture_config();
    j[key] = value;
    EXPECT_THROW(parse_run_config(j, testing::fixture_dir()).validate(), ConfigError) << key;
  }
}

TEST(RunConfig, EpsilonListAndWeights) {
  Json j = fixture_config();
  j["epsilon"] = {0.5, 2, 5};
  j["weights"] = {0, 4};
  const RunConfig c = parse_run_config(j, testing::fixture_dir());
  EXPECT_EQ(c.epsilons, (std::vector<double>{0.5, 2, 5}));
  EXPECT_EQ(c.weights, (std::vector<double>{0, 4}));
}

TEST(Summarize, MeanSdAndTInterval) {
  std::vector<double> v;
  for (int i = 1; i <= 25; ++i) v.push_back(i);
  const Summary s = summarize(v);
  EXPECT_DOUBLE_EQ(s.mean, 13.0);
  const double sd = std::sqrt(25.0 * 26.0 / 12.0);  // sample sd of 1..n is sqrt(n(n+1)/12)
  EXPECT_NEAR(s.sd, sd, 1e-12);
  ASSERT_TRUE(s.ci95);
  EXPECT_NEAR(*s.ci95, 2.0638985616280205 * sd / 5.0, 1e-9);  // t(0.975, 24)
  EXPECT_FALSE(summarize({3.0}).ci95);
}

TEST(Summarize, PermutationInvariant) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0, 1e3);
  std::vector<double> v(25);
  for (auto& x : v) x = g(rng);
  const Summary a = summarize(v);
  for (int t = 0; t < 20; ++t) {
    std::shuffle(v.begin(), v.end(), rng);
    const Summary b = summarize(v);
    ASSERT_EQ(a.mean, b.mean);
    ASSERT_EQ(a.sd, b.sd);
    ASSERT_EQ(*a.ci95, *b.ci95);
  }
}

class Runs : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    config_ = new RunConfig(load_run_config(testing::fixture_dir() / "adult_like.config.json"));
    work_ = new Workload(load_workload(*config_));
  }
  static void TearDownTestSuite() {
    delete work_;
    delete config_;
  }
  static inline RunConfig* config_ = nullptr;
  static inline Workload* work_ = nullptr;
};

TEST_F(Runs, WorkloadResolvesPatterns) {
  EXPECT_EQ(work_->data.rows(), 1000);
  ASSERT_EQ(work_->patterns.size(), 3u);
  EXPECT_EQ(work_->patterns[0].id, "P0");
  EXPECT_EQ(work_->patterns[0].type, PatternType::kOrder);
  EXPECT_EQ(work_->patterns[1].type, PatternType::kCluster);
  EXPECT_EQ(work_->patterns[2].type, PatternType::kCorrelation);
  for (const auto& p : work_->patterns) EXPECT_FALSE(p.records.empty()) << p.id;
  EXPECT_TRUE(work_->charts.count("tenure_by_age"));
}

TEST_F(Runs, ZeroWeightsMatchBaselineFlag) {
  std::map<std::string, double> zero;
  for (const auto& p : work_->patterns) zero[p.id] = 0.0;
  const RunOutput a = run_once(*work_, *config_, 2.0, zero, 7);
  RunConfig base = *config_;
  base.baseline = true;
  const RunOutput b = run_once(*work_, base, 2.0, {}, 7);
  EXPECT_EQ(to_csv(a.scheme.synthetic), to_csv(b.scheme.synthetic));
  EXPECT_EQ(a.scheme.network, b.scheme.network);
}

TEST_F(Runs, WriteOutputIsDeterministic) {
  const auto root = std::filesystem::temp_directory_path() / "vizpriv_run_output";
  std::filesystem::remove_all(root);
  write_run_output(run_once(*work_, *config_, 2.0, {}, 7), root / "a");
  write_run_output(run_once(*work_, *config_, 2.0, {}, 7), root / "b");
  for (const char* f : {"synthetic.csv", "scheme.json", "network.json", "marginals.json", "metrics.json"}) {
    const std::string a = testing::read_text(root / "a" / f);
    EXPECT_FALSE(a.empty()) << f;
    EXPECT_EQ(a, testing::read_text(root / "b" / f)) << f;
  }
  std::filesystem::remove_all(root);
}

TEST_F(Runs, SingleConditionAggregatesAllRepeats) {
  const auto rows = sweep(*work_, *config_, 1);
  const auto metrics = flatten_metrics(run_once(*work_, *config_, 2.0, {}, 7).metrics);
  ASSERT_EQ(rows.size(), metrics.size());
  std::set<std::string> names;
  for (const auto& r : rows) {
    EXPECT_EQ(r.n_runs, 25);
    EXPECT_EQ(r.epsilon, 2.0);
    EXPECT_TRUE(r.ci95);
    names.insert(r.metric);
  }
  EXPECT_EQ(names.size(), rows.size());
  for (const auto& [k, v] : metrics) EXPECT_TRUE(names.count(k)) << k;
}

TEST_F(Runs, GridProducesSixConditionsIndependentOfJobs) {
  RunConfig c = *config_;
  c.epsilons = {0.5, 2, 5};
  c.weights = {0, 4};
  c.repeats = 3;
  const auto one = sweep(*work_, c, 1);
  const auto many = sweep(*work_, c, 4);
  std::set<std::pair<double, double>> conditions;
  for (const auto& r : one) conditions.insert({r.epsilon, r.weight.value()});
  EXPECT_EQ(conditions.size(), 6u);
  EXPECT_EQ(sweep_to_csv(one), sweep_to_csv(many));
  const std::string csv = sweep_to_csv(one);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "epsilon,weight,metric,mean,sd,ci95,n_runs");
}

}  // namespace
}  // namespace vizpriv
