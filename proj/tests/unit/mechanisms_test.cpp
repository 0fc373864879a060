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
#include <cmath>
#include <random>
#include <vector>

#include "vizpriv/mechanisms.hpp"

namespace vizpriv {
namespace {

TEST(Laplace, ZeroScaleIsExactlyZero) {
  NoiseSource src(1);
  EXPECT_EQ(laplace_noise(0.0, src), 0.0);
}

TEST(Laplace, NegativeScaleRejected) {
  NoiseSource src(1);
  EXPECT_THROW(laplace_noise(-1.0, src), std::invalid_argument);
}

TEST(Laplace, MeanAbsoluteValueEqualsScale) {
  NoiseSource src(7);
  double s = 0;
  for (int i = 0; i < 100000; ++i) s += std::abs(laplace_noise(1.0, src));
  const double m = s / 100000;
  EXPECT_GE(m, 0.95);
  EXPECT_LE(m, 1.05);
}

TEST(Laplace, VarianceIsTwiceScaleSquared) {
  NoiseSource src(8);
  std::vector<double> v(100000);
  for (auto& x : v) x = laplace_noise(2.0, src);
  double mean = 0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0;
  for (double x : v) var += (x - mean) * (x - mean);
  var /= static_cast<double>(v.size() - 1);
  EXPECT_GE(var, 7.6);
  EXPECT_LE(var, 8.4);
}

TEST(Laplace, EmpiricalCdfMatchesAnalytic) {
  NoiseSource src(9);
  const double b = 1.5;
  std::vector<double> v(100000);
  for (auto& x : v) x = laplace_noise(b, src);
  std::sort(v.begin(), v.end());
  auto cdf = [&](double x) { return x < 0 ? 0.5 * std::exp(x / b) : 1.0 - 0.5 * std::exp(-x / b); };
  double d = 0;
  const double n = static_cast<double>(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double f = cdf(v[i]);
    d = std::max({d, std::abs(f - static_cast<double>(i) / n), std::abs(f - static_cast<double>(i + 1) / n)});
  }
  EXPECT_LT(d, 0.01);
}

TEST(LaplaceMechanism, ScaleIsSensitivityOverEpsilon) {
  // Same stream through laplace_noise with b = df / eps reproduces the mechanism.
  Eigen::VectorXd v(3);
  v << 0.5, 0.25, 0.25;
  NoiseSource a(5), b(5);
  const Eigen::VectorXd out = laplace_mechanism(v, 0.01, 0.5, a);
  for (Index i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(out[i], v[i] + laplace_noise(0.02, b));

  Eigen::VectorXd one(1);
  one << 0.5;
  NoiseSource c(6), d(6);
  EXPECT_DOUBLE_EQ(laplace_mechanism(one, 2.0 / 1000, 1.0, c)[0], 0.5 + laplace_noise(0.002, d));
}

TEST(LaplaceMechanism, EmptyVectorAndBadParameters) {
  NoiseSource src(1);
  EXPECT_EQ(laplace_mechanism(Eigen::VectorXd(0), 1.0, 1.0, src).size(), 0);
  EXPECT_THROW(laplace_mechanism(Eigen::VectorXd::Zero(2), 1.0, 0.0, src), std::invalid_argument);
  EXPECT_THROW(laplace_mechanism(Eigen::VectorXd::Zero(2), 0.0, 1.0, src), std::invalid_argument);
}

TEST(Exponential, EqualScoresAreUniform) {
  const Eigen::VectorXd p = exponential_probabilities(Eigen::VectorXd::Constant(3, 0.7), 1.0, 1.0);
  for (Index i = 0; i < 3; ++i) EXPECT_NEAR(p[i], 1.0 / 3.0, 1e-15);
}

TEST(Exponential, ClosedFormRatio) {
  Eigen::VectorXd q(2);
  const double dq = 0.3;
  q << 0.0, dq;
  const Eigen::VectorXd p = exponential_probabilities(q, dq, 2.0);
  EXPECT_NEAR(p[1], std::exp(1.0) / (1.0 + std::exp(1.0)), 1e-12);
  EXPECT_NEAR(p[1], 0.7311, 1e-4);
}

TEST(Exponential, SingleCandidate) {
  NoiseSource src(3);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(exponential_select(Eigen::VectorXd::Constant(1, 5.0), 1, 1, src), 0);
}

TEST(Exponential, EmptyRejected) {
  NoiseSource src(3);
  EXPECT_THROW(exponential_select(Eigen::VectorXd(0), 1, 1, src), std::invalid_argument);
}

TEST(Exponential, StableForHugeScores) {
  Eigen::VectorXd q(2);
  q << 1e6, 1e6 + 1;
  const Eigen::VectorXd p = exponential_probabilities(q, 1.0, 2.0);
  EXPECT_TRUE(p.allFinite());
  EXPECT_NEAR(p.sum(), 1.0, 1e-12);
}

TEST(Exponential, EmpiricalFrequenciesMatchSoftmax) {
  Eigen::VectorXd q(3);
  q << 0.0, 0.5, 1.0;
  const double dq = 0.25, eps = 1.0;
  Eigen::VectorXd expect(3);
  for (Index i = 0; i < 3; ++i) expect[i] = std::exp(eps * q[i] / (2 * dq));
  expect /= expect.sum();
  NoiseSource src(99);
  Eigen::VectorXd freq = Eigen::VectorXd::Zero(3);
  for (int i = 0; i < 100000; ++i) freq[exponential_select(q, dq, eps, src)] += 1;
  freq /= 100000.0;
  for (Index i = 0; i < 3; ++i) EXPECT_NEAR(freq[i], expect[i], 0.01);
}

TEST(NoiseSource, DeterministicAndIndependentSubstreams) {
  NoiseSource a(42), b(42);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
  NoiseSource s1 = NoiseSource(42).substream(1), s1b = NoiseSource(42).substream(1);
  NoiseSource s2 = NoiseSource(42).substream(2);
  EXPECT_EQ(s1.next_u64(), s1b.next_u64());
  EXPECT_NE(NoiseSource(42).substream(1).next_u64(), s2.next_u64());
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ASSERT_LT(a.below(7), 7u);
  }
}

TEST(Budget, SplitExamples) {
  const BudgetSpec half = split_budget(2.0, 0.5);
  EXPECT_EQ(half.epsilon_structure, 1.0);
  EXPECT_EQ(half.epsilon_marginals, 1.0);
  const BudgetSpec b = split_budget(1.0, 0.3);
  EXPECT_DOUBLE_EQ(b.epsilon_structure, 0.3);
  EXPECT_DOUBLE_EQ(b.epsilon_marginals, 0.7);
  EXPECT_EQ(b.epsilon_structure + b.epsilon_marginals, 1.0);
  EXPECT_THROW(split_budget(2.0, 1.0), std::invalid_argument);
  EXPECT_THROW(split_budget(-1.0, 0.5), std::invalid_argument);
  EXPECT_THROW(split_budget(0.0, 0.5), std::invalid_argument);
}

TEST(Budget, SumIsExactForRandomSplits) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> eps(1e-3, 50.0), frac(0.01, 0.99);
  for (int i = 0; i < 10000; ++i) {
    const double e = eps(rng);
    const BudgetSpec b = split_budget(e, frac(rng));
    ASSERT_EQ(b.epsilon_structure + b.epsilon_marginals, e);
    ASSERT_GT(b.epsilon_structure, 0.0);
    ASSERT_GT(b.epsilon_marginals, 0.0);
    b.validate();
  }
}

TEST(Budget, ValidateRejectsInconsistentSpec) {
  EXPECT_THROW((BudgetSpec{1.0, 0.5, 0.6}.validate()), std::invalid_argument);
  EXPECT_THROW((BudgetSpec{1.0, 0.0, 1.0}.validate()), std::invalid_argument);
}

TEST(Ledger, ConsumptionEqualsReservationOnceDrawsComplete) {
  BudgetLedger ledger;
  ledger.reserve(Stage::kStructure, 1.0, 3);
  ledger.reserve(Stage::kMarginals, 1.0, 1);
  for (int i = 0; i < 3; ++i) ledger.record(Stage::kStructure, "exponential", 1.0 / 3.0);
  ledger.record(Stage::kMarginals, "laplace", 1.0);
  EXPECT_EQ(ledger.draws(Stage::kStructure), 3);
  EXPECT_EQ(ledger.total(), 2.0);
  EXPECT_EQ(ledger.entries().size(), 4u);
}

}  // namespace
}  // namespace vizpriv
