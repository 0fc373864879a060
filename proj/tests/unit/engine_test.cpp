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

#include <random>
#include <vector>

#include "test_util.hpp"
#include "vizpriv/engine.hpp"

namespace vizpriv {
namespace {

PatternConstraint pattern(std::string id, double w, std::vector<Index> rows) {
  PatternConstraint p;
  p.id = std::move(id);
  p.weight = w;
  p.records = std::move(rows);
  return p;
}

BinnedData binned(const Eigen::MatrixXi& bins, std::vector<int> cards) {
  BinnedData b;
  b.bins = bins;
  b.cardinalities = std::move(cards);
  for (Index c = 0; c < bins.cols(); ++c) b.names.push_back("a" + std::to_string(c));
  return b;
}

TEST(MixtureWeights, Examples) {
  EXPECT_TRUE(mixture_weights(4, {}).values.isApprox(Eigen::VectorXd::Ones(4)));
  std::vector<PatternConstraint> ps{pattern("P1", 0.5, {0, 1}), pattern("P2", 0.5, {0})};
  const MixtureWeights mw = mixture_weights(3, ps);
  EXPECT_EQ(mw.values[0], 2.0);
  EXPECT_EQ(mw.values[1], 1.5);
  EXPECT_EQ(mw.values[2], 1.0);
  EXPECT_EQ(mw.ceiling, 2.0);
  std::vector<PatternConstraint> one{pattern("P1", 4, {1})};
  EXPECT_EQ(mixture_weights(2, one).values[1], 5.0);
}

TEST(MixtureWeights, OutOfRangeRow) {
  std::vector<PatternConstraint> ps{pattern("P1", 1, {5})};
  EXPECT_THROW(mixture_weights(5, ps), std::out_of_range);
}

TEST(MixtureWeights, RandomOverlapMatchesDefinition) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> w(0, 10);
  for (int t = 0; t < 200; ++t) {
    const Index n = 1 + static_cast<Index>(rng() % 60);
    std::vector<PatternConstraint> ps;
    Eigen::MatrixXi member = Eigen::MatrixXi::Zero(n, 4);
    for (int k = 0; k < 4; ++k) {
      std::vector<Index> rows;
      for (Index r = 0; r < n; ++r) {
        if (rng() % 3 == 0) {
          rows.push_back(r);
          member(r, k) = 1;
        }
      }
      ps.push_back(pattern("P" + std::to_string(k), w(rng), rows));
    }
    const MixtureWeights mw = mixture_weights(n, ps);
    for (Index r = 0; r < n; ++r) {
      double expect = 1;
      for (int k = 0; k < 4; ++k) expect += member(r, k) ? ps[k].weight : 0.0;
      ASSERT_DOUBLE_EQ(mw.values[r], expect);
      ASSERT_GE(mw.values[r], 1.0);
      ASSERT_LE(mw.values[r], mw.ceiling * (1 + 1e-15));
    }
  }
}

TEST(NoisyMarginals, ScaleForSixAttributesDegreeTwo) {
  std::mt19937 rng(2);
  const Dataset ds = testing::random_codes(1000, {2, 3, 2, 3, 2, 2}, rng);
  const BinnedData b = bin_dataset(ds, discretize_all(ds));
  NoiseSource src(1);
  StructureOptions so;
  so.degree = 2;
  const BayesianNetwork net = learn_structure(b, Eigen::VectorXd::Ones(1000), so, src);
  EXPECT_EQ(directly_noised_pairs(net).size(), 4u);
  BudgetLedger ledger;
  const auto ms = noisy_marginals(b, net, StageEpsilon::of(1.0), src, &ledger);
  for (const auto& m : ms) {
    EXPECT_NEAR(m.noise_scale, 0.008, 1e-15);
    EXPECT_GE(m.mass.minCoeff(), 0.0);
    EXPECT_NEAR(m.mass.sum(), 1.0, 1e-9);
  }
  EXPECT_EQ(ledger.draws(Stage::kMarginals), 4);
  EXPECT_EQ(ledger.consumed(Stage::kMarginals), 1.0);
}

TEST(NoisyMarginals, OracleEqualsExactJoint) {
  std::mt19937 rng(3);
  const Dataset ds = testing::random_codes(300, {2, 3, 4, 2}, rng);
  const BinnedData b = bin_dataset(ds, discretize_all(ds));
  NoiseSource src(4);
  const BayesianNetwork net = learn_structure(b, Eigen::VectorXd::Ones(300), {}, src);
  const auto ms = noisy_marginals(b, net, StageEpsilon::oracle(), src);
  for (const auto& m : ms) {
    EXPECT_TRUE(m.mass.isApprox(joint_table(b, m.pair).mass, 1e-12));
    EXPECT_EQ(m.noise_scale, 0.0);
  }
}

TEST(NoisyMarginals, ClipAndRenormalize) {
  Eigen::MatrixXd t(2, 1);
  t << 0.9, 0.1;
  Eigen::MatrixXd noise(2, 1);
  noise << -0.2, 0.2;
  t += noise;
  EXPECT_TRUE(clip_and_renormalize(t));
  EXPECT_NEAR(t(0, 0), 0.7, 1e-15);
  EXPECT_NEAR(t(1, 0), 0.3, 1e-15);

  Eigen::MatrixXd neg(2, 1);
  neg << 1.1, -0.1;
  clip_and_renormalize(neg);
  EXPECT_EQ(neg(1, 0), 0.0);
  EXPECT_EQ(neg(0, 0), 1.0);

  Eigen::MatrixXd dead = Eigen::MatrixXd::Constant(2, 2, -0.5);
  EXPECT_FALSE(clip_and_renormalize(dead));
  EXPECT_TRUE(dead.isApprox(Eigen::MatrixXd::Constant(2, 2, 0.25)));
}

TEST(NoisyMarginals, InvariantsUnderHeavyNoise) {
  std::mt19937 rng(5);
  const Dataset ds = testing::random_codes(50, {3, 3, 3, 3}, rng);
  const BinnedData b = bin_dataset(ds, discretize_all(ds));
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    NoiseSource src(seed);
    StructureOptions so;
    so.epsilon = StageEpsilon::of(0.1);
    const BayesianNetwork net = learn_structure(b, Eigen::VectorXd::Ones(50), so, src);
    for (const auto& m : noisy_marginals(b, net, StageEpsilon::of(0.01), src)) {
      ASSERT_GE(m.mass.minCoeff(), 0.0);
      ASSERT_NEAR(m.mass.sum(), 1.0, 1e-9);
    }
  }
}

TEST(Conditionals, Examples) {
  NoisyMarginal m;
  m.pair = {1, {0}};
  m.mass = Eigen::Matrix2d{{0.5, 0}, {0, 0.5}};
  auto c = derive_conditionals(std::span<const NoisyMarginal>(&m, 1));
  EXPECT_TRUE(c[0].probs.isApprox(Eigen::Matrix2d::Identity()));

  m.mass = Eigen::Matrix2d::Constant(0.25);
  c = derive_conditionals(std::span<const NoisyMarginal>(&m, 1));
  EXPECT_TRUE(c[0].probs.isApprox(Eigen::Matrix2d::Constant(0.5)));

  m.mass = Eigen::Matrix2d{{0.4, 0.1}, {0.1, 0.4}};
  c = derive_conditionals(std::span<const NoisyMarginal>(&m, 1));
  EXPECT_NEAR(c[0].probs(0, 0), 0.8, 1e-15);
  EXPECT_NEAR(c[0].probs(1, 0), 0.2, 1e-15);
  EXPECT_NEAR(c[0].probs(0, 1), 0.2, 1e-15);
  EXPECT_NEAR(c[0].probs(1, 1), 0.8, 1e-15);

  m.mass = Eigen::Matrix2d{{0.6, 0}, {0.4, 0}};
  c = derive_conditionals(std::span<const NoisyMarginal>(&m, 1));
  EXPECT_EQ(c[0].probs(0, 1), 0.5);
  EXPECT_EQ(c[0].probs(1, 1), 0.5);
}

Schema binary_schema(const std::vector<std::string>& names) {
  Schema s;
  for (const auto& n : names) s.push_back(Attribute::categorical(n, {"0", "1"}));
  return s;
}

std::vector<Discretization> binary_discs(const std::vector<std::string>& names) {
  std::vector<Discretization> out;
  for (const auto& n : names) out.push_back({n, AttributeKind::kCategorical, {}, {"0", "1"}});
  return out;
}

TEST(Sampling, EmptyOutputKeepsSchema) {
  BayesianNetwork net{{"x"}, {{0, {}}}, 2};
  ConditionalTable t{{0, {}}, Eigen::Vector2d(0.5, 0.5)};
  NoiseSource src(1);
  const Dataset out = sample_synthetic(net, std::span(&t, 1), 0, binary_schema({"x"}),
                                       binary_discs({"x"}), src);
  EXPECT_EQ(out.rows(), 0);
  EXPECT_EQ(out.schema(), binary_schema({"x"}));
  EXPECT_THROW(sample_synthetic(net, std::span(&t, 1), -1, binary_schema({"x"}), binary_discs({"x"}), src),
               std::invalid_argument);
}

TEST(Sampling, BinaryFrequency) {
  BayesianNetwork net{{"x"}, {{0, {}}}, 2};
  ConditionalTable t{{0, {}}, Eigen::Vector2d(0.3, 0.7)};
  NoiseSource src(2);
  const Dataset out = sample_synthetic(net, std::span(&t, 1), 100000, binary_schema({"x"}),
                                       binary_discs({"x"}), src);
  const double f = out.column(0).sum() / 100000.0;
  EXPECT_GE(f, 0.69);
  EXPECT_LE(f, 0.71);
}

TEST(Sampling, DeterministicChain) {
  BayesianNetwork net{{"x", "y"}, {{0, {}}, {1, {0}}}, 2};
  std::vector<ConditionalTable> ts{{{0, {}}, Eigen::Vector2d(0.4, 0.6)},
                                   {{1, {0}}, Eigen::Matrix2d::Identity()}};
  NoiseSource src(3);
  const Dataset out =
      sample_synthetic(net, ts, 5000, binary_schema({"x", "y"}), binary_discs({"x", "y"}), src);
  for (Index r = 0; r < out.rows(); ++r) ASSERT_EQ(out.at(r, 0), out.at(r, 1));
}

TEST(Sampling, NumericalValuesFallInsideTheirBin) {
  Schema s{Attribute::numerical("v", 0, 10)};
  std::vector<Discretization> d{{"v", AttributeKind::kNumerical, {0, 2, 10}, {}}};
  BayesianNetwork net{{"v"}, {{0, {}}}, 2};
  ConditionalTable t{{0, {}}, Eigen::Vector2d(1.0, 0.0)};
  NoiseSource src(4);
  const Dataset out = sample_synthetic(net, std::span(&t, 1), 2000, s, d, src);
  EXPECT_GE(out.column(0).minCoeff(), 0.0);
  EXPECT_LE(out.column(0).maxCoeff(), 2.0);
  EXPECT_GT(out.column(0).maxCoeff() - out.column(0).minCoeff(), 1.9);
}

class GenerateScheme : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { data_ = new Dataset(testing::load_adult_like()); }
  static void TearDownTestSuite() { delete data_; }
  static const Dataset& data() { return *data_; }

  static SchemeOptions options(double eps, std::uint64_t seed) {
    SchemeOptions o;
    o.budget = split_budget(eps, 0.5);
    o.seed = seed;
    return o;
  }

  static std::vector<PatternConstraint> patterns(double w) {
    std::vector<Index> rows;
    for (Index r = 0; r < data().rows(); r += 4) rows.push_back(r);
    return {pattern("P0", w, rows)};
  }

  static inline Dataset* data_ = nullptr;
};

TEST_F(GenerateScheme, DeterministicForSeed) {
  const auto ps = patterns(4);
  const Scheme a = generate_scheme(data(), ps, {}, options(2, 11));
  const Scheme b = generate_scheme(data(), ps, {}, options(2, 11));
  EXPECT_EQ(to_csv(a.synthetic), to_csv(b.synthetic));
  EXPECT_EQ(a.network, b.network);
  const Scheme c = generate_scheme(data(), ps, {}, options(2, 12));
  EXPECT_NE(to_csv(a.synthetic), to_csv(c.synthetic));
}

TEST_F(GenerateScheme, ZeroWeightsEqualNoPatterns) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Scheme a = generate_scheme(data(), patterns(0), {}, options(1, seed));
    const Scheme b = generate_scheme(data(), {}, {}, options(1, seed));
    EXPECT_EQ(a.network, b.network);
    EXPECT_EQ(to_csv(a.synthetic), to_csv(b.synthetic));
    ASSERT_EQ(a.marginals.size(), b.marginals.size());
    for (std::size_t i = 0; i < a.marginals.size(); ++i) {
      EXPECT_EQ(a.marginals[i].mass, b.marginals[i].mass);
    }
  }
}

TEST_F(GenerateScheme, OverrideAndBaseline) {
  const auto ps = patterns(4);
  const Scheme over = generate_scheme(data(), ps, {{"P0", 0.0}}, options(1, 3));
  const Scheme base = generate_scheme(data(), {}, {}, options(1, 3));
  EXPECT_EQ(over.weights.at("P0"), 0.0);
  EXPECT_EQ(to_csv(over.synthetic), to_csv(base.synthetic));
  SchemeOptions bo = options(1, 3);
  bo.baseline = true;
  const Scheme flagged = generate_scheme(data(), ps, {}, bo);
  EXPECT_TRUE(flagged.weights.empty());
  EXPECT_EQ(to_csv(flagged.synthetic), to_csv(base.synthetic));
}

TEST_F(GenerateScheme, BudgetConsumptionIsExact) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> eps(0.05, 20), frac(0.05, 0.95);
  for (int t = 0; t < 20; ++t) {
    SchemeOptions o;
    o.budget = split_budget(eps(rng), frac(rng));
    o.seed = rng();
    const Scheme s = generate_scheme(data(), patterns(2), {}, o);
    ASSERT_EQ(s.consumed_structure + s.consumed_marginals, o.budget.epsilon_total);
    ASSERT_EQ(s.consumed_structure, o.budget.epsilon_structure);
    ASSERT_EQ(s.structure_draws, data().cols() - 1);
    ASSERT_TRUE(s.is_private());
  }
}

TEST_F(GenerateScheme, SchemaAndRowCount) {
  SchemeOptions o = options(2, 4);
  const Scheme s = generate_scheme(data(), patterns(1), {}, o);
  EXPECT_EQ(s.synthetic.schema(), data().schema());
  EXPECT_EQ(s.synthetic.rows(), data().rows());
  for (Index c = 0; c < data().cols(); ++c) {
    const Attribute& a = data().attribute(c);
    const auto col = s.synthetic.column(c);
    if (a.is_numerical()) {
      EXPECT_GE(col.minCoeff(), a.min);
      EXPECT_LE(col.maxCoeff(), a.max);
    } else {
      EXPECT_GE(col.minCoeff(), 0);
      EXPECT_LT(col.maxCoeff(), static_cast<double>(a.categories.size()));
    }
  }
  o.n_out = 123;
  EXPECT_EQ(generate_scheme(data(), patterns(1), {}, o).synthetic.rows(), 123);
}

TEST_F(GenerateScheme, OracleFlaggedAndFaithful) {
  SchemeOptions o;
  o.oracle = true;
  o.seed = 5;
  o.n_out = 50000;
  const Scheme s = generate_scheme(data(), {}, {}, o);
  EXPECT_FALSE(s.is_private());
  EXPECT_FALSE(s.log.empty());
  const BinnedData src = bin_dataset(data(), s.discretizations);
  const BinnedData syn = bin_dataset(s.synthetic, s.discretizations);
  for (const auto& pair : s.network.pairs) {
    const Eigen::MatrixXd got = joint_table(syn, pair).mass;
    const Eigen::MatrixXd want = joint_table(src, pair).mass;
    const double tv = 0.5 * (got - want).cwiseAbs().sum();
    EXPECT_LT(tv, 0.05) << data().attribute(pair.child).name;
  }
}

TEST_F(GenerateScheme, RejectsBadInput) {
  EXPECT_THROW(generate_scheme(Dataset(data().schema(), Eigen::MatrixXd(0, data().cols())), {}, {},
                               options(1, 1)),
               std::invalid_argument);
  SchemeOptions o = options(1, 1);
  o.budget.epsilon_marginals = 0.2;
  EXPECT_THROW(generate_scheme(data(), {}, {}, o), std::invalid_argument);
}

}  // namespace
}  // namespace vizpriv
