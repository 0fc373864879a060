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

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <compare>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vizpriv/discretize.hpp"
#include "vizpriv/mechanisms.hpp"

namespace vizpriv {

inline constexpr int kDefaultDegree = 2;

// Attribute-parent pair. Attributes are schema column indices; parents are
// kept sorted ascending.
struct APPair {
  Index child = 0;
  std::vector<Index> parents;

  friend auto operator<=>(const APPair&, const APPair&) = default;
};

// DAG over the attributes stored as AP pairs in topological order.
struct BayesianNetwork {
  std::vector<std::string> attributes;
  std::vector<APPair> pairs;
  int degree = kDefaultDegree;

  // Throws std::invalid_argument naming the violated invariant.
  void validate() const;
  // Directed (child, parent) edges.
  std::vector<std::pair<Index, Index>> edges() const;
  const APPair& pair_of(Index child) const;

  friend bool operator==(const BayesianNetwork&, const BayesianNetwork&) = default;
};

// Number of parent configurations and the mixed-radix index of one row's
// configuration (last parent varies fastest).
Index parent_config_count(const BinnedData& data, const APPair& pair);
Index parent_config_of(const BinnedData& data, Index row, const APPair& pair);

// Empirical joint Pr(X, Pi): rows are child bins, columns parent configurations.
struct JointTable {
  APPair pair;
  Eigen::MatrixXd mass;
};

JointTable joint_table(const BinnedData& data, const APPair& pair);

// Shannon entropy in nats; zero-mass cells contribute nothing.
template <typename Derived>
double entropy(const Eigen::DenseBase<Derived>& p) {
  double h = 0.0;
  for (Index j = 0; j < p.cols(); ++j) {
    for (Index i = 0; i < p.rows(); ++i) {
      const double v = p(i, j);
      if (v > 0.0) h -= v * std::log(v);
    }
  }
  return h;
}

// I(X; Pi) of a joint laid out child x parent-configuration.
double mutual_information(const Eigen::Ref<const Eigen::MatrixXd>& joint);

// Mutual information where each cell's term is scaled by the mean mixture
// weight of the records falling into it. Empty cells contribute zero.
double weighted_mutual_information(const BinnedData& data,
                                   const Eigen::Ref<const Eigen::VectorXd>& mixture_weights,
                                   const APPair& pair);

// Sensitivity bound of empirical mutual information on an n-row table.
double mutual_information_sensitivity(Index n);

struct StructureOptions {
  int degree = kDefaultDegree;
  StageEpsilon epsilon = StageEpsilon::oracle();
  // Upper bound of the mixture weights, 1 + sum of pattern weights.
  double weight_ceiling = 1.0;
};

// Greedy construction: a uniformly drawn root, then d - 1 exponential-mechanism
// selections among maximal-parent-set candidates scored by weighted MI.
BayesianNetwork learn_structure(const BinnedData& data,
                                const Eigen::Ref<const Eigen::VectorXd>& mixture_weights,
                                const StructureOptions& options, NoiseSource& src,
                                BudgetLedger* ledger = nullptr);

std::vector<Index> topological_order(const BayesianNetwork& net);

struct KlCheck {
  double lhs = 0.0;  // direct D_KL(Pr(A) || Pr_N(A))
  double rhs = 0.0;  // -sum I + sum H(X_i) - H(A)
};

inline constexpr Index kMaxFullJointCells = 1'000'000;

KlCheck kl_decomposition_check(const BinnedData& data, const BayesianNetwork& net);

}  // namespace vizpriv
