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

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vizpriv/bayes_net.hpp"
#include "vizpriv/charts.hpp"
#include "vizpriv/dataset.hpp"
#include "vizpriv/discretize.hpp"
#include "vizpriv/mechanisms.hpp"

namespace vizpriv {

// MW(r) = 1 + sum_k w_k * [r in P_k]. The ceiling 1 + sum_k w_k bounds every
// entry and scales the structure-score sensitivity.
struct MixtureWeights {
  Eigen::VectorXd values;
  double ceiling = 1.0;
};

MixtureWeights mixture_weights(Index n, std::span<const PatternConstraint> patterns);

// Post-processed (clipped, renormalized) joint over one AP pair, laid out
// like JointTable.
struct NoisyMarginal {
  APPair pair;
  Eigen::MatrixXd mass;
  double noise_scale = 0.0;
  bool derived = false;           // marginalized from another noisy table
  bool uniform_fallback = false;  // clipping removed all mass
};

// Clips negative cells to zero and renormalizes. Returns false, leaving a
// uniform table, when nothing positive survives.
bool clip_and_renormalize(Eigen::MatrixXd& table);

// Marginals for every AP pair. Pairs whose variables are covered by an
// independently noised table are marginalized from it; the rest get Laplace
// noise of scale 2m / (n * eps2), m being the number of noised tables.
std::vector<NoisyMarginal> noisy_marginals(const BinnedData& data, const BayesianNetwork& net,
                                           StageEpsilon epsilon, NoiseSource& src,
                                           BudgetLedger* ledger = nullptr);

// Tables that noisy_marginals perturbs directly (indices into net.pairs).
std::vector<std::size_t> directly_noised_pairs(const BayesianNetwork& net);

// Pr*(X | Pi): each column is a distribution over child bins.
struct ConditionalTable {
  APPair pair;
  Eigen::MatrixXd probs;
};

std::vector<ConditionalTable> derive_conditionals(std::span<const NoisyMarginal> marginals);

Dataset sample_synthetic(const BayesianNetwork& net, std::span<const ConditionalTable> conditionals,
                         Index n_out, const Schema& schema, std::span<const Discretization> discs,
                         NoiseSource& src);

struct SchemeOptions {
  BudgetSpec budget;
  int degree = kDefaultDegree;
  std::optional<Index> n_out;
  std::uint64_t seed = 0;
  int max_bins = kDefaultMaxBins;
  // Noise off, argmax selection. Output is flagged as not private.
  bool oracle = false;
  // Ignore pattern constraints entirely.
  bool baseline = false;
};

struct MetricsReport;

struct Scheme {
  std::string id;
  BudgetSpec budget;
  std::map<std::string, double> weights;
  BayesianNetwork network;
  std::vector<NoisyMarginal> marginals;
  Dataset synthetic;
  std::uint64_t seed = 0;
  std::string created_at;
  bool oracle = false;
  bool baseline = false;
  int degree = kDefaultDegree;
  double consumed_structure = 0.0;
  double consumed_marginals = 0.0;
  int structure_draws = 0;
  std::vector<std::string> log;
  std::vector<Discretization> discretizations;

  bool is_private() const { return !oracle; }
};

// Substream ids of one run.
inline constexpr std::uint64_t kStructureStream = 1;
inline constexpr std::uint64_t kMarginalStream = 2;
inline constexpr std::uint64_t kSamplingStream = 3;

// Mixture weights, constrained structure learning, noisy marginals,
// conditionals, sampling. Deterministic given options.seed. weight_overrides
// replaces pattern weights by id.
Scheme generate_scheme(const Dataset& ds, std::span<const PatternConstraint> patterns,
                       const std::map<std::string, double>& weight_overrides,
                       const SchemeOptions& options,
                       const std::vector<Discretization>* discretizations = nullptr,
                       BudgetLedger* ledger = nullptr);

}  // namespace vizpriv
