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

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vizpriv/bayes_net.hpp"
#include "vizpriv/charts.hpp"
#include "vizpriv/dataset.hpp"
#include "vizpriv/discretize.hpp"

namespace vizpriv {

// Mean over attributes of the 1-D Wasserstein distance between two record
// subsets: bin codes for categorical columns, domain-normalized values for
// numerical ones.
double pattern_distance(const Dataset& ds, std::span<const Discretization> discs,
                        std::span<const Index> rows_i, std::span<const Index> rows_j);

Eigen::MatrixXd pattern_distance_matrix(const Dataset& ds, std::span<const Discretization> discs,
                                        std::span<const PatternConstraint> patterns);

// Classical (Torgerson) MDS into two dimensions. Each axis is oriented so the
// largest-magnitude eigenvector entry is positive.
Eigen::MatrixX2d mds_layout(const Eigen::Ref<const Eigen::MatrixXd>& distances);

inline constexpr double kInfluenceProbeWeight = 4.0;

struct InfluenceEdge {
  std::string a;
  std::string b;
  int score = 0;  // |E_a intersect E_b| - |E_a symmetric-difference E_b|
  bool positive() const { return score >= 0; }
  int magnitude() const { return score < 0 ? -score : score; }
};

// Set-algebra score between two edge sets of (child, parent) pairs.
int influence_score(const std::vector<std::pair<Index, Index>>& a,
                    const std::vector<std::pair<Index, Index>>& b);

// Probe network per pattern (oracle mode, only that pattern boosted), then
// pairwise influence scores.
std::vector<InfluenceEdge> influence_edges(const Dataset& ds, std::span<const PatternConstraint> patterns,
                                           int degree, std::span<const Discretization> discs);

struct RelationshipNode {
  std::string pattern;
  PatternType type = PatternType::kCluster;
  std::size_t records = 0;
  double weight = 0.0;
  double x = 0.0;
  double y = 0.0;
};

struct RelationshipGraph {
  std::vector<RelationshipNode> nodes;
  std::vector<InfluenceEdge> edges;
};

RelationshipGraph relationship_graph(const Dataset& ds, std::span<const PatternConstraint> patterns,
                                     int degree, std::span<const Discretization> discs);

struct FlowBin {
  std::string label;
  Index count = 0;
  Index highlighted = 0;
};

struct FlowLink {
  std::size_t column = 0;  // link between column and column + 1
  Index source = 0;
  Index target = 0;
  Index count = 0;
  Index highlighted = 0;
};

struct FlowData {
  std::vector<std::string> columns;
  std::vector<std::vector<FlowBin>> bins;
  std::vector<FlowLink> links;
  std::optional<std::string> highlight;
};

FlowData sankey_flow(const Dataset& ds, std::span<const Discretization> discs,
                     const std::vector<std::string>& columns,
                     const PatternConstraint* highlight = nullptr);

struct LayoutNode {
  std::string attribute;
  int layer = 0;
  int slot = 0;
  double y = 0.0;  // slot spread evenly over (0, 1)
};

struct NetworkLayout {
  std::vector<LayoutNode> nodes;
  std::vector<std::pair<std::string, std::string>> edges;  // parent -> child
  const LayoutNode& node(std::string_view attribute) const;
};

NetworkLayout network_layout(const BayesianNetwork& net);

struct NodeDistribution {
  std::string attribute;
  AttributeKind kind = AttributeKind::kCategorical;
  Eigen::VectorXd grid;  // KDE grid (numerical)
  Eigen::VectorXd before;
  Eigen::VectorXd after;
  std::vector<std::string> labels;  // categorical
  double bandwidth_before = 0.0;
  double bandwidth_after = 0.0;
};

inline constexpr Index kKdeGridPoints = 128;

double silverman_bandwidth(const Eigen::Ref<const Eigen::VectorXd>& sample);
Eigen::VectorXd gaussian_kde(const Eigen::Ref<const Eigen::VectorXd>& sample,
                             const Eigen::Ref<const Eigen::VectorXd>& grid, double bandwidth);

NodeDistribution node_distributions(const Dataset& original, const Dataset& synthetic,
                                    std::string_view attr);

}  // namespace vizpriv
