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

#include "vizpriv/analytics.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <stdexcept>

#include "vizpriv/engine.hpp"
#include "vizpriv/error.hpp"
#include "vizpriv/metrics.hpp"

namespace vizpriv {

double pattern_distance(const Dataset& ds, std::span<const Discretization> discs,
                        std::span<const Index> rows_i, std::span<const Index> rows_j) {
  if (rows_i.empty() || rows_j.empty()) throw std::invalid_argument("pattern has no records");
  if (static_cast<Index>(discs.size()) != ds.cols()) {
    throw std::invalid_argument("one discretization per attribute required");
  }
  auto project = [&](std::span<const Index> rows, Index c) {
    const Attribute& a = ds.attribute(c);
    Eigen::VectorXd v(static_cast<Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const double x = ds.at(rows[k], c);
      if (a.is_categorical()) {
        v[static_cast<Index>(k)] = static_cast<double>(discs[static_cast<std::size_t>(c)].bin_of(x));
      } else {
        v[static_cast<Index>(k)] = a.width() > 0.0 ? (x - a.min) / a.width() : 0.0;
      }
    }
    return v;
  };
  double total = 0.0;
  for (Index c = 0; c < ds.cols(); ++c) {
    total += wasserstein_1d(project(rows_i, c), project(rows_j, c));
  }
  return total / static_cast<double>(ds.cols());
}

Eigen::MatrixXd pattern_distance_matrix(const Dataset& ds, std::span<const Discretization> discs,
                                        std::span<const PatternConstraint> patterns) {
  const auto n = static_cast<Index>(patterns.size());
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const auto& a = patterns[static_cast<std::size_t>(i)].records;
      const auto& b = patterns[static_cast<std::size_t>(j)].records;
      // Empty selections have no distribution; they sit at zero distance.
      d(i, j) = d(j, i) = (a.empty() || b.empty()) ? 0.0 : pattern_distance(ds, discs, a, b);
    }
  }
  return d;
}

Eigen::MatrixX2d mds_layout(const Eigen::Ref<const Eigen::MatrixXd>& dist) {
  const Index n = dist.rows();
  if (n == 0 || dist.cols() != n) throw std::invalid_argument("MDS needs a non-empty square matrix");
  const double tol = 1e-9 * std::max(1.0, dist.cwiseAbs().maxCoeff());
  if ((dist - dist.transpose()).cwiseAbs().maxCoeff() > tol) {
    throw std::invalid_argument("MDS needs a symmetric distance matrix");
  }
  if (dist.diagonal().cwiseAbs().maxCoeff() > tol) {
    throw std::invalid_argument("MDS needs a zero diagonal");
  }
  Eigen::MatrixX2d pos = Eigen::MatrixX2d::Zero(n, 2);
  if (n == 1) return pos;
  if (n == 2) {
    pos(0, 0) = -dist(0, 1) / 2.0;
    pos(1, 0) = dist(0, 1) / 2.0;
    return pos;
  }
  const Eigen::MatrixXd sq = dist.array().square().matrix();
  const Eigen::MatrixXd centering =
      Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
  const Eigen::MatrixXd gram = -0.5 * centering * sq * centering;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  if (eig.info() != Eigen::Success) throw std::runtime_error("MDS eigendecomposition failed");
  // Eigenvalues are ascending.
  for (int axis = 0; axis < 2; ++axis) {
    const Index k = n - 1 - axis;
    const double lambda = std::max(0.0, eig.eigenvalues()[k]);
    Eigen::VectorXd v = eig.eigenvectors().col(k);
    Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v[arg] < 0.0) v = -v;
    pos.col(axis) = v * std::sqrt(lambda);
  }
  return pos;
}

int influence_score(const std::vector<std::pair<Index, Index>>& a,
                    const std::vector<std::pair<Index, Index>>& b) {
  const std::set<std::pair<Index, Index>> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  int inter = 0;
  for (const auto& e : sa) inter += sb.count(e) ? 1 : 0;
  const int sym = static_cast<int>(sa.size() + sb.size()) - 2 * inter;
  return inter - sym;
}

std::vector<InfluenceEdge> influence_edges(const Dataset& ds, std::span<const PatternConstraint> patterns,
                                           int degree, std::span<const Discretization> discs) {
  if (patterns.size() < 2) return {};
  const BinnedData binned = bin_dataset(ds, discs);
  std::vector<std::vector<std::pair<Index, Index>>> edge_sets;
  for (const auto& p : patterns) {
    PatternConstraint probe = p;
    probe.weight = kInfluenceProbeWeight;
    const MixtureWeights mw = mixture_weights(ds.rows(), std::span(&probe, 1));
    StructureOptions so;
    so.degree = degree;
    so.epsilon = StageEpsilon::oracle();
    so.weight_ceiling = mw.ceiling;
    NoiseSource src(0);
    edge_sets.push_back(learn_structure(binned, mw.values, so, src).edges());
  }
  std::vector<InfluenceEdge> out;
  for (std::size_t i = 0; i < patterns.size(); ++i) {
    for (std::size_t j = i + 1; j < patterns.size(); ++j) {
      out.push_back({patterns[i].id, patterns[j].id, influence_score(edge_sets[i], edge_sets[j])});
    }
  }
  return out;
}

RelationshipGraph relationship_graph(const Dataset& ds, std::span<const PatternConstraint> patterns,
                                     int degree, std::span<const Discretization> discs) {
  RelationshipGraph g;
  if (patterns.empty()) return g;
  const Eigen::MatrixX2d pos = mds_layout(pattern_distance_matrix(ds, discs, patterns));
  for (std::size_t i = 0; i < patterns.size(); ++i) {
    const auto& p = patterns[i];
    g.nodes.push_back({p.id, p.type, p.records.size(), p.weight, pos(static_cast<Index>(i), 0),
                       pos(static_cast<Index>(i), 1)});
  }
  g.edges = influence_edges(ds, patterns, degree, discs);
  return g;
}

FlowData sankey_flow(const Dataset& ds, std::span<const Discretization> discs,
                     const std::vector<std::string>& columns, const PatternConstraint* highlight) {
  FlowData flow;
  flow.columns = columns;
  std::vector<Index> cols;
  for (const auto& name : columns) cols.push_back(ds.index_of(name));
  std::vector<bool> marked(static_cast<std::size_t>(ds.rows()), false);
  if (highlight) {
    flow.highlight = highlight->id;
    for (Index r : highlight->records) {
      if (r < 0 || r >= ds.rows()) throw std::out_of_range("highlight pattern row out of range");
      marked[static_cast<std::size_t>(r)] = true;
    }
  }
  auto bin_at = [&](Index row, Index col) {
    return discs[static_cast<std::size_t>(col)].bin_of(ds.at(row, col));
  };
  for (Index c : cols) {
    const Discretization& disc = discs[static_cast<std::size_t>(c)];
    std::vector<FlowBin> bins(static_cast<std::size_t>(disc.bin_count()));
    for (Index b = 0; b < disc.bin_count(); ++b) bins[static_cast<std::size_t>(b)].label = disc.bin_label(b);
    for (Index r = 0; r < ds.rows(); ++r) {
      auto& bin = bins[static_cast<std::size_t>(bin_at(r, c))];
      ++bin.count;
      if (marked[static_cast<std::size_t>(r)]) ++bin.highlighted;
    }
    flow.bins.push_back(std::move(bins));
  }
  for (std::size_t k = 0; k + 1 < cols.size(); ++k) {
    std::map<std::pair<Index, Index>, std::pair<Index, Index>> counts;
    for (Index r = 0; r < ds.rows(); ++r) {
      auto& cell = counts[{bin_at(r, cols[k]), bin_at(r, cols[k + 1])}];
      ++cell.first;
      if (marked[static_cast<std::size_t>(r)]) ++cell.second;
    }
    for (const auto& [key, cnt] : counts) {
      flow.links.push_back({k, key.first, key.second, cnt.first, cnt.second});
    }
  }
  return flow;
}

const LayoutNode& NetworkLayout::node(std::string_view attribute) const {
  for (const auto& n : nodes) {
    if (n.attribute == attribute) return n;
  }
  throw NotFoundError("no layout node for '" + std::string(attribute) + "'");
}

NetworkLayout network_layout(const BayesianNetwork& net) {
  net.validate();
  std::vector<int> layer(net.attributes.size(), 0);
  for (const auto& p : net.pairs) {
    int l = 0;
    for (Index parent : p.parents) l = std::max(l, layer[static_cast<std::size_t>(parent)] + 1);
    layer[static_cast<std::size_t>(p.child)] = l;
  }
  std::map<int, std::vector<std::string>> by_layer;
  for (std::size_t i = 0; i < net.attributes.size(); ++i) by_layer[layer[i]].push_back(net.attributes[i]);
  NetworkLayout out;
  for (auto& [l, names] : by_layer) {
    std::sort(names.begin(), names.end());
    for (std::size_t s = 0; s < names.size(); ++s) {
      out.nodes.push_back({names[s], l, static_cast<int>(s),
                           static_cast<double>(s + 1) / static_cast<double>(names.size() + 1)});
    }
  }
  for (const auto& [child, parent] : net.edges()) {
    out.edges.emplace_back(net.attributes[static_cast<std::size_t>(parent)],
                           net.attributes[static_cast<std::size_t>(child)]);
  }
  return out;
}

namespace {

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

double silverman_bandwidth(const Eigen::Ref<const Eigen::VectorXd>& sample) {
  const Index n = sample.size();
  if (n == 0) throw std::invalid_argument("bandwidth of empty sample");
  const double mean = sample.mean();
  const double sd = n > 1 ? std::sqrt((sample.array() - mean).square().sum() / static_cast<double>(n - 1)) : 0.0;
  const std::vector<double> v(sample.data(), sample.data() + n);
  const double iqr = quantile(v, 0.75) - quantile(v, 0.25);
  double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
  if (!(spread > 0.0)) spread = 1e-3 * std::max(1.0, std::abs(mean));
  return 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
}

Eigen::VectorXd gaussian_kde(const Eigen::Ref<const Eigen::VectorXd>& sample,
                             const Eigen::Ref<const Eigen::VectorXd>& grid, double h) {
  if (sample.size() == 0) throw std::invalid_argument("KDE of empty sample");
  if (!(h > 0.0)) throw std::invalid_argument("KDE bandwidth must be positive");
  const double norm = 1.0 / (static_cast<double>(sample.size()) * h * std::sqrt(2.0 * std::numbers::pi));
  Eigen::VectorXd out(grid.size());
  for (Index g = 0; g < grid.size(); ++g) {
    out[g] = norm * (-0.5 * ((sample.array() - grid[g]) / h).square()).exp().sum();
  }
  return out;
}

NodeDistribution node_distributions(const Dataset& original, const Dataset& synthetic,
                                    std::string_view attr) {
  const Index c = original.index_of(attr);
  const Index sc = synthetic.index_of(attr);
  if (original.rows() == 0 || synthetic.rows() == 0) {
    throw std::invalid_argument("distribution of an empty column");
  }
  const Attribute& a = original.attribute(c);
  NodeDistribution out;
  out.attribute = a.name;
  out.kind = a.kind;
  if (a.is_categorical()) {
    out.labels = a.categories;
    const auto k = static_cast<Index>(a.categories.size());
    out.before = Eigen::VectorXd::Zero(k);
    out.after = Eigen::VectorXd::Zero(k);
    for (Index r = 0; r < original.rows(); ++r) out.before[static_cast<Index>(original.at(r, c))] += 1.0;
    for (Index r = 0; r < synthetic.rows(); ++r) out.after[static_cast<Index>(synthetic.at(r, sc))] += 1.0;
    out.before /= static_cast<double>(original.rows());
    out.after /= static_cast<double>(synthetic.rows());
    return out;
  }
  double lo = std::min(a.min, synthetic.column(sc).minCoeff());
  double hi = std::max(a.max, synthetic.column(sc).maxCoeff());
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  out.grid = Eigen::VectorXd::LinSpaced(kKdeGridPoints, lo, hi);
  const Eigen::VectorXd before = original.column(c);
  const Eigen::VectorXd after = synthetic.column(sc);
  out.bandwidth_before = silverman_bandwidth(before);
  out.bandwidth_after = silverman_bandwidth(after);
  out.before = gaussian_kde(before, out.grid, out.bandwidth_before);
  out.after = gaussian_kde(after, out.grid, out.bandwidth_after);
  return out;
}

}  // namespace vizpriv
