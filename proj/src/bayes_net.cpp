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

#include "vizpriv/bayes_net.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace vizpriv {

void BayesianNetwork::validate() const {
  const auto d = static_cast<Index>(attributes.size());
  if (degree < 0) throw std::invalid_argument("degree bound must be >= 0");
  if (static_cast<Index>(pairs.size()) != d) {
    throw std::invalid_argument("network must have exactly one AP pair per attribute");
  }
  std::vector<bool> seen(static_cast<std::size_t>(d), false);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const APPair& p = pairs[i];
    if (p.child < 0 || p.child >= d) throw std::invalid_argument("child index out of range");
    if (seen[static_cast<std::size_t>(p.child)]) {
      throw std::invalid_argument("attribute '" + attributes[p.child] + "' is a child twice");
    }
    if (static_cast<int>(p.parents.size()) > degree) {
      throw std::invalid_argument("attribute '" + attributes[p.child] +
                                  "' exceeds the degree bound");
    }
    if (!std::is_sorted(p.parents.begin(), p.parents.end()) ||
        std::adjacent_find(p.parents.begin(), p.parents.end()) != p.parents.end()) {
      throw std::invalid_argument("parent sets must be sorted and unique");
    }
    for (Index parent : p.parents) {
      if (parent == p.child) throw std::invalid_argument("attribute is its own parent");
      if (parent < 0 || parent >= d || !seen[static_cast<std::size_t>(parent)]) {
        throw std::invalid_argument("parent of '" + attributes[p.child] +
                                    "' does not precede it (cycle or bad order)");
      }
    }
    seen[static_cast<std::size_t>(p.child)] = true;
  }
  if (!pairs.empty() && !pairs.front().parents.empty()) {
    throw std::invalid_argument("first attribute must have no parents");
  }
}

std::vector<std::pair<Index, Index>> BayesianNetwork::edges() const {
  std::vector<std::pair<Index, Index>> out;
  for (const auto& p : pairs) {
    for (Index parent : p.parents) out.emplace_back(p.child, parent);
  }
  return out;
}

const APPair& BayesianNetwork::pair_of(Index child) const {
  for (const auto& p : pairs) {
    if (p.child == child) return p;
  }
  throw std::invalid_argument("attribute has no AP pair");
}

Index parent_config_count(const BinnedData& data, const APPair& pair) {
  Index count = 1;
  for (Index p : pair.parents) count *= data.cardinalities[static_cast<std::size_t>(p)];
  return count;
}

Index parent_config_of(const BinnedData& data, Index row, const APPair& pair) {
  Index idx = 0;
  for (Index p : pair.parents) {
    idx = idx * data.cardinalities[static_cast<std::size_t>(p)] + data.bins(row, p);
  }
  return idx;
}

JointTable joint_table(const BinnedData& data, const APPair& pair) {
  const Index n = data.rows();
  if (n == 0) throw std::invalid_argument("joint table of an empty dataset");
  JointTable t;
  t.pair = pair;
  t.mass = Eigen::MatrixXd::Zero(data.cardinalities[static_cast<std::size_t>(pair.child)],
                                 parent_config_count(data, pair));
  for (Index r = 0; r < n; ++r) {
    t.mass(data.bins(r, pair.child), parent_config_of(data, r, pair)) += 1.0;
  }
  t.mass /= static_cast<double>(n);
  return t;
}

double mutual_information(const Eigen::Ref<const Eigen::MatrixXd>& joint) {
  const Eigen::VectorXd px = joint.rowwise().sum();
  const Eigen::RowVectorXd ppi = joint.colwise().sum();
  double mi = 0.0;
  for (Index j = 0; j < joint.cols(); ++j) {
    for (Index i = 0; i < joint.rows(); ++i) {
      const double p = joint(i, j);
      if (p > 0.0) mi += p * std::log(p / (px[i] * ppi[j]));
    }
  }
  if (mi < 0.0 && mi > -1e-12) mi = 0.0;
  return mi;
}

double weighted_mutual_information(const BinnedData& data,
                                   const Eigen::Ref<const Eigen::VectorXd>& mw,
                                   const APPair& pair) {
  const Index n = data.rows();
  if (mw.size() != n) throw std::invalid_argument("one mixture weight per record required");
  if (n == 0) return 0.0;
  const Index rows = data.cardinalities[static_cast<std::size_t>(pair.child)];
  const Index cols = parent_config_count(data, pair);
  Eigen::MatrixXd count = Eigen::MatrixXd::Zero(rows, cols);
  Eigen::MatrixXd weight = Eigen::MatrixXd::Zero(rows, cols);
  for (Index r = 0; r < n; ++r) {
    const Index i = data.bins(r, pair.child);
    const Index j = parent_config_of(data, r, pair);
    count(i, j) += 1.0;
    weight(i, j) += mw[r];
  }
  const Eigen::MatrixXd joint = count / static_cast<double>(n);
  const Eigen::VectorXd px = joint.rowwise().sum();
  const Eigen::RowVectorXd ppi = joint.colwise().sum();
  double mi = 0.0;
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) {
      const double p = joint(i, j);
      if (p > 0.0) mi += (weight(i, j) / count(i, j)) * (p * std::log(p / (px[i] * ppi[j])));
    }
  }
  return mi;
}

double mutual_information_sensitivity(Index n) {
  if (n <= 0) throw std::invalid_argument("sensitivity needs n >= 1");
  const double nn = static_cast<double>(n);
  double s = (2.0 / nn) * std::log((nn + 1.0) / 2.0);
  if (n > 1) s += ((nn - 1.0) / nn) * std::log((nn + 1.0) / (nn - 1.0));
  return s;
}

namespace {

void combinations(const std::vector<Index>& pool, std::size_t size, std::size_t start,
                  std::vector<Index>& current, std::vector<std::vector<Index>>& out) {
  if (current.size() == size) {
    out.push_back(current);
    return;
  }
  for (std::size_t i = start; i < pool.size(); ++i) {
    if (pool.size() - i < size - current.size()) break;
    current.push_back(pool[i]);
    combinations(pool, size, i + 1, current, out);
    current.pop_back();
  }
}

struct Candidate {
  APPair pair;
  std::vector<std::string> key;  // child name then sorted parent names
};

}  // namespace

BayesianNetwork learn_structure(const BinnedData& data,
                                const Eigen::Ref<const Eigen::VectorXd>& mw,
                                const StructureOptions& options, NoiseSource& src,
                                BudgetLedger* ledger) {
  const Index d = data.cols();
  if (options.degree < 0) throw std::invalid_argument("degree bound must be >= 0");
  if (d == 0) throw std::invalid_argument("cannot learn a network over zero attributes");
  if (mw.size() != data.rows()) throw std::invalid_argument("one mixture weight per record");
  if (!(options.weight_ceiling >= 1.0)) throw std::invalid_argument("weight ceiling must be >= 1");

  BayesianNetwork net;
  net.attributes = data.names;
  net.degree = options.degree;

  const int rounds = static_cast<int>(d - 1);
  double per_round = 0.0;
  double sensitivity = 0.0;
  if (!options.epsilon.is_oracle()) {
    per_round = rounds > 0 ? options.epsilon.value() / rounds : 0.0;
    sensitivity = mutual_information_sensitivity(std::max<Index>(data.rows(), 1)) *
                  options.weight_ceiling;
    if (ledger) ledger->reserve(Stage::kStructure, options.epsilon.value(), rounds);
  }

  const Index root = static_cast<Index>(src.below(static_cast<std::uint64_t>(d)));
  net.pairs.push_back({root, {}});
  std::vector<Index> visited{root};
  std::vector<bool> is_visited(static_cast<std::size_t>(d), false);
  is_visited[static_cast<std::size_t>(root)] = true;

  for (int round = 0; round < rounds; ++round) {
    std::sort(visited.begin(), visited.end());
    const std::size_t parent_size =
        std::min<std::size_t>(static_cast<std::size_t>(options.degree), visited.size());
    std::vector<std::vector<Index>> parent_sets;
    std::vector<Index> scratch;
    combinations(visited, parent_size, 0, scratch, parent_sets);

    std::vector<Candidate> candidates;
    for (Index x = 0; x < d; ++x) {
      if (is_visited[static_cast<std::size_t>(x)]) continue;
      for (const auto& parents : parent_sets) {
        Candidate c{{x, parents}, {}};
        c.key.push_back(data.names[static_cast<std::size_t>(x)]);
        std::vector<std::string> pnames;
        for (Index p : parents) pnames.push_back(data.names[static_cast<std::size_t>(p)]);
        std::sort(pnames.begin(), pnames.end());
        c.key.insert(c.key.end(), pnames.begin(), pnames.end());
        candidates.push_back(std::move(c));
      }
    }
    std::sort(candidates.begin(), candidates.end(),
              [](const Candidate& a, const Candidate& b) { return a.key < b.key; });

    Eigen::VectorXd scores(static_cast<Index>(candidates.size()));
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      scores[static_cast<Index>(i)] = weighted_mutual_information(data, mw, candidates[i].pair);
    }

    Index chosen = 0;
    if (options.epsilon.is_oracle()) {
      scores.maxCoeff(&chosen);  // first maximum, i.e. lexicographic tie-break
    } else {
      chosen = exponential_select(scores, sensitivity, per_round, src);
      if (ledger) ledger->record(Stage::kStructure, "exponential", per_round);
    }
    const APPair& pick = candidates[static_cast<std::size_t>(chosen)].pair;
    net.pairs.push_back(pick);
    visited.push_back(pick.child);
    is_visited[static_cast<std::size_t>(pick.child)] = true;
  }
  net.validate();
  return net;
}

std::vector<Index> topological_order(const BayesianNetwork& net) {
  net.validate();
  std::vector<Index> order;
  for (const auto& p : net.pairs) order.push_back(p.child);
  return order;
}

KlCheck kl_decomposition_check(const BinnedData& data, const BayesianNetwork& net) {
  net.validate();
  const Index d = data.cols();
  const Index n = data.rows();
  if (n == 0) throw std::invalid_argument("KL check needs data");
  Index cells = 1;
  for (int c : data.cardinalities) {
    if (cells > kMaxFullJointCells / std::max(c, 1)) {
      throw std::invalid_argument("full joint exceeds " + std::to_string(kMaxFullJointCells) +
                                  " cells");
    }
    cells *= c;
  }

  std::vector<JointTable> tables;
  for (const auto& p : net.pairs) tables.push_back(joint_table(data, p));

  // Sparse full joint: only observed configurations carry mass.
  std::vector<double> full(static_cast<std::size_t>(cells), 0.0);
  std::vector<Index> first_row(static_cast<std::size_t>(cells), -1);
  for (Index r = 0; r < n; ++r) {
    Index idx = 0;
    for (Index c = 0; c < d; ++c) idx = idx * data.cardinalities[c] + data.bins(r, c);
    full[static_cast<std::size_t>(idx)] += 1.0 / static_cast<double>(n);
    if (first_row[static_cast<std::size_t>(idx)] < 0) first_row[static_cast<std::size_t>(idx)] = r;
  }

  KlCheck out;
  for (std::size_t idx = 0; idx < full.size(); ++idx) {
    const double p = full[idx];
    if (p <= 0.0) continue;
    const Index r = first_row[idx];
    double log_pn = 0.0;
    for (std::size_t i = 0; i < net.pairs.size(); ++i) {
      const APPair& pair = net.pairs[i];
      const Index x = data.bins(r, pair.child);
      const Index j = parent_config_of(data, r, pair);
      const double joint = tables[i].mass(x, j);
      const double parent = tables[i].mass.col(j).sum();
      log_pn += std::log(joint / parent);
    }
    out.lhs += p * (std::log(p) - log_pn);
  }

  double sum_i = 0.0, sum_h = 0.0;
  for (std::size_t i = 0; i < net.pairs.size(); ++i) {
    sum_i += mutual_information(tables[i].mass);
    sum_h += entropy(Eigen::VectorXd(tables[i].mass.rowwise().sum()));
  }
  double h_all = 0.0;
  for (double p : full) {
    if (p > 0.0) h_all -= p * std::log(p);
  }
  out.rhs = -sum_i + sum_h - h_all;
  return out;
}

}  // namespace vizpriv
