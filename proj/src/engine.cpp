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

#include "vizpriv/engine.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "vizpriv/error.hpp"

namespace vizpriv {

MixtureWeights mixture_weights(Index n, std::span<const PatternConstraint> patterns) {
  MixtureWeights mw;
  mw.values = Eigen::VectorXd::Ones(n);
  for (const auto& p : patterns) {
    if (!(p.weight >= 0.0)) throw std::invalid_argument("pattern " + p.id + " has negative weight");
    // A record counts once per pattern even if listed twice.
    std::set<Index> rows(p.records.begin(), p.records.end());
    for (Index r : rows) {
      if (r < 0 || r >= n) {
        throw std::out_of_range("pattern " + p.id + " references row " + std::to_string(r) +
                                " outside [0, " + std::to_string(n) + ")");
      }
      mw.values[r] += p.weight;
    }
    mw.ceiling += p.weight;
  }
  return mw;
}

bool clip_and_renormalize(Eigen::MatrixXd& table) {
  table = table.cwiseMax(0.0);
  const double total = table.sum();
  if (!(total > 0.0)) {
    table.setConstant(1.0 / static_cast<double>(table.size()));
    return false;
  }
  table /= total;
  return true;
}

namespace {

std::vector<Index> variables_of(const APPair& p) {
  std::vector<Index> v = p.parents;
  v.push_back(p.child);
  std::sort(v.begin(), v.end());
  return v;
}

bool covers(const APPair& outer, const APPair& inner) {
  const auto a = variables_of(outer);
  const auto b = variables_of(inner);
  return std::includes(a.begin(), a.end(), b.begin(), b.end());
}

std::vector<int> cards_of(const BinnedData& data) { return data.cardinalities; }

// Sum a table over the variables that the target pair does not use.
Eigen::MatrixXd marginalize(const std::vector<int>& cards, const NoisyMarginal& src,
                            const APPair& target) {
  Index target_cols = 1;
  for (Index p : target.parents) target_cols *= cards[static_cast<std::size_t>(p)];
  Eigen::MatrixXd out =
      Eigen::MatrixXd::Zero(cards[static_cast<std::size_t>(target.child)], target_cols);
  std::vector<Index> bin(cards.size(), 0);
  for (Index j = 0; j < src.mass.cols(); ++j) {
    Index rest = j;
    for (auto it = src.pair.parents.rbegin(); it != src.pair.parents.rend(); ++it) {
      const int c = cards[static_cast<std::size_t>(*it)];
      bin[static_cast<std::size_t>(*it)] = rest % c;
      rest /= c;
    }
    for (Index x = 0; x < src.mass.rows(); ++x) {
      bin[static_cast<std::size_t>(src.pair.child)] = x;
      Index tj = 0;
      for (Index p : target.parents) {
        tj = tj * cards[static_cast<std::size_t>(p)] + bin[static_cast<std::size_t>(p)];
      }
      out(bin[static_cast<std::size_t>(target.child)], tj) += src.mass(x, j);
    }
  }
  return out;
}

}  // namespace

std::vector<std::size_t> directly_noised_pairs(const BayesianNetwork& net) {
  const std::size_t d = net.pairs.size();
  if (d == 0) return {};
  const std::size_t anchor = std::min<std::size_t>(static_cast<std::size_t>(net.degree), d - 1);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < anchor; ++i) {
    if (!covers(net.pairs[anchor], net.pairs[i])) out.push_back(i);
  }
  for (std::size_t i = anchor; i < d; ++i) out.push_back(i);
  return out;
}

std::vector<NoisyMarginal> noisy_marginals(const BinnedData& data, const BayesianNetwork& net,
                                           StageEpsilon epsilon, NoiseSource& src,
                                           BudgetLedger* ledger) {
  net.validate();
  const Index n = data.rows();
  if (n == 0) throw std::invalid_argument("noisy marginals need data");
  const auto noised = directly_noised_pairs(net);
  const auto m = static_cast<double>(noised.size());
  double scale = 0.0;
  if (!epsilon.is_oracle()) {
    scale = 2.0 * m / (static_cast<double>(n) * epsilon.value());
    if (ledger) ledger->reserve(Stage::kMarginals, epsilon.value(), static_cast<int>(noised.size()));
  }

  std::vector<NoisyMarginal> out(net.pairs.size());
  std::vector<bool> done(net.pairs.size(), false);
  for (std::size_t i : noised) {
    NoisyMarginal nm;
    nm.pair = net.pairs[i];
    nm.mass = joint_table(data, nm.pair).mass;
    nm.noise_scale = scale;
    if (!epsilon.is_oracle()) {
      for (Index c = 0; c < nm.mass.cols(); ++c) {
        for (Index r = 0; r < nm.mass.rows(); ++r) nm.mass(r, c) += laplace_noise(scale, src);
      }
      if (ledger) ledger->record(Stage::kMarginals, "laplace", epsilon.value() / m);
    }
    nm.uniform_fallback = !clip_and_renormalize(nm.mass);
    out[i] = std::move(nm);
    done[i] = true;
  }
  const std::size_t anchor =
      std::min<std::size_t>(static_cast<std::size_t>(net.degree), net.pairs.size() - 1);
  const auto cards = cards_of(data);
  for (std::size_t i = 0; i < net.pairs.size(); ++i) {
    if (done[i]) continue;
    NoisyMarginal nm;
    nm.pair = net.pairs[i];
    nm.mass = marginalize(cards, out[anchor], nm.pair);
    nm.noise_scale = scale;
    nm.derived = true;
    nm.uniform_fallback = out[anchor].uniform_fallback;
    out[i] = std::move(nm);
  }
  return out;
}

std::vector<ConditionalTable> derive_conditionals(std::span<const NoisyMarginal> marginals) {
  std::vector<ConditionalTable> out;
  out.reserve(marginals.size());
  for (const auto& m : marginals) {
    ConditionalTable t;
    t.pair = m.pair;
    t.probs = m.mass;
    for (Index j = 0; j < t.probs.cols(); ++j) {
      const double total = t.probs.col(j).sum();
      if (total > 0.0) {
        t.probs.col(j) /= total;
      } else {
        t.probs.col(j).setConstant(1.0 / static_cast<double>(t.probs.rows()));
      }
    }
    out.push_back(std::move(t));
  }
  return out;
}

Dataset sample_synthetic(const BayesianNetwork& net, std::span<const ConditionalTable> conditionals,
                         Index n_out, const Schema& schema, std::span<const Discretization> discs,
                         NoiseSource& src) {
  if (n_out < 0) throw std::invalid_argument("n_out must be >= 0");
  net.validate();
  const auto d = static_cast<Index>(schema.size());
  if (static_cast<Index>(net.attributes.size()) != d || static_cast<Index>(discs.size()) != d) {
    throw std::invalid_argument("network, schema and discretizations disagree on attributes");
  }
  // Cumulative columns per pair, in sampling order.
  struct Step {
    const APPair* pair;
    Eigen::MatrixXd cumulative;
  };
  std::vector<Step> steps;
  for (const auto& pair : net.pairs) {
    auto it = std::find_if(conditionals.begin(), conditionals.end(),
                           [&](const ConditionalTable& c) { return c.pair == pair; });
    if (it == conditionals.end()) {
      throw std::invalid_argument("no conditional for attribute '" + net.attributes[pair.child] + "'");
    }
    Eigen::MatrixXd cum = it->probs;
    for (Index r = 1; r < cum.rows(); ++r) cum.row(r) += cum.row(r - 1);
    steps.push_back({&pair, std::move(cum)});
  }

  Eigen::MatrixXd cells(n_out, d);
  std::vector<Index> bins(static_cast<std::size_t>(d), 0);
  for (Index r = 0; r < n_out; ++r) {
    for (const auto& step : steps) {
      Index col = 0;
      for (Index p : step.pair->parents) {
        col = col * discs[static_cast<std::size_t>(p)].bin_count() + bins[static_cast<std::size_t>(p)];
      }
      const double u = src.uniform() * step.cumulative(step.cumulative.rows() - 1, col);
      Index b = 0;
      while (b + 1 < step.cumulative.rows() && u >= step.cumulative(b, col)) ++b;
      bins[static_cast<std::size_t>(step.pair->child)] = b;
    }
    for (Index c = 0; c < d; ++c) {
      const Discretization& disc = discs[static_cast<std::size_t>(c)];
      const Index b = bins[static_cast<std::size_t>(c)];
      if (disc.kind == AttributeKind::kCategorical) {
        cells(r, c) = static_cast<double>(b);
      } else {
        const auto [lo, hi] = disc.bin_range(b);
        cells(r, c) = std::clamp(lo + src.uniform() * (hi - lo), lo, hi);
      }
    }
  }
  return Dataset(schema, std::move(cells));
}

Scheme generate_scheme(const Dataset& ds, std::span<const PatternConstraint> patterns,
                       const std::map<std::string, double>& weight_overrides,
                       const SchemeOptions& options,
                       const std::vector<Discretization>* discretizations, BudgetLedger* ledger) {
  if (ds.rows() == 0) throw std::invalid_argument("cannot synthesize from an empty dataset");
  if (!options.oracle) options.budget.validate();
  if (options.degree < 0) throw std::invalid_argument("degree bound must be >= 0");

  Scheme scheme;
  scheme.budget = options.budget;
  scheme.seed = options.seed;
  scheme.oracle = options.oracle;
  scheme.baseline = options.baseline;
  scheme.degree = options.degree;
  scheme.discretizations =
      discretizations ? *discretizations : discretize_all(ds, options.max_bins);

  std::vector<PatternConstraint> effective;
  if (!options.baseline) {
    for (const auto& p : patterns) {
      PatternConstraint q = p;
      if (auto it = weight_overrides.find(p.id); it != weight_overrides.end()) q.weight = it->second;
      scheme.weights[q.id] = q.weight;
      effective.push_back(std::move(q));
    }
  }

  const BinnedData binned = bin_dataset(ds, scheme.discretizations);
  const MixtureWeights mw = mixture_weights(ds.rows(), effective);

  BudgetLedger local;
  BudgetLedger& book = ledger ? *ledger : local;
  const NoiseSource root(options.seed);
  NoiseSource structure_src = root.substream(kStructureStream);
  NoiseSource marginal_src = root.substream(kMarginalStream);
  NoiseSource sampling_src = root.substream(kSamplingStream);

  StructureOptions so;
  so.degree = options.degree;
  so.weight_ceiling = mw.ceiling;
  so.epsilon = options.oracle ? StageEpsilon::oracle() : StageEpsilon::of(options.budget.epsilon_structure);
  scheme.network = learn_structure(binned, mw.values, so, structure_src, &book);

  const StageEpsilon eps2 =
      options.oracle ? StageEpsilon::oracle() : StageEpsilon::of(options.budget.epsilon_marginals);
  scheme.marginals = noisy_marginals(binned, scheme.network, eps2, marginal_src, &book);
  for (const auto& m : scheme.marginals) {
    if (m.uniform_fallback && !m.derived) {
      scheme.log.push_back("marginal of '" + scheme.network.attributes[m.pair.child] +
                           "' was empty after clipping; replaced by uniform");
    }
  }
  if (options.oracle) scheme.log.push_back("oracle mode: output is NOT differentially private");

  const auto conditionals = derive_conditionals(scheme.marginals);
  scheme.synthetic = sample_synthetic(scheme.network, conditionals, options.n_out.value_or(ds.rows()),
                                      ds.schema(), scheme.discretizations, sampling_src);
  scheme.consumed_structure = book.consumed(Stage::kStructure);
  scheme.consumed_marginals = book.consumed(Stage::kMarginals);
  scheme.structure_draws = book.draws(Stage::kStructure);
  return scheme;
}

}  // namespace vizpriv
