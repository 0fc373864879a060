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

#include "vizpriv/mechanisms.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace vizpriv {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

NoiseSource NoiseSource::substream(std::uint64_t stream) const {
  return NoiseSource(splitmix64(seed_ ^ splitmix64(stream + 0x5851f42d4c957f2dULL)));
}

std::uint64_t NoiseSource::below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("empty range");
  // Rejection keeps the draw unbiased.
  const std::uint64_t limit = (~std::uint64_t{0}) - ((~std::uint64_t{0}) % bound);
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % bound;
}

StageEpsilon StageEpsilon::of(double epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw std::invalid_argument("epsilon must be positive and finite");
  }
  StageEpsilon e;
  e.oracle_ = false;
  e.epsilon_ = epsilon;
  return e;
}

double StageEpsilon::value() const {
  if (oracle_) throw std::logic_error("oracle stage has no epsilon");
  return epsilon_;
}

double laplace_noise(double scale, NoiseSource& src) {
  if (!(scale >= 0.0)) throw std::invalid_argument("Laplace scale must be non-negative");
  if (scale == 0.0) return 0.0;
  double u;
  do {
    u = src.uniform() - 0.5;
  } while (u == -0.5);
  const double sign = u < 0.0 ? -1.0 : 1.0;
  return sign * scale * std::log(1.0 - 2.0 * std::abs(u));
}

Eigen::VectorXd laplace_mechanism(const Eigen::Ref<const Eigen::VectorXd>& values,
                                  double sensitivity, double epsilon, NoiseSource& src) {
  if (!(sensitivity > 0.0)) throw std::invalid_argument("sensitivity must be positive");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  const double scale = sensitivity / epsilon;
  Eigen::VectorXd out = values;
  for (Index i = 0; i < out.size(); ++i) out[i] += laplace_noise(scale, src);
  return out;
}

Eigen::VectorXd exponential_probabilities(const Eigen::Ref<const Eigen::VectorXd>& scores,
                                          double sensitivity, double epsilon) {
  if (scores.size() == 0) throw std::invalid_argument("no candidates to select from");
  if (!(sensitivity > 0.0)) throw std::invalid_argument("sensitivity must be positive");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  const double coef = epsilon / (2.0 * sensitivity);
  Eigen::VectorXd w = ((scores.array() - scores.maxCoeff()) * coef).exp();
  return w / w.sum();
}

Index exponential_select(const Eigen::Ref<const Eigen::VectorXd>& scores, double sensitivity,
                         double epsilon, NoiseSource& src) {
  const Eigen::VectorXd p = exponential_probabilities(scores, sensitivity, epsilon);
  const double u = src.uniform();
  double acc = 0.0;
  for (Index i = 0; i < p.size(); ++i) {
    acc += p[i];
    if (u < acc) return i;
  }
  // Rounding left the cumulative sum short of 1; take the last positive entry.
  for (Index i = p.size() - 1; i >= 0; --i) {
    if (p[i] > 0.0) return i;
  }
  return p.size() - 1;
}

void BudgetSpec::validate() const {
  if (!(epsilon_total > 0.0) || !(epsilon_structure > 0.0) || !(epsilon_marginals > 0.0)) {
    throw std::invalid_argument("all privacy budgets must be positive");
  }
  if (epsilon_structure + epsilon_marginals != epsilon_total) {
    throw std::invalid_argument("epsilon_structure + epsilon_marginals must equal epsilon_total");
  }
}

BudgetSpec split_budget(double epsilon_total, double structure_fraction) {
  if (!(epsilon_total > 0.0) || !std::isfinite(epsilon_total)) {
    throw std::invalid_argument("epsilon must be positive");
  }
  if (!(structure_fraction > 0.0 && structure_fraction < 1.0)) {
    throw std::invalid_argument("structure_fraction must lie in (0, 1)");
  }
  BudgetSpec b;
  b.epsilon_total = epsilon_total;
  // Rounding can leave the parts an ulp off the total, and stepping only one of
  // them can jump over it. Search a few ulps around both.
  const double s0 = structure_fraction * epsilon_total;
  const double inf = std::numeric_limits<double>::infinity();
  for (int ds = 0; ds <= 16; ++ds) {
    for (const double dir : {inf, -inf}) {
      if (ds == 0 && dir < 0) continue;
      double s = s0;
      for (int i = 0; i < ds; ++i) s = std::nextafter(s, dir);
      const double m0 = epsilon_total - s;
      for (const int dm : {0, -1, 1, -2, 2, -3, 3, -4, 4}) {
        double m = m0;
        for (int i = 0; i < std::abs(dm); ++i) m = std::nextafter(m, dm < 0 ? -inf : inf);
        if (s > 0.0 && m > 0.0 && s + m == epsilon_total) {
          b.epsilon_structure = s;
          b.epsilon_marginals = m;
          b.validate();
          return b;
        }
      }
    }
  }
  b.epsilon_structure = s0;
  b.epsilon_marginals = epsilon_total - s0;
  b.validate();
  return b;
}

std::string_view to_string(Stage stage) {
  return stage == Stage::kStructure ? "structure" : "marginals";
}

void BudgetLedger::reserve(Stage stage, double budget, int planned_draws) {
  Reservation& r = slot(stage);
  r.budget = budget;
  r.planned = planned_draws;
  r.reserved = true;
}

void BudgetLedger::record(Stage stage, std::string mechanism, double epsilon) {
  entries_.push_back({stage, std::move(mechanism), epsilon});
}

int BudgetLedger::draws(Stage stage) const {
  int n = 0;
  for (const auto& e : entries_) n += e.stage == stage ? 1 : 0;
  return n;
}

int BudgetLedger::planned(Stage stage) const { return slot(stage).planned; }

double BudgetLedger::consumed(Stage stage) const {
  const Reservation& r = slot(stage);
  if (r.reserved && draws(stage) == r.planned) return r.budget;
  double sum = 0.0;
  for (const auto& e : entries_) sum += e.stage == stage ? e.epsilon : 0.0;
  return sum;
}

}  // namespace vizpriv
