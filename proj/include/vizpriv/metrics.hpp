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

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vizpriv/charts.hpp"
#include "vizpriv/dataset.hpp"
#include "vizpriv/engine.hpp"

namespace vizpriv {

using VectorRef = Eigen::Ref<const Eigen::VectorXd>;

// W1 between two empirical distributions (quantile coupling).
double wasserstein_1d(const VectorRef& a, const VectorRef& b);

// Sum of per-axis W1 over all scatter points, each axis normalized by its
// attribute's domain width.
double cluster_metric(const ChartData& before, const ChartData& after, const Schema& schema);

double pearson(const VectorRef& x, const VectorRef& y);
// |rho_before - rho_after|. Throws std::domain_error on zero variance.
double pearson_diff(const VectorRef& before_x, const VectorRef& before_y,
                    const VectorRef& after_x, const VectorRef& after_y);

double dtw(const VectorRef& a, const VectorRef& b);

// NDCG of the order induced by synthetic values against original values as
// relevance. Keys must match; ties in synthetic values are broken by key.
double ndcg(const std::map<std::string, double>& original,
            const std::map<std::string, double>& synthetic);

double euclidean_bars(const std::map<std::string, double>& before,
                      const std::map<std::string, double>& after);

struct KsResult {
  double statistic = 0.0;
  double fidelity() const { return 1.0 - statistic; }
};
KsResult ks_statistic(const VectorRef& before, const VectorRef& after);

struct ChiSquareResult {
  double statistic = 0.0;
  double p_value = 1.0;
  int dof = 0;
  bool degenerate = false;  // fewer than two categories after merging
};
// Goodness of fit of after's counts against before's frequencies.
ChiSquareResult cs_test(const std::vector<std::string>& before, const std::vector<std::string>& after);
double cs_pvalue(const std::vector<std::string>& before, const std::vector<std::string>& after);

struct AttributeFidelity {
  std::string attribute;
  std::string test;  // "ks" or "cs"
  double statistic = 0.0;
  double score = 0.0;  // 1 - D for KS, p-value for CS
};

struct PatternMetric {
  std::string pattern;
  std::string metric;
  double before = 0.0;  // value on the original data against itself
  double after = 0.0;   // original vs synthetic
  double delta = 0.0;
  std::optional<std::string> flag;
};

struct MetricsReport {
  std::string scheme;
  std::vector<AttributeFidelity> fidelity;
  std::vector<PatternMetric> patterns;
  double epsilon = 0.0;
  bool is_private = true;
  double mean_ks_fidelity = 0.0;
  double mean_cs_pvalue = 0.0;
  std::string ks_convention = "statistic=D, score=1-D";
  std::vector<std::string> warnings;

  std::optional<double> value(std::string_view pattern, std::string_view metric) const;
};

// Original and synthetic chart values of a pattern.
std::map<std::string, double> selected_bar_values(const ChartData& chart,
                                                  const std::vector<std::string>& keys);
// (x, y) line vertices with x in [lo, hi].
std::pair<Eigen::VectorXd, Eigen::VectorXd> line_points_in(const ChartData& chart, double lo,
                                                           double hi);

MetricsReport evaluate_scheme(const Dataset& original, const Scheme& scheme,
                              std::span<const PatternConstraint> patterns,
                              const std::map<std::string, ChartSpec>& charts);

// Metrics of one synthetic dataset without a Scheme wrapper.
MetricsReport evaluate_synthetic(const Dataset& original, const Dataset& synthetic,
                                 std::span<const PatternConstraint> patterns,
                                 const std::map<std::string, ChartSpec>& charts);

}  // namespace vizpriv
