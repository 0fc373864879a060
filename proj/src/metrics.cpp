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

#include "vizpriv/metrics.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>

#include "vizpriv/error.hpp"

namespace vizpriv {

namespace {

std::vector<double> sorted_copy(const VectorRef& v) {
  std::vector<double> out(v.data(), v.data() + v.size());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

double wasserstein_1d(const VectorRef& a, const VectorRef& b) {
  if (a.size() == 0 || b.size() == 0) throw std::invalid_argument("Wasserstein of empty sample");
  const auto sa = sorted_copy(a);
  const auto sb = sorted_copy(b);
  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());
  if (sa.size() == sb.size()) {
    double s = 0.0;
    for (std::size_t i = 0; i < sa.size(); ++i) s += std::abs(sa[i] - sb[i]);
    return s / na;
  }
  // Integrate |F_a^-1(t) - F_b^-1(t)| over the merged quantile breakpoints.
  std::size_t i = 0, j = 0;
  double t = 0.0, total = 0.0;
  while (i < sa.size() && j < sb.size()) {
    const double next_a = static_cast<double>(i + 1) / na;
    const double next_b = static_cast<double>(j + 1) / nb;
    const double next = std::min(next_a, next_b);
    total += (next - t) * std::abs(sa[i] - sb[j]);
    t = next;
    if (next_a <= next) ++i;
    if (next_b <= next) ++j;
  }
  return total;
}

double cluster_metric(const ChartData& before, const ChartData& after, const Schema& schema) {
  if (before.points.empty() || after.points.empty()) {
    throw std::invalid_argument("cluster metric needs non-empty scatter charts");
  }
  auto width_of = [&](const std::string& name) {
    for (const auto& a : schema) {
      if (a.name == name) return a.width() > 0.0 ? a.width() : 1.0;
    }
    throw NotFoundError("unknown attribute '" + name + "'");
  };
  const double wx = width_of(before.spec.x);
  const double wy = width_of(before.spec.y);
  auto axis = [](const ChartData& c, bool x, double w) {
    Eigen::VectorXd v(static_cast<Index>(c.points.size()));
    for (std::size_t i = 0; i < c.points.size(); ++i) {
      v[static_cast<Index>(i)] = (x ? c.points[i].x : c.points[i].y) / w;
    }
    return v;
  };
  return wasserstein_1d(axis(before, true, wx), axis(after, true, wx)) +
         wasserstein_1d(axis(before, false, wy), axis(after, false, wy));
}

double pearson(const VectorRef& x, const VectorRef& y) {
  if (x.size() != y.size()) throw std::invalid_argument("pearson needs paired samples");
  if (x.size() < 2) throw std::domain_error("undefined correlation: fewer than 2 points");
  const Eigen::ArrayXd dx = x.array() - x.mean();
  const Eigen::ArrayXd dy = y.array() - y.mean();
  const double sxx = (dx * dx).sum();
  const double syy = (dy * dy).sum();
  if (!(sxx > 0.0) || !(syy > 0.0)) throw std::domain_error("undefined correlation: zero variance");
  return std::clamp((dx * dy).sum() / std::sqrt(sxx * syy), -1.0, 1.0);
}

double pearson_diff(const VectorRef& bx, const VectorRef& by, const VectorRef& ax,
                    const VectorRef& ay) {
  return std::abs(pearson(bx, by) - pearson(ax, ay));
}

double dtw(const VectorRef& a, const VectorRef& b) {
  if (a.size() == 0 || b.size() == 0) throw std::invalid_argument("DTW of empty series");
  const Index n = a.size(), m = b.size();
  const double inf = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd acc = Eigen::MatrixXd::Constant(n + 1, m + 1, inf);
  acc(0, 0) = 0.0;
  for (Index i = 1; i <= n; ++i) {
    for (Index j = 1; j <= m; ++j) {
      const double cost = std::abs(a[i - 1] - b[j - 1]);
      acc(i, j) = cost + std::min({acc(i - 1, j), acc(i, j - 1), acc(i - 1, j - 1)});
    }
  }
  return acc(n, m);
}

double ndcg(const std::map<std::string, double>& original,
            const std::map<std::string, double>& synthetic) {
  if (original.empty()) throw std::invalid_argument("NDCG needs at least one bar");
  if (original.size() != synthetic.size() ||
      !std::equal(original.begin(), original.end(), synthetic.begin(),
                  [](const auto& a, const auto& b) { return a.first == b.first; })) {
    throw std::invalid_argument("NDCG needs identical bar keys");
  }
  if (original.size() == 1) return 1.0;
  double shift = 0.0;
  for (const auto& [k, v] : original) shift = std::min(shift, v);
  std::vector<std::pair<std::string, double>> predicted(synthetic.begin(), synthetic.end());
  // std::map iteration is key-ordered, so a stable sort breaks ties by key.
  std::stable_sort(predicted.begin(), predicted.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<double> ideal;
  for (const auto& [k, v] : original) ideal.push_back(v - shift);
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  double dcg = 0.0, idcg = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double discount = std::log2(static_cast<double>(i) + 2.0);
    dcg += (original.at(predicted[i].first) - shift) / discount;
    idcg += ideal[i] / discount;
  }
  if (!(idcg > 0.0)) return 1.0;
  return std::clamp(dcg / idcg, 0.0, 1.0);
}

double euclidean_bars(const std::map<std::string, double>& before,
                      const std::map<std::string, double>& after) {
  if (before.size() != after.size()) throw std::invalid_argument("bar keys differ");
  double s = 0.0;
  for (const auto& [k, v] : before) {
    auto it = after.find(k);
    if (it == after.end()) throw std::invalid_argument("bar keys differ");
    s += (v - it->second) * (v - it->second);
  }
  return std::sqrt(s);
}

KsResult ks_statistic(const VectorRef& before, const VectorRef& after) {
  if (before.size() == 0 || after.size() == 0) throw std::invalid_argument("KS of empty sample");
  const auto a = sorted_copy(before);
  const auto b = sorted_copy(after);
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() || j < b.size()) {
    double x;
    if (j >= b.size() || (i < a.size() && a[i] <= b[j])) {
      x = a[i];
    } else {
      x = b[j];
    }
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return {std::clamp(d, 0.0, 1.0)};
}

ChiSquareResult cs_test(const std::vector<std::string>& before, const std::vector<std::string>& after) {
  if (before.empty() || after.empty()) throw std::invalid_argument("chi-square of empty sample");
  std::map<std::string, double> expected_count, observed;
  for (const auto& v : before) expected_count[v] += 1.0;
  for (const auto& v : after) {
    observed[v] += 1.0;
    expected_count.try_emplace(v, 0.0);
  }
  const double scale = static_cast<double>(after.size()) / static_cast<double>(before.size());
  struct Bucket {
    double expected = 0.0;
    double observed = 0.0;
  };
  std::vector<Bucket> buckets;
  Bucket zero;
  for (const auto& [k, c] : expected_count) {
    const double o = observed.count(k) ? observed.at(k) : 0.0;
    if (c > 0.0) {
      buckets.push_back({c * scale, o});
    } else {
      zero.observed += o;
    }
  }
  if (zero.observed > 0.0 && !buckets.empty()) {
    // Categories unseen in the reference pool into an "other" bucket with
    // the least expected reference category.
    auto smallest = std::min_element(buckets.begin(), buckets.end(),
                                     [](const Bucket& a, const Bucket& b) { return a.expected < b.expected; });
    smallest->observed += zero.observed;
  }
  ChiSquareResult r;
  if (buckets.size() < 2) {
    r.degenerate = true;
    return r;
  }
  for (const auto& b : buckets) r.statistic += (b.observed - b.expected) * (b.observed - b.expected) / b.expected;
  r.dof = static_cast<int>(buckets.size()) - 1;
  boost::math::chi_squared dist(r.dof);
  r.p_value = std::clamp(boost::math::cdf(boost::math::complement(dist, r.statistic)), 0.0, 1.0);
  return r;
}

double cs_pvalue(const std::vector<std::string>& before, const std::vector<std::string>& after) {
  return cs_test(before, after).p_value;
}

std::optional<double> MetricsReport::value(std::string_view pattern, std::string_view metric) const {
  for (const auto& p : patterns) {
    if (p.pattern == pattern && p.metric == metric && !p.flag) return p.after;
  }
  return std::nullopt;
}

std::map<std::string, double> selected_bar_values(const ChartData& chart,
                                                  const std::vector<std::string>& keys) {
  std::map<std::string, double> out;
  for (const auto& k : keys) {
    const ChartGroup* g = chart.group(k);
    out[k] = g ? g->value : 0.0;
  }
  return out;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> line_points_in(const ChartData& chart, double lo,
                                                           double hi) {
  std::vector<double> xs, ys;
  for (const auto& g : chart.groups) {
    if (g.x >= lo && g.x <= hi) {
      xs.push_back(g.x);
      ys.push_back(g.value);
    }
  }
  return {Eigen::Map<Eigen::VectorXd>(xs.data(), static_cast<Index>(xs.size())),
          Eigen::Map<Eigen::VectorXd>(ys.data(), static_cast<Index>(ys.size()))};
}

namespace {

std::vector<std::string> labels_of(const Dataset& ds, Index col) {
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(ds.rows()));
  for (Index r = 0; r < ds.rows(); ++r) out.push_back(ds.text(r, col));
  return out;
}

PatternMetric make_metric(const std::string& pattern, std::string metric, double before,
                          double after) {
  return {pattern, std::move(metric), before, after, after - before, std::nullopt};
}

PatternMetric flagged(const std::string& pattern, std::string metric, std::string why) {
  PatternMetric m{pattern, std::move(metric), 0.0, 0.0, 0.0, std::move(why)};
  return m;
}

}  // namespace

MetricsReport evaluate_synthetic(const Dataset& original, const Dataset& synthetic,
                                 std::span<const PatternConstraint> patterns,
                                 const std::map<std::string, ChartSpec>& charts) {
  if (original.schema() != synthetic.schema()) {
    throw std::invalid_argument("synthetic data must share the original schema");
  }
  MetricsReport report;
  double ks_sum = 0.0, cs_sum = 0.0;
  int ks_n = 0, cs_n = 0;
  if (original.rows() > 0 && synthetic.rows() > 0) {
    for (Index c = 0; c < original.cols(); ++c) {
      const Attribute& a = original.attribute(c);
      AttributeFidelity f;
      f.attribute = a.name;
      if (a.is_numerical()) {
        const KsResult ks = ks_statistic(original.column(c), synthetic.column(c));
        f.test = "ks";
        f.statistic = ks.statistic;
        f.score = ks.fidelity();
        ks_sum += f.score;
        ++ks_n;
      } else {
        const ChiSquareResult cs = cs_test(labels_of(original, c), labels_of(synthetic, c));
        f.test = "cs";
        f.statistic = cs.statistic;
        f.score = cs.p_value;
        if (cs.degenerate) report.warnings.push_back("'" + a.name + "': fewer than 2 categories, p = 1");
        cs_sum += f.score;
        ++cs_n;
      }
      report.fidelity.push_back(std::move(f));
    }
  }
  report.mean_ks_fidelity = ks_n ? ks_sum / ks_n : 1.0;
  report.mean_cs_pvalue = cs_n ? cs_sum / cs_n : 1.0;

  for (const auto& p : patterns) {
    auto it = charts.find(p.chart);
    if (it == charts.end()) {
      report.patterns.push_back(flagged(p.id, "chart", "chart '" + p.chart + "' missing"));
      continue;
    }
    const ChartSpec& spec = it->second;
    try {
      const ChartData before = render_chart_data(original, spec);
      const ChartData after = render_chart_data(synthetic, spec);
      switch (p.type) {
        case PatternType::kCluster:
          report.patterns.push_back(
              make_metric(p.id, "wasserstein", 0.0, cluster_metric(before, after, original.schema())));
          break;
        case PatternType::kCorrelation: {
          const auto [bx, by] = line_points_in(before, p.selection.lo, p.selection.hi);
          const auto [ax, ay] = line_points_in(after, p.selection.lo, p.selection.hi);
          try {
            report.patterns.push_back(make_metric(p.id, "pearson_diff", 0.0, pearson_diff(bx, by, ax, ay)));
          } catch (const std::domain_error& e) {
            report.patterns.push_back(flagged(p.id, "pearson_diff", e.what()));
          }
          if (by.size() > 0 && ay.size() > 0) {
            report.patterns.push_back(make_metric(p.id, "dtw", 0.0, dtw(by, ay)));
          } else {
            report.patterns.push_back(flagged(p.id, "dtw", "empty series in selected interval"));
          }
          break;
        }
        case PatternType::kOrder: {
          const auto orig = selected_bar_values(before, p.selection.bars);
          const auto synth = selected_bar_values(after, p.selection.bars);
          report.patterns.push_back(make_metric(p.id, "ndcg", 1.0, ndcg(orig, synth)));
          report.patterns.push_back(make_metric(p.id, "euclidean", 0.0, euclidean_bars(orig, synth)));
          break;
        }
      }
    } catch (const std::exception& e) {
      report.patterns.push_back(flagged(p.id, std::string(to_string(p.type)), e.what()));
    }
  }
  return report;
}

MetricsReport evaluate_scheme(const Dataset& original, const Scheme& scheme,
                              std::span<const PatternConstraint> patterns,
                              const std::map<std::string, ChartSpec>& charts) {
  if (scheme.synthetic.cols() == 0) throw std::invalid_argument("scheme has no synthetic data");
  MetricsReport r = evaluate_synthetic(original, scheme.synthetic, patterns, charts);
  r.scheme = scheme.id;
  r.epsilon = scheme.budget.epsilon_total;
  r.is_private = scheme.is_private();
  if (!r.is_private) r.warnings.push_back("oracle mode: NOT differentially private");
  return r;
}

}  // namespace vizpriv
