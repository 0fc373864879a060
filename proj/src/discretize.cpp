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

#include "vizpriv/discretize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "vizpriv/error.hpp"

namespace vizpriv {

Index Discretization::bin_count() const {
  if (kind == AttributeKind::kCategorical) return static_cast<Index>(labels.size());
  return static_cast<Index>(edges.size()) - 1;
}

Index Discretization::bin_of(double value) const {
  if (kind == AttributeKind::kCategorical) {
    const auto code = static_cast<Index>(value);
    if (code < 0 || code >= bin_count()) throw DomainError("category code out of range");
    return code;
  }
  const Index m = bin_count();
  if (value < edges.front() || value > edges.back()) {
    throw DomainError("value " + format_number(value) + " outside discretized domain of '" +
                      attribute + "'");
  }
  // First interior edge strictly greater than value.
  auto it = std::upper_bound(edges.begin() + 1, edges.end() - 1, value);
  return std::min<Index>(static_cast<Index>(it - (edges.begin() + 1)), m - 1);
}

std::pair<double, double> Discretization::bin_range(Index bin) const {
  if (kind == AttributeKind::kCategorical) {
    return {static_cast<double>(bin), static_cast<double>(bin)};
  }
  return {edges[static_cast<std::size_t>(bin)], edges[static_cast<std::size_t>(bin) + 1]};
}

std::string Discretization::bin_label(Index bin) const {
  if (kind == AttributeKind::kCategorical) return labels[static_cast<std::size_t>(bin)];
  auto [lo, hi] = bin_range(bin);
  const bool last = bin + 1 == bin_count();
  return "[" + format_number(lo) + "," + format_number(hi) + (last ? "]" : ")");
}

namespace {

double quantile_sorted(std::span<const double> sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

KMeansResult kmeans_1d(std::span<const double> sorted, int k) {
  if (sorted.empty()) throw std::invalid_argument("k-means on empty data");
  if (k < 1) throw std::invalid_argument("k-means needs k >= 1");
  const std::size_t n = sorted.size();
  std::vector<double> centroids(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    centroids[static_cast<std::size_t>(i)] = quantile_sorted(sorted, (i + 0.5) / k);
  }
  std::vector<int> assign(n, -1);
  for (int iter = 0; iter < 300; ++iter) {
    bool changed = false;
    // Centroids stay sorted, so the nearest one is found by a forward sweep.
    std::size_t c = 0;
    for (std::size_t i = 0; i < n; ++i) {
      while (c + 1 < centroids.size() &&
             std::abs(sorted[i] - centroids[c + 1]) < std::abs(sorted[i] - centroids[c])) {
        ++c;
      }
      if (assign[i] != static_cast<int>(c)) {
        assign[i] = static_cast<int>(c);
        changed = true;
      }
    }
    if (!changed) break;
    std::vector<double> sum(centroids.size(), 0.0);
    std::vector<std::size_t> count(centroids.size(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      sum[static_cast<std::size_t>(assign[i])] += sorted[i];
      ++count[static_cast<std::size_t>(assign[i])];
    }
    for (std::size_t j = 0; j < centroids.size(); ++j) {
      if (count[j] > 0) centroids[j] = sum[j] / static_cast<double>(count[j]);
    }
    std::sort(centroids.begin(), centroids.end());
  }
  KMeansResult result;
  result.centroids = centroids;
  for (std::size_t i = 0; i < n; ++i) {
    const double diff = sorted[i] - centroids[static_cast<std::size_t>(assign[i])];
    result.sse += diff * diff;
  }
  return result;
}

int elbow_k(std::span<const double> sse, Index distinct_values) {
  const int max_k = static_cast<int>(sse.size());
  const int fallback = static_cast<int>(std::min<Index>(2, distinct_values));
  if (max_k < 3) return std::max(1, std::min(fallback, max_k));
  int best_k = -1;
  double best = 0.0;
  for (int k = 2; k <= max_k - 1; ++k) {
    // sse[k - 1] holds SSE(k).
    const double second = sse[k - 2] - 2.0 * sse[k - 1] + sse[k];
    if (second > 0.0 && (best_k < 0 || second > best)) {
      best = second;
      best_k = k;
    }
  }
  return best_k < 0 ? std::max(1, fallback) : best_k;
}

Discretization discretize(const Dataset& ds, std::string_view attr, int max_k) {
  if (max_k < 1) throw std::invalid_argument("max_k must be >= 1");
  const Index col = ds.index_of(attr);
  const Attribute& a = ds.attribute(col);
  Discretization out;
  out.attribute = a.name;
  out.kind = a.kind;
  if (a.is_categorical()) {
    out.labels = a.categories;
    return out;
  }
  if (ds.rows() == 0) throw std::invalid_argument("cannot discretize '" + a.name + "': no rows");

  std::vector<double> values(ds.column(col).begin(), ds.column(col).end());
  std::sort(values.begin(), values.end());
  std::vector<double> uniq = values;
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
  const auto n_distinct = static_cast<Index>(uniq.size());

  if (n_distinct == 1) {
    out.edges = {a.min, a.max};
    return out;
  }
  const int k_limit = static_cast<int>(std::min<Index>(max_k, n_distinct));
  std::vector<KMeansResult> fits;
  std::vector<double> sse;
  for (int k = 1; k <= k_limit; ++k) {
    fits.push_back(kmeans_1d(values, k));
    sse.push_back(fits.back().sse);
  }
  const int k = elbow_k(sse, n_distinct);
  std::vector<double> centroids = fits[static_cast<std::size_t>(k - 1)].centroids;
  centroids.erase(std::unique(centroids.begin(), centroids.end()), centroids.end());

  out.edges.push_back(a.min);
  for (std::size_t i = 0; i + 1 < centroids.size(); ++i) {
    const double mid = 0.5 * (centroids[i] + centroids[i + 1]);
    if (mid > out.edges.back() && mid < a.max) out.edges.push_back(mid);
  }
  out.edges.push_back(a.max);
  return out;
}

std::vector<Discretization> discretize_all(const Dataset& ds, int max_k) {
  std::vector<Discretization> out;
  for (const auto& a : ds.schema()) out.push_back(discretize(ds, a.name, max_k));
  return out;
}

BinnedData bin_dataset(const Dataset& ds, std::span<const Discretization> discs) {
  if (static_cast<Index>(discs.size()) != ds.cols()) {
    throw std::invalid_argument("one discretization per attribute required");
  }
  BinnedData out;
  out.bins.resize(ds.rows(), ds.cols());
  for (Index c = 0; c < ds.cols(); ++c) {
    const Discretization& disc = discs[static_cast<std::size_t>(c)];
    if (disc.attribute != ds.attribute(c).name) {
      throw std::invalid_argument("discretization order does not match schema");
    }
    out.cardinalities.push_back(static_cast<int>(disc.bin_count()));
    out.names.push_back(disc.attribute);
    for (Index r = 0; r < ds.rows(); ++r) {
      out.bins(r, c) = static_cast<int>(disc.bin_of(ds.at(r, c)));
    }
  }
  return out;
}

}  // namespace vizpriv
