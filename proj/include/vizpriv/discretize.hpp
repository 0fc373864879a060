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

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vizpriv/dataset.hpp"

namespace vizpriv {

inline constexpr int kDefaultMaxBins = 8;

// Maps attribute values onto bins 0..bin_count()-1. Numerical attributes use
// interval edges e_0 < ... < e_m covering [min, max]; bin j is [e_j, e_{j+1})
// and the last bin is closed. Categorical attributes bin by category code.
struct Discretization {
  std::string attribute;
  AttributeKind kind = AttributeKind::kCategorical;
  std::vector<double> edges;
  std::vector<std::string> labels;

  Index bin_count() const;
  Index bin_of(double value) const;
  // Numerical bin bounds [lo, hi].
  std::pair<double, double> bin_range(Index bin) const;
  std::string bin_label(Index bin) const;

  friend bool operator==(const Discretization&, const Discretization&) = default;
};

struct KMeansResult {
  std::vector<double> centroids;  // ascending
  double sse = 0.0;
};

// Lloyd's algorithm on sorted 1-D data with centroid i seeded at the
// (i + 0.5) / k quantile.
KMeansResult kmeans_1d(std::span<const double> sorted_values, int k);

// Elbow choice over SSE(1..max_k): argmax of the second difference, smaller
// k on ties, falling back to min(2, distinct values).
int elbow_k(std::span<const double> sse_by_k, Index distinct_values);

Discretization discretize(const Dataset& ds, std::string_view attr, int max_k = kDefaultMaxBins);
std::vector<Discretization> discretize_all(const Dataset& ds, int max_k = kDefaultMaxBins);

// Dataset recoded as bin indices, one column per attribute.
struct BinnedData {
  Eigen::MatrixXi bins;
  std::vector<int> cardinalities;
  std::vector<std::string> names;

  Index rows() const { return bins.rows(); }
  Index cols() const { return bins.cols(); }
};

BinnedData bin_dataset(const Dataset& ds, std::span<const Discretization> discs);

}  // namespace vizpriv
