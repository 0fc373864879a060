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

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vizpriv/dataset.hpp"

namespace vizpriv {

enum class ChartType { kScatter, kLine, kBar };
enum class Aggregate { kCount, kMean, kSum };
enum class PatternType { kCluster, kCorrelation, kOrder };
enum class SelectionKind { kRegion, kInterval, kBars };

std::string_view to_string(ChartType t);
std::string_view to_string(Aggregate a);
std::string_view to_string(PatternType t);
std::string_view to_string(SelectionKind k);
ChartType chart_type_from_string(std::string_view s);
Aggregate aggregate_from_string(std::string_view s);
PatternType pattern_type_from_string(std::string_view s);
SelectionKind selection_kind_from_string(std::string_view s);

PatternType pattern_type_for(ChartType t);
SelectionKind selection_kind_for(ChartType t);

struct ChartSpec {
  std::string id;
  ChartType type = ChartType::kScatter;
  std::string x;
  std::string y;  // empty for count aggregates
  std::optional<std::string> color;
  std::optional<double> x_step;
  Aggregate aggregate = Aggregate::kCount;

  // Throws std::invalid_argument / NotFoundError against a schema.
  void validate(const Schema& schema) const;
  friend bool operator==(const ChartSpec&, const ChartSpec&) = default;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

// Interactive selection in data coordinates. A region is a rectangle (two
// corners) or a polygon (>= 3 vertices).
struct Selection {
  SelectionKind kind = SelectionKind::kRegion;
  std::optional<std::pair<Point2, Point2>> rect;
  std::vector<Point2> polygon;
  double lo = 0.0;
  double hi = 0.0;
  std::vector<std::string> bars;

  static Selection rectangle(double x0, double y0, double x1, double y1);
  static Selection lasso(std::vector<Point2> vertices);
  static Selection interval(double lo, double hi);
  static Selection bar_set(std::vector<std::string> keys);

  void validate() const;
  friend bool operator==(const Selection&, const Selection&) = default;
};

// Even-odd rule with points on an edge counted as inside.
bool point_in_polygon(const std::vector<Point2>& polygon, Point2 p);

struct ScatterPoint {
  double x = 0.0;
  double y = 0.0;
  std::optional<std::string> color;
  Index row = 0;
};

// One bar or one line vertex: rows grouped by category or by x_step bin.
struct ChartGroup {
  std::string key;
  double x = 0.0;  // category code or bin lower edge
  double x_hi = 0.0;
  double value = 0.0;
  std::vector<Index> rows;
};

struct ChartData {
  ChartSpec spec;
  std::vector<ScatterPoint> points;
  std::vector<ChartGroup> groups;

  const ChartGroup* group(std::string_view key) const;
};

ChartData render_chart_data(const Dataset& ds, const ChartSpec& spec);

// Group key of one row for line/bar charts.
std::string group_key(const Dataset& ds, const ChartSpec& spec, Index row);

std::vector<Index> resolve_pattern(const Dataset& ds, const ChartSpec& spec, const Selection& sel);

struct PatternConstraint {
  std::string id;
  PatternType type = PatternType::kCluster;
  std::string chart;
  Selection selection;
  double weight = 0.0;
  std::vector<Index> records;

  friend bool operator==(const PatternConstraint&, const PatternConstraint&) = default;
};

// Ordered store of pattern constraints with ids P0, P1, ... never reused.
class PatternCatalog {
 public:
  const PatternConstraint& add(const Dataset& ds, const ChartSpec& spec, const Selection& sel,
                               double weight);
  const PatternConstraint& set_weight(std::string_view id, double weight);
  void remove(std::string_view id);
  const PatternConstraint& get(std::string_view id) const;
  const std::vector<PatternConstraint>& patterns() const { return patterns_; }
  std::size_t next_id() const { return next_id_; }

  // Recompute every pattern's records, e.g. after the dataset filter changed.
  void reresolve(const Dataset& ds, const std::map<std::string, ChartSpec>& charts);

  // Restores a catalog verbatim; used by persistence.
  static PatternCatalog restore(std::vector<PatternConstraint> patterns, std::size_t next_id);

  friend bool operator==(const PatternCatalog&, const PatternCatalog&) = default;

 private:
  std::vector<PatternConstraint>::iterator find(std::string_view id);
  std::vector<PatternConstraint> patterns_;
  std::size_t next_id_ = 0;
};

}  // namespace vizpriv
