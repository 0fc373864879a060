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

#include "vizpriv/charts.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "vizpriv/error.hpp"

namespace vizpriv {

std::string_view to_string(ChartType t) {
  switch (t) {
    case ChartType::kScatter: return "scatter";
    case ChartType::kLine: return "line";
    case ChartType::kBar: return "bar";
  }
  return "";
}

std::string_view to_string(Aggregate a) {
  switch (a) {
    case Aggregate::kCount: return "count";
    case Aggregate::kMean: return "mean";
    case Aggregate::kSum: return "sum";
  }
  return "";
}

std::string_view to_string(PatternType t) {
  switch (t) {
    case PatternType::kCluster: return "cluster";
    case PatternType::kCorrelation: return "correlation";
    case PatternType::kOrder: return "order";
  }
  return "";
}

std::string_view to_string(SelectionKind k) {
  switch (k) {
    case SelectionKind::kRegion: return "region";
    case SelectionKind::kInterval: return "interval";
    case SelectionKind::kBars: return "bars";
  }
  return "";
}

ChartType chart_type_from_string(std::string_view s) {
  if (s == "scatter") return ChartType::kScatter;
  if (s == "line") return ChartType::kLine;
  if (s == "bar") return ChartType::kBar;
  throw std::invalid_argument("unknown chart type '" + std::string(s) + "'");
}

Aggregate aggregate_from_string(std::string_view s) {
  if (s == "count") return Aggregate::kCount;
  if (s == "mean") return Aggregate::kMean;
  if (s == "sum") return Aggregate::kSum;
  throw std::invalid_argument("unknown aggregate '" + std::string(s) + "'");
}

PatternType pattern_type_from_string(std::string_view s) {
  if (s == "cluster") return PatternType::kCluster;
  if (s == "correlation") return PatternType::kCorrelation;
  if (s == "order") return PatternType::kOrder;
  throw std::invalid_argument("unknown pattern type '" + std::string(s) + "'");
}

SelectionKind selection_kind_from_string(std::string_view s) {
  if (s == "region") return SelectionKind::kRegion;
  if (s == "interval") return SelectionKind::kInterval;
  if (s == "bars") return SelectionKind::kBars;
  throw std::invalid_argument("unknown selection kind '" + std::string(s) + "'");
}

PatternType pattern_type_for(ChartType t) {
  switch (t) {
    case ChartType::kScatter: return PatternType::kCluster;
    case ChartType::kLine: return PatternType::kCorrelation;
    case ChartType::kBar: return PatternType::kOrder;
  }
  return PatternType::kCluster;
}

SelectionKind selection_kind_for(ChartType t) {
  switch (t) {
    case ChartType::kScatter: return SelectionKind::kRegion;
    case ChartType::kLine: return SelectionKind::kInterval;
    case ChartType::kBar: return SelectionKind::kBars;
  }
  return SelectionKind::kRegion;
}

namespace {

const Attribute& find_attr(const Schema& schema, std::string_view name) {
  for (const auto& a : schema) {
    if (a.name == name) return a;
  }
  throw NotFoundError("unknown attribute '" + std::string(name) + "'");
}

}  // namespace

void ChartSpec::validate(const Schema& schema) const {
  const Attribute& xa = find_attr(schema, x);
  if (x_step && !(*x_step > 0.0)) throw std::invalid_argument("x_step must be positive");
  if (color && !find_attr(schema, *color).is_categorical()) {
    throw std::invalid_argument("color must be a categorical attribute");
  }
  switch (type) {
    case ChartType::kScatter: {
      if (y.empty()) throw std::invalid_argument("scatter chart needs a y attribute");
      if (!xa.is_numerical() || !find_attr(schema, y).is_numerical()) {
        throw std::invalid_argument("scatter chart needs numerical x and y");
      }
      break;
    }
    case ChartType::kBar:
      if (xa.is_numerical() && !x_step) {
        throw std::invalid_argument("bar chart on numerical x needs x_step");
      }
      [[fallthrough]];
    case ChartType::kLine:
      if (aggregate != Aggregate::kCount) {
        if (y.empty()) throw std::invalid_argument("aggregate needs a y attribute");
        if (!find_attr(schema, y).is_numerical()) {
          throw std::invalid_argument("mean/sum aggregate needs numerical y");
        }
      }
      break;
  }
}

Selection Selection::rectangle(double x0, double y0, double x1, double y1) {
  Selection s;
  s.kind = SelectionKind::kRegion;
  s.rect = std::make_pair(Point2{x0, y0}, Point2{x1, y1});
  return s;
}

Selection Selection::lasso(std::vector<Point2> vertices) {
  Selection s;
  s.kind = SelectionKind::kRegion;
  s.polygon = std::move(vertices);
  s.validate();
  return s;
}

Selection Selection::interval(double lo, double hi) {
  Selection s;
  s.kind = SelectionKind::kInterval;
  s.lo = lo;
  s.hi = hi;
  s.validate();
  return s;
}

Selection Selection::bar_set(std::vector<std::string> keys) {
  Selection s;
  s.kind = SelectionKind::kBars;
  s.bars = std::move(keys);
  s.validate();
  return s;
}

void Selection::validate() const {
  switch (kind) {
    case SelectionKind::kRegion:
      if (!rect && polygon.size() < 3) {
        throw std::invalid_argument("region needs a rectangle or a polygon with >= 3 vertices");
      }
      break;
    case SelectionKind::kInterval:
      if (!(lo <= hi)) throw std::invalid_argument("interval needs lo <= hi");
      break;
    case SelectionKind::kBars:
      if (bars.empty()) throw std::invalid_argument("bars selection must not be empty");
      break;
  }
}

bool point_in_polygon(const std::vector<Point2>& poly, Point2 p) {
  const std::size_t m = poly.size();
  for (std::size_t i = 0, j = m - 1; i < m; j = i++) {
    const Point2 a = poly[j], b = poly[i];
    const double cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
    const double scale = std::max({std::abs(b.x - a.x), std::abs(b.y - a.y), 1.0});
    if (std::abs(cross) <= 1e-12 * scale * scale && p.x >= std::min(a.x, b.x) &&
        p.x <= std::max(a.x, b.x) && p.y >= std::min(a.y, b.y) && p.y <= std::max(a.y, b.y)) {
      return true;
    }
  }
  bool inside = false;
  for (std::size_t i = 0, j = m - 1; i < m; j = i++) {
    const Point2 a = poly[j], b = poly[i];
    if ((b.y > p.y) != (a.y > p.y)) {
      const double x_cross = b.x + (p.y - b.y) * (a.x - b.x) / (a.y - b.y);
      if (p.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

const ChartGroup* ChartData::group(std::string_view key) const {
  for (const auto& g : groups) {
    if (g.key == key) return &g;
  }
  return nullptr;
}

namespace {

struct GroupPosition {
  std::string key;
  double x;
  double x_hi;
};

GroupPosition position_of(const Dataset& ds, const ChartSpec& spec, Index xc, Index row) {
  const Attribute& xa = ds.attribute(xc);
  const double v = ds.at(row, xc);
  if (xa.is_categorical()) return {ds.text(row, xc), v, v};
  if (spec.x_step) {
    const double step = *spec.x_step;
    const double bin = std::floor((v - xa.min) / step);
    const double lo = xa.min + bin * step;
    const double hi = xa.min + (bin + 1.0) * step;
    return {"[" + format_number(lo) + "," + format_number(hi) + ")", lo, hi};
  }
  return {format_number(v), v, v};
}

}  // namespace

std::string group_key(const Dataset& ds, const ChartSpec& spec, Index row) {
  return position_of(ds, spec, ds.index_of(spec.x), row).key;
}

ChartData render_chart_data(const Dataset& ds, const ChartSpec& spec) {
  spec.validate(ds.schema());
  ChartData out;
  out.spec = spec;
  const Index xc = ds.index_of(spec.x);
  if (spec.type == ChartType::kScatter) {
    const Index yc = ds.index_of(spec.y);
    const std::optional<Index> cc =
        spec.color ? std::optional<Index>(ds.index_of(*spec.color)) : std::nullopt;
    out.points.reserve(static_cast<std::size_t>(ds.rows()));
    for (Index r = 0; r < ds.rows(); ++r) {
      ScatterPoint p{ds.at(r, xc), ds.at(r, yc), std::nullopt, r};
      if (cc) p.color = ds.text(r, *cc);
      out.points.push_back(std::move(p));
    }
    return out;
  }

  const std::optional<Index> yc =
      spec.aggregate == Aggregate::kCount ? std::nullopt : std::optional<Index>(ds.index_of(spec.y));
  // Ordered by x position; categorical groups follow domain order.
  std::map<double, ChartGroup> groups;
  for (Index r = 0; r < ds.rows(); ++r) {
    GroupPosition pos = position_of(ds, spec, xc, r);
    auto [it, inserted] = groups.try_emplace(pos.x);
    if (inserted) {
      it->second.key = std::move(pos.key);
      it->second.x = pos.x;
      it->second.x_hi = pos.x_hi;
    }
    it->second.rows.push_back(r);
  }
  for (auto& [x, g] : groups) {
    if (g.rows.empty()) continue;
    double sum = 0.0;
    if (yc) {
      for (Index r : g.rows) sum += ds.at(r, *yc);
    }
    switch (spec.aggregate) {
      case Aggregate::kCount: g.value = static_cast<double>(g.rows.size()); break;
      case Aggregate::kSum: g.value = sum; break;
      case Aggregate::kMean: g.value = sum / static_cast<double>(g.rows.size()); break;
    }
    out.groups.push_back(std::move(g));
  }
  return out;
}

std::vector<Index> resolve_pattern(const Dataset& ds, const ChartSpec& spec, const Selection& sel) {
  spec.validate(ds.schema());
  sel.validate();
  if (sel.kind != selection_kind_for(spec.type)) {
    throw ContractError("a " + std::string(to_string(sel.kind)) + " selection does not apply to a " +
                        std::string(to_string(spec.type)) + " chart");
  }
  std::vector<Index> rows;
  const Index xc = ds.index_of(spec.x);
  switch (sel.kind) {
    case SelectionKind::kRegion: {
      const Index yc = ds.index_of(spec.y);
      for (Index r = 0; r < ds.rows(); ++r) {
        const Point2 p{ds.at(r, xc), ds.at(r, yc)};
        bool inside;
        if (sel.rect) {
          const auto [a, b] = *sel.rect;
          inside = p.x >= std::min(a.x, b.x) && p.x <= std::max(a.x, b.x) &&
                   p.y >= std::min(a.y, b.y) && p.y <= std::max(a.y, b.y);
        } else {
          inside = point_in_polygon(sel.polygon, p);
        }
        if (inside) rows.push_back(r);
      }
      break;
    }
    case SelectionKind::kInterval:
      for (Index r = 0; r < ds.rows(); ++r) {
        const double x = ds.at(r, xc);
        if (x >= sel.lo && x <= sel.hi) rows.push_back(r);
      }
      break;
    case SelectionKind::kBars: {
      const std::set<std::string> keys(sel.bars.begin(), sel.bars.end());
      for (Index r = 0; r < ds.rows(); ++r) {
        if (keys.count(position_of(ds, spec, xc, r).key)) rows.push_back(r);
      }
      break;
    }
  }
  return rows;
}

std::vector<PatternConstraint>::iterator PatternCatalog::find(std::string_view id) {
  auto it = std::find_if(patterns_.begin(), patterns_.end(),
                         [&](const PatternConstraint& p) { return p.id == id; });
  if (it == patterns_.end()) throw NotFoundError("unknown pattern '" + std::string(id) + "'");
  return it;
}

const PatternConstraint& PatternCatalog::add(const Dataset& ds, const ChartSpec& spec,
                                             const Selection& sel, double weight) {
  if (!(weight >= 0.0) || !std::isfinite(weight)) {
    throw std::invalid_argument("pattern weight must be a non-negative number");
  }
  PatternConstraint p;
  p.records = resolve_pattern(ds, spec, sel);
  p.id = "P" + std::to_string(next_id_);
  p.type = pattern_type_for(spec.type);
  p.chart = spec.id;
  p.selection = sel;
  p.weight = weight;
  ++next_id_;
  patterns_.push_back(std::move(p));
  return patterns_.back();
}

const PatternConstraint& PatternCatalog::set_weight(std::string_view id, double weight) {
  if (!(weight >= 0.0) || !std::isfinite(weight)) {
    throw std::invalid_argument("pattern weight must be a non-negative number");
  }
  auto it = find(id);
  it->weight = weight;
  return *it;
}

void PatternCatalog::remove(std::string_view id) { patterns_.erase(find(id)); }

const PatternConstraint& PatternCatalog::get(std::string_view id) const {
  return *const_cast<PatternCatalog*>(this)->find(id);
}

void PatternCatalog::reresolve(const Dataset& ds, const std::map<std::string, ChartSpec>& charts) {
  for (auto& p : patterns_) {
    auto it = charts.find(p.chart);
    if (it == charts.end()) throw NotFoundError("pattern " + p.id + " references a missing chart");
    p.records = resolve_pattern(ds, it->second, p.selection);
  }
}

PatternCatalog PatternCatalog::restore(std::vector<PatternConstraint> patterns,
                                       std::size_t next_id) {
  PatternCatalog c;
  c.patterns_ = std::move(patterns);
  c.next_id_ = next_id;
  return c;
}

}  // namespace vizpriv
