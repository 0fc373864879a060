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

#include "vizpriv/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include "vizpriv/error.hpp"

namespace vizpriv {

std::string_view to_string(AttributeKind kind) {
  return kind == AttributeKind::kNumerical ? "numerical" : "categorical";
}

AttributeKind attribute_kind_from_string(std::string_view text) {
  if (text == "numerical") return AttributeKind::kNumerical;
  if (text == "categorical") return AttributeKind::kCategorical;
  throw std::invalid_argument("unknown attribute type '" + std::string(text) + "'");
}

Attribute Attribute::categorical(std::string name, std::vector<std::string> categories) {
  Attribute a;
  a.name = std::move(name);
  a.kind = AttributeKind::kCategorical;
  a.categories = std::move(categories);
  a.validate();
  return a;
}

Attribute Attribute::numerical(std::string name, double min, double max) {
  Attribute a;
  a.name = std::move(name);
  a.kind = AttributeKind::kNumerical;
  a.min = min;
  a.max = max;
  a.validate();
  return a;
}

std::optional<Index> Attribute::category_code(std::string_view value) const {
  auto it = std::find(categories.begin(), categories.end(), value);
  if (it == categories.end()) return std::nullopt;
  return static_cast<Index>(it - categories.begin());
}

void Attribute::validate() const {
  if (is_categorical()) {
    if (categories.empty()) {
      throw std::invalid_argument("attribute '" + name + "': empty categorical domain");
    }
    std::set<std::string_view> seen(categories.begin(), categories.end());
    if (seen.size() != categories.size()) {
      throw std::invalid_argument("attribute '" + name + "': duplicate categories");
    }
  } else {
    if (!std::isfinite(min) || !std::isfinite(max) || min > max) {
      throw std::invalid_argument("attribute '" + name + "': invalid numerical range");
    }
  }
}

Dataset::Dataset(Schema schema, Eigen::MatrixXd cells)
    : schema_(std::move(schema)), cells_(std::move(cells)) {
  if (schema_.empty()) throw std::invalid_argument("dataset needs at least one attribute");
  if (cells_.cols() != static_cast<Index>(schema_.size())) {
    if (!(cells_.rows() == 0)) {
      throw std::invalid_argument("cell matrix width does not match schema");
    }
    cells_.resize(0, static_cast<Index>(schema_.size()));
  }
  std::set<std::string_view> names;
  for (const auto& a : schema_) {
    a.validate();
    if (!names.insert(a.name).second) {
      throw std::invalid_argument("duplicate attribute name '" + a.name + "'");
    }
  }
  for (Index c = 0; c < cells_.cols(); ++c) {
    const Attribute& a = attribute(c);
    for (Index r = 0; r < cells_.rows(); ++r) {
      const double v = cells_(r, c);
      if (a.is_numerical()) {
        if (!(v >= a.min && v <= a.max)) {
          throw DomainError("attribute '" + a.name + "': value " + format_number(v) +
                            " outside [" + format_number(a.min) + ", " +
                            format_number(a.max) + "]");
        }
      } else if (!(v >= 0 && v < static_cast<double>(a.categories.size())) ||
                 v != std::floor(v)) {
        throw DomainError("attribute '" + a.name + "': invalid category code");
      }
    }
  }
}

std::optional<Index> Dataset::find(std::string_view name) const {
  for (std::size_t i = 0; i < schema_.size(); ++i) {
    if (schema_[i].name == name) return static_cast<Index>(i);
  }
  return std::nullopt;
}

Index Dataset::index_of(std::string_view name) const {
  if (auto idx = find(name)) return *idx;
  throw NotFoundError("unknown attribute '" + std::string(name) + "'");
}

std::string Dataset::text(Index row, Index col) const {
  const Attribute& a = attribute(col);
  const double v = cells_(row, col);
  if (a.is_categorical()) return a.categories[static_cast<std::size_t>(v)];
  return format_number(v);
}

Dataset Dataset::select_rows(std::span<const Index> rows) const {
  Eigen::MatrixXd out(static_cast<Index>(rows.size()), cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Index>(i)) = cells_.row(rows[i]);
  }
  return Dataset(schema_, std::move(out));
}

std::string format_number(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw std::runtime_error("number formatting failed");
  return std::string(buf, end);
}

std::optional<double> parse_number(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) text.remove_suffix(1);
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

namespace {

std::vector<std::string> split_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.emplace_back(line.substr(start));
      break;
    }
    out.emplace_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

}  // namespace

RawTable parse_csv_table(std::string_view text) {
  if (text.size() >= 3 && static_cast<unsigned char>(text[0]) == 0xEF &&
      static_cast<unsigned char>(text[1]) == 0xBB && static_cast<unsigned char>(text[2]) == 0xBF) {
    text.remove_prefix(3);
  }
  RawTable table;
  std::size_t line_no = 0;
  bool have_header = false;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) {
      if (!have_header) throw ParseError("missing header row", line_no);
      continue;
    }
    auto fields = split_line(line);
    if (!have_header) {
      table.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw ParseError("expected " + std::to_string(table.header.size()) + " fields, found " +
                           std::to_string(fields.size()),
                       line_no);
    }
    table.rows.push_back(std::move(fields));
  }
  if (!have_header) throw ParseError("missing header row", 1);
  return table;
}

SchemaDescriptor infer_schema(const RawTable& table) {
  if (table.header.empty() || (table.header.size() == 1 && table.header[0].empty())) {
    throw ParseError("table has zero columns", 1);
  }
  SchemaDescriptor out;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    ColumnSpec spec;
    spec.name = table.header[c];
    bool any_value = false;
    bool all_numeric = true;
    double lo = 0.0, hi = 0.0;
    std::set<std::string> distinct;
    for (const auto& row : table.rows) {
      const std::string& cell = row[c];
      distinct.insert(cell);
      if (cell.empty()) continue;
      auto v = parse_number(cell);
      if (!v) {
        all_numeric = false;
        continue;
      }
      lo = any_value ? std::min(lo, *v) : *v;
      hi = any_value ? std::max(hi, *v) : *v;
      any_value = true;
    }
    if (any_value && all_numeric) {
      spec.kind = AttributeKind::kNumerical;
      spec.range = std::make_pair(lo, hi);
    } else {
      spec.kind = AttributeKind::kCategorical;
      if (distinct.empty()) distinct.insert("");
      spec.categories = std::vector<std::string>(distinct.begin(), distinct.end());
    }
    out.push_back(std::move(spec));
  }
  return out;
}

Dataset load_csv(std::string_view text, const std::optional<SchemaDescriptor>& schema) {
  RawTable table = parse_csv_table(text);
  const SchemaDescriptor inferred = infer_schema(table);
  SchemaDescriptor spec;
  if (schema) {
    if (schema->size() != table.header.size()) {
      throw ParseError("schema declares " + std::to_string(schema->size()) +
                           " columns but header has " + std::to_string(table.header.size()),
                       1);
    }
    for (std::size_t c = 0; c < schema->size(); ++c) {
      if ((*schema)[c].name != table.header[c]) {
        throw ParseError("header column '" + table.header[c] + "' does not match schema '" +
                             (*schema)[c].name + "'",
                         1);
      }
    }
    spec = *schema;
  } else {
    spec = inferred;
  }

  const std::size_t d = spec.size();
  const std::size_t n = table.rows.size();
  Schema attrs;
  for (std::size_t c = 0; c < d; ++c) {
    const ColumnSpec& cs = spec[c];
    if (cs.kind == AttributeKind::kNumerical) {
      std::pair<double, double> range{0.0, 0.0};
      if (cs.range) {
        range = *cs.range;
      } else if (inferred[c].range) {
        range = *inferred[c].range;
      } else {
        // Some cell is not a number; it is reported with its line below.
        bool first = true;
        for (const auto& row : table.rows) {
          if (auto v = parse_number(row[c])) {
            range.first = first ? *v : std::min(range.first, *v);
            range.second = first ? *v : std::max(range.second, *v);
            first = false;
          }
        }
      }
      attrs.push_back(Attribute::numerical(cs.name, range.first, range.second));
    } else {
      std::vector<std::string> cats;
      if (cs.categories) {
        cats = *cs.categories;
      } else {
        std::set<std::string> distinct;
        for (const auto& row : table.rows) distinct.insert(row[c]);
        if (distinct.empty()) distinct.insert("");
        cats.assign(distinct.begin(), distinct.end());
      }
      attrs.push_back(Attribute::categorical(cs.name, std::move(cats)));
    }
  }

  Eigen::MatrixXd cells(static_cast<Index>(n), static_cast<Index>(d));
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t line = r + 2;
    for (std::size_t c = 0; c < d; ++c) {
      const std::string& cell = table.rows[r][c];
      const Attribute& a = attrs[c];
      if (a.is_numerical()) {
        if (cell.empty()) {
          throw ParseError("missing value for '" + a.name + "'", line);
        }
        auto v = parse_number(cell);
        if (!v) throw ParseError("'" + cell + "' is not a number for '" + a.name + "'", line);
        if (*v < a.min || *v > a.max) {
          throw DomainError("line " + std::to_string(line) + ": value " + cell + " outside [" +
                            format_number(a.min) + ", " + format_number(a.max) + "] for '" +
                            a.name + "'");
        }
        cells(static_cast<Index>(r), static_cast<Index>(c)) = *v;
      } else {
        if (cell.empty() && !a.category_code("")) {
          throw ParseError("missing value for '" + a.name + "'", line);
        }
        auto code = a.category_code(cell);
        if (!code) {
          throw DomainError("line " + std::to_string(line) + ": '" + cell +
                            "' not in domain of '" + a.name + "'");
        }
        cells(static_cast<Index>(r), static_cast<Index>(c)) = static_cast<double>(*code);
      }
    }
  }
  return Dataset(std::move(attrs), std::move(cells));
}

std::string to_csv(const Dataset& ds) {
  std::string out;
  for (Index c = 0; c < ds.cols(); ++c) {
    if (c) out += ',';
    out += ds.attribute(c).name;
  }
  out += '\n';
  for (Index r = 0; r < ds.rows(); ++r) {
    for (Index c = 0; c < ds.cols(); ++c) {
      if (c) out += ',';
      out += ds.text(r, c);
    }
    out += '\n';
  }
  return out;
}

void validate_filter(const Schema& schema, const FilterSpec& filter) {
  for (const auto& [name, pred] : filter.predicates) {
    auto it = std::find_if(schema.begin(), schema.end(),
                           [&](const Attribute& a) { return a.name == name; });
    if (it == schema.end()) throw NotFoundError("filter references unknown attribute '" + name + "'");
    if (std::holds_alternative<Interval>(pred)) {
      if (!it->is_numerical()) {
        throw std::invalid_argument("interval filter on categorical attribute '" + name + "'");
      }
      const auto& iv = std::get<Interval>(pred);
      if (iv.lo > iv.hi) throw std::invalid_argument("filter interval lo > hi for '" + name + "'");
    } else if (!it->is_categorical()) {
      throw std::invalid_argument("value filter on numerical attribute '" + name + "'");
    }
  }
}

std::vector<Index> filter_rows(const Dataset& ds, const FilterSpec& filter) {
  validate_filter(ds.schema(), filter);
  struct Compiled {
    Index col;
    bool interval;
    double lo, hi;
    std::vector<bool> allowed;
  };
  std::vector<Compiled> compiled;
  for (const auto& [name, pred] : filter.predicates) {
    Compiled c{ds.index_of(name), false, 0.0, 0.0, {}};
    if (const auto* iv = std::get_if<Interval>(&pred)) {
      c.interval = true;
      c.lo = iv->lo;
      c.hi = iv->hi;
    } else {
      const Attribute& a = ds.attribute(c.col);
      c.allowed.assign(a.categories.size(), false);
      for (const auto& v : std::get<CategorySet>(pred).values) {
        if (auto code = a.category_code(v)) c.allowed[static_cast<std::size_t>(*code)] = true;
      }
    }
    compiled.push_back(std::move(c));
  }
  std::vector<Index> keep;
  for (Index r = 0; r < ds.rows(); ++r) {
    bool ok = true;
    for (const auto& c : compiled) {
      const double v = ds.at(r, c.col);
      ok = c.interval ? (v >= c.lo && v <= c.hi) : c.allowed[static_cast<std::size_t>(v)];
      if (!ok) break;
    }
    if (ok) keep.push_back(r);
  }
  return keep;
}

Dataset apply_filter(const Dataset& ds, const FilterSpec& filter) {
  auto rows = filter_rows(ds, filter);
  return ds.select_rows(rows);
}

}  // namespace vizpriv
