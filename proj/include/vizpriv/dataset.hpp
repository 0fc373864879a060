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
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace vizpriv {

using Index = Eigen::Index;

enum class AttributeKind { kCategorical, kNumerical };

std::string_view to_string(AttributeKind kind);
AttributeKind attribute_kind_from_string(std::string_view text);

// One column of a table. Categorical domains are ordered and duplicate-free;
// cells store the position of the category in that order. Numerical domains
// are closed intervals.
struct Attribute {
  std::string name;
  AttributeKind kind = AttributeKind::kCategorical;
  std::vector<std::string> categories;
  double min = 0.0;
  double max = 0.0;

  static Attribute categorical(std::string name, std::vector<std::string> categories);
  static Attribute numerical(std::string name, double min, double max);

  bool is_numerical() const { return kind == AttributeKind::kNumerical; }
  bool is_categorical() const { return kind == AttributeKind::kCategorical; }
  std::optional<Index> category_code(std::string_view value) const;
  double width() const { return max - min; }

  // Throws std::invalid_argument when the domain invariants do not hold.
  void validate() const;

  friend bool operator==(const Attribute&, const Attribute&) = default;
};

using Schema = std::vector<Attribute>;

// Immutable n x d table. Numerical cells hold their value, categorical cells
// the category code as a double.
class Dataset {
 public:
  Dataset() = default;
  Dataset(Schema schema, Eigen::MatrixXd cells);

  const Schema& schema() const { return schema_; }
  const Eigen::MatrixXd& cells() const { return cells_; }
  Index rows() const { return cells_.rows(); }
  Index cols() const { return static_cast<Index>(schema_.size()); }

  double at(Index row, Index col) const { return cells_(row, col); }
  auto column(Index col) const { return cells_.col(col); }
  const Attribute& attribute(Index col) const { return schema_[static_cast<std::size_t>(col)]; }

  // Column index of a named attribute; throws NotFoundError.
  Index index_of(std::string_view name) const;
  std::optional<Index> find(std::string_view name) const;

  // Cell rendered as CSV text (category label or shortest round-trip number).
  std::string text(Index row, Index col) const;

  Dataset select_rows(std::span<const Index> rows) const;

  friend bool operator==(const Dataset& a, const Dataset& b) {
    return a.schema_ == b.schema_ && a.cells_.rows() == b.cells_.rows() &&
           a.cells_.cols() == b.cells_.cols() && a.cells_ == b.cells_;
  }

 private:
  Schema schema_;
  Eigen::MatrixXd cells_;
};

// Header plus string cells, before typing.
struct RawTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// A user-supplied column declaration. Missing domains are inferred.
struct ColumnSpec {
  std::string name;
  AttributeKind kind = AttributeKind::kCategorical;
  std::optional<std::vector<std::string>> categories;
  std::optional<std::pair<double, double>> range;
};
using SchemaDescriptor = std::vector<ColumnSpec>;

RawTable parse_csv_table(std::string_view text);
SchemaDescriptor infer_schema(const RawTable& table);
Dataset load_csv(std::string_view text,
                 const std::optional<SchemaDescriptor>& schema = std::nullopt);
std::string to_csv(const Dataset& ds);

// Shortest text that parses back to the same double.
std::string format_number(double value);
std::optional<double> parse_number(std::string_view text);

struct CategorySet {
  std::vector<std::string> values;
};
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};
using Predicate = std::variant<CategorySet, Interval>;

// Conjunction of per-attribute predicates.
struct FilterSpec {
  std::map<std::string, Predicate> predicates;
  bool empty() const { return predicates.empty(); }
};

void validate_filter(const Schema& schema, const FilterSpec& filter);
std::vector<Index> filter_rows(const Dataset& ds, const FilterSpec& filter);
Dataset apply_filter(const Dataset& ds, const FilterSpec& filter);

}  // namespace vizpriv
