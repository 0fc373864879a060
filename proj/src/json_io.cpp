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

#include "vizpriv/json_io.hpp"

#include <stdexcept>

#include "vizpriv/error.hpp"

namespace vizpriv {

namespace {

Index attribute_index(const std::vector<std::string>& names, const std::string& name) {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return static_cast<Index>(i);
  }
  throw ParseError("unknown attribute '" + name + "'");
}

Json matrix_to_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const Json& j) {
  const auto rows = static_cast<Index>(j.size());
  const Index cols = rows ? static_cast<Index>(j.at(0).size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    if (static_cast<Index>(j.at(r).size()) != cols) throw ParseError("ragged matrix");
    for (Index c = 0; c < cols; ++c) m(r, c) = j.at(r).at(c).get<double>();
  }
  return m;
}

Json vector_to_json(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

}  // namespace

Json schema_to_json(const Schema& schema) {
  Json out = Json::array();
  for (const auto& a : schema) {
    Json j;
    j["name"] = a.name;
    j["type"] = std::string(to_string(a.kind));
    if (a.is_categorical()) {
      j["domain"] = a.categories;
    } else {
      j["domain"] = Json::array({a.min, a.max});
    }
    out.push_back(std::move(j));
  }
  return out;
}

SchemaDescriptor schema_descriptor_from_json(const Json& j) {
  if (!j.is_array()) throw ParseError("schema descriptor must be a JSON list");
  SchemaDescriptor out;
  for (const auto& col : j) {
    ColumnSpec spec;
    spec.name = col.at("name").get<std::string>();
    spec.kind = attribute_kind_from_string(col.at("type").get<std::string>());
    if (col.contains("domain") && !col.at("domain").is_null()) {
      const Json& dom = col.at("domain");
      if (spec.kind == AttributeKind::kCategorical) {
        spec.categories = dom.get<std::vector<std::string>>();
      } else {
        if (!dom.is_array() || dom.size() != 2) throw ParseError("numerical domain must be [min, max]");
        spec.range = std::make_pair(dom.at(0).get<double>(), dom.at(1).get<double>());
      }
    }
    out.push_back(std::move(spec));
  }
  return out;
}

SchemaDescriptor descriptor_of(const Schema& schema) {
  SchemaDescriptor out;
  for (const auto& a : schema) {
    ColumnSpec c;
    c.name = a.name;
    c.kind = a.kind;
    if (a.is_categorical()) {
      c.categories = a.categories;
    } else {
      c.range = std::make_pair(a.min, a.max);
    }
    out.push_back(std::move(c));
  }
  return out;
}

Json attribute_summary(const Dataset& ds) {
  Json out;
  out["v"] = kPayloadVersion;
  out["rows"] = ds.rows();
  Json attrs = Json::array();
  for (Index c = 0; c < ds.cols(); ++c) {
    const Attribute& a = ds.attribute(c);
    Json j;
    j["name"] = a.name;
    j["type"] = std::string(to_string(a.kind));
    if (a.is_categorical()) {
      std::vector<Index> counts(a.categories.size(), 0);
      for (Index r = 0; r < ds.rows(); ++r) ++counts[static_cast<std::size_t>(ds.at(r, c))];
      j["domain"] = a.categories;
      j["counts"] = counts;
    } else {
      j["domain"] = Json::array({a.min, a.max});
      if (ds.rows() > 0) {
        j["mean"] = ds.column(c).mean();
      }
    }
    attrs.push_back(std::move(j));
  }
  out["attributes"] = std::move(attrs);
  return out;
}

FilterSpec filter_from_json(const Json& j) {
  FilterSpec f;
  const Json& preds = j.contains("filters") ? j.at("filters") : j;
  if (!preds.is_object()) throw ParseError("filter must be an object keyed by attribute");
  for (const auto& [name, p] : preds.items()) {
    if (p.contains("range")) {
      const Json& r = p.at("range");
      if (!r.is_array() || r.size() != 2) throw ParseError("range must be [lo, hi]");
      f.predicates[name] = Interval{r.at(0).get<double>(), r.at(1).get<double>()};
    } else if (p.contains("values")) {
      f.predicates[name] = CategorySet{p.at("values").get<std::vector<std::string>>()};
    } else {
      throw ParseError("predicate for '" + name + "' needs 'range' or 'values'");
    }
  }
  return f;
}

Json filter_to_json(const FilterSpec& f) {
  Json preds = Json::object();
  for (const auto& [name, p] : f.predicates) {
    if (const auto* iv = std::get_if<Interval>(&p)) {
      preds[name] = {{"range", Json::array({iv->lo, iv->hi})}};
    } else {
      preds[name] = {{"values", std::get<CategorySet>(p).values}};
    }
  }
  return {{"filters", preds}};
}

Json discretization_to_json(const Discretization& d) {
  Json j;
  j["attribute"] = d.attribute;
  j["type"] = std::string(to_string(d.kind));
  if (d.kind == AttributeKind::kCategorical) {
    j["labels"] = d.labels;
  } else {
    j["edges"] = d.edges;
  }
  return j;
}

Discretization discretization_from_json(const Json& j) {
  Discretization d;
  d.attribute = j.at("attribute").get<std::string>();
  d.kind = attribute_kind_from_string(j.at("type").get<std::string>());
  if (d.kind == AttributeKind::kCategorical) {
    d.labels = j.at("labels").get<std::vector<std::string>>();
  } else {
    d.edges = j.at("edges").get<std::vector<double>>();
  }
  return d;
}

ChartSpec chart_spec_from_json(const Json& j) {
  ChartSpec s;
  if (j.contains("id")) s.id = j.at("id").get<std::string>();
  s.type = chart_type_from_string(j.at("chart_type").get<std::string>());
  s.x = j.at("x").get<std::string>();
  if (j.contains("y") && !j.at("y").is_null()) s.y = j.at("y").get<std::string>();
  if (j.contains("color") && !j.at("color").is_null()) s.color = j.at("color").get<std::string>();
  if (j.contains("x_step") && !j.at("x_step").is_null()) {
    s.x_step = j.at("x_step").get<double>();
    if (!(*s.x_step > 0.0)) throw std::invalid_argument("x_step must be positive");
  }
  if (j.contains("aggregate")) s.aggregate = aggregate_from_string(j.at("aggregate").get<std::string>());
  return s;
}

Json chart_spec_to_json(const ChartSpec& s) {
  Json j;
  j["id"] = s.id;
  j["chart_type"] = std::string(to_string(s.type));
  j["x"] = s.x;
  j["y"] = s.y.empty() ? Json() : Json(s.y);
  j["color"] = s.color ? Json(*s.color) : Json();
  j["x_step"] = s.x_step ? Json(*s.x_step) : Json();
  j["aggregate"] = std::string(to_string(s.aggregate));
  return j;
}

Selection selection_from_json(const Json& j) {
  Selection s;
  s.kind = selection_kind_from_string(j.at("kind").get<std::string>());
  switch (s.kind) {
    case SelectionKind::kRegion:
      if (j.contains("rect")) {
        const Json& r = j.at("rect");
        s.rect = std::make_pair(Point2{r.at("x0").get<double>(), r.at("y0").get<double>()},
                                Point2{r.at("x1").get<double>(), r.at("y1").get<double>()});
      } else {
        for (const auto& v : j.at("polygon")) {
          if (!v.is_array() || v.size() != 2) throw ParseError("polygon vertices must be [x, y]");
          s.polygon.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
        }
      }
      break;
    case SelectionKind::kInterval:
      s.lo = j.at("lo").get<double>();
      s.hi = j.at("hi").get<double>();
      break;
    case SelectionKind::kBars:
      s.bars = j.at("bars").get<std::vector<std::string>>();
      break;
  }
  s.validate();
  return s;
}

Json selection_to_json(const Selection& s) {
  Json j;
  j["kind"] = std::string(to_string(s.kind));
  switch (s.kind) {
    case SelectionKind::kRegion:
      if (s.rect) {
        j["rect"] = {{"x0", s.rect->first.x}, {"y0", s.rect->first.y},
                     {"x1", s.rect->second.x}, {"y1", s.rect->second.y}};
      } else {
        Json poly = Json::array();
        for (const auto& p : s.polygon) poly.push_back(Json::array({p.x, p.y}));
        j["polygon"] = std::move(poly);
      }
      break;
    case SelectionKind::kInterval:
      j["lo"] = s.lo;
      j["hi"] = s.hi;
      break;
    case SelectionKind::kBars:
      j["bars"] = s.bars;
      break;
  }
  return j;
}

PatternConstraint pattern_from_json(const Json& j) {
  PatternConstraint p;
  p.id = j.at("id").get<std::string>();
  p.type = pattern_type_from_string(j.at("type").get<std::string>());
  p.chart = j.at("chart").get<std::string>();
  p.selection = selection_from_json(j.at("selection"));
  p.weight = j.at("weight").get<double>();
  if (j.contains("records")) p.records = j.at("records").get<std::vector<Index>>();
  return p;
}

Json pattern_to_json(const PatternConstraint& p) {
  Json j;
  j["id"] = p.id;
  j["type"] = std::string(to_string(p.type));
  j["chart"] = p.chart;
  j["selection"] = selection_to_json(p.selection);
  j["weight"] = p.weight;
  j["records"] = p.records;
  return j;
}

Json chart_data_to_json(const ChartData& data, const Dataset& ds) {
  const ChartSpec& spec = data.spec;
  Json j;
  j["v"] = kPayloadVersion;
  j["chart"] = chart_spec_to_json(spec);
  Json values = Json::array();
  Json enc;
  auto field_type = [&](const std::string& name) {
    return ds.attribute(ds.index_of(name)).is_numerical() ? "quantitative" : "nominal";
  };
  if (spec.type == ChartType::kScatter) {
    j["mark"] = "point";
    enc["x"] = {{"field", spec.x}, {"type", "quantitative"}};
    enc["y"] = {{"field", spec.y}, {"type", "quantitative"}};
    if (spec.color) enc["color"] = {{"field", *spec.color}, {"type", "nominal"}};
    for (const auto& p : data.points) {
      Json v;
      v[spec.x] = p.x;
      v[spec.y] = p.y;
      if (p.color) v[*spec.color] = *p.color;
      v["row"] = p.row;
      values.push_back(std::move(v));
    }
  } else {
    j["mark"] = spec.type == ChartType::kBar ? "bar" : "line";
    const std::string value_field =
        spec.aggregate == Aggregate::kCount ? "count" : std::string(to_string(spec.aggregate)) + "_" + spec.y;
    const bool binned = spec.x_step.has_value();
    enc["x"] = {{"field", binned ? "bin" : spec.x},
                {"type", spec.type == ChartType::kLine && !binned ? field_type(spec.x) : "ordinal"}};
    enc["y"] = {{"field", value_field}, {"type", "quantitative"}};
    for (const auto& g : data.groups) {
      Json v;
      v[binned ? "bin" : spec.x] = g.key;
      v["x"] = g.x;
      if (binned) v["x_hi"] = g.x_hi;
      v[value_field] = g.value;
      v["n"] = g.rows.size();
      values.push_back(std::move(v));
    }
  }
  j["encoding"] = std::move(enc);
  j["data"] = {{"values", std::move(values)}};
  return j;
}

Json network_to_json(const BayesianNetwork& net) {
  Json j;
  j["v"] = kPayloadVersion;
  Json order = Json::array();
  Json pairs = Json::array();
  for (const auto& p : net.pairs) {
    order.push_back(net.attributes[static_cast<std::size_t>(p.child)]);
    Json parents = Json::array();
    for (Index q : p.parents) parents.push_back(net.attributes[static_cast<std::size_t>(q)]);
    pairs.push_back({{"child", net.attributes[static_cast<std::size_t>(p.child)]}, {"parents", parents}});
  }
  j["attributes"] = net.attributes;
  j["order"] = std::move(order);
  j["pairs"] = std::move(pairs);
  j["k"] = net.degree;
  return j;
}

BayesianNetwork network_from_json(const Json& j) {
  BayesianNetwork net;
  net.degree = j.at("k").get<int>();
  if (j.contains("attributes")) {
    net.attributes = j.at("attributes").get<std::vector<std::string>>();
  } else {
    net.attributes = j.at("order").get<std::vector<std::string>>();
  }
  for (const auto& p : j.at("pairs")) {
    APPair pair;
    pair.child = attribute_index(net.attributes, p.at("child").get<std::string>());
    for (const auto& name : p.at("parents")) {
      pair.parents.push_back(attribute_index(net.attributes, name.get<std::string>()));
    }
    std::sort(pair.parents.begin(), pair.parents.end());
    net.pairs.push_back(std::move(pair));
  }
  net.validate();
  return net;
}

Json marginals_to_json(const std::vector<NoisyMarginal>& marginals, const BayesianNetwork& net) {
  Json j;
  j["v"] = kPayloadVersion;
  Json list = Json::array();
  for (const auto& m : marginals) {
    Json e;
    e["child"] = net.attributes[static_cast<std::size_t>(m.pair.child)];
    Json parents = Json::array();
    for (Index q : m.pair.parents) parents.push_back(net.attributes[static_cast<std::size_t>(q)]);
    e["parents"] = std::move(parents);
    e["noise_scale"] = m.noise_scale;
    e["derived"] = m.derived;
    e["uniform_fallback"] = m.uniform_fallback;
    e["mass"] = matrix_to_json(m.mass);
    list.push_back(std::move(e));
  }
  j["marginals"] = std::move(list);
  return j;
}

std::vector<NoisyMarginal> marginals_from_json(const Json& j, const BayesianNetwork& net) {
  std::vector<NoisyMarginal> out;
  for (const auto& e : j.at("marginals")) {
    NoisyMarginal m;
    m.pair.child = attribute_index(net.attributes, e.at("child").get<std::string>());
    for (const auto& name : e.at("parents")) {
      m.pair.parents.push_back(attribute_index(net.attributes, name.get<std::string>()));
    }
    m.noise_scale = e.at("noise_scale").get<double>();
    m.derived = e.at("derived").get<bool>();
    m.uniform_fallback = e.at("uniform_fallback").get<bool>();
    m.mass = matrix_from_json(e.at("mass"));
    out.push_back(std::move(m));
  }
  return out;
}

Json budget_to_json(const BudgetSpec& b) {
  return {{"epsilon_total", b.epsilon_total},
          {"epsilon_structure", b.epsilon_structure},
          {"epsilon_marginals", b.epsilon_marginals}};
}

BudgetSpec budget_from_json(const Json& j) {
  BudgetSpec b;
  b.epsilon_total = j.at("epsilon_total").get<double>();
  b.epsilon_structure = j.at("epsilon_structure").get<double>();
  b.epsilon_marginals = j.at("epsilon_marginals").get<double>();
  return b;
}

Json scheme_to_json(const Scheme& s) {
  Json j;
  j["v"] = kPayloadVersion;
  j["id"] = s.id;
  j["budget"] = budget_to_json(s.budget);
  j["consumed"] = {{"structure", s.consumed_structure},
                   {"marginals", s.consumed_marginals},
                   {"total", s.consumed_structure + s.consumed_marginals},
                   {"structure_draws", s.structure_draws}};
  Json weights = Json::object();
  for (const auto& [id, w] : s.weights) weights[id] = w;
  j["weights"] = std::move(weights);
  j["k"] = s.degree;
  j["seed"] = s.seed;
  j["n_out"] = s.synthetic.rows();
  j["private"] = s.is_private();
  j["oracle"] = s.oracle;
  j["baseline"] = s.baseline;
  if (!s.created_at.empty()) j["created_at"] = s.created_at;
  Json discs = Json::array();
  for (const auto& d : s.discretizations) discs.push_back(discretization_to_json(d));
  j["discretizations"] = std::move(discs);
  j["log"] = s.log;
  return j;
}

Scheme scheme_from_parts(const Json& sj, const Json& nj, const Json& mj,
                         std::string_view synthetic_csv, const Schema& schema) {
  Scheme s;
  s.id = sj.at("id").get<std::string>();
  s.budget = budget_from_json(sj.at("budget"));
  s.consumed_structure = sj.at("consumed").at("structure").get<double>();
  s.consumed_marginals = sj.at("consumed").at("marginals").get<double>();
  s.structure_draws = sj.at("consumed").at("structure_draws").get<int>();
  for (const auto& [id, w] : sj.at("weights").items()) s.weights[id] = w.get<double>();
  s.degree = sj.at("k").get<int>();
  s.seed = sj.at("seed").get<std::uint64_t>();
  s.oracle = sj.at("oracle").get<bool>();
  s.baseline = sj.at("baseline").get<bool>();
  if (sj.contains("created_at")) s.created_at = sj.at("created_at").get<std::string>();
  for (const auto& d : sj.at("discretizations")) s.discretizations.push_back(discretization_from_json(d));
  s.log = sj.at("log").get<std::vector<std::string>>();
  s.network = network_from_json(nj);
  s.marginals = marginals_from_json(mj, s.network);
  s.synthetic = load_csv(synthetic_csv, descriptor_of(schema));
  return s;
}

Json metrics_to_json(const MetricsReport& r) {
  Json j;
  j["v"] = kPayloadVersion;
  j["scheme"] = r.scheme;
  j["epsilon"] = r.epsilon;
  j["private"] = r.is_private;
  j["ks_convention"] = r.ks_convention;
  j["summary"] = {{"mean_ks_fidelity", r.mean_ks_fidelity}, {"mean_cs_pvalue", r.mean_cs_pvalue}};
  Json fid = Json::array();
  for (const auto& f : r.fidelity) {
    fid.push_back({{"attribute", f.attribute}, {"test", f.test}, {"statistic", f.statistic}, {"score", f.score}});
  }
  j["fidelity"] = std::move(fid);
  Json pats = Json::array();
  for (const auto& p : r.patterns) {
    Json e{{"pattern", p.pattern}, {"metric", p.metric}, {"before", p.before},
           {"after", p.after}, {"delta", p.delta}};
    if (p.flag) e["flag"] = *p.flag;
    pats.push_back(std::move(e));
  }
  j["patterns"] = std::move(pats);
  j["warnings"] = r.warnings;
  return j;
}

MetricsReport metrics_from_json(const Json& j) {
  MetricsReport r;
  r.scheme = j.at("scheme").get<std::string>();
  r.epsilon = j.at("epsilon").get<double>();
  r.is_private = j.at("private").get<bool>();
  r.ks_convention = j.at("ks_convention").get<std::string>();
  r.mean_ks_fidelity = j.at("summary").at("mean_ks_fidelity").get<double>();
  r.mean_cs_pvalue = j.at("summary").at("mean_cs_pvalue").get<double>();
  for (const auto& f : j.at("fidelity")) {
    r.fidelity.push_back({f.at("attribute").get<std::string>(), f.at("test").get<std::string>(),
                          f.at("statistic").get<double>(), f.at("score").get<double>()});
  }
  for (const auto& p : j.at("patterns")) {
    PatternMetric m{p.at("pattern").get<std::string>(), p.at("metric").get<std::string>(),
                    p.at("before").get<double>(), p.at("after").get<double>(),
                    p.at("delta").get<double>(), std::nullopt};
    if (p.contains("flag")) m.flag = p.at("flag").get<std::string>();
    r.patterns.push_back(std::move(m));
  }
  r.warnings = j.at("warnings").get<std::vector<std::string>>();
  return r;
}

std::string metrics_to_csv(const MetricsReport& r) {
  std::string out = "scheme,epsilon,private,scope,metric,before,after,delta,flag\n";
  auto line = [&](const std::string& scope, const std::string& metric, double before, double after,
                  double delta, const std::string& flag) {
    out += r.scheme + "," + format_number(r.epsilon) + "," + (r.is_private ? "true" : "false") + "," +
           scope + "," + metric + "," + format_number(before) + "," + format_number(after) + "," +
           format_number(delta) + "," + flag + "\n";
  };
  for (const auto& f : r.fidelity) {
    line(f.attribute, f.test == "ks" ? "ks_fidelity" : "cs_pvalue", 1.0, f.score, f.score - 1.0, "");
  }
  for (const auto& p : r.patterns) line(p.pattern, p.metric, p.before, p.after, p.delta, p.flag.value_or(""));
  return out;
}

Json relationship_to_json(const RelationshipGraph& g) {
  Json j;
  j["v"] = kPayloadVersion;
  Json nodes = Json::array();
  for (const auto& n : g.nodes) {
    nodes.push_back({{"pattern", n.pattern}, {"type", std::string(to_string(n.type))},
                     {"records", n.records}, {"weight", n.weight}, {"x", n.x}, {"y", n.y}});
  }
  Json edges = Json::array();
  for (const auto& e : g.edges) {
    edges.push_back({{"source", e.a}, {"target", e.b}, {"sign", e.positive() ? "positive" : "negative"},
                     {"magnitude", e.magnitude()}, {"score", e.score}});
  }
  j["nodes"] = std::move(nodes);
  j["edges"] = std::move(edges);
  return j;
}

Json flow_to_json(const FlowData& f) {
  Json j;
  j["v"] = kPayloadVersion;
  j["columns"] = f.columns;
  Json bins = Json::array();
  for (const auto& col : f.bins) {
    Json c = Json::array();
    for (const auto& b : col) c.push_back({{"label", b.label}, {"count", b.count}, {"highlighted", b.highlighted}});
    bins.push_back(std::move(c));
  }
  j["bins"] = std::move(bins);
  Json links = Json::array();
  for (const auto& l : f.links) {
    links.push_back({{"column", l.column}, {"source", l.source}, {"target", l.target},
                     {"count", l.count}, {"highlighted", l.highlighted}});
  }
  j["links"] = std::move(links);
  j["highlight"] = f.highlight ? Json(*f.highlight) : Json();
  return j;
}

Json layout_to_json(const NetworkLayout& l) {
  Json j;
  j["v"] = kPayloadVersion;
  Json nodes = Json::array();
  for (const auto& n : l.nodes) {
    nodes.push_back({{"attribute", n.attribute}, {"layer", n.layer}, {"slot", n.slot}, {"y", n.y}});
  }
  Json edges = Json::array();
  for (const auto& [from, to] : l.edges) edges.push_back({{"parent", from}, {"child", to}});
  j["nodes"] = std::move(nodes);
  j["edges"] = std::move(edges);
  return j;
}

Json distribution_to_json(const NodeDistribution& d) {
  Json j;
  j["v"] = kPayloadVersion;
  j["attribute"] = d.attribute;
  j["type"] = std::string(to_string(d.kind));
  if (d.kind == AttributeKind::kCategorical) {
    j["labels"] = d.labels;
  } else {
    j["grid"] = vector_to_json(d.grid);
    j["bandwidth"] = {{"before", d.bandwidth_before}, {"after", d.bandwidth_after}};
  }
  j["before"] = vector_to_json(d.before);
  j["after"] = vector_to_json(d.after);
  return j;
}

}  // namespace vizpriv
