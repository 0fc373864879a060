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

#include "vizpriv/run_config.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include "vizpriv/error.hpp"

namespace vizpriv {

namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + p.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + p.string() + "'");
}

template <typename T>
T field(const Json& j, const char* name) {
  try {
    return j.at(name).get<T>();
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("invalid field '") + name + "': " + e.what());
  }
}

}  // namespace

void RunConfig::validate() const {
  if (input.empty()) throw ConfigError("missing field 'input'");
  if (epsilons.empty() && !oracle) throw ConfigError("missing field 'epsilon'");
  for (double e : epsilons) {
    if (!(e > 0.0) || !std::isfinite(e)) throw ConfigError("field 'epsilon' must be positive");
  }
  if (!(structure_fraction > 0.0 && structure_fraction < 1.0)) {
    throw ConfigError("field 'structure_fraction' must lie in (0, 1)");
  }
  if (k < 0) throw ConfigError("field 'k' must be >= 0");
  if (n_out && *n_out < 1) throw ConfigError("field 'n_out' must be >= 1");
  if (repeats < 1) throw ConfigError("field 'repeats' must be >= 1");
  if (max_bins < 1) throw ConfigError("field 'max_bins' must be >= 1");
  for (double w : weights) {
    if (!(w >= 0.0)) throw ConfigError("field 'weights' must be non-negative");
  }
  for (const auto& p : patterns) {
    if (!(p.weight >= 0.0)) throw ConfigError("pattern weight must be non-negative");
  }
}

RunConfig parse_run_config(const Json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig c;
  auto resolve = [&](const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  };
  if (j.contains("input")) c.input = resolve(field<std::string>(j, "input"));
  if (j.contains("schema") && !j.at("schema").is_null()) c.schema = resolve(field<std::string>(j, "schema"));
  if (j.contains("epsilon")) {
    if (j.at("epsilon").is_array()) {
      c.epsilons = field<std::vector<double>>(j, "epsilon");
    } else {
      c.epsilons = {field<double>(j, "epsilon")};
    }
  }
  if (j.contains("structure_fraction")) c.structure_fraction = field<double>(j, "structure_fraction");
  if (j.contains("k")) c.k = field<int>(j, "k");
  if (j.contains("n_out") && !j.at("n_out").is_null()) c.n_out = field<Index>(j, "n_out");
  if (j.contains("seed")) c.seed = field<std::uint64_t>(j, "seed");
  if (j.contains("repeats")) c.repeats = field<int>(j, "repeats");
  if (j.contains("weights")) c.weights = field<std::vector<double>>(j, "weights");
  if (j.contains("max_bins")) c.max_bins = field<int>(j, "max_bins");
  if (j.contains("oracle")) c.oracle = field<bool>(j, "oracle");
  if (j.contains("baseline")) c.baseline = field<bool>(j, "baseline");
  try {
    if (j.contains("charts")) {
      for (const auto& cj : j.at("charts")) c.charts.push_back(chart_spec_from_json(cj));
    }
    if (j.contains("patterns")) {
      for (const auto& pj : j.at("patterns")) {
        c.patterns.push_back({pj.at("chart").get<std::string>(), selection_from_json(pj.at("selection")),
                              pj.value("weight", 0.0)});
      }
    }
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("invalid chart or pattern: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid chart or pattern: ") + e.what());
  } catch (const ParseError& e) {
    throw ConfigError(std::string("invalid chart or pattern: ") + e.what());
  }
  return c;
}

RunConfig load_run_config(const fs::path& path) {
  Json j;
  try {
    j = Json::parse(read_file(path));
  } catch (const Json::parse_error& e) {
    throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return parse_run_config(j, path.parent_path());
}

Workload make_workload(Dataset data, const std::vector<ChartSpec>& charts,
                       const std::vector<PatternSpec>& patterns, int max_bins) {
  Workload w;
  w.data = std::move(data);
  for (std::size_t i = 0; i < charts.size(); ++i) {
    ChartSpec spec = charts[i];
    if (spec.id.empty()) spec.id = "C" + std::to_string(i);
    spec.validate(w.data.schema());
    if (!w.charts.emplace(spec.id, spec).second) {
      throw ConfigError("duplicate chart id '" + spec.id + "'");
    }
  }
  PatternCatalog catalog;
  for (const auto& p : patterns) {
    auto it = w.charts.find(p.chart);
    if (it == w.charts.end()) throw ConfigError("pattern refers to unknown chart '" + p.chart + "'");
    catalog.add(w.data, it->second, p.selection, p.weight);
  }
  w.patterns = catalog.patterns();
  w.discretizations = discretize_all(w.data, max_bins);
  return w;
}

Workload load_workload(const RunConfig& config) {
  std::optional<SchemaDescriptor> schema;
  if (config.schema) {
    try {
      schema = schema_descriptor_from_json(Json::parse(read_file(*config.schema)));
    } catch (const Json::exception& e) {
      throw ConfigError("schema '" + config.schema->string() + "' is invalid: " + e.what());
    }
  }
  Dataset ds = load_csv(read_file(config.input), schema);
  return make_workload(std::move(ds), config.charts, config.patterns, config.max_bins);
}

RunOutput run_once(const Workload& w, const RunConfig& config, double epsilon,
                   const std::map<std::string, double>& weight_overrides, std::uint64_t seed) {
  SchemeOptions o;
  if (!config.oracle || epsilon > 0.0) o.budget = split_budget(epsilon, config.structure_fraction);
  o.degree = config.k;
  o.n_out = config.n_out;
  o.seed = seed;
  o.max_bins = config.max_bins;
  o.oracle = config.oracle;
  o.baseline = config.baseline;
  RunOutput out;
  out.scheme = generate_scheme(w.data, w.patterns, weight_overrides, o, &w.discretizations);
  out.scheme.id = "run-" + std::to_string(seed);
  out.metrics = evaluate_scheme(w.data, out.scheme, w.patterns, w.charts);
  return out;
}

void write_run_output(const RunOutput& out, const fs::path& dir) {
  fs::create_directories(dir);
  write_file(dir / "synthetic.csv", to_csv(out.scheme.synthetic));
  write_file(dir / "scheme.json", scheme_to_json(out.scheme).dump(2) + "\n");
  write_file(dir / "network.json", network_to_json(out.scheme.network).dump(2) + "\n");
  write_file(dir / "marginals.json",
             marginals_to_json(out.scheme.marginals, out.scheme.network).dump(2) + "\n");
  write_file(dir / "metrics.json", metrics_to_json(out.metrics).dump(2) + "\n");
}

std::map<std::string, double> flatten_metrics(const MetricsReport& r) {
  std::map<std::string, double> m;
  m["mean_ks_fidelity"] = r.mean_ks_fidelity;
  m["mean_cs_pvalue"] = r.mean_cs_pvalue;
  for (const auto& p : r.patterns) m[p.pattern + "." + p.metric] = p.after;
  return m;
}

Summary summarize(std::vector<double> values) {
  Summary s;
  const auto n = values.size();
  if (n == 0) return s;
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(n);
  if (n < 2) return s;
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.sd = std::sqrt(ss / static_cast<double>(n - 1));
  const boost::math::students_t t(static_cast<double>(n - 1));
  s.ci95 = boost::math::quantile(t, 0.975) * s.sd / std::sqrt(static_cast<double>(n));
  return s;
}

std::vector<SweepRow> sweep(const Workload& w, const RunConfig& config, int jobs) {
  struct Condition {
    double epsilon;
    std::optional<double> weight;
  };
  std::vector<Condition> conditions;
  const std::vector<double> eps = config.epsilons.empty() ? std::vector<double>{0.0} : config.epsilons;
  for (double e : eps) {
    if (config.weights.empty()) {
      conditions.push_back({e, std::nullopt});
    } else {
      for (double wt : config.weights) conditions.push_back({e, wt});
    }
  }
  const std::size_t reps = static_cast<std::size_t>(config.repeats);
  const std::size_t total = conditions.size() * reps;
  std::vector<std::map<std::string, double>> results(total);
  std::vector<std::exception_ptr> errors(total);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < total; t = next++) {
      const Condition& c = conditions[t / reps];
      const std::uint64_t seed = config.seed + t % reps;
      try {
        std::map<std::string, double> overrides;
        if (c.weight) {
          for (const auto& p : w.patterns) overrides[p.id] = *c.weight;
        }
        results[t] = flatten_metrics(run_once(w, config, c.epsilon, overrides, seed).metrics);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    }
  };
  const int n_threads = std::max(1, std::min<int>(jobs, static_cast<int>(total)));
  std::vector<std::thread> pool;
  for (int i = 1; i < n_threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<SweepRow> rows;
  for (std::size_t ci = 0; ci < conditions.size(); ++ci) {
    std::map<std::string, std::vector<double>> by_metric;
    for (std::size_t r = 0; r < reps; ++r) {
      for (const auto& [name, v] : results[ci * reps + r]) by_metric[name].push_back(v);
    }
    for (auto& [name, values] : by_metric) {
      const int n = static_cast<int>(values.size());
      const Summary s = summarize(std::move(values));
      rows.push_back({conditions[ci].epsilon, conditions[ci].weight, name, s.mean, s.sd, s.ci95, n});
    }
  }
  return rows;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
  std::string out = "epsilon,weight,metric,mean,sd,ci95,n_runs\n";
  for (const auto& r : rows) {
    out += format_number(r.epsilon) + "," + (r.weight ? format_number(*r.weight) : "") + "," + r.metric +
           "," + format_number(r.mean) + "," + format_number(r.sd) + "," +
           (r.ci95 ? format_number(*r.ci95) : "") + "," + std::to_string(r.n_runs) + "\n";
  }
  return out;
}

}  // namespace vizpriv
