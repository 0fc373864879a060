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

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vizpriv/charts.hpp"
#include "vizpriv/dataset.hpp"
#include "vizpriv/discretize.hpp"
#include "vizpriv/engine.hpp"
#include "vizpriv/json_io.hpp"
#include "vizpriv/metrics.hpp"

namespace vizpriv {

// Invalid or incomplete run configuration (CLI exit code 1).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PatternSpec {
  std::string chart;
  Selection selection;
  double weight = 0.0;
};

// Headless run description. Selections use the same JSON shape as the API.
struct RunConfig {
  std::filesystem::path input;
  std::optional<std::filesystem::path> schema;
  std::vector<ChartSpec> charts;
  std::vector<PatternSpec> patterns;
  std::vector<double> epsilons;
  double structure_fraction = kDefaultStructureFraction;
  int k = kDefaultDegree;
  std::optional<Index> n_out;
  std::uint64_t seed = 0;
  int repeats = 1;
  // Sweep grid: every pattern gets the same weight per condition. Empty means
  // the configured pattern weights form the only condition.
  std::vector<double> weights;
  int max_bins = kDefaultMaxBins;
  bool oracle = false;
  bool baseline = false;

  // Throws ConfigError naming the offending field.
  void validate() const;
};

// Relative paths resolve against base_dir.
RunConfig parse_run_config(const Json& j, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

// Dataset, charts and resolved patterns shared by every run of a config.
struct Workload {
  Dataset data;
  std::map<std::string, ChartSpec> charts;
  std::vector<PatternConstraint> patterns;
  std::vector<Discretization> discretizations;
};

Workload load_workload(const RunConfig& config);
Workload make_workload(Dataset data, const std::vector<ChartSpec>& charts,
                       const std::vector<PatternSpec>& patterns, int max_bins = kDefaultMaxBins);

struct RunOutput {
  Scheme scheme;
  MetricsReport metrics;
};

RunOutput run_once(const Workload& w, const RunConfig& config, double epsilon,
                   const std::map<std::string, double>& weight_overrides, std::uint64_t seed);

// synthetic.csv, scheme.json, network.json, marginals.json, metrics.json.
void write_run_output(const RunOutput& out, const std::filesystem::path& dir);

// Scalar view of a report: "<pattern>.<metric>" -> after, plus the scheme
// level fidelity means.
std::map<std::string, double> flatten_metrics(const MetricsReport& r);

struct SweepRow {
  double epsilon = 0.0;
  std::optional<double> weight;
  std::string metric;
  double mean = 0.0;
  double sd = 0.0;
  std::optional<double> ci95;  // half-width, t-distribution
  int n_runs = 0;
};

struct Summary {
  double mean = 0.0;
  double sd = 0.0;
  std::optional<double> ci95;
};
// Order-independent: values are sorted before accumulation.
Summary summarize(std::vector<double> values);

// Replicate r of every condition uses seed + r, so conditions are paired.
std::vector<SweepRow> sweep(const Workload& w, const RunConfig& config, int jobs);
std::string sweep_to_csv(const std::vector<SweepRow>& rows);

}  // namespace vizpriv
