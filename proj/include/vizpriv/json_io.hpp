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

#include <json.hpp>

#include <string>
#include <vector>

#include "vizpriv/analytics.hpp"
#include "vizpriv/bayes_net.hpp"
#include "vizpriv/charts.hpp"
#include "vizpriv/dataset.hpp"
#include "vizpriv/discretize.hpp"
#include "vizpriv/engine.hpp"
#include "vizpriv/metrics.hpp"

// JSON shapes shared by the service, the CLI and on-disk state. Every
// top-level payload carries "v": kPayloadVersion.
namespace vizpriv {

using Json = nlohmann::ordered_json;

inline constexpr int kPayloadVersion = 1;

Json schema_to_json(const Schema& schema);
SchemaDescriptor schema_descriptor_from_json(const Json& j);
SchemaDescriptor descriptor_of(const Schema& schema);
Json attribute_summary(const Dataset& ds);

FilterSpec filter_from_json(const Json& j);
Json filter_to_json(const FilterSpec& f);

Json discretization_to_json(const Discretization& d);
Discretization discretization_from_json(const Json& j);

ChartSpec chart_spec_from_json(const Json& j);
Json chart_spec_to_json(const ChartSpec& s);
Selection selection_from_json(const Json& j);
Json selection_to_json(const Selection& s);
PatternConstraint pattern_from_json(const Json& j);
Json pattern_to_json(const PatternConstraint& p);

// Declarative chart description: marks, encodings and inline data values.
Json chart_data_to_json(const ChartData& data, const Dataset& ds);

Json network_to_json(const BayesianNetwork& net);
BayesianNetwork network_from_json(const Json& j);

Json marginals_to_json(const std::vector<NoisyMarginal>& marginals, const BayesianNetwork& net);
std::vector<NoisyMarginal> marginals_from_json(const Json& j, const BayesianNetwork& net);

Json budget_to_json(const BudgetSpec& b);
BudgetSpec budget_from_json(const Json& j);

// scheme.json: everything except network, marginals and synthetic rows.
Json scheme_to_json(const Scheme& s);
// Rebuilds a Scheme from its four serialized parts.
Scheme scheme_from_parts(const Json& scheme_json, const Json& network_json,
                         const Json& marginals_json, std::string_view synthetic_csv,
                         const Schema& schema);

Json metrics_to_json(const MetricsReport& r);
MetricsReport metrics_from_json(const Json& j);
// Flat ranking-list export: one line per scheme-level or pattern metric.
std::string metrics_to_csv(const MetricsReport& r);

Json relationship_to_json(const RelationshipGraph& g);
Json flow_to_json(const FlowData& f);
Json layout_to_json(const NetworkLayout& l);
Json distribution_to_json(const NodeDistribution& d);

}  // namespace vizpriv
