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

#include "vizpriv/service.hpp"

#include <httplib.h>
#include <sys/stat.h>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

#include "vizpriv/analytics.hpp"
#include "vizpriv/archive.hpp"
#include "vizpriv/error.hpp"

namespace vizpriv {

namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ParseError("cannot read '" + p.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Write-then-rename so a crash never leaves a half-written file behind.
void write_file(const fs::path& p, const std::string& text) {
  const fs::path tmp = p.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << text;
    if (!out.flush()) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, p);
}

Json parse_json_file(const fs::path& p) {
  try {
    return Json::parse(read_file(p));
  } catch (const Json::parse_error& e) {
    throw ParseError("corrupt state file '" + p.string() + "': " + e.what());
  }
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Body references to unknown attributes or charts are semantic errors, not
// unknown path ids.
template <typename F>
auto semantic(F&& f) {
  try {
    return f();
  } catch (const NotFoundError& e) {
    throw ContractError(e.what());
  }
}

Json public_pattern(const PatternConstraint& p) {
  Json j = pattern_to_json(p);
  j.erase("records");
  j["size"] = p.records.size();
  return j;
}

void rebuild_view(SessionState& s) {
  if (!s.source) return;
  Dataset data = apply_filter(*s.source, s.filter);
  if (data.rows() == 0) throw ContractError("filter leaves no rows");
  std::vector<Discretization> discs = discretize_all(data, s.max_k);
  PatternCatalog patterns = s.patterns;
  patterns.reresolve(data, s.charts);
  s.data = std::move(data);
  s.discretizations = std::move(discs);
  s.patterns = std::move(patterns);
}

const SchemeEntry& completed(const SessionState& s, std::string_view id) {
  const SchemeEntry& e = s.scheme(id);
  if (e.status != SchemeStatus::kComplete) {
    throw ConflictError("scheme " + e.id + " is " + std::string(to_string(e.status)));
  }
  return e;
}

const SchemeEntry& latest_or(const SessionState& s, const std::optional<std::string>& id) {
  if (id) return completed(s, *id);
  for (auto it = s.schemes.rbegin(); it != s.schemes.rend(); ++it) {
    if (it->status == SchemeStatus::kComplete) return *it;
  }
  throw NotFoundError("no completed scheme");
}

double number_field(const Json& body, const char* name) {
  const Json& v = body.at(name);
  if (!v.is_number()) throw std::invalid_argument(std::string("'") + name + "' must be a number");
  return v.get<double>();
}

}  // namespace

std::string_view to_string(SchemeStatus s) {
  switch (s) {
    case SchemeStatus::kRunning: return "running";
    case SchemeStatus::kComplete: return "complete";
    case SchemeStatus::kFailed: return "failed";
  }
  return "failed";
}

SchemeStatus scheme_status_from_string(std::string_view s) {
  if (s == "running") return SchemeStatus::kRunning;
  if (s == "complete") return SchemeStatus::kComplete;
  if (s == "failed") return SchemeStatus::kFailed;
  throw ParseError("unknown scheme status '" + std::string(s) + "'");
}

ServiceConfig ServiceConfig::from_env() {
  ServiceConfig c;
  if (const char* listen = std::getenv("VIZPRIV_LISTEN"); listen && *listen) {
    const std::string v(listen);
    const auto colon = v.rfind(':');
    if (colon == std::string::npos) throw std::invalid_argument("VIZPRIV_LISTEN must be host:port");
    c.host = v.substr(0, colon);
    c.port = std::stoi(v.substr(colon + 1));
  }
  if (const char* dir = std::getenv("VIZPRIV_STATE_DIR"); dir && *dir) c.state_dir = fs::path(dir);
  if (const char* k = std::getenv("VIZPRIV_MAX_K"); k && *k) c.max_k = std::stoi(k);
  if (const char* d = std::getenv("VIZPRIV_DEGREE"); d && *d) c.degree = std::stoi(d);
  return c;
}

const SchemeEntry& SessionState::scheme(std::string_view sid) const {
  for (const auto& e : schemes) {
    if (e.id == sid) return e;
  }
  throw NotFoundError("unknown scheme '" + std::string(sid) + "'");
}

const ChartSpec& SessionState::chart(std::string_view cid) const {
  auto it = charts.find(std::string(cid));
  if (it == charts.end()) throw NotFoundError("unknown chart '" + std::string(cid) + "'");
  return it->second;
}

const Dataset& SessionState::dataset() const {
  if (!source) throw ContractError("session has no dataset");
  return data;
}

Json session_to_json(const SessionState& s) {
  Json j;
  j["v"] = kPayloadVersion;
  j["id"] = s.id;
  j["settings"] = {{"max_k", s.max_k}, {"degree", s.degree}, {"seed", s.seed}};
  j["schema"] = s.source ? schema_to_json(s.source->schema()) : Json();
  j["filter"] = filter_to_json(s.filter);
  Json discs = Json::array();
  for (const auto& d : s.discretizations) discs.push_back(discretization_to_json(d));
  j["discretizations"] = std::move(discs);
  Json charts = Json::array();
  for (const auto& [id, c] : s.charts) charts.push_back(chart_spec_to_json(c));
  j["charts"] = std::move(charts);
  j["next_chart"] = s.next_chart;
  Json patterns = Json::array();
  for (const auto& p : s.patterns.patterns()) patterns.push_back(pattern_to_json(p));
  j["patterns"] = std::move(patterns);
  j["next_pattern"] = s.patterns.next_id();
  Json schemes = Json::array();
  for (const auto& e : s.schemes) {
    Json sj{{"id", e.id}, {"status", std::string(to_string(e.status))}, {"request", e.request}};
    if (!e.error.empty()) sj["error"] = e.error;
    schemes.push_back(std::move(sj));
  }
  j["schemes"] = std::move(schemes);
  j["next_scheme"] = s.next_scheme;
  return j;
}

void persist_session(const SessionState& s, const fs::path& state_dir) {
  const fs::path dir = state_dir / s.id;
  fs::create_directories(dir / "schemes");
  if (s.source) write_file(dir / "source.csv", to_csv(*s.source));
  for (const auto& e : s.schemes) {
    if (e.status != SchemeStatus::kComplete) continue;
    const fs::path sd = dir / "schemes" / e.id;
    if (fs::exists(sd / "metrics.json")) continue;  // complete schemes never change
    fs::create_directories(sd);
    write_file(sd / "scheme.json", scheme_to_json(*e.scheme).dump(2) + "\n");
    write_file(sd / "network.json", network_to_json(e.scheme->network).dump(2) + "\n");
    write_file(sd / "marginals.json",
               marginals_to_json(e.scheme->marginals, e.scheme->network).dump(2) + "\n");
    write_file(sd / "synthetic.csv", to_csv(e.scheme->synthetic));
    write_file(sd / "metrics.json", metrics_to_json(*e.metrics).dump(2) + "\n");
  }
  write_file(dir / "session.json", session_to_json(s).dump(2) + "\n");
}

SessionState restore_session(const fs::path& state_dir, std::string_view id) {
  const fs::path dir = state_dir / std::string(id);
  if (id.empty() || !fs::exists(dir / "session.json")) {
    throw NotFoundError("no stored session '" + std::string(id) + "'");
  }
  const fs::path session_file = dir / "session.json";
  const Json j = parse_json_file(session_file);
  SessionState s;
  try {
    s.id = j.at("id").get<std::string>();
    s.max_k = j.at("settings").at("max_k").get<int>();
    s.degree = j.at("settings").at("degree").get<int>();
    s.seed = j.at("settings").at("seed").get<std::uint64_t>();
    s.filter = filter_from_json(j.at("filter"));
    for (const auto& c : j.at("charts")) {
      ChartSpec spec = chart_spec_from_json(c);
      s.charts.emplace(spec.id, spec);
    }
    s.next_chart = j.at("next_chart").get<std::size_t>();
    std::vector<PatternConstraint> patterns;
    for (const auto& p : j.at("patterns")) patterns.push_back(pattern_from_json(p));
    s.patterns = PatternCatalog::restore(std::move(patterns), j.at("next_pattern").get<std::size_t>());
    for (const auto& d : j.at("discretizations")) s.discretizations.push_back(discretization_from_json(d));
    s.next_scheme = j.at("next_scheme").get<std::size_t>();
    if (!j.at("schema").is_null()) {
      const SchemaDescriptor desc = schema_descriptor_from_json(j.at("schema"));
      s.source = load_csv(read_file(dir / "source.csv"), desc);
      s.data = apply_filter(*s.source, s.filter);
    }
    for (const auto& sj : j.at("schemes")) {
      SchemeEntry e;
      e.id = sj.at("id").get<std::string>();
      e.status = scheme_status_from_string(sj.at("status").get<std::string>());
      e.request = sj.at("request");
      e.error = sj.value("error", "");
      if (e.status == SchemeStatus::kRunning) {
        e.status = SchemeStatus::kFailed;
        e.error = "interrupted by shutdown";
      } else if (e.status == SchemeStatus::kComplete) {
        const fs::path sd = dir / "schemes" / e.id;
        e.scheme = std::make_shared<const Scheme>(
            scheme_from_parts(parse_json_file(sd / "scheme.json"), parse_json_file(sd / "network.json"),
                              parse_json_file(sd / "marginals.json"), read_file(sd / "synthetic.csv"),
                              s.source ? s.source->schema() : Schema{}));
        e.metrics = std::make_shared<const MetricsReport>(metrics_from_json(parse_json_file(sd / "metrics.json")));
      }
      s.schemes.push_back(std::move(e));
    }
  } catch (const Json::exception& e) {
    throw ParseError("corrupt state in '" + dir.string() + "': " + e.what());
  } catch (const std::invalid_argument& e) {
    throw ParseError("corrupt state in '" + dir.string() + "': " + e.what());
  } catch (const NotFoundError& e) {
    throw ParseError("corrupt state in '" + dir.string() + "': " + e.what());
  }
  return s;
}

Service::Service(ServiceConfig config) : config_(std::move(config)) {
  if (config_.max_k < 1) throw std::invalid_argument("max_k must be >= 1");
  if (config_.degree < 0) throw std::invalid_argument("degree must be >= 0");
  if (!config_.state_dir) return;
  const fs::path& dir = *config_.state_dir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  struct stat st {};
  if (ec || ::stat(dir.c_str(), &st) != 0 || !S_ISDIR(st.st_mode)) {
    throw std::runtime_error("state directory '" + dir.string() + "' is not usable");
  }
  if ((st.st_mode & S_IWUSR) == 0) {
    throw std::runtime_error("state directory '" + dir.string() + "' is read-only");
  }
  {
    const fs::path probe = dir / ".probe";
    std::ofstream out(probe);
    if (!out) throw std::runtime_error("state directory '" + dir.string() + "' is not writable");
    out.close();
    fs::remove(probe, ec);
  }
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_directory() || !fs::exists(entry.path() / "session.json")) continue;
    const std::string id = entry.path().filename().string();
    auto session = std::make_shared<Session>();
    session->state = std::make_shared<const SessionState>(restore_session(dir, id));
    sessions_.emplace(id, session);
    if (id.size() > 1 && id[0] == 's') {
      try {
        next_session_ = std::max(next_session_, std::stoul(id.substr(1)) + 1);
      } catch (const std::exception&) {
      }
    }
  }
}

Service::~Service() {
  std::vector<std::thread> jobs;
  {
    std::lock_guard lock(jobs_mu_);
    jobs.swap(jobs_);
  }
  for (auto& t : jobs) t.join();
}

std::shared_ptr<Service::Session> Service::find(std::string_view id) const {
  std::lock_guard lock(registry_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw NotFoundError("unknown session '" + std::string(id) + "'");
  return it->second;
}

std::shared_ptr<const SessionState> Service::load(const Session& s) const {
  std::lock_guard lock(s.publish);
  return s.state;
}

void Service::publish(Session& s, SessionState next) {
  auto ptr = std::make_shared<const SessionState>(std::move(next));
  {
    std::lock_guard lock(s.publish);
    s.state = ptr;
  }
  persist(*ptr);
}

void Service::persist(const SessionState& s) {
  if (!config_.state_dir) return;
  try {
    persist_session(s, *config_.state_dir);
  } catch (const std::exception& e) {
    std::cerr << "vizpriv: failed to persist session " << s.id << ": " << e.what() << "\n";
  }
}

std::shared_ptr<const SessionState> Service::snapshot(std::string_view session) const {
  return load(*find(session));
}

std::vector<std::string> Service::session_ids() const {
  std::lock_guard lock(registry_);
  std::vector<std::string> ids;
  for (const auto& [id, s] : sessions_) ids.push_back(id);
  return ids;
}

Json Service::create_session() {
  SessionState s;
  {
    std::lock_guard lock(registry_);
    s.id = "s" + std::to_string(next_session_++);
  }
  s.max_k = config_.max_k;
  s.degree = config_.degree;
  auto session = std::make_shared<Session>();
  {
    std::lock_guard lock(registry_);
    sessions_.emplace(s.id, session);
  }
  const std::string id = s.id;
  std::lock_guard w(session->write);
  publish(*session, std::move(s));
  return {{"v", kPayloadVersion}, {"id", id}};
}

Json Service::upload_dataset(std::string_view session, std::string_view csv,
                             const std::optional<SchemaDescriptor>& schema) {
  auto sp = find(session);
  std::lock_guard w(sp->write);
  if (sp->in_flight) throw ConflictError("a generation is in flight");
  SessionState next = *load(*sp);
  next.source = load_csv(csv, schema);
  if (next.source->rows() == 0) throw ContractError("dataset has no rows");
  next.filter = {};
  next.charts.clear();
  next.patterns = PatternCatalog::restore({}, next.patterns.next_id());
  rebuild_view(next);
  Json out = attribute_summary(next.data);
  publish(*sp, std::move(next));
  return out;
}

Json Service::set_filter(std::string_view session, const Json& body) {
  auto sp = find(session);
  std::lock_guard w(sp->write);
  SessionState next = *load(*sp);
  next.dataset();
  next.filter = filter_from_json(body);
  semantic([&] {
    validate_filter(next.source->schema(), next.filter);
    return 0;
  });
  rebuild_view(next);
  Json out{{"v", kPayloadVersion}, {"rows", next.data.rows()}, {"total", next.source->rows()}};
  publish(*sp, std::move(next));
  return out;
}

Json Service::add_chart(std::string_view session, const Json& body) {
  auto sp = find(session);
  std::lock_guard w(sp->write);
  SessionState next = *load(*sp);
  ChartSpec spec = chart_spec_from_json(body);
  // Schema-dependent rule violations (wrong attribute kinds) are semantic.
  try {
    semantic([&] {
      spec.validate(next.dataset().schema());
      return 0;
    });
  } catch (const std::invalid_argument& e) {
    throw ContractError(e.what());
  }
  spec.id = "C" + std::to_string(next.next_chart++);
  next.charts.emplace(spec.id, spec);
  Json out = chart_spec_to_json(spec);
  out["v"] = kPayloadVersion;
  publish(*sp, std::move(next));
  return out;
}

Json Service::chart_data(std::string_view session, std::string_view chart,
                         const std::optional<std::string>& scheme) {
  const auto s = snapshot(session);
  const ChartSpec& spec = s->chart(chart);
  const Dataset& ds = scheme ? completed(*s, *scheme).scheme->synthetic : s->dataset();
  Json out = chart_data_to_json(render_chart_data(ds, spec), ds);
  out["source"] = scheme ? *scheme : "original";
  return out;
}

Json Service::add_pattern(std::string_view session, const Json& body) {
  auto sp = find(session);
  std::lock_guard w(sp->write);
  SessionState next = *load(*sp);
  const std::string chart = body.at("chart").get<std::string>();
  const Selection sel = selection_from_json(body.at("selection"));
  const double weight = body.contains("weight") ? number_field(body, "weight") : 0.0;
  const ChartSpec& spec = semantic([&]() -> const ChartSpec& { return next.chart(chart); });
  Json out = public_pattern(next.patterns.add(next.dataset(), spec, sel, weight));
  out["v"] = kPayloadVersion;
  publish(*sp, std::move(next));
  return out;
}

Json Service::update_pattern(std::string_view session, std::string_view pattern, const Json& body) {
  auto sp = find(session);
  std::lock_guard w(sp->write);
  SessionState next = *load(*sp);
  next.patterns.get(pattern);
  Json out = public_pattern(next.patterns.set_weight(pattern, number_field(body, "weight")));
  out["v"] = kPayloadVersion;
  publish(*sp, std::move(next));
  return out;
}

void Service::delete_pattern(std::string_view session, std::string_view pattern) {
  auto sp = find(session);
  std::lock_guard w(sp->write);
  SessionState next = *load(*sp);
  next.patterns.remove(pattern);
  publish(*sp, std::move(next));
}

Json Service::relationship(std::string_view session) {
  const auto s = snapshot(session);
  return relationship_to_json(
      relationship_graph(s->dataset(), s->patterns.patterns(), s->degree, s->discretizations));
}

Json Service::flow(std::string_view session, const std::optional<std::string>& highlight,
                   const std::optional<std::string>& columns) {
  const auto s = snapshot(session);
  const Dataset& ds = s->dataset();
  std::vector<std::string> cols;
  if (columns) {
    std::stringstream ss(*columns);
    for (std::string c; std::getline(ss, c, ',');) {
      if (!c.empty()) cols.push_back(c);
    }
  } else {
    for (const auto& a : ds.schema()) cols.push_back(a.name);
  }
  const PatternConstraint* hl = highlight ? &s->patterns.get(*highlight) : nullptr;
  return semantic([&] { return flow_to_json(sankey_flow(ds, s->discretizations, cols, hl)); });
}

Json Service::network(std::string_view session, const std::optional<std::string>& scheme) {
  const auto s = snapshot(session);
  const SchemeEntry& e = latest_or(*s, scheme);
  Json out = layout_to_json(network_layout(e.scheme->network));
  out["scheme"] = e.id;
  return out;
}

Json Service::distributions(std::string_view session, const std::string& attr,
                            const std::optional<std::string>& scheme) {
  const auto s = snapshot(session);
  const SchemeEntry& e = latest_or(*s, scheme);
  s->dataset().index_of(attr);
  Json out = distribution_to_json(node_distributions(s->dataset(), e.scheme->synthetic, attr));
  out["scheme"] = e.id;
  return out;
}

Json Service::start_scheme(std::string_view session, const Json& body) {
  if (!body.is_object()) throw std::invalid_argument("scheme request must be an object");
  SchemeOptions o;
  o.oracle = body.value("oracle", false);
  o.baseline = body.value("baseline", false);
  const double fraction =
      body.contains("structure_fraction") ? number_field(body, "structure_fraction") : kDefaultStructureFraction;
  if (!o.oracle || body.contains("epsilon")) {
    if (!body.contains("epsilon")) throw std::invalid_argument("missing field 'epsilon'");
    o.budget = split_budget(number_field(body, "epsilon"), fraction);
  }
  std::map<std::string, double> overrides;
  if (body.contains("weights")) {
    for (const auto& [id, w] : body.at("weights").items()) {
      if (!w.is_number() || !(w.get<double>() >= 0.0)) throw std::invalid_argument("weights must be >= 0");
      overrides[id] = w.get<double>();
    }
  }

  auto sp = find(session);
  std::lock_guard w(sp->write);
  if (sp->in_flight) throw ConflictError("a generation is already in flight for this session");
  SessionState next = *load(*sp);
  next.dataset();
  o.degree = body.contains("k") ? body.at("k").get<int>() : next.degree;
  if (o.degree < 0) throw std::invalid_argument("'k' must be >= 0");
  if (body.contains("n_out") && !body.at("n_out").is_null()) {
    o.n_out = body.at("n_out").get<Index>();
    if (*o.n_out < 1) throw std::invalid_argument("'n_out' must be >= 1");
  }
  o.seed = body.contains("seed") ? body.at("seed").get<std::uint64_t>() : next.seed;
  o.max_bins = next.max_k;
  for (const auto& [id, wt] : overrides) {
    semantic([&] { return next.patterns.get(id).id; });
  }

  SchemeEntry entry;
  entry.id = "S" + std::to_string(next.next_scheme++);
  entry.request = body;
  const std::string id = entry.id;
  next.schemes.push_back(std::move(entry));
  publish(*sp, std::move(next));
  const auto base = load(*sp);
  sp->in_flight = true;
  {
    std::lock_guard lock(jobs_mu_);
    ++running_;
    jobs_.emplace_back(&Service::run_job, this, sp, base, id, o, std::move(overrides));
  }
  return {{"v", kPayloadVersion}, {"id", id}, {"status", "running"}};
}

void Service::run_job(std::shared_ptr<Session> session, std::shared_ptr<const SessionState> base,
                      std::string scheme_id, SchemeOptions options,
                      std::map<std::string, double> overrides) {
  std::shared_ptr<const Scheme> scheme;
  std::shared_ptr<const MetricsReport> metrics;
  std::string error;
  try {
    Scheme s = generate_scheme(base->data, base->patterns.patterns(), overrides, options,
                               &base->discretizations);
    s.id = scheme_id;
    s.created_at = utc_now();
    metrics = std::make_shared<const MetricsReport>(
        evaluate_scheme(base->data, s, base->patterns.patterns(), base->charts));
    scheme = std::make_shared<const Scheme>(std::move(s));
  } catch (const std::exception& e) {
    error = e.what();
  }
  {
    std::lock_guard w(session->write);
    SessionState next = *load(*session);
    for (auto& e : next.schemes) {
      if (e.id != scheme_id) continue;
      e.status = scheme ? SchemeStatus::kComplete : SchemeStatus::kFailed;
      e.scheme = scheme;
      e.metrics = metrics;
      e.error = error;
    }
    publish(*session, std::move(next));
    session->in_flight = false;
  }
  {
    std::lock_guard lock(jobs_mu_);
    --running_;
  }
  idle_.notify_all();
}

Json Service::get_scheme(std::string_view session, std::string_view scheme) {
  const auto s = snapshot(session);
  const SchemeEntry& e = s->scheme(scheme);
  Json out{{"v", kPayloadVersion}, {"id", e.id}, {"status", std::string(to_string(e.status))},
           {"request", e.request}};
  if (e.status == SchemeStatus::kFailed) out["error"] = e.error;
  if (e.status == SchemeStatus::kComplete) {
    out["scheme"] = scheme_to_json(*e.scheme);
    out["network"] = network_to_json(e.scheme->network);
  }
  return out;
}

Json Service::scheme_metrics(std::string_view session, std::string_view scheme) {
  const auto s = snapshot(session);
  return metrics_to_json(*completed(*s, scheme).metrics);
}

Json Service::list_schemes(std::string_view session) {
  const auto s = snapshot(session);
  Json rows = Json::array();
  for (const auto& e : s->schemes) {
    Json r{{"id", e.id}, {"status", std::string(to_string(e.status))}};
    if (e.status == SchemeStatus::kComplete) {
      const Scheme& sc = *e.scheme;
      r["epsilon"] = sc.budget.epsilon_total;
      r["epsilon_structure"] = sc.budget.epsilon_structure;
      r["epsilon_marginals"] = sc.budget.epsilon_marginals;
      r["k"] = sc.degree;
      r["private"] = sc.is_private();
      r["baseline"] = sc.baseline;
      Json weights = Json::object();
      for (const auto& [id, w] : sc.weights) weights[id] = w;
      r["weights"] = std::move(weights);
      r["mean_ks_fidelity"] = e.metrics->mean_ks_fidelity;
      r["mean_cs_pvalue"] = e.metrics->mean_cs_pvalue;
      Json pm = Json::array();
      for (const auto& p : e.metrics->patterns) {
        pm.push_back({{"pattern", p.pattern}, {"metric", p.metric}, {"after", p.after}, {"delta", p.delta}});
      }
      r["patterns"] = std::move(pm);
    }
    rows.push_back(std::move(r));
  }
  return {{"v", kPayloadVersion}, {"schemes", std::move(rows)}};
}

std::string Service::export_scheme(std::string_view session, std::string_view scheme) {
  const auto s = snapshot(session);
  const SchemeEntry& e = completed(*s, scheme);
  const Dataset& syn = e.scheme->synthetic;
  std::vector<ArchiveEntry> files;
  files.push_back({"synthetic.csv", to_csv(syn)});
  files.push_back({"schema.json", schema_to_json(syn.schema()).dump(2) + "\n"});
  files.push_back({"report.json", metrics_to_json(*e.metrics).dump(2) + "\n"});
  files.push_back({"ranking.csv", metrics_to_csv(*e.metrics)});
  files.push_back({"scheme.json", scheme_to_json(*e.scheme).dump(2) + "\n"});
  files.push_back({"network.json", network_to_json(e.scheme->network).dump(2) + "\n"});
  for (const auto& [id, spec] : s->charts) {
    files.push_back({"charts/" + id + ".json",
                     chart_data_to_json(render_chart_data(syn, spec), syn).dump(2) + "\n"});
  }
  return write_tar(files);
}

void Service::wait_idle() {
  std::unique_lock lock(jobs_mu_);
  idle_.wait(lock, [&] { return running_ == 0; });
}

void Service::persist_all() {
  for (const auto& id : session_ids()) persist(*snapshot(id));
}

namespace {

void send_json(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, status, Json{{"v", kPayloadVersion}, {"error", message}});
}

template <typename F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const NotFoundError& e) {
      send_error(res, 404, e.what());
    } catch (const ConflictError& e) {
      send_error(res, 409, e.what());
    } catch (const ContractError& e) {
      send_error(res, 422, e.what());
    } catch (const DomainError& e) {
      send_error(res, 422, e.what());
    } catch (const std::domain_error& e) {
      send_error(res, 422, e.what());
    } catch (const ParseError& e) {
      send_error(res, 400, e.what());
    } catch (const Json::exception& e) {
      send_error(res, 400, e.what());
    } catch (const std::invalid_argument& e) {
      send_error(res, 400, e.what());
    } catch (const std::out_of_range& e) {
      send_error(res, 400, e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, e.what());
    }
  };
}

Json body_json(const httplib::Request& req) {
  if (req.body.empty()) return Json::object();
  return Json::parse(req.body);
}

std::optional<std::string> query(const httplib::Request& req, const char* key) {
  if (!req.has_param(key)) return std::nullopt;
  return req.get_param_value(key);
}

}  // namespace

void Service::mount(httplib::Server& server) {
  server.Post("/sessions", guarded([this](const auto&, auto& res) { send_json(res, 201, create_session()); }));

  server.Post("/sessions/:sid/dataset", guarded([this](const httplib::Request& req, auto& res) {
    std::string csv;
    std::optional<SchemaDescriptor> schema;
    if (req.is_multipart_form_data()) {
      const char* key = req.has_file("file") ? "file" : "csv";
      if (!req.has_file(key)) throw std::invalid_argument("multipart upload needs a 'file' part");
      csv = req.get_file_value(key).content;
      if (req.has_file("schema")) {
        schema = schema_descriptor_from_json(Json::parse(req.get_file_value("schema").content));
      }
    } else if (req.get_header_value("Content-Type").rfind("application/json", 0) == 0) {
      const Json j = Json::parse(req.body);
      csv = j.at("csv").get<std::string>();
      if (j.contains("schema") && !j.at("schema").is_null()) schema = schema_descriptor_from_json(j.at("schema"));
    } else {
      csv = req.body;
    }
    send_json(res, 201, upload_dataset(req.path_params.at("sid"), csv, schema));
  }));

  server.Put("/sessions/:sid/filter", guarded([this](const httplib::Request& req, auto& res) {
    send_json(res, 200, set_filter(req.path_params.at("sid"), body_json(req)));
  }));

  server.Post("/sessions/:sid/charts", guarded([this](const httplib::Request& req, auto& res) {
    send_json(res, 201, add_chart(req.path_params.at("sid"), body_json(req)));
  }));

  server.Get("/sessions/:sid/charts/:cid/data", guarded([this](const httplib::Request& req, auto& res) {
    send_json(res, 200, chart_data(req.path_params.at("sid"), req.path_params.at("cid"), query(req, "scheme")));
  }));

  server.Post("/sessions/:sid/patterns", guarded([this](const httplib::Request& req, auto& res) {
    send_json(res, 201, add_pattern(req.path_params.at("sid"), body_json(req)));
  }));

  server.Patch("/sessions/:sid/patterns/:pid", guarded([this](const httplib::Request& req, auto& res) {
    send_json(res, 200, update_pattern(req.path_params.at("sid"), req.path_params.at("pid"), body_json(req)));
  }));

  server.Delete("/sessions/:sid/patterns/:pid", guarded([this](const httplib::Request& req, auto& res) {
    delete_pattern(req.path_params.at("sid"), req.path_params.at("pid"));
    res.status = 204;
  }));

  server.Get("/sessions/:sid/analytics/relationship", guarded([this](const httplib::Request& req, auto& res) {
    send_json(res, 200, relationship(req.path_params.at("sid")));
  }));

  server.Get("/sessions/:sid/analytics/flow", guarded([this](const httplib::Request& req, auto& res) {
    send_json(res, 200, flow(req.path_params.at("sid"), query(req, "highlight"), query(req, "columns")));
  }));

  server.Get("/sessions/:sid/analytics/network", guarded([this](const httplib::Request& req, auto& res) {
    send_json(res, 200, network(req.path_params.at("sid"), query(req, "scheme")));
  }));

  server.Get("/sessions/:sid/analytics/distributions", guarded([this](const httplib::Request& req, auto& res) {
    const auto attr = query(req, "attr");
    if (!attr) throw std::invalid_argument("missing query parameter 'attr'");
    send_json(res, 200, distributions(req.path_params.at("sid"), *attr, query(req, "scheme")));
  }));

  server.Post("/sessions/:sid/schemes", guarded([this](const httplib::Request& req, auto& res) {
    send_json(res, 202, start_scheme(req.path_params.at("sid"), body_json(req)));
  }));

  server.Get("/sessions/:sid/schemes", guarded([this](const httplib::Request& req, auto& res) {
    send_json(res, 200, list_schemes(req.path_params.at("sid")));
  }));

  server.Get("/sessions/:sid/schemes/:sch", guarded([this](const httplib::Request& req, auto& res) {
    send_json(res, 200, get_scheme(req.path_params.at("sid"), req.path_params.at("sch")));
  }));

  server.Get("/sessions/:sid/schemes/:sch/metrics", guarded([this](const httplib::Request& req, auto& res) {
    send_json(res, 200, scheme_metrics(req.path_params.at("sid"), req.path_params.at("sch")));
  }));

  server.Get("/sessions/:sid/schemes/:sch/export", guarded([this](const httplib::Request& req, auto& res) {
    const std::string sch = req.path_params.at("sch");
    res.set_content(export_scheme(req.path_params.at("sid"), sch), "application/x-tar");
    res.set_header("Content-Disposition", "attachment; filename=\"" + sch + ".tar\"");
    res.status = 200;
  }));
}

}  // namespace vizpriv
