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
#include <memory>
#include <condition_variable>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "vizpriv/charts.hpp"
#include "vizpriv/dataset.hpp"
#include "vizpriv/discretize.hpp"
#include "vizpriv/engine.hpp"
#include "vizpriv/json_io.hpp"
#include "vizpriv/metrics.hpp"

namespace httplib {
class Server;
}

namespace vizpriv {

// A generation is already running for the session, or a scheme is not ready.
class ConflictError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::optional<std::filesystem::path> state_dir;
  int max_k = kDefaultMaxBins;
  int degree = kDefaultDegree;

  // VIZPRIV_LISTEN (host:port), VIZPRIV_STATE_DIR, VIZPRIV_MAX_K, VIZPRIV_DEGREE.
  static ServiceConfig from_env();
};

enum class SchemeStatus { kRunning, kComplete, kFailed };
std::string_view to_string(SchemeStatus s);
SchemeStatus scheme_status_from_string(std::string_view s);

struct SchemeEntry {
  std::string id;
  SchemeStatus status = SchemeStatus::kRunning;
  Json request;
  std::shared_ptr<const Scheme> scheme;
  std::shared_ptr<const MetricsReport> metrics;
  std::string error;
};

// Immutable snapshot of one session. Writers copy, modify and republish.
struct SessionState {
  std::string id;
  std::optional<Dataset> source;
  Dataset data;  // source with the filter applied
  FilterSpec filter;
  std::vector<Discretization> discretizations;
  std::map<std::string, ChartSpec> charts;
  std::size_t next_chart = 0;
  PatternCatalog patterns;
  std::vector<SchemeEntry> schemes;
  std::size_t next_scheme = 1;
  int max_k = kDefaultMaxBins;
  int degree = kDefaultDegree;
  std::uint64_t seed = 0;

  const SchemeEntry& scheme(std::string_view id) const;
  const ChartSpec& chart(std::string_view id) const;
  const Dataset& dataset() const;
};

// Full description of a session except dataset rows and scheme payloads.
Json session_to_json(const SessionState& s);

// <state_dir>/<id>/session.json, source.csv and schemes/<sid>/*.
void persist_session(const SessionState& s, const std::filesystem::path& state_dir);
// Throws NotFoundError for an unknown id and ParseError naming the corrupt file.
SessionState restore_session(const std::filesystem::path& state_dir, std::string_view id);

// Session registry behind the HTTP routes. Methods throw ParseError /
// std::invalid_argument (400), NotFoundError (404), ConflictError (409) and
// ContractError / DomainError (422).
class Service {
 public:
  explicit Service(ServiceConfig config);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  const ServiceConfig& config() const { return config_; }

  Json create_session();
  Json upload_dataset(std::string_view session, std::string_view csv,
                      const std::optional<SchemaDescriptor>& schema);
  Json set_filter(std::string_view session, const Json& body);
  Json add_chart(std::string_view session, const Json& body);
  Json chart_data(std::string_view session, std::string_view chart,
                  const std::optional<std::string>& scheme);
  Json add_pattern(std::string_view session, const Json& body);
  Json update_pattern(std::string_view session, std::string_view pattern, const Json& body);
  void delete_pattern(std::string_view session, std::string_view pattern);

  Json relationship(std::string_view session);
  Json flow(std::string_view session, const std::optional<std::string>& highlight,
            const std::optional<std::string>& columns);
  Json network(std::string_view session, const std::optional<std::string>& scheme);
  Json distributions(std::string_view session, const std::string& attr,
                     const std::optional<std::string>& scheme);

  // Starts an asynchronous run and returns its id.
  Json start_scheme(std::string_view session, const Json& body);
  Json get_scheme(std::string_view session, std::string_view scheme);
  Json scheme_metrics(std::string_view session, std::string_view scheme);
  Json list_schemes(std::string_view session);
  std::string export_scheme(std::string_view session, std::string_view scheme);

  std::shared_ptr<const SessionState> snapshot(std::string_view session) const;
  std::vector<std::string> session_ids() const;
  // Blocks until no generation job is running.
  void wait_idle();
  void persist_all();

  void mount(httplib::Server& server);

 private:
  struct Session {
    std::mutex write;
    mutable std::mutex publish;
    std::shared_ptr<const SessionState> state;
    bool in_flight = false;
  };

  std::shared_ptr<Session> find(std::string_view id) const;
  std::shared_ptr<const SessionState> load(const Session& s) const;
  void publish(Session& s, SessionState next);
  void persist(const SessionState& s);
  void run_job(std::shared_ptr<Session> session, std::shared_ptr<const SessionState> base,
               std::string scheme_id, SchemeOptions options, std::map<std::string, double> overrides);

  ServiceConfig config_;
  mutable std::mutex registry_;
  std::map<std::string, std::shared_ptr<Session>, std::less<>> sessions_;
  std::size_t next_session_ = 1;
  std::mutex jobs_mu_;
  std::vector<std::thread> jobs_;
  std::condition_variable idle_;
  int running_ = 0;
};

}  // namespace vizpriv
