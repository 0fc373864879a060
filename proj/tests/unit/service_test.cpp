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

// Project headers go first: httplib.h pulls in resolv.h, whose macros clash
// with Eigen.
#include "test_util.hpp"
#include "vizpriv/archive.hpp"
#include "vizpriv/error.hpp"
#include "vizpriv/service.hpp"

#include <gtest/gtest.h>
#include <httplib.h>
#include <sys/stat.h>

#include <chrono>
#include <thread>

namespace vizpriv {
namespace {

namespace fs = std::filesystem;

class Live {
 public:
  explicit Live(const fs::path& state) : service_(make_config(state)) {
    service_.mount(server_);
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
    client_->set_read_timeout(60);
  }
  ~Live() {
    service_.wait_idle();
    server_.stop();
    thread_.join();
  }

  httplib::Client& http() { return *client_; }
  Service& service() { return service_; }

  // Polls until the scheme leaves the running state.
  Json wait_scheme(const std::string& sid, const std::string& scheme) {
    for (int i = 0; i < 6000; ++i) {
      auto r = client_->Get("/sessions/" + sid + "/schemes/" + scheme);
      Json j = Json::parse(r->body);
      if (j.at("status") != "running") return j;
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    throw std::runtime_error("scheme did not finish");
  }

 private:
  static ServiceConfig make_config(const fs::path& state) {
    ServiceConfig c;
    c.state_dir = state;
    return c;
  }
  Service service_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  std::unique_ptr<httplib::Client> client_;
};

std::string json_body(const Json& j) { return j.dump(); }

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / name;
  fs::remove_all(p);
  return p;
}

struct Script {
  std::string sid, bar, scatter, line;
};

// upload -> charts -> patterns, returning the ids.
Script setup_session(httplib::Client& c) {
  Script s;
  auto r = c.Post("/sessions");
  EXPECT_EQ(r->status, 201);
  s.sid = Json::parse(r->body).at("id");
  const std::string base = "/sessions/" + s.sid;
  const Json upload{{"csv", testing::read_text(testing::fixture_dir() / "adult_like.csv")},
                    {"schema", Json::parse(testing::read_text(testing::fixture_dir() / "adult_like.schema.json"))}};
  r = c.Post(base + "/dataset", json_body(upload), "application/json");
  EXPECT_EQ(r->status, 201) << r->body;
  EXPECT_EQ(Json::parse(r->body).at("rows"), 1000);

  auto chart = [&](const Json& spec) {
    auto resp = c.Post(base + "/charts", json_body(spec), "application/json");
    EXPECT_EQ(resp->status, 201) << resp->body;
    return Json::parse(resp->body).at("id").get<std::string>();
  };
  s.bar = chart({{"chart_type", "bar"}, {"x", "education"}, {"y", "hours_per_week"}, {"aggregate", "mean"}});
  s.scatter = chart({{"chart_type", "scatter"}, {"x", "age"}, {"y", "capital_gain"}});
  s.line = chart({{"chart_type", "line"}, {"x", "age"}, {"y", "tenure"}, {"x_step", 2.5}, {"aggregate", "mean"}});

  auto pattern = [&](const Json& body) {
    auto resp = c.Post(base + "/patterns", json_body(body), "application/json");
    EXPECT_EQ(resp->status, 201) << resp->body;
    return Json::parse(resp->body);
  };
  pattern({{"chart", s.bar}, {"selection", {{"kind", "bars"}, {"bars", {"Bachelors", "Masters"}}}}, {"weight", 4}});
  pattern({{"chart", s.scatter},
           {"selection", {{"kind", "region"}, {"rect", {{"x0", 50}, {"y0", 12000}, {"x1", 60}, {"y1", 18000}}}}},
           {"weight", 2}});
  pattern({{"chart", s.line}, {"selection", {{"kind", "interval"}, {"lo", 25}, {"hi", 45}}}, {"weight", 1}});
  return s;
}

TEST(Service, FullScript) {
  const fs::path state = fresh_dir("vizpriv_service_full");
  Live live(state);
  auto& c = live.http();
  const Script s = setup_session(c);
  EXPECT_EQ(s.sid, "s1");
  EXPECT_EQ(s.bar, "C0");
  const std::string base = "/sessions/" + s.sid;

  auto r = c.Get(base + "/charts/" + s.line + "/data");
  ASSERT_EQ(r->status, 200);
  EXPECT_EQ(Json::parse(r->body).at("mark"), "line");

  r = c.Patch(base + "/patterns/P2", json_body({{"weight", 3}}), "application/json");
  ASSERT_EQ(r->status, 200) << r->body;
  EXPECT_EQ(Json::parse(r->body).at("weight"), 3.0);

  r = c.Post(base + "/schemes", json_body({{"epsilon", 2}, {"seed", 5}}), "application/json");
  ASSERT_EQ(r->status, 202) << r->body;
  const std::string scheme = Json::parse(r->body).at("id");
  EXPECT_EQ(scheme, "S1");
  const Json done = live.wait_scheme(s.sid, scheme);
  ASSERT_EQ(done.at("status"), "complete") << done.dump();
  EXPECT_EQ(done.at("scheme").at("consumed").at("total"), 2.0);

  r = c.Get(base + "/schemes/" + scheme + "/metrics");
  ASSERT_EQ(r->status, 200);
  const Json metrics = Json::parse(r->body);
  EXPECT_FALSE(metrics.at("patterns").empty());
  EXPECT_FALSE(metrics.at("fidelity").empty());

  r = c.Get(base + "/schemes");
  ASSERT_EQ(r->status, 200);
  EXPECT_EQ(Json::parse(r->body).at("schemes").size(), 1u);

  for (const std::string path : {"/analytics/relationship", "/analytics/flow?highlight=P0",
                                 "/analytics/network", "/analytics/distributions?attr=age",
                                 "/analytics/network?scheme=S1"}) {
    r = c.Get(base + path);
    EXPECT_EQ(r->status, 200) << path << " " << r->body;
    EXPECT_EQ(Json::parse(r->body).at("v"), kPayloadVersion) << path;
  }
  r = c.Get(base + "/charts/" + s.bar + "/data?scheme=" + scheme);
  EXPECT_EQ(r->status, 200);

  // Idempotent reads.
  EXPECT_EQ(c.Get(base + "/schemes/" + scheme)->body, c.Get(base + "/schemes/" + scheme)->body);

  r = c.Get(base + "/schemes/" + scheme + "/export");
  ASSERT_EQ(r->status, 200);
  const auto files = read_tar(r->body);
  std::set<std::string> names;
  for (const auto& f : files) names.insert(f.name);
  for (const char* n : {"synthetic.csv", "report.json", "scheme.json", "charts/C0.json"}) {
    EXPECT_TRUE(names.count(n)) << n;
  }
  // The export carries synthetic rows only.
  for (const auto& f : files) {
    if (f.name == "synthetic.csv") {
      EXPECT_NE(f.content, to_csv(testing::load_adult_like()));
    }
  }

  r = c.Delete(base + "/patterns/P1");
  EXPECT_EQ(r->status, 204);
  live.service().wait_idle();
  fs::remove_all(state);
}

TEST(Service, ErrorStatuses) {
  const fs::path state = fresh_dir("vizpriv_service_errors");
  Live live(state);
  auto& c = live.http();
  EXPECT_EQ(c.Get("/sessions/s9/schemes")->status, 404);
  const Script s = setup_session(c);
  const std::string base = "/sessions/" + s.sid;

  EXPECT_EQ(c.Post(base + "/schemes", json_body({{"epsilon", -1}}), "application/json")->status, 400);
  EXPECT_EQ(c.Post(base + "/schemes", json_body(Json::object()), "application/json")->status, 400);
  EXPECT_EQ(c.Post(base + "/schemes", "{not json", "application/json")->status, 400);
  EXPECT_EQ(c.Get(base + "/schemes/S42")->status, 404);
  EXPECT_EQ(c.Get(base + "/charts/C9/data")->status, 404);
  EXPECT_EQ(c.Patch(base + "/patterns/P9", json_body({{"weight", 1}}), "application/json")->status, 404);
  EXPECT_EQ(c.Patch(base + "/patterns/P0", json_body({{"weight", -1}}), "application/json")->status, 400);

  // An interval selection on a bar chart breaks the pattern/chart pairing.
  auto r = c.Post(base + "/patterns",
                  json_body({{"chart", s.bar}, {"selection", {{"kind", "interval"}, {"lo", 0}, {"hi", 1}}}}),
                  "application/json");
  EXPECT_EQ(r->status, 422) << r->body;
  r = c.Post(base + "/charts", json_body({{"chart_type", "scatter"}, {"x", "age"}, {"y", "sex"}}),
             "application/json");
  EXPECT_EQ(r->status, 422) << r->body;
  r = c.Post(base + "/charts", json_body({{"chart_type", "line"}, {"x", "age"}, {"x_step", -1}}),
             "application/json");
  EXPECT_EQ(r->status, 400) << r->body;

  // A large n_out keeps the first job busy while the second arrives.
  r = c.Post(base + "/schemes", json_body({{"epsilon", 1}, {"n_out", 400000}}), "application/json");
  ASSERT_EQ(r->status, 202);
  const std::string first = Json::parse(r->body).at("id");
  EXPECT_EQ(c.Post(base + "/schemes", json_body({{"epsilon", 1}}), "application/json")->status, 409);
  EXPECT_EQ(c.Get(base + "/schemes/" + first + "/metrics")->status, 409);
  live.wait_scheme(s.sid, first);
  r = c.Post(base + "/schemes", json_body({{"epsilon", 1}}), "application/json");
  EXPECT_EQ(r->status, 202);
  EXPECT_EQ(Json::parse(r->body).at("id"), "S2");
  live.service().wait_idle();
  fs::remove_all(state);
}

TEST(Service, MultipartAndRawUpload) {
  const fs::path state = fresh_dir("vizpriv_service_upload");
  Live live(state);
  auto& c = live.http();
  const std::string sid = Json::parse(c.Post("/sessions")->body).at("id");
  httplib::MultipartFormDataItems items{
      {"file", "a,b\n1,x\n2,y\n3,x\n", "data.csv", "text/csv"},
  };
  auto r = c.Post("/sessions/" + sid + "/dataset", items);
  ASSERT_EQ(r->status, 201) << r->body;
  EXPECT_EQ(Json::parse(r->body).at("rows"), 3);
  r = c.Post("/sessions/" + sid + "/dataset", "a,b\n1,x\n", "text/csv");
  ASSERT_EQ(r->status, 201) << r->body;
  EXPECT_EQ(Json::parse(r->body).at("rows"), 1);
  r = c.Post("/sessions/" + sid + "/dataset", "a,b\n1\n", "text/csv");
  EXPECT_EQ(r->status, 400);
  r = c.Put("/sessions/" + sid + "/filter", json_body({{"filters", {{"a", {{"range", {0, 5}}}}}}}),
            "application/json");
  EXPECT_EQ(r->status, 200) << r->body;
  r = c.Put("/sessions/" + sid + "/filter", json_body({{"filters", {{"zz", {{"range", {0, 5}}}}}}}),
            "application/json");
  EXPECT_EQ(r->status / 100, 4);
  fs::remove_all(state);
}

TEST(Service, PersistenceRoundTripIsByteIdentical) {
  const fs::path state = fresh_dir("vizpriv_service_persist");
  std::string scheme_body, metrics_body, export_body, list_body, chart_body;
  std::string sid;
  {
    Live live(state);
    auto& c = live.http();
    const Script s = setup_session(c);
    sid = s.sid;
    auto r = c.Post("/sessions/" + sid + "/schemes", json_body({{"epsilon", 2}, {"seed", 9}}), "application/json");
    live.wait_scheme(sid, Json::parse(r->body).at("id"));
    const std::string base = "/sessions/" + sid;
    scheme_body = c.Get(base + "/schemes/S1")->body;
    metrics_body = c.Get(base + "/schemes/S1/metrics")->body;
    export_body = c.Get(base + "/schemes/S1/export")->body;
    list_body = c.Get(base + "/schemes")->body;
    chart_body = c.Get(base + "/charts/C2/data?scheme=S1")->body;
    live.service().persist_all();
  }
  EXPECT_TRUE(fs::exists(state / sid / "schemes" / "S1" / "synthetic.csv"));
  {
    Live live(state);
    auto& c = live.http();
    const std::string base = "/sessions/" + sid;
    EXPECT_EQ(c.Get(base + "/schemes/S1")->body, scheme_body);
    EXPECT_EQ(c.Get(base + "/schemes/S1/metrics")->body, metrics_body);
    EXPECT_EQ(c.Get(base + "/schemes/S1/export")->body, export_body);
    EXPECT_EQ(c.Get(base + "/schemes")->body, list_body);
    EXPECT_EQ(c.Get(base + "/charts/C2/data?scheme=S1")->body, chart_body);
    // Ids continue where they left off.
    EXPECT_EQ(Json::parse(c.Post("/sessions")->body).at("id"), "s2");
    auto r = c.Post(base + "/charts", json_body({{"chart_type", "bar"}, {"x", "sex"}}), "application/json");
    EXPECT_EQ(Json::parse(r->body).at("id"), "C3");
    r = c.Post(base + "/schemes", json_body({{"epsilon", 1}}), "application/json");
    EXPECT_EQ(Json::parse(r->body).at("id"), "S2");
  }
  const SessionState restored = restore_session(state, sid);
  EXPECT_EQ(restored.patterns.patterns().size(), 3u);
  EXPECT_THROW(restore_session(state, "s77"), NotFoundError);
  fs::remove_all(state);
}

TEST(Service, CorruptStoreReportsFile) {
  const fs::path state = fresh_dir("vizpriv_service_corrupt");
  {
    Live live(state);
    setup_session(live.http());
    live.service().persist_all();
  }
  std::ofstream(state / "s1" / "session.json") << "{ truncated";
  try {
    restore_session(state, "s1");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("session.json"), std::string::npos) << e.what();
  }
  fs::remove_all(state);
}

TEST(Service, ReadOnlyStateDirRejected) {
  const fs::path state = fresh_dir("vizpriv_service_ro");
  fs::create_directories(state);
  ::chmod(state.c_str(), 0555);
  ServiceConfig c;
  c.state_dir = state;
  EXPECT_ANY_THROW({ Service s(c); });
  ::chmod(state.c_str(), 0755);
  fs::remove_all(state);
}

TEST(Service, ConfigFromEnvironment) {
  ::setenv("VIZPRIV_LISTEN", "0.0.0.0:9123", 1);
  ::setenv("VIZPRIV_MAX_K", "5", 1);
  ::setenv("VIZPRIV_DEGREE", "3", 1);
  ::setenv("VIZPRIV_STATE_DIR", "/tmp/somewhere", 1);
  const ServiceConfig c = ServiceConfig::from_env();
  EXPECT_EQ(c.host, "0.0.0.0");
  EXPECT_EQ(c.port, 9123);
  EXPECT_EQ(c.max_k, 5);
  EXPECT_EQ(c.degree, 3);
  EXPECT_EQ(c.state_dir, fs::path("/tmp/somewhere"));
  for (const char* v : {"VIZPRIV_LISTEN", "VIZPRIV_MAX_K", "VIZPRIV_DEGREE", "VIZPRIV_STATE_DIR"}) ::unsetenv(v);
}

}  // namespace
}  // namespace vizpriv
