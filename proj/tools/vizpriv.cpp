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

// vizpriv command line: synth, sweep and serve.

// Project headers precede httplib.h: it pulls in <resolv.h>, whose _res macro
// collides with Eigen identifiers.
#include "vizpriv/error.hpp"
#include "vizpriv/run_config.hpp"
#include "vizpriv/service.hpp"

#include <CLI11.hpp>
#include <httplib.h>
#include <signal.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

namespace fs = std::filesystem;
using namespace vizpriv;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

struct RunFlags {
  std::string config;
  std::string input;
  std::string schema;
  std::optional<double> epsilon;
  std::optional<int> k;
  std::optional<std::uint64_t> seed;
  std::optional<int> repeats;
  int jobs = 1;
  std::string out;
  bool baseline = false;
  bool oracle = false;
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--config", f.config, "run configuration JSON");
  cmd->add_option("--input", f.input, "input CSV (overrides config)");
  cmd->add_option("--schema", f.schema, "schema descriptor JSON (overrides config)");
  cmd->add_option("--epsilon", f.epsilon, "total privacy budget");
  cmd->add_option("--k", f.k, "maximum parents per attribute");
  cmd->add_option("--seed", f.seed, "base random seed");
  cmd->add_option("--repeats", f.repeats, "replicate runs per condition");
  cmd->add_option("--jobs", f.jobs, "parallel runs")->check(CLI::PositiveNumber);
  cmd->add_option("--out", f.out, "output directory or file")->required();
  cmd->add_flag("--baseline", f.baseline, "ignore pattern constraints");
  cmd->add_flag("--oracle", f.oracle, "noise-free argmax run (NOT private, testing only)");
}

RunConfig resolve_config(const RunFlags& f) {
  RunConfig c;
  if (!f.config.empty()) c = load_run_config(f.config);
  if (!f.input.empty()) c.input = f.input;
  if (!f.schema.empty()) c.schema = fs::path(f.schema);
  if (f.epsilon) c.epsilons = {*f.epsilon};
  if (f.k) c.k = *f.k;
  if (f.seed) c.seed = *f.seed;
  if (f.repeats) c.repeats = *f.repeats;
  c.baseline = c.baseline || f.baseline;
  c.oracle = c.oracle || f.oracle;
  c.validate();
  return c;
}

int cmd_synth(const RunFlags& f) {
  const RunConfig c = resolve_config(f);
  if (c.epsilons.size() > 1) throw ConfigError("synth takes a single 'epsilon'; use sweep for lists");
  const Workload w = load_workload(c);
  const RunOutput out = run_once(w, c, c.epsilons.empty() ? 0.0 : c.epsilons.front(), {}, c.seed);
  write_run_output(out, f.out);
  for (const auto& line : out.scheme.log) std::cerr << "vizpriv: " << line << "\n";
  return 0;
}

int cmd_sweep(const RunFlags& f) {
  const RunConfig c = resolve_config(f);
  const Workload w = load_workload(c);
  const std::string csv = sweep_to_csv(sweep(w, c, f.jobs));
  const fs::path out(f.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  std::ofstream file(out, std::ios::binary | std::ios::trunc);
  if (!file || !(file << csv)) throw std::runtime_error("cannot write '" + f.out + "'");
  return 0;
}

int cmd_serve(std::optional<int> port, const std::string& state_dir) {
  ServiceConfig cfg = ServiceConfig::from_env();
  if (port) cfg.port = *port;
  if (!state_dir.empty()) cfg.state_dir = fs::path(state_dir);

  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  std::unique_ptr<Service> service;
  try {
    service = std::make_unique<Service>(cfg);
  } catch (const std::exception& e) {
    std::cerr << "vizpriv: " << e.what() << "\n";
    return kExitConfig;
  }
  httplib::Server server;
  // The library default adds SO_REUSEPORT, which would let a second process
  // share a busy port instead of failing.
  server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  service->mount(server);
  const int bound = cfg.port == 0 ? server.bind_to_any_port(cfg.host)
                                  : (server.bind_to_port(cfg.host, cfg.port) ? cfg.port : -1);
  if (bound < 0) {
    std::cerr << "vizpriv: cannot bind " << cfg.host << ":" << cfg.port << "\n";
    return kExitConfig;
  }
  std::cout << "listening on http://" << cfg.host << ":" << bound << std::endl;
  std::thread loop([&] { server.listen_after_bind(); });
  int sig = 0;
  sigwait(&signals, &sig);
  server.stop();
  loop.join();
  service->wait_idle();
  service->persist_all();
  std::cerr << "vizpriv: shut down" << std::endl;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentially private chart publishing with pattern constraints"};
  app.require_subcommand(1);

  RunFlags synth_flags;
  auto* synth = app.add_subcommand("synth", "synthesize one dataset and its metrics");
  add_run_flags(synth, synth_flags);

  RunFlags sweep_flags;
  auto* sweep = app.add_subcommand("sweep", "replicate runs over epsilon and weight grids");
  add_run_flags(sweep, sweep_flags);

  std::optional<int> port;
  std::string state_dir;
  auto* serve = app.add_subcommand("serve", "run the HTTP service");
  serve->add_option("--port", port, "listen port, 0 for any");
  serve->add_option("--state-dir", state_dir, "session store directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitConfig;
  }

  try {
    if (*synth) return cmd_synth(synth_flags);
    if (*sweep) return cmd_sweep(sweep_flags);
    return cmd_serve(port, state_dir);
  } catch (const ConfigError& e) {
    std::cerr << "vizpriv: config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "vizpriv: " << e.what() << "\n";
    return kExitRuntime;
  }
}
