// Copyright 2026 The Polisim Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// polisim: broker, worker, clerk, bandit agent, oracle and surface report
// in one binary. Data goes to stdout (or --out); diagnostics go to stderr.

#include <csignal>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <climits>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "polisim/bandit.hpp"
#include "polisim/clerk.hpp"
#include "polisim/datastore.hpp"
#include "polisim/error.hpp"
#include "polisim/evaluators.hpp"
#include "polisim/fabric/broker.hpp"
#include "polisim/log.hpp"
#include "polisim/model.hpp"
#include "polisim/worker.hpp"

namespace {

using polisim::Error;
using polisim::ErrorCode;
using polisim::Json;
using polisim::Policy;

std::atomic<bool> g_stop{false};

void OnSignal(int) { g_stop = true; }

void InstallSignalHandlers() {
  struct sigaction action {};
  action.sa_handler = OnSignal;
  sigemptyset(&action.sa_mask);
  ::sigaction(SIGINT, &action, nullptr);
  ::sigaction(SIGTERM, &action, nullptr);
  std::signal(SIGPIPE, SIG_IGN);
}

// "--task-timeout-secs" -> "POLISIM_TASK_TIMEOUT_SECS"
std::string EnvName(const std::string& flag) {
  std::string out = "POLISIM_";
  for (char c : flag.substr(flag.find_first_not_of('-'))) {
    out += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  }
  return out;
}

template <typename T>
CLI::Option* Flag(CLI::App* app, const std::string& flag, T& value, const std::string& help) {
  return app->add_option(flag, value, help)->envname(EnvName(flag))->capture_default_str();
}

void WriteOutput(const std::string& out_path, const std::string& text) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text << std::flush;
    return;
  }
  std::ofstream out(out_path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + out_path);
  out << text;
  if (!out.flush()) throw Error(ErrorCode::kIo, "write failed for " + out_path);
}

// "0.5,0.25" or {"itn": 0.5, "irs": 0.25}
Policy ParsePolicyText(const std::string& text) {
  const auto first = text.find_first_not_of(" \t");
  if (first != std::string::npos && text[first] == '{') {
    const Json j = Json::parse(text, nullptr, false);
    if (j.is_discarded()) throw Error(ErrorCode::kParse, "bad policy JSON: " + text);
    const char* itn = j.contains("itn") ? "itn" : "itn_coverage";
    const char* irs = j.contains("irs") ? "irs" : "irs_coverage";
    if (!j.contains(itn) || !j.contains(irs) || !j.at(itn).is_number() ||
        !j.at(irs).is_number()) {
      throw Error(ErrorCode::kParse, "policy JSON needs numeric itn and irs: " + text);
    }
    return polisim::MakePolicy(j.at(itn).get<double>(), j.at(irs).get<double>());
  }
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw Error(ErrorCode::kParse, "policy must be 'itn,irs': " + text);
  try {
    std::size_t used_a = 0;
    std::size_t used_b = 0;
    const std::string a = text.substr(0, comma);
    const std::string b = text.substr(comma + 1);
    const double itn = std::stod(a, &used_a);
    const double irs = std::stod(b, &used_b);
    if (a.find_first_not_of(" \t", used_a) != std::string::npos ||
        b.find_first_not_of(" \t\r", used_b) != std::string::npos) {
      throw std::invalid_argument("trailing characters");
    }
    return polisim::MakePolicy(itn, irs);
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::kParse, "policy must be 'itn,irs': " + text);
  }
}

Json SummaryJson(const Policy& policy, int replicates, const polisim::EconSummary& s) {
  Json j;
  j["itn"] = policy.itn_coverage();
  j["irs"] = policy.irs_coverage();
  j["replicates"] = replicates;
  j["dalys"] = s.dalys;
  j["cost"] = s.cost;
  j["dalys_averted"] = s.dalys_averted;
  j["cost_per_daly_averted"] = polisim::ToJson(s.cost_per_daly_averted);
  return j;
}

// Options shared by subcommands that build scenarios.
struct TemplateFlags {
  std::string template_path;
  std::optional<int> replicates;
  std::optional<std::string> mode;
  std::optional<std::uint64_t> base_seed;

  void Add(CLI::App* app) {
    Flag(app, "--template", template_path, "JSON scenario template (defaults when absent)");
    Flag(app, "--replicates", replicates, "replicates per policy");
    Flag(app, "--mode", mode, "stochastic or expectation")
        ->check(CLI::IsMember({"stochastic", "expectation"}));
    Flag(app, "--base-seed", base_seed, "seed of replicate 0");
  }

  polisim::SeedTemplate Build() const {
    polisim::SeedTemplate t;
    if (!template_path.empty()) t = polisim::LoadTemplate(template_path);
    if (mode) t.mode = polisim::ParseSimMode(*mode);
    if (base_seed) t.base_seed = *base_seed;
    if (replicates) {
      if (*replicates < 1) throw Error(ErrorCode::kInvalidArgument, "--replicates must be >= 1");
      t.replicates = *replicates;
    }
    if (t.mode == polisim::SimMode::kExpectation) t.replicates = 1;
    return t;
  }
};

struct ClerkFlags {
  std::string broker = "127.0.0.1:5680";
  std::string store;
  double task_timeout_secs = 120;
  double retry_window_secs = 60;

  void Add(CLI::App* app, bool store_required) {
    Flag(app, "--broker", broker, "broker address host:port");
    auto* s = Flag(app, "--store", store, "datastore path (JSON lines)");
    if (store_required) s->required();
    Flag(app, "--task-timeout-secs", task_timeout_secs, "give up on a task after this long");
    Flag(app, "--retry-window-secs", retry_window_secs, "broker connect retry window");
  }

  polisim::ClerkOptions Options() const {
    polisim::ClerkOptions o;
    o.broker = polisim::fabric::ParseEndpoint(broker);
    o.task_timeout = std::chrono::milliseconds(static_cast<std::int64_t>(task_timeout_secs * 1000));
    o.connect.retry_window =
        std::chrono::milliseconds(static_cast<std::int64_t>(retry_window_secs * 1000));
    return o;
  }
};

int RunBroker(const std::string& listen, double visibility_secs, const std::string& event_log) {
  polisim::fabric::Broker::Options options;
  options.listen = polisim::fabric::ParseEndpoint(listen);
  options.visibility_timeout =
      std::chrono::milliseconds(static_cast<std::int64_t>(visibility_secs * 1000));
  options.event_log_path = event_log;
  polisim::fabric::Broker broker(options);
  broker.Start();
  std::cout << "polisim broker listening on " << broker.endpoint().ToString() << std::endl;
  while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  polisim::Logger()->info("broker shutting down");
  broker.Stop();
  return 0;
}

int RunClerkServe(const ClerkFlags& flags, const TemplateFlags& tflags,
                  const std::vector<std::string>& policy_texts, std::optional<double> grid_step,
                  int parallel) {
  const polisim::SeedTemplate t = tflags.Build();
  std::vector<Policy> policies;
  if (grid_step) policies = polisim::PolicyGrid(*grid_step);
  for (const std::string& text : policy_texts) policies.push_back(ParsePolicyText(text));
  const bool from_stdin = !grid_step && policy_texts.empty();

  polisim::Datastore store(flags.store);
  polisim::Clerk clerk(t, store, flags.Options());
  const int replicates = t.effective_replicates();

  std::mutex out_mu;
  std::atomic<bool> failed{false};
  auto evaluate = [&](const Policy& policy) -> Json {
    try {
      return SummaryJson(policy, replicates, clerk.EvaluatePolicy(policy));
    } catch (const std::exception& e) {
      polisim::Logger()->error("policy {}: {}", policy.ToString(), e.what());
      failed = true;
      Json j = {{"itn", policy.itn_coverage()}, {"irs", policy.irs_coverage()}};
      j["error"] = e.what();
      return j;
    }
  };

  if (from_stdin) {
    std::string line;
    while (!g_stop && std::getline(std::cin, line)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      const Json out = evaluate(ParsePolicyText(line));
      std::cout << polisim::Dump(out) << std::endl;
    }
  } else {
    // Several policies in flight keep every worker busy; output stays in
    // input order.
    std::vector<std::optional<Json>> outputs(policies.size());
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> threads;
    const int n_threads = std::max(1, std::min<int>(parallel, static_cast<int>(policies.size())));
    for (int i = 0; i < n_threads; ++i) {
      threads.emplace_back([&] {
        for (std::size_t k = next++; k < policies.size() && !g_stop && !failed; k = next++) {
          Json out = evaluate(policies[k]);
          std::lock_guard lock(out_mu);
          outputs[k] = std::move(out);
        }
      });
    }
    for (auto& thread : threads) thread.join();
    for (const auto& out : outputs) {
      if (out) std::cout << polisim::Dump(*out) << '\n';
    }
    std::cout << std::flush;
  }

  const polisim::ClerkStats stats = clerk.stats();
  std::cerr << fmt::format("summary: policies={} published={} cache_hits={} stored_results={}\n",
                           policies.size(), stats.published, stats.cache_hits,
                           store.result_count(false));
  if (g_stop) return 130;
  return failed ? 1 : 0;
}

struct AgentFlags {
  std::string strategy = "ucb";
  std::int64_t budget = 0;
  double grid_step = 0.1;
  std::uint64_t seed = 1;
  double epsilon0 = polisim::BanditConfig{}.epsilon0;
  double ucb_c = polisim::BanditConfig{}.ucb_c;
  double prior_mean = polisim::BanditConfig{}.prior_mean;
  double prior_strength = polisim::BanditConfig{}.prior_strength;
  double prior_variance = polisim::BanditConfig{}.prior_variance;
  double reward_cap = polisim::kDefaultRewardCap;
  bool use_clerk = false;
  std::string out;
  std::string pull_log;
};

int RunAgent(const AgentFlags& a, const ClerkFlags& cflags, const TemplateFlags& tflags) {
  polisim::BanditConfig config;
  config.strategy = polisim::ParseStrategy(a.strategy);
  config.budget = a.budget;
  config.epsilon0 = a.epsilon0;
  config.ucb_c = a.ucb_c;
  config.prior_mean = a.prior_mean;
  config.prior_strength = a.prior_strength;
  config.prior_variance = a.prior_variance;
  config.rng_seed = a.seed;
  config.reward_cap = a.reward_cap;

  polisim::SeedTemplate t = tflags.Build();
  const std::vector<Policy> grid = polisim::PolicyGrid(a.grid_step);
  const auto oracle = polisim::OracleSurface(t, grid, config.reward_cap);

  polisim::BanditReport report;
  if (a.use_clerk) {
    if (cflags.store.empty()) throw Error(ErrorCode::kInvalidArgument, "--clerk needs --store");
    // Pull k of an arm is replicate k, so the template must cover the budget.
    if (t.mode == polisim::SimMode::kStochastic) {
      t.replicates = static_cast<int>(std::clamp<std::int64_t>(a.budget, t.replicates, INT_MAX));
    }
    polisim::Datastore store(cflags.store);
    polisim::Clerk clerk(t, store, cflags.Options());
    polisim::ClerkEvaluator evaluator(clerk);
    report = polisim::RunBandit(config, grid, oracle, [&](const Policy& p) {
      if (g_stop) throw Error(ErrorCode::kConnectionLost, "interrupted");
      return evaluator(p);
    });
  } else {
    polisim::ModelEvaluator evaluator(t);
    report = polisim::RunBandit(config, grid, oracle, [&](const Policy& p) {
      if (g_stop) throw Error(ErrorCode::kConnectionLost, "interrupted");
      return evaluator(p);
    });
  }

  Json j = polisim::ToJson(report);
  const int best = polisim::OracleArgmax(oracle);
  j["oracle_best_policy"] = polisim::ToJson(grid[best]);
  j["oracle_best_reward"] = oracle[best].expected_reward;
  WriteOutput(a.out, polisim::Dump(j) + "\n");
  if (!a.pull_log.empty()) WriteOutput(a.pull_log, polisim::PullLogCsv(report));
  if (!report.complete) {
    polisim::Logger()->error("run incomplete after {} pulls: {}", report.pulls.size(),
                             report.abort_reason);
    return 1;
  }
  return 0;
}

int RunOracle(const TemplateFlags& tflags, double grid_step, const std::string& store_path,
              double reward_cap, const std::string& out) {
  polisim::SeedTemplate t = tflags.Build();
  t.mode = polisim::SimMode::kExpectation;
  t.replicates = 1;
  const std::vector<Policy> grid = polisim::PolicyGrid(grid_step);
  const auto surface = polisim::OracleSurface(t, grid, reward_cap);

  std::optional<polisim::Datastore> store;
  if (!store_path.empty()) store.emplace(store_path);
  std::string text;
  for (const polisim::OraclePoint& p : surface) {
    if (store) {
      const polisim::ScenarioDocument doc = polisim::Germinate(t, p.policy, 0);
      polisim::EvaluationResult r =
          polisim::ProcessTask(Json::parse(polisim::CanonicalDocument(doc)), "oracle");
      r.dalys_averted = p.summary.dalys_averted;
      r.cost_per_daly_averted = p.summary.cost_per_daly_averted;
      store->PutScenario(doc);
      store->PutResult(r);
    }
    Json j = SummaryJson(p.policy, 1, p.summary);
    j["expected_reward"] = p.expected_reward;
    text += polisim::Dump(j) + "\n";
  }
  WriteOutput(out, text);
  const int best = polisim::OracleArgmax(surface);
  polisim::Logger()->info("oracle argmax {} (reward {})", grid[best].ToString(),
                          surface[best].expected_reward);
  return 0;
}

int RunReport(const std::string& store_path, const std::string& out) {
  if (!std::filesystem::exists(store_path)) {
    throw Error(ErrorCode::kIo, "no datastore at " + store_path);
  }
  polisim::Datastore store(store_path, {polisim::Datastore::Access::kReadOnly, false});
  WriteOutput(out, polisim::SurfaceCsv(store.QuerySurface()));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"polisim: malaria intervention policy evaluation"};
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error, off")
      ->envname("POLISIM_LOG_LEVEL")
      ->capture_default_str();

  // broker
  auto* broker_cmd = app.add_subcommand("broker", "Run the message broker");
  std::string listen = "127.0.0.1:5680";
  double visibility_secs = 60;
  std::string event_log;
  Flag(broker_cmd, "--listen", listen, "address to bind, host:port (port 0 picks one)");
  Flag(broker_cmd, "--visibility-timeout-secs", visibility_secs,
       "requeue an unacked delivery after this long");
  Flag(broker_cmd, "--event-log", event_log, "append broker events to this JSON lines file");

  // worker
  auto* worker_cmd = app.add_subcommand("worker", "Consume simulation tasks");
  std::string worker_broker = "127.0.0.1:5680";
  std::string worker_id;
  std::int64_t simulate_delay_ms = 0;
  std::size_t max_tasks = 0;
  double worker_retry_secs = 60;
  Flag(worker_cmd, "--broker", worker_broker, "broker address host:port");
  Flag(worker_cmd, "--worker-id", worker_id, "identifier in results (default hostname-pid)");
  Flag(worker_cmd, "--simulate-delay-ms", simulate_delay_ms, "extra delay per task (testing)");
  Flag(worker_cmd, "--max-tasks", max_tasks, "exit after this many tasks (0: no limit)");
  Flag(worker_cmd, "--retry-window-secs", worker_retry_secs, "broker connect retry window");

  // clerk-serve
  auto* clerk_cmd = app.add_subcommand("clerk-serve", "Evaluate policies through the workers");
  ClerkFlags clerk_flags;
  TemplateFlags clerk_template;
  std::vector<std::string> policy_texts;
  std::optional<double> clerk_grid_step;
  int parallel = 8;
  clerk_flags.Add(clerk_cmd, true);
  clerk_template.Add(clerk_cmd);
  clerk_cmd->add_option("--policy", policy_texts, "policy 'itn,irs' (repeatable)");
  Flag(clerk_cmd, "--grid-step", clerk_grid_step, "evaluate the full grid with this step");
  Flag(clerk_cmd, "--parallel", parallel, "policies evaluated concurrently");

  // agent
  auto* agent_cmd = app.add_subcommand("agent", "Search the policy grid with a bandit");
  AgentFlags agent;
  ClerkFlags agent_clerk;
  TemplateFlags agent_template;
  Flag(agent_cmd, "--strategy", agent.strategy, "eps, ucb, ts or uniform")
      ->check(CLI::IsMember({"eps", "ucb", "ts", "uniform", "epsilon_greedy", "ucb1", "thompson"}));
  Flag(agent_cmd, "--budget", agent.budget, "number of pulls")->required();
  Flag(agent_cmd, "--grid-step", agent.grid_step, "grid spacing of the arms");
  Flag(agent_cmd, "--seed", agent.seed, "agent RNG seed");
  Flag(agent_cmd, "--epsilon0", agent.epsilon0, "initial exploration rate (eps)");
  Flag(agent_cmd, "--ucb-c", agent.ucb_c, "exploration coefficient (ucb)");
  Flag(agent_cmd, "--prior-mean", agent.prior_mean, "prior mean reward (ts)");
  Flag(agent_cmd, "--prior-strength", agent.prior_strength, "prior pseudo-count (ts)");
  Flag(agent_cmd, "--prior-variance", agent.prior_variance, "prior variance (ts)");
  Flag(agent_cmd, "--reward-cap", agent.reward_cap, "cost per DALY cap");
  agent_cmd->add_flag("--clerk", agent.use_clerk, "evaluate through the broker and workers")
      ->envname("POLISIM_CLERK");
  Flag(agent_cmd, "--out", agent.out, "report JSON path (default stdout)");
  Flag(agent_cmd, "--pull-log", agent.pull_log, "pull log CSV path");
  agent_clerk.Add(agent_cmd, false);
  agent_template.Add(agent_cmd);

  // oracle
  auto* oracle_cmd = app.add_subcommand("oracle", "Compute the expectation-mode surface");
  TemplateFlags oracle_template;
  double oracle_step = 0.1;
  std::string oracle_store;
  double oracle_cap = polisim::kDefaultRewardCap;
  std::string oracle_out;
  oracle_template.Add(oracle_cmd);
  Flag(oracle_cmd, "--grid-step", oracle_step, "grid spacing");
  Flag(oracle_cmd, "--store", oracle_store, "also record the surface in this datastore");
  Flag(oracle_cmd, "--reward-cap", oracle_cap, "cost per DALY cap");
  Flag(oracle_cmd, "--out", oracle_out, "output path (default stdout)");

  // report
  auto* report_cmd = app.add_subcommand("report", "Export the cost-per-DALY surface as CSV");
  std::string report_store;
  std::string report_out;
  Flag(report_cmd, "--store", report_store, "datastore path")->required();
  Flag(report_cmd, "--out", report_out, "CSV path (default stdout)");

  CLI11_PARSE(app, argc, argv);

  polisim::Logger()->set_level(spdlog::level::from_str(log_level));
  InstallSignalHandlers();
  try {
    if (*broker_cmd) return RunBroker(listen, visibility_secs, event_log);
    if (*worker_cmd) {
      polisim::WorkerOptions options;
      options.broker = polisim::fabric::ParseEndpoint(worker_broker);
      options.worker_id = worker_id;
      options.simulate_delay = std::chrono::milliseconds(simulate_delay_ms);
      options.max_tasks = max_tasks;
      options.connect.retry_window =
          std::chrono::milliseconds(static_cast<std::int64_t>(worker_retry_secs * 1000));
      return polisim::RunWorker(options, g_stop);
    }
    if (*clerk_cmd) {
      return RunClerkServe(clerk_flags, clerk_template, policy_texts, clerk_grid_step, parallel);
    }
    if (*agent_cmd) return RunAgent(agent, agent_clerk, agent_template);
    if (*oracle_cmd) {
      return RunOracle(oracle_template, oracle_step, oracle_store, oracle_cap, oracle_out);
    }
    if (*report_cmd) return RunReport(report_store, report_out);
  } catch (const Error& e) {
    polisim::Logger()->error("{}", e.what());
    return 1;
  } catch (const std::exception& e) {
    polisim::Logger()->error("{}", e.what());
    return 1;
  }
  return 1;
}
