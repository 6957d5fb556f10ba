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

#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "polisim/datastore.hpp"
#include "polisim/economics.hpp"
#include "polisim/fabric/client.hpp"
#include "polisim/json.hpp"
#include "polisim/result.hpp"
#include "polisim/scenario.hpp"

namespace polisim {

inline constexpr const char* kTasksChannel = "tasks";
inline constexpr const char* kResultsChannel = "results";

// Everything but the policy that goes into a scenario document.
struct SeedTemplate {
  EpiParameters epi;
  InterventionEffects effects;
  int horizon_days = kDefaultHorizonDays;
  SimMode mode = SimMode::kStochastic;
  std::uint64_t base_seed = 1;
  int replicates = 1;

  // Replicate count after the mode constraint: expectation mode is
  // deterministic, so it always has exactly one.
  int effective_replicates() const { return mode == SimMode::kExpectation ? 1 : replicates; }
};

// Missing keys keep their defaults. Throws Error(kParse) or
// Error(kInvalidArgument).
SeedTemplate TemplateFromJson(const Json& j);
SeedTemplate LoadTemplate(const std::filesystem::path& path);
Json ToJson(const SeedTemplate& t);

// Scenario for one replicate: seed = base_seed + replicate_index (wrapping),
// id sealed. Throws Error(kPrecondition) unless
// 0 <= replicate_index < effective_replicates().
ScenarioDocument Germinate(const SeedTemplate& t, const Policy& policy, int replicate_index);

// Mean over replicates. INEFFECTIVE replicates are left out of the
// cost-per-DALY mean; the aggregate is INEFFECTIVE only if all are.
EconSummary AggregateReplicates(const std::vector<EconSummary>& replicates);

struct ClerkOptions {
  fabric::Endpoint broker;
  std::chrono::milliseconds task_timeout{std::chrono::seconds(120)};
  fabric::ConnectOptions connect;
};

struct ClerkStats {
  std::size_t published = 0;   // tasks sent to workers
  std::size_t cache_hits = 0;  // replicates answered from the datastore
  std::size_t results_received = 0;
  std::size_t duplicate_results = 0;
};

// Germinates tasks, answers from the datastore when it can, publishes the
// rest on `tasks`, and matches `results` back to callers by scenario_id.
// Evaluate* may be called from many threads at once. The datastore must
// outlive the clerk.
class Clerk {
 public:
  Clerk(SeedTemplate seed_template, Datastore& store, ClerkOptions options);
  ~Clerk();

  Clerk(const Clerk&) = delete;
  Clerk& operator=(const Clerk&) = delete;

  // All replicates of the template, aggregated. Throws Error(kTimeout),
  // Error(kTaskFailed) for a poisoned task, or Error(kConnectionLost).
  EconSummary EvaluatePolicy(const Policy& policy);

  // One replicate against the baseline replicate with the same seed.
  EconSummary EvaluateReplicate(const Policy& policy, int replicate_index);

  // Raw result for a germinated document, from the store or from a worker.
  EvaluationResult Fetch(const ScenarioDocument& doc);

  ClerkStats stats() const;
  const SeedTemplate& seed_template() const { return template_; }

 private:
  struct Waiter {
    std::promise<EvaluationResult> promise;
    std::shared_future<EvaluationResult> future;
  };

  std::shared_future<EvaluationResult> Request(const ScenarioDocument& doc);
  EvaluationResult Await(const std::shared_future<EvaluationResult>& future,
                         const std::string& scenario_id);
  double BaselineCases(int replicate_index);
  void HandleResult(const Json& payload);
  void FailAll(const std::string& reason);

  SeedTemplate template_;
  Datastore& store_;
  ClerkOptions options_;

  std::mutex publish_mu_;
  fabric::Client publisher_;

  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Waiter>> waiting_;
  ClerkStats stats_;

  std::atomic<bool> stopping_{false};
  std::thread listener_;
};

}  // namespace polisim
