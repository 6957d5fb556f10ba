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

#include "polisim/worker.hpp"

#include <unistd.h>

#include <array>
#include <optional>
#include <thread>

#include <fmt/format.h>

#include "polisim/clerk.hpp"
#include "polisim/economics.hpp"
#include "polisim/error.hpp"
#include "polisim/log.hpp"
#include "polisim/model.hpp"
#include "polisim/scenario.hpp"

namespace polisim {

EvaluationResult ProcessTask(const Json& payload, const std::string& worker_id) {
  const auto started = std::chrono::steady_clock::now();
  EvaluationResult result;
  result.worker_id = worker_id;
  if (payload.is_object()) {
    if (auto it = payload.find("scenario_id"); it != payload.end() && it->is_string()) {
      result.scenario_id = it->get<std::string>();
    }
  }
  try {
    const ScenarioDocument doc = ScenarioFromJson(payload);
    if (!HasValidId(doc)) {
      throw Error(ErrorCode::kHashMismatch,
                  fmt::format("scenario_id {} does not match content hash {}",
                              doc.scenario_id, CanonicalHash(doc)));
    }
    const SimOutputs out = Simulate(doc);
    result.policy = doc.policy;
    result.total_cases = out.total_cases;
    result.total_deaths = out.total_cases * doc.epi.cfr;
    result.dalys = Dalys(out.total_cases, doc.epi);
    result.cost = PolicyCost(doc.policy, doc.epi, doc.effects, doc.horizon_days);
    result.final_prevalence = out.final_prevalence;
  } catch (const std::exception& e) {
    result.error = e.what();
  }
  result.wall_time_ms = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - started)
                            .count();
  return result;
}

std::string DefaultWorkerId() {
  std::array<char, 256> host{};
  if (::gethostname(host.data(), host.size() - 1) != 0) host[0] = '\0';
  const std::string name = host[0] ? host.data() : "worker";
  return fmt::format("{}-{}", name, ::getpid());
}

int RunWorker(const WorkerOptions& options, const std::atomic<bool>& stop) {
  const std::string id = options.worker_id.empty() ? DefaultWorkerId() : options.worker_id;
  std::optional<fabric::Client> client;
  try {
    client.emplace(fabric::Client::Connect(options.broker, options.connect));
    client->Subscribe(kTasksChannel);
  } catch (const Error& e) {
    Logger()->error("worker {}: {}", id, e.what());
    return 1;
  }
  Logger()->info("worker {} consuming '{}' from {}", id, kTasksChannel,
                 options.broker.ToString());

  std::size_t done = 0;
  while (!stop) {
    try {
      auto delivery = client->Next(std::chrono::milliseconds(200));
      if (!delivery) continue;
      if (options.simulate_delay.count() > 0) std::this_thread::sleep_for(options.simulate_delay);
      const EvaluationResult result = ProcessTask(delivery->payload, id);
      if (result.is_error()) {
        Logger()->warn("worker {}: quarantining task {}: {}", id, result.scenario_id,
                       *result.error);
      }
      client->Publish(kResultsChannel, ToJson(result));
      client->Ack(delivery->delivery_id);
      ++done;
      if (options.max_tasks > 0 && done >= options.max_tasks) break;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kConnectionLost) {
        Logger()->error("worker {}: {}", id, e.what());
        return 1;
      }
      Logger()->warn("worker {}: {}; reconnecting", id, e.what());
      try {
        client->Reconnect();
      } catch (const Error& again) {
        Logger()->error("worker {}: {}", id, again.what());
        return 1;
      }
    }
  }
  Logger()->info("worker {} stopping after {} tasks", id, done);
  return 0;
}

}  // namespace polisim
