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
#include <string>

#include "polisim/fabric/client.hpp"
#include "polisim/fabric/socket.hpp"
#include "polisim/json.hpp"
#include "polisim/result.hpp"

namespace polisim {

// Runs one task payload. Never throws: an unparseable document or one whose
// scenario_id does not match its content comes back as an error result.
// Baseline-dependent fields (dalys_averted, cost_per_daly_averted) are left
// empty for the clerk.
EvaluationResult ProcessTask(const Json& payload, const std::string& worker_id);

struct WorkerOptions {
  fabric::Endpoint broker;
  std::string worker_id;
  fabric::ConnectOptions connect;
  // Test aid: sleep this long before simulating each task.
  std::chrono::milliseconds simulate_delay{0};
  // Stop after this many tasks (0: no limit).
  std::size_t max_tasks = 0;
};

// "<hostname>-<pid>"
std::string DefaultWorkerId();

// Consumes `tasks` until `stop` is set, publishing each result on `results`
// before acking the task. A task in progress when `stop` is set is finished
// first. Returns 0 on a clean stop and 1 when the broker stayed unreachable
// for the whole retry window.
int RunWorker(const WorkerOptions& options, const std::atomic<bool>& stop);

}  // namespace polisim
