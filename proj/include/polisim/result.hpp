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

#include <optional>
#include <string>

#include "polisim/economics.hpp"
#include "polisim/json.hpp"
#include "polisim/policy.hpp"

namespace polisim {

// Outcome of one scenario. Workers fill everything that depends on the
// scenario alone; dalys_averted and cost_per_daly_averted need the baseline
// and are filled by the clerk before the record is stored. A result with
// `error` set carries only scenario_id, worker_id and the error text.
struct EvaluationResult {
  std::string scenario_id;
  Policy policy;
  double total_cases = 0.0;
  double total_deaths = 0.0;
  double dalys = 0.0;
  double cost = 0.0;
  std::optional<double> dalys_averted;
  std::optional<CostPerDaly> cost_per_daly_averted;
  double final_prevalence = 0.0;
  double wall_time_ms = 0.0;
  std::string worker_id;
  std::optional<std::string> error;

  bool is_error() const { return error.has_value(); }
};

Json ToJson(const EvaluationResult& result);
// Throws Error(kParse) on missing or mistyped fields.
EvaluationResult ResultFromJson(const Json& j);

}  // namespace polisim
