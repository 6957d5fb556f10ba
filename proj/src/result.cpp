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

#include "polisim/result.hpp"

#include <fmt/format.h>

#include "polisim/error.hpp"
#include "polisim/scenario.hpp"

namespace polisim {
namespace {

const Json& Need(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw Error(ErrorCode::kParse, fmt::format("result missing '{}'", key));
  return *it;
}

double Number(const Json& j, const char* key) {
  const auto& v = Need(j, key);
  if (!v.is_number()) throw Error(ErrorCode::kParse, fmt::format("result field '{}' not a number", key));
  return v.get<double>();
}

std::string Text(const Json& j, const char* key) {
  const auto& v = Need(j, key);
  if (!v.is_string()) throw Error(ErrorCode::kParse, fmt::format("result field '{}' not a string", key));
  return v.get<std::string>();
}

}  // namespace

Json ToJson(const EvaluationResult& r) {
  Json j;
  j["scenario_id"] = r.scenario_id;
  if (r.error) {
    j["worker_id"] = r.worker_id;
    j["error"] = *r.error;
    return j;
  }
  j["policy"] = ToJson(r.policy);
  j["total_cases"] = r.total_cases;
  j["total_deaths"] = r.total_deaths;
  j["dalys"] = r.dalys;
  j["cost"] = r.cost;
  j["dalys_averted"] = r.dalys_averted ? Json(*r.dalys_averted) : Json(nullptr);
  j["cost_per_daly_averted"] =
      r.cost_per_daly_averted ? ToJson(*r.cost_per_daly_averted) : Json(nullptr);
  j["final_prevalence"] = r.final_prevalence;
  j["wall_time_ms"] = r.wall_time_ms;
  j["worker_id"] = r.worker_id;
  return j;
}

EvaluationResult ResultFromJson(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kParse, "result is not an object");
  EvaluationResult r;
  r.scenario_id = Text(j, "scenario_id");
  if (j.contains("worker_id")) r.worker_id = Text(j, "worker_id");
  if (j.contains("error") && !j.at("error").is_null()) {
    r.error = Text(j, "error");
    return r;
  }
  r.policy = PolicyFromJson(Need(j, "policy"));
  r.total_cases = Number(j, "total_cases");
  r.total_deaths = Number(j, "total_deaths");
  r.dalys = Number(j, "dalys");
  r.cost = Number(j, "cost");
  if (j.contains("dalys_averted") && !j.at("dalys_averted").is_null()) {
    r.dalys_averted = Number(j, "dalys_averted");
  }
  if (j.contains("cost_per_daly_averted") && !j.at("cost_per_daly_averted").is_null()) {
    r.cost_per_daly_averted = CostPerDalyFromJson(j.at("cost_per_daly_averted"));
  }
  if (j.contains("final_prevalence")) r.final_prevalence = Number(j, "final_prevalence");
  if (j.contains("wall_time_ms")) r.wall_time_ms = Number(j, "wall_time_ms");
  return r;
}

}  // namespace polisim
