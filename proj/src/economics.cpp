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

#include "polisim/economics.hpp"

#include <cmath>

#include "polisim/error.hpp"

namespace polisim {

Json ToJson(const CostPerDaly& v) {
  if (v.ineffective()) return std::string(kIneffective);
  return v.value();
}

CostPerDaly CostPerDalyFromJson(const Json& j) {
  if (j.is_string() && j.get<std::string>() == kIneffective) return CostPerDaly::Ineffective();
  if (j.is_number()) {
    const double v = j.get<double>();
    if (std::isfinite(v) && v >= 0.0) return CostPerDaly::Of(v);
  }
  throw Error(ErrorCode::kParse, "cost_per_daly_averted must be a non-negative number or INEFFECTIVE");
}

double Dalys(double total_cases, const EpiParameters& epi) {
  const double morbidity =
      total_cases * epi.disability_weight * (epi.episode_duration_days / 365.0);
  const double mortality = total_cases * epi.cfr * epi.yll_per_death;
  return morbidity + mortality;
}

double PolicyCost(const Policy& policy, const EpiParameters& epi,
                  const InterventionEffects& effects, int horizon_days) {
  const double per_person_year = policy.itn_coverage() * effects.unit_cost_itn +
                                 policy.irs_coverage() * effects.unit_cost_irs;
  return static_cast<double>(epi.population) * (horizon_days / 365.0) * per_person_year;
}

EconSummary CostEffectiveness(double policy_cases, double policy_cost, double baseline_cases,
                              const EpiParameters& epi) {
  EconSummary summary;
  summary.dalys = Dalys(policy_cases, epi);
  summary.cost = policy_cost;
  summary.dalys_averted = Dalys(baseline_cases, epi) - summary.dalys;
  if (summary.dalys_averted > 0.0) {
    summary.cost_per_daly_averted = CostPerDaly::Of(summary.cost / summary.dalys_averted);
  }
  return summary;
}

}  // namespace polisim
