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

#include <compare>
#include <optional>
#include <string_view>

#include "polisim/json.hpp"

#include "polisim/policy.hpp"
#include "polisim/scenario.hpp"

namespace polisim {

inline constexpr std::string_view kIneffective = "INEFFECTIVE";

// Cost per DALY averted, or INEFFECTIVE when nothing was averted. Orders
// after every finite value. Serialized as a JSON number or "INEFFECTIVE".
class CostPerDaly {
 public:
  static CostPerDaly Ineffective() { return CostPerDaly(); }
  static CostPerDaly Of(double value) { return CostPerDaly(value); }

  bool ineffective() const { return !value_.has_value(); }
  // Precondition: !ineffective().
  double value() const { return *value_; }

  friend bool operator==(const CostPerDaly&, const CostPerDaly&) = default;
  friend std::partial_ordering operator<=>(const CostPerDaly& lhs, const CostPerDaly& rhs) {
    if (lhs.ineffective() || rhs.ineffective()) {
      return lhs.ineffective() <=> rhs.ineffective();
    }
    return *lhs.value_ <=> *rhs.value_;
  }

 private:
  CostPerDaly() = default;
  explicit CostPerDaly(double value) : value_(value) {}

  std::optional<double> value_;
};

Json ToJson(const CostPerDaly& v);
// Throws Error(kParse) on anything but a non-negative number or "INEFFECTIVE".
CostPerDaly CostPerDalyFromJson(const Json& j);

struct EconSummary {
  double dalys = 0.0;
  double cost = 0.0;
  double dalys_averted = 0.0;
  CostPerDaly cost_per_daly_averted = CostPerDaly::Ineffective();
};

// Morbidity plus mortality burden:
//   cases * disability_weight * duration/365 + cases * cfr * yll_per_death
double Dalys(double total_cases, const EpiParameters& epi);

// population * horizon/365 * (itn * unit_cost_itn + irs * unit_cost_irs)
double PolicyCost(const Policy& policy, const EpiParameters& epi,
                  const InterventionEffects& effects, int horizon_days);

// Compares a policy run against the zero-intervention baseline run under the
// same parameters, horizon, mode and seed.
EconSummary CostEffectiveness(double policy_cases, double policy_cost, double baseline_cases,
                              const EpiParameters& epi);

}  // namespace polisim
