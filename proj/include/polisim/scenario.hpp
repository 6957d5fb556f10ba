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

#include <cstdint>
#include <string>
#include <string_view>

#include "polisim/json.hpp"
#include "polisim/policy.hpp"

namespace polisim {

// Parameters of the surrogate transmission model and of the DALY
// conversion. Field order here is the canonical serialization order.
struct EpiParameters {
  double m = 20.0;     // mosquitoes per human
  double a = 0.3;      // bites per mosquito per day
  double b = 0.5;      // mosquito -> human transmission per infectious bite
  double c = 0.5;      // human -> mosquito transmission per bite
  double g = 0.1;      // mosquito mortality per day
  double n_eip = 10.0; // extrinsic incubation period, days
  double r = 0.01;     // human recovery per day
  std::int64_t population = 10000;
  double cfr = 0.003;
  double disability_weight = 0.2;
  double episode_duration_days = 14.0;
  double yll_per_death = 30.0;

  friend bool operator==(const EpiParameters&, const EpiParameters&) = default;
};

struct InterventionEffects {
  double kappa_bite = 0.5;      // biting reduction at full ITN coverage
  double kappa_kill_itn = 0.44; // mortality increase at full ITN coverage
  double kappa_kill_irs = 0.6;  // mortality increase at full IRS coverage
  double unit_cost_itn = 2.5;   // per person-year
  double unit_cost_irs = 5.0;   // per person-year

  friend bool operator==(const InterventionEffects&,
                         const InterventionEffects&) = default;
};

enum class SimMode { kStochastic, kExpectation };

std::string_view SimModeName(SimMode mode);
SimMode ParseSimMode(std::string_view name);

inline constexpr int kDefaultHorizonDays = 1095;

// The germinated "seed input file" for one simulation task.
struct ScenarioDocument {
  std::string scenario_id;
  Policy policy;
  EpiParameters epi;
  InterventionEffects effects;
  int horizon_days = kDefaultHorizonDays;
  std::uint64_t seed = 0;
  SimMode mode = SimMode::kStochastic;

  friend bool operator==(const ScenarioDocument&,
                         const ScenarioDocument&) = default;
};

// Throws Error(kInvalidArgument) describing the first violated bound.
void Validate(const EpiParameters& epi);
void Validate(const InterventionEffects& effects);
void Validate(const ScenarioDocument& doc);

// Canonical byte form of every field except scenario_id: keys in declaration
// order, coverages with three decimals, other reals in shortest round-trip
// form, no whitespace. This is the hash input.
std::string CanonicalContent(const ScenarioDocument& doc);

// Lowercase hex SHA-256 of CanonicalContent.
std::string CanonicalHash(const ScenarioDocument& doc);

// Full document with "scenario_id" as the first key; the wire payload.
std::string CanonicalDocument(const ScenarioDocument& doc);

// Returns doc with scenario_id recomputed from its content.
ScenarioDocument Seal(ScenarioDocument doc);

// True if doc.scenario_id matches its content.
bool HasValidId(const ScenarioDocument& doc);

// Parses a document (any key order, unknown keys ignored). Does not check
// the id; see HasValidId. Throws Error(kParse) on missing or mistyped fields
// and Error(kInvalidArgument)/Error(kOutOfRange) on bad values.
ScenarioDocument ScenarioFromJson(const Json& j);

Json ToJson(const EpiParameters& epi);
Json ToJson(const InterventionEffects& effects);
Json ToJson(const Policy& policy);

// Missing keys keep the values already in `into`.
void MergeFromJson(const Json& j, EpiParameters& into);
void MergeFromJson(const Json& j, InterventionEffects& into);
Policy PolicyFromJson(const Json& j);

// Shortest decimal that round-trips to the same double, e.g. 20.0 -> "20",
// 0.1 -> "0.1", 1e-7 -> "1e-07".
std::string ShortestDecimal(double value);

}  // namespace polisim
