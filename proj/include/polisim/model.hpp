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

// Surrogate malaria transmission model.
//
// A Ross-Macdonald style model with one state variable, the number of
// infected humans. Mosquitoes are held at quasi-equilibrium: the sporozoite
// rate is an algebraic function of current human prevalence x,
//
//   s   = a' c x / (g' + a' c x) * exp(-g' n)
//   EIR = m a' s
//   lambda = b EIR
//
// where a' and g' are the biting and mosquito mortality rates after ITN and
// IRS. Each day, susceptibles are infected with probability 1 - exp(-lambda)
// and infected humans recover with probability 1 - exp(-r). Stochastic mode
// draws both counts from binomials (infections first, then recoveries);
// expectation mode replaces the draws with their means.

#pragma once

#include <cstdint>

#include "polisim/policy.hpp"
#include "polisim/rng.hpp"
#include "polisim/scenario.hpp"

namespace polisim {

struct EffectiveRates {
  double a_eff = 0.0;  // bites per mosquito per day after ITN
  double g_eff = 0.0;  // mosquito mortality per day after ITN and IRS
  double r0 = 0.0;
};

EffectiveRates ComputeEffectiveRates(const EpiParameters& epi,
                                     const InterventionEffects& effects,
                                     const Policy& policy);

// Closed-form endemic prevalence max(0, (R0 - 1) / (R0 + a' c / g')) of the
// continuous-time model.
double EquilibriumPrevalence(const EffectiveRates& rates, const EpiParameters& epi);

// Daily force of infection at human prevalence x.
double ForceOfInfection(const EffectiveRates& rates, const EpiParameters& epi,
                        double prevalence);

// Counts are real-valued in expectation mode and integral in stochastic
// mode.
struct SimState {
  int day = 0;
  double infected = 0.0;
  double cumulative_cases = 0.0;
};

SimState Step(const SimState& state, const EffectiveRates& rates, const EpiParameters& epi,
              Rng& rng, SimMode mode);

struct SimOutputs {
  double total_cases = 0.0;
  double final_prevalence = 0.0;
};

// Infected count at day 0: the no-intervention endemic equilibrium,
// round(x* * population).
double InitialInfected(const EpiParameters& epi, const InterventionEffects& effects);

// Runs doc.horizon_days steps under the document's policy from the endemic
// baseline. Deterministic in the document (the seed drives stochastic mode).
SimOutputs Simulate(const ScenarioDocument& doc);

}  // namespace polisim
