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

#include "polisim/model.hpp"

#include <algorithm>
#include <cmath>

namespace polisim {

EffectiveRates ComputeEffectiveRates(const EpiParameters& epi,
                                     const InterventionEffects& effects,
                                     const Policy& policy) {
  const double itn = policy.itn_coverage();
  const double irs = policy.irs_coverage();
  EffectiveRates rates;
  rates.a_eff = epi.a * (1.0 - effects.kappa_bite * itn);
  rates.g_eff = epi.g * (1.0 + effects.kappa_kill_itn * itn + effects.kappa_kill_irs * irs);
  rates.r0 = epi.m * rates.a_eff * rates.a_eff * epi.b * epi.c *
             std::exp(-rates.g_eff * epi.n_eip) / (epi.r * rates.g_eff);
  return rates;
}

double EquilibriumPrevalence(const EffectiveRates& rates, const EpiParameters& epi) {
  if (rates.r0 <= 1.0) return 0.0;
  return std::max(0.0, (rates.r0 - 1.0) / (rates.r0 + rates.a_eff * epi.c / rates.g_eff));
}

double ForceOfInfection(const EffectiveRates& rates, const EpiParameters& epi,
                        double prevalence) {
  const double human_to_mosquito = rates.a_eff * epi.c * prevalence;
  if (human_to_mosquito <= 0.0) return 0.0;
  const double sporozoite = human_to_mosquito / (rates.g_eff + human_to_mosquito) *
                            std::exp(-rates.g_eff * epi.n_eip);
  const double eir = epi.m * rates.a_eff * sporozoite;
  return epi.b * eir;
}

SimState Step(const SimState& state, const EffectiveRates& rates, const EpiParameters& epi,
              Rng& rng, SimMode mode) {
  const double population = static_cast<double>(epi.population);
  const double lambda = ForceOfInfection(rates, epi, state.infected / population);
  const double p_infect = -std::expm1(-lambda);
  const double p_recover = -std::expm1(-epi.r);
  const double susceptible = population - state.infected;

  double infections;
  double recoveries;
  if (mode == SimMode::kStochastic) {
    infections = static_cast<double>(
        rng.Binomial(static_cast<std::int64_t>(susceptible), p_infect));
    recoveries = static_cast<double>(
        rng.Binomial(static_cast<std::int64_t>(state.infected), p_recover));
  } else {
    infections = susceptible * p_infect;
    recoveries = state.infected * p_recover;
  }

  SimState next;
  next.day = state.day + 1;
  next.infected = std::clamp(state.infected + infections - recoveries, 0.0, population);
  next.cumulative_cases = state.cumulative_cases + infections;
  return next;
}

double InitialInfected(const EpiParameters& epi, const InterventionEffects& effects) {
  const EffectiveRates baseline = ComputeEffectiveRates(epi, effects, Policy{});
  return std::round(EquilibriumPrevalence(baseline, epi) * static_cast<double>(epi.population));
}

SimOutputs Simulate(const ScenarioDocument& doc) {
  const EffectiveRates rates = ComputeEffectiveRates(doc.epi, doc.effects, doc.policy);
  Rng rng(doc.seed);
  SimState state;
  state.infected = InitialInfected(doc.epi, doc.effects);
  for (int day = 0; day < doc.horizon_days; ++day) {
    state = Step(state, rates, doc.epi, rng, doc.mode);
  }
  return {state.cumulative_cases,
          state.infected / static_cast<double>(doc.epi.population)};
}

}  // namespace polisim
