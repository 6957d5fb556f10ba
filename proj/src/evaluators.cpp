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

#include "polisim/evaluators.hpp"

#include "polisim/model.hpp"

namespace polisim {

std::optional<double> CaseCache::Find(const Policy& policy, std::uint64_t seed) const {
  std::lock_guard lock(mu_);
  auto it = cases_.find({policy.itn_milli(), policy.irs_milli(), seed});
  if (it == cases_.end()) return std::nullopt;
  return it->second;
}

void CaseCache::Insert(const Policy& policy, std::uint64_t seed, double cases) {
  std::lock_guard lock(mu_);
  cases_.emplace(std::make_tuple(policy.itn_milli(), policy.irs_milli(), seed), cases);
}

std::size_t CaseCache::size() const {
  std::lock_guard lock(mu_);
  return cases_.size();
}

ModelEvaluator::ModelEvaluator(SeedTemplate seed_template, std::shared_ptr<CaseCache> cache)
    : template_(std::move(seed_template)), cache_(std::move(cache)) {}

double ModelEvaluator::Cases(const Policy& policy, std::uint64_t seed) {
  // Expectation mode ignores the seed.
  if (template_.mode == SimMode::kExpectation) seed = 0;
  if (auto hit = cache_->Find(policy, seed)) return *hit;
  ScenarioDocument doc;
  doc.policy = policy;
  doc.epi = template_.epi;
  doc.effects = template_.effects;
  doc.horizon_days = template_.horizon_days;
  doc.seed = seed;
  doc.mode = template_.mode;
  const double cases = Simulate(doc).total_cases;
  ++simulations_;
  cache_->Insert(policy, seed, cases);
  return cases;
}

EconSummary ModelEvaluator::EvaluateReplicate(const Policy& policy,
                                              std::uint64_t replicate_index) {
  const std::uint64_t seed = template_.base_seed + replicate_index;
  const double baseline = Cases(Policy{}, seed);
  const double cases = policy.is_zero() ? baseline : Cases(policy, seed);
  const double cost =
      PolicyCost(policy, template_.epi, template_.effects, template_.horizon_days);
  return CostEffectiveness(cases, cost, baseline, template_.epi);
}

EconSummary ModelEvaluator::operator()(const Policy& policy) {
  const std::uint64_t k = pulls_[policy]++;
  return EvaluateReplicate(policy, k);
}

EconSummary ClerkEvaluator::operator()(const Policy& policy) {
  const int k = pulls_[policy]++;
  const SeedTemplate& t = clerk_.seed_template();
  return clerk_.EvaluateReplicate(policy, t.mode == SimMode::kExpectation ? 0 : k);
}

}  // namespace polisim
