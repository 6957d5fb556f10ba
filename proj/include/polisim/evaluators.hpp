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

// Policy evaluators for bandit runs. Both give pull k of an arm the
// replicate seed base_seed + k, so repeated pulls of an arm see fresh noise
// while pull k of every arm shares one random stream with baseline k.

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <tuple>

#include "polisim/clerk.hpp"
#include "polisim/economics.hpp"
#include "polisim/policy.hpp"

namespace polisim {

// Memo of simulated case counts keyed by (policy, seed). Share one between
// evaluators built from the same template to avoid re-simulating.
class CaseCache {
 public:
  std::optional<double> Find(const Policy& policy, std::uint64_t seed) const;
  void Insert(const Policy& policy, std::uint64_t seed, double cases);
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::map<std::tuple<int, int, std::uint64_t>, double> cases_;
};

// Runs the model in-process.
class ModelEvaluator {
 public:
  explicit ModelEvaluator(SeedTemplate seed_template,
                          std::shared_ptr<CaseCache> cache = std::make_shared<CaseCache>());

  EconSummary operator()(const Policy& policy);
  EconSummary EvaluateReplicate(const Policy& policy, std::uint64_t replicate_index);

  std::size_t simulations() const { return simulations_; }

 private:
  double Cases(const Policy& policy, std::uint64_t seed);

  SeedTemplate template_;
  std::shared_ptr<CaseCache> cache_;
  std::map<Policy, std::uint64_t> pulls_;
  std::size_t simulations_ = 0;
};

// Sends pulls through a clerk. Pull k needs k < the template's replicates;
// raise `replicates` to at least the budget for stochastic searches.
class ClerkEvaluator {
 public:
  explicit ClerkEvaluator(Clerk& clerk) : clerk_(clerk) {}

  EconSummary operator()(const Policy& policy);

 private:
  Clerk& clerk_;
  std::map<Policy, int> pulls_;
};

}  // namespace polisim
