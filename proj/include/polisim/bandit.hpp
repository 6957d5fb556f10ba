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

// Policy search as a stochastic multi-armed bandit. Each grid policy is an
// arm; a pull is one simulation-backed evaluation; the reward is the negated,
// capped cost per DALY averted.

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "polisim/clerk.hpp"
#include "polisim/economics.hpp"
#include "polisim/json.hpp"
#include "polisim/policy.hpp"
#include "polisim/rng.hpp"

namespace polisim {

inline constexpr double kDefaultRewardCap = 10000.0;

struct ArmState {
  int arm_index = 0;
  Policy policy;
  std::int64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  // Welford update.
  void Update(double reward);
  // Sample variance m2 / (count - 1); 0 when count < 2.
  double variance() const { return count >= 2 ? m2 / static_cast<double>(count - 1) : 0.0; }
};

// kUniform is the random-selection baseline used to judge regret.
enum class Strategy { kEpsilonGreedy, kUcb1, kThompson, kUniform };

std::string_view StrategyName(Strategy s);
// Accepts "eps", "epsilon_greedy", "ucb", "ucb1", "ts", "thompson", "uniform".
Strategy ParseStrategy(std::string_view name);

struct BanditConfig {
  Strategy strategy = Strategy::kUcb1;
  std::int64_t budget = 0;
  double epsilon0 = 0.5;
  // Rewards live on a cost-per-DALY scale, so the exploration terms are
  // sized to the replicate noise (a few units near the optimum, tens at low
  // coverage) rather than to unit rewards.
  double ucb_c = 10.0;
  double prior_mean = 0.0;
  // 0 makes the prior improper: unpulled arms sample +infinity and are tried
  // first.
  double prior_strength = 0.0;
  double prior_variance = 100.0;
  std::uint64_t rng_seed = 1;
  double reward_cap = kDefaultRewardCap;
};

// -min(cost_per_daly, cap); -cap for INEFFECTIVE.
double RewardFrom(const EconSummary& summary, double cap);

// Pull number t starts at 1. Ties go to the lowest arm index.
int SelectEpsilonGreedy(const std::vector<ArmState>& arms, std::int64_t t,
                        const BanditConfig& config, Rng& rng);
int SelectUcb1(const std::vector<ArmState>& arms, std::int64_t t, const BanditConfig& config);
// Normal prior, known variance: (s*mu0 + n*mean) / (s + n) and
// prior_variance / (s + n). Undefined (infinite variance) when s + n == 0.
double PosteriorMean(const ArmState& arm, const BanditConfig& config);
double PosteriorVariance(const ArmState& arm, const BanditConfig& config);

int SelectThompson(const std::vector<ArmState>& arms, const BanditConfig& config, Rng& rng);
int SelectUniform(const std::vector<ArmState>& arms, Rng& rng);

struct OraclePoint {
  Policy policy;
  EconSummary summary;
  double expected_reward = 0.0;
};

// Every policy evaluated once in expectation mode under the template's
// parameters (the template's mode and seed are ignored).
std::vector<OraclePoint> OracleSurface(const SeedTemplate& seed_template,
                                       const std::vector<Policy>& grid,
                                       double reward_cap = kDefaultRewardCap);

// Index of the highest expected reward, lowest index on ties.
int OracleArgmax(const std::vector<OraclePoint>& surface);

struct Pull {
  std::int64_t t = 0;
  int arm_index = 0;
  Policy policy;
  double reward = 0.0;
  double regret = 0.0;
  double cumulative_regret = 0.0;
};

struct BanditReport {
  BanditConfig config;
  std::vector<ArmState> arms;
  std::vector<Pull> pulls;
  // Arm with the best empirical mean among pulled arms.
  std::optional<int> best_arm;
  std::optional<Policy> best_policy;
  double cumulative_regret = 0.0;
  bool complete = true;
  std::string abort_reason;
};

using PolicyEvaluator = std::function<EconSummary(const Policy&)>;

// Runs config.budget pulls over `grid`. Regret per pull is mu* - mu(arm)
// with both taken from `oracle` (same order as `grid`). An evaluator
// exception ends the run early with complete = false.
// Throws Error(kPrecondition) for UCB1 when 0 < budget < arms, and
// Error(kInvalidArgument) when oracle and grid sizes differ.
BanditReport RunBandit(const BanditConfig& config, const std::vector<Policy>& grid,
                       const std::vector<OraclePoint>& oracle, const PolicyEvaluator& evaluate);

Json ToJson(const BanditConfig& config);
Json ToJson(const BanditReport& report);
// Header: t,arm,itn,irs,reward,regret,cumulative_regret
std::string PullLogCsv(const BanditReport& report);

}  // namespace polisim
