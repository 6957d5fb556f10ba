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

#include "polisim/bandit.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "polisim/error.hpp"
#include "polisim/model.hpp"

namespace polisim {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// First index of the maximum; NaN scores never win.
int Argmax(const std::vector<double>& scores) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(scores.size()); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return best;
}

void RequireArms(const std::vector<ArmState>& arms) {
  if (arms.empty()) throw Error(ErrorCode::kPrecondition, "no arms to select from");
}

}  // namespace

void ArmState::Update(double reward) {
  ++count;
  const double delta = reward - mean;
  mean += delta / static_cast<double>(count);
  m2 += delta * (reward - mean);
}

std::string_view StrategyName(Strategy s) {
  switch (s) {
    case Strategy::kEpsilonGreedy:
      return "epsilon_greedy";
    case Strategy::kUcb1:
      return "ucb1";
    case Strategy::kThompson:
      return "thompson";
    case Strategy::kUniform:
      return "uniform";
  }
  return "unknown";
}

Strategy ParseStrategy(std::string_view name) {
  if (name == "eps" || name == "epsilon_greedy") return Strategy::kEpsilonGreedy;
  if (name == "ucb" || name == "ucb1") return Strategy::kUcb1;
  if (name == "ts" || name == "thompson") return Strategy::kThompson;
  if (name == "uniform") return Strategy::kUniform;
  throw Error(ErrorCode::kInvalidArgument, fmt::format("unknown strategy '{}'", name));
}

double RewardFrom(const EconSummary& summary, double cap) {
  if (summary.cost_per_daly_averted.ineffective()) return -cap;
  return -std::min(summary.cost_per_daly_averted.value(), cap);
}

int SelectEpsilonGreedy(const std::vector<ArmState>& arms, std::int64_t t,
                        const BanditConfig& config, Rng& rng) {
  RequireArms(arms);
  if (t < 1) throw Error(ErrorCode::kPrecondition, "pull number starts at 1");
  const double epsilon = config.epsilon0 / std::sqrt(static_cast<double>(t));
  if (rng.Uniform() < epsilon) return static_cast<int>(rng.Below(arms.size()));
  std::vector<double> scores;
  scores.reserve(arms.size());
  for (const ArmState& arm : arms) scores.push_back(arm.count == 0 ? kInf : arm.mean);
  return Argmax(scores);
}

int SelectUcb1(const std::vector<ArmState>& arms, std::int64_t t, const BanditConfig& config) {
  RequireArms(arms);
  if (t < 1) throw Error(ErrorCode::kPrecondition, "pull number starts at 1");
  for (const ArmState& arm : arms) {
    if (arm.count == 0) return arm.arm_index;
  }
  const double log_t = std::log(static_cast<double>(t));
  std::vector<double> scores;
  scores.reserve(arms.size());
  for (const ArmState& arm : arms) {
    scores.push_back(arm.mean +
                     config.ucb_c * std::sqrt(2.0 * log_t / static_cast<double>(arm.count)));
  }
  return Argmax(scores);
}

double PosteriorMean(const ArmState& arm, const BanditConfig& config) {
  const double n = static_cast<double>(arm.count);
  return (config.prior_strength * config.prior_mean + n * arm.mean) / (config.prior_strength + n);
}

double PosteriorVariance(const ArmState& arm, const BanditConfig& config) {
  return config.prior_variance / (config.prior_strength + static_cast<double>(arm.count));
}

int SelectThompson(const std::vector<ArmState>& arms, const BanditConfig& config, Rng& rng) {
  RequireArms(arms);
  std::vector<double> scores;
  scores.reserve(arms.size());
  for (const ArmState& arm : arms) {
    if (config.prior_strength + static_cast<double>(arm.count) <= 0.0) {
      scores.push_back(kInf);
      continue;
    }
    const double mean = PosteriorMean(arm, config);
    if (config.prior_variance <= 0.0) {
      scores.push_back(mean);
      continue;
    }
    scores.push_back(mean + std::sqrt(PosteriorVariance(arm, config)) * rng.Normal());
  }
  return Argmax(scores);
}

int SelectUniform(const std::vector<ArmState>& arms, Rng& rng) {
  RequireArms(arms);
  return static_cast<int>(rng.Below(arms.size()));
}

std::vector<OraclePoint> OracleSurface(const SeedTemplate& seed_template,
                                       const std::vector<Policy>& grid, double reward_cap) {
  ScenarioDocument doc;
  doc.epi = seed_template.epi;
  doc.effects = seed_template.effects;
  doc.horizon_days = seed_template.horizon_days;
  doc.seed = seed_template.base_seed;
  doc.mode = SimMode::kExpectation;
  const double baseline_cases = Simulate(doc).total_cases;

  std::vector<OraclePoint> surface;
  surface.reserve(grid.size());
  for (const Policy& policy : grid) {
    doc.policy = policy;
    const double cases = policy.is_zero() ? baseline_cases : Simulate(doc).total_cases;
    const double cost = PolicyCost(policy, doc.epi, doc.effects, doc.horizon_days);
    OraclePoint point;
    point.policy = policy;
    point.summary = CostEffectiveness(cases, cost, baseline_cases, doc.epi);
    point.expected_reward = RewardFrom(point.summary, reward_cap);
    surface.push_back(point);
  }
  return surface;
}

int OracleArgmax(const std::vector<OraclePoint>& surface) {
  if (surface.empty()) throw Error(ErrorCode::kPrecondition, "empty oracle surface");
  std::vector<double> rewards;
  rewards.reserve(surface.size());
  for (const OraclePoint& p : surface) rewards.push_back(p.expected_reward);
  return Argmax(rewards);
}

BanditReport RunBandit(const BanditConfig& config, const std::vector<Policy>& grid,
                       const std::vector<OraclePoint>& oracle, const PolicyEvaluator& evaluate) {
  if (oracle.size() != grid.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("oracle has {} points for {} arms", oracle.size(), grid.size()));
  }
  if (config.budget < 0) throw Error(ErrorCode::kInvalidArgument, "budget must be >= 0");
  if (config.budget > 0 && grid.empty()) throw Error(ErrorCode::kPrecondition, "no arms");
  if (config.strategy == Strategy::kUcb1 && config.budget > 0 &&
      config.budget < static_cast<std::int64_t>(grid.size())) {
    throw Error(ErrorCode::kPrecondition,
                fmt::format("ucb1 needs a budget of at least {} (one pull per arm), got {}",
                            grid.size(), config.budget));
  }

  BanditReport report;
  report.config = config;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    ArmState arm;
    arm.arm_index = static_cast<int>(i);
    arm.policy = grid[i];
    report.arms.push_back(arm);
  }
  if (config.budget == 0) return report;

  double best_expected = -kInf;
  for (const OraclePoint& p : oracle) best_expected = std::max(best_expected, p.expected_reward);

  Rng rng(config.rng_seed);
  report.pulls.reserve(static_cast<std::size_t>(config.budget));
  for (std::int64_t t = 1; t <= config.budget; ++t) {
    int chosen = 0;
    switch (config.strategy) {
      case Strategy::kEpsilonGreedy:
        chosen = SelectEpsilonGreedy(report.arms, t, config, rng);
        break;
      case Strategy::kUcb1:
        chosen = SelectUcb1(report.arms, t, config);
        break;
      case Strategy::kThompson:
        chosen = SelectThompson(report.arms, config, rng);
        break;
      case Strategy::kUniform:
        chosen = SelectUniform(report.arms, rng);
        break;
    }
    ArmState& arm = report.arms[chosen];
    EconSummary summary;
    try {
      summary = evaluate(arm.policy);
    } catch (const std::exception& e) {
      report.complete = false;
      report.abort_reason = e.what();
      break;
    }
    Pull pull;
    pull.t = t;
    pull.arm_index = chosen;
    pull.policy = arm.policy;
    pull.reward = RewardFrom(summary, config.reward_cap);
    pull.regret = best_expected - oracle[chosen].expected_reward;
    report.cumulative_regret += pull.regret;
    pull.cumulative_regret = report.cumulative_regret;
    arm.Update(pull.reward);
    report.pulls.push_back(pull);
  }

  for (const ArmState& arm : report.arms) {
    if (arm.count == 0) continue;
    if (!report.best_arm || arm.mean > report.arms[*report.best_arm].mean) {
      report.best_arm = arm.arm_index;
    }
  }
  if (report.best_arm) report.best_policy = report.arms[*report.best_arm].policy;
  return report;
}

Json ToJson(const BanditConfig& c) {
  Json j;
  j["strategy"] = StrategyName(c.strategy);
  j["budget"] = c.budget;
  j["epsilon0"] = c.epsilon0;
  j["ucb_c"] = c.ucb_c;
  j["prior_mean"] = c.prior_mean;
  j["prior_strength"] = c.prior_strength;
  j["prior_variance"] = c.prior_variance;
  j["rng_seed"] = c.rng_seed;
  j["reward_cap"] = c.reward_cap;
  return j;
}

Json ToJson(const BanditReport& report) {
  Json j;
  j["config"] = ToJson(report.config);
  j["complete"] = report.complete;
  if (!report.complete) j["abort_reason"] = report.abort_reason;
  j["pulls"] = report.pulls.size();
  j["cumulative_regret"] = report.cumulative_regret;
  j["best_policy"] = report.best_policy ? ToJson(*report.best_policy) : Json(nullptr);
  Json arms = Json::array();
  for (const ArmState& arm : report.arms) {
    arms.push_back({{"arm", arm.arm_index},
                    {"itn", arm.policy.itn_coverage()},
                    {"irs", arm.policy.irs_coverage()},
                    {"count", arm.count},
                    {"mean_reward", arm.count > 0 ? Json(arm.mean) : Json(nullptr)},
                    {"variance", arm.count >= 2 ? Json(arm.variance()) : Json(nullptr)}});
  }
  j["arms"] = std::move(arms);
  Json curve = Json::array();
  for (const Pull& p : report.pulls) curve.push_back(p.cumulative_regret);
  j["regret_curve"] = std::move(curve);
  return j;
}

std::string PullLogCsv(const BanditReport& report) {
  std::string out = "t,arm,itn,irs,reward,regret,cumulative_regret\n";
  for (const Pull& p : report.pulls) {
    out += fmt::format("{},{},{},{},{},{},{}\n", p.t, p.arm_index,
                       FormatCoverage(p.policy.itn_milli()), FormatCoverage(p.policy.irs_milli()),
                       ShortestDecimal(p.reward), ShortestDecimal(p.regret),
                       ShortestDecimal(p.cumulative_regret));
  }
  return out;
}

}  // namespace polisim
