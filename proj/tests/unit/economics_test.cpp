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

#include <cmath>

#include <doctest.h>

#include "polisim/economics.hpp"
#include "polisim/error.hpp"
#include "polisim/result.hpp"

namespace polisim {
namespace {

bool RelClose(double got, double want, double tol) {
  return std::abs(got - want) <= tol * std::abs(want);
}

TEST_CASE("dalys for 1000 cases at defaults") {
  // 1000*0.2*(14/365) + 1000*0.003*30, tests/oracles/model_oracle.py.
  CHECK(RelClose(Dalys(1000, EpiParameters{}), 97.671232876712, 1e-9));
  CHECK(Dalys(0, EpiParameters{}) == 0.0);
}

TEST_CASE("cost of full coverage over three years") {
  const EpiParameters epi;
  const InterventionEffects effects;
  CHECK(PolicyCost(MakePolicy(1, 1), epi, effects, 1095) == doctest::Approx(225000.0).epsilon(1e-12));
  CHECK(PolicyCost(Policy{}, epi, effects, 1095) == 0.0);
  CHECK(PolicyCost(MakePolicy(0.5, 0), epi, effects, 365) == doctest::Approx(12500.0));
}

TEST_CASE("cost per DALY averted, chained from the dalys example") {
  const EconSummary s = CostEffectiveness(500, 10000, 1000, EpiParameters{});
  CHECK(RelClose(s.dalys_averted, 48.835616438356, 1e-9));
  REQUIRE_FALSE(s.cost_per_daly_averted.ineffective());
  CHECK(RelClose(s.cost_per_daly_averted.value(), 204.768583450210, 1e-9));
  CHECK(s.cost == 10000);
}

TEST_CASE("no DALYs averted is INEFFECTIVE") {
  CHECK(CostEffectiveness(1000, 500, 1000, EpiParameters{}).cost_per_daly_averted.ineffective());
  CHECK(CostEffectiveness(1200, 500, 1000, EpiParameters{}).cost_per_daly_averted.ineffective());
  // Self-baseline, as for the zero policy.
  CHECK(CostEffectiveness(1000, 0, 1000, EpiParameters{}).cost_per_daly_averted.ineffective());
}

TEST_CASE("INEFFECTIVE sorts after every finite value") {
  const auto ineffective = CostPerDaly::Ineffective();
  CHECK(CostPerDaly::Of(1e300) < ineffective);
  CHECK(CostPerDaly::Of(5) < CostPerDaly::Of(6));
  CHECK(ineffective == CostPerDaly::Ineffective());
  CHECK_FALSE(ineffective < ineffective);
}

TEST_CASE("cost per DALY JSON form") {
  CHECK(ToJson(CostPerDaly::Ineffective()) == Json("INEFFECTIVE"));
  CHECK(ToJson(CostPerDaly::Of(12.5)) == Json(12.5));
  CHECK(CostPerDalyFromJson(Json("INEFFECTIVE")).ineffective());
  CHECK(CostPerDalyFromJson(Json(3.0)).value() == 3.0);
  CHECK_THROWS_AS(CostPerDalyFromJson(Json(-1.0)), Error);
  CHECK_THROWS_AS(CostPerDalyFromJson(Json("cheap")), Error);
}

TEST_CASE("evaluation result JSON round trip") {
  EvaluationResult r;
  r.scenario_id = "abc";
  r.policy = MakePolicy(0.2, 0.4);
  r.total_cases = 1234;
  r.total_deaths = 3.702;
  r.dalys = 120.5;
  r.cost = 9000;
  r.dalys_averted = 10.25;
  r.cost_per_daly_averted = CostPerDaly::Of(878.0487804878049);
  r.final_prevalence = 0.5;
  r.wall_time_ms = 1.5;
  r.worker_id = "w1";
  const EvaluationResult back = ResultFromJson(Json::parse(Dump(ToJson(r))));
  CHECK(back.scenario_id == r.scenario_id);
  CHECK(back.policy == r.policy);
  CHECK(back.total_cases == r.total_cases);
  CHECK(back.dalys == r.dalys);
  CHECK(back.dalys_averted == r.dalys_averted);
  CHECK(back.cost_per_daly_averted == r.cost_per_daly_averted);
  CHECK(back.worker_id == "w1");
  CHECK_FALSE(back.is_error());

  EvaluationResult bare = r;
  bare.dalys_averted.reset();
  bare.cost_per_daly_averted.reset();
  const auto bare_back = ResultFromJson(ToJson(bare));
  CHECK_FALSE(bare_back.dalys_averted.has_value());
  CHECK_FALSE(bare_back.cost_per_daly_averted.has_value());

  EvaluationResult err;
  err.scenario_id = "bad";
  err.worker_id = "w2";
  err.error = "HASH_MISMATCH: nope";
  const Json ej = ToJson(err);
  CHECK(ej.size() == 3);
  const auto err_back = ResultFromJson(ej);
  CHECK(err_back.is_error());
  CHECK(*err_back.error == *err.error);

  CHECK_THROWS_AS(ResultFromJson(Json{{"scenario_id", "x"}}), Error);
}

}  // namespace
}  // namespace polisim
