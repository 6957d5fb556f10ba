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

#include "polisim/clerk.hpp"

#include <fstream>

#include <fmt/format.h>

#include "polisim/error.hpp"
#include "polisim/log.hpp"

namespace polisim {

SeedTemplate TemplateFromJson(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kParse, "template is not a JSON object");
  SeedTemplate t;
  if (j.contains("epi")) MergeFromJson(j.at("epi"), t.epi);
  if (j.contains("effects")) MergeFromJson(j.at("effects"), t.effects);
  auto integer = [&](const char* key) -> const Json& {
    const Json& v = j.at(key);
    if (!v.is_number_integer()) throw Error(ErrorCode::kParse, fmt::format("'{}' must be an integer", key));
    return v;
  };
  if (j.contains("horizon_days")) t.horizon_days = integer("horizon_days").get<int>();
  if (j.contains("mode")) {
    if (!j.at("mode").is_string()) throw Error(ErrorCode::kParse, "'mode' must be a string");
    t.mode = ParseSimMode(j.at("mode").get<std::string>());
  }
  if (j.contains("base_seed")) {
    if (!integer("base_seed").is_number_unsigned()) {
      throw Error(ErrorCode::kInvalidArgument, "base_seed must be non-negative");
    }
    t.base_seed = j.at("base_seed").get<std::uint64_t>();
  }
  if (j.contains("replicates")) t.replicates = integer("replicates").get<int>();

  Validate(t.epi);
  Validate(t.effects);
  if (t.horizon_days < 1) throw Error(ErrorCode::kInvalidArgument, "horizon_days must be >= 1");
  if (t.replicates < 1) throw Error(ErrorCode::kInvalidArgument, "replicates must be >= 1");
  if (t.mode == SimMode::kExpectation) t.replicates = 1;
  return t;
}

SeedTemplate LoadTemplate(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, fmt::format("cannot read template {}", path.string()));
  Json j = Json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw Error(ErrorCode::kParse, fmt::format("{} is not valid JSON", path.string()));
  return TemplateFromJson(j);
}

Json ToJson(const SeedTemplate& t) {
  Json j;
  j["epi"] = ToJson(t.epi);
  j["effects"] = ToJson(t.effects);
  j["horizon_days"] = t.horizon_days;
  j["mode"] = SimModeName(t.mode);
  j["base_seed"] = t.base_seed;
  j["replicates"] = t.effective_replicates();
  return j;
}

ScenarioDocument Germinate(const SeedTemplate& t, const Policy& policy, int replicate_index) {
  if (replicate_index < 0 || replicate_index >= t.effective_replicates()) {
    throw Error(ErrorCode::kPrecondition,
                fmt::format("replicate index {} outside [0, {})", replicate_index,
                            t.effective_replicates()));
  }
  ScenarioDocument doc;
  doc.policy = policy;
  doc.epi = t.epi;
  doc.effects = t.effects;
  doc.horizon_days = t.horizon_days;
  doc.seed = t.base_seed + static_cast<std::uint64_t>(replicate_index);
  doc.mode = t.mode;
  return Seal(std::move(doc));
}

EconSummary AggregateReplicates(const std::vector<EconSummary>& replicates) {
  EconSummary mean;
  if (replicates.empty()) return mean;
  double ratio_sum = 0.0;
  std::size_t effective = 0;
  for (const EconSummary& r : replicates) {
    mean.dalys += r.dalys;
    mean.cost += r.cost;
    mean.dalys_averted += r.dalys_averted;
    if (!r.cost_per_daly_averted.ineffective()) {
      ratio_sum += r.cost_per_daly_averted.value();
      ++effective;
    }
  }
  const double n = static_cast<double>(replicates.size());
  mean.dalys /= n;
  mean.cost /= n;
  mean.dalys_averted /= n;
  mean.cost_per_daly_averted = effective == 0
                                   ? CostPerDaly::Ineffective()
                                   : CostPerDaly::Of(ratio_sum / static_cast<double>(effective));
  return mean;
}

Clerk::Clerk(SeedTemplate seed_template, Datastore& store, ClerkOptions options)
    : template_(std::move(seed_template)),
      store_(store),
      options_(std::move(options)),
      publisher_(fabric::Client::Connect(options_.broker, options_.connect)) {
  fabric::Client listener = fabric::Client::Connect(options_.broker, options_.connect);
  listener.Subscribe(kResultsChannel);
  // The subscription must be registered before the first task goes out.
  listener.Ping();
  listener_ = std::thread([this, client = std::move(listener)]() mutable {
    try {
      while (!stopping_) {
        std::optional<fabric::Delivery> delivery;
        try {
          delivery = client.Next(std::chrono::milliseconds(200));
        } catch (const Error& e) {
          if (e.code() != ErrorCode::kConnectionLost) throw;
          Logger()->warn("clerk lost the broker ({}); reconnecting", e.what());
          client.Reconnect();
          continue;
        }
        if (!delivery) continue;
        HandleResult(delivery->payload);
        client.Ack(delivery->delivery_id);
      }
    } catch (const std::exception& e) {
      Logger()->error("clerk result listener stopped: {}", e.what());
      FailAll(e.what());
    }
  });
}

Clerk::~Clerk() {
  stopping_ = true;
  if (listener_.joinable()) listener_.join();
}

ClerkStats Clerk::stats() const {
  std::lock_guard lock(mu_);
  return stats_;
}

void Clerk::FailAll(const std::string& reason) {
  std::lock_guard lock(mu_);
  for (auto& [id, waiter] : waiting_) {
    waiter->promise.set_exception(
        std::make_exception_ptr(Error(ErrorCode::kConnectionLost, reason)));
  }
  waiting_.clear();
}

void Clerk::HandleResult(const Json& payload) {
  EvaluationResult result;
  try {
    result = ResultFromJson(payload);
  } catch (const Error& e) {
    Logger()->warn("dropping unreadable result: {}", e.what());
    return;
  }

  if (!result.is_error()) {
    const auto doc = store_.GetScenario(result.scenario_id);
    if (!doc) {
      Logger()->warn("dropping result for unknown scenario {}", result.scenario_id);
      return;
    }
    double baseline_cases = result.total_cases;
    if (!doc->policy.is_zero()) {
      ScenarioDocument baseline = *doc;
      baseline.policy = Policy{};
      baseline = Seal(std::move(baseline));
      if (auto stored = store_.GetResult(baseline.scenario_id); stored && !stored->is_error()) {
        baseline_cases = stored->total_cases;
      } else {
        Logger()->warn("no baseline stored for {}; keeping raw result", result.scenario_id);
        baseline_cases = -1.0;
      }
    }
    if (baseline_cases >= 0.0) {
      const EconSummary econ =
          CostEffectiveness(result.total_cases, result.cost, baseline_cases, doc->epi);
      result.dalys_averted = econ.dalys_averted;
      result.cost_per_daly_averted = econ.cost_per_daly_averted;
    }
  }

  const PutOutcome outcome = store_.PutResult(result);
  const auto stored = store_.GetResult(result.scenario_id);

  std::lock_guard lock(mu_);
  ++stats_.results_received;
  if (outcome == PutOutcome::kDuplicate) ++stats_.duplicate_results;
  auto it = waiting_.find(result.scenario_id);
  if (it == waiting_.end() || !stored) return;
  if (stored->is_error() && !result.is_error()) return;  // cannot happen: non-error supersedes
  it->second->promise.set_value(*stored);
  waiting_.erase(it);
}

std::shared_future<EvaluationResult> Clerk::Request(const ScenarioDocument& doc) {
  {
    std::lock_guard lock(mu_);
    if (auto stored = store_.GetResult(doc.scenario_id); stored && !stored->is_error()) {
      ++stats_.cache_hits;
      std::promise<EvaluationResult> ready;
      ready.set_value(*stored);
      return ready.get_future().share();
    }
    if (auto it = waiting_.find(doc.scenario_id); it != waiting_.end()) {
      return it->second->future;
    }
  }

  auto waiter = std::make_shared<Waiter>();
  waiter->future = waiter->promise.get_future().share();
  {
    std::lock_guard lock(mu_);
    // Re-check: another thread may have registered or finished meanwhile.
    if (auto it = waiting_.find(doc.scenario_id); it != waiting_.end()) return it->second->future;
    if (auto stored = store_.GetResult(doc.scenario_id); stored && !stored->is_error()) {
      ++stats_.cache_hits;
      waiter->promise.set_value(*stored);
      return waiter->future;
    }
    waiting_.emplace(doc.scenario_id, waiter);
    ++stats_.published;
  }
  store_.PutScenario(doc);
  {
    std::lock_guard lock(publish_mu_);
    try {
      publisher_.Publish(kTasksChannel, Json::parse(CanonicalDocument(doc)));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kConnectionLost) throw;
      Logger()->warn("publish failed ({}); reconnecting", e.what());
      publisher_.Reconnect();
      publisher_.Publish(kTasksChannel, Json::parse(CanonicalDocument(doc)));
    }
  }
  return waiter->future;
}

EvaluationResult Clerk::Await(const std::shared_future<EvaluationResult>& future,
                              const std::string& scenario_id) {
  if (future.wait_for(options_.task_timeout) != std::future_status::ready) {
    throw Error(ErrorCode::kTimeout,
                fmt::format("no result for {} within {} ms", scenario_id,
                            options_.task_timeout.count()));
  }
  EvaluationResult result = future.get();
  if (result.is_error()) {
    throw Error(ErrorCode::kTaskFailed,
                fmt::format("task {} failed: {}", scenario_id, *result.error));
  }
  return result;
}

EvaluationResult Clerk::Fetch(const ScenarioDocument& doc) {
  return Await(Request(doc), doc.scenario_id);
}

double Clerk::BaselineCases(int replicate_index) {
  return Fetch(Germinate(template_, Policy{}, replicate_index)).total_cases;
}

EconSummary Clerk::EvaluateReplicate(const Policy& policy, int replicate_index) {
  const double baseline_cases = BaselineCases(replicate_index);
  const EvaluationResult result = Fetch(Germinate(template_, policy, replicate_index));
  return CostEffectiveness(result.total_cases, result.cost, baseline_cases, template_.epi);
}

EconSummary Clerk::EvaluatePolicy(const Policy& policy) {
  const int replicates = template_.effective_replicates();

  std::vector<ScenarioDocument> baselines;
  std::vector<std::shared_future<EvaluationResult>> baseline_futures;
  for (int i = 0; i < replicates; ++i) {
    baselines.push_back(Germinate(template_, Policy{}, i));
    baseline_futures.push_back(Request(baselines.back()));
  }
  std::vector<double> baseline_cases;
  for (int i = 0; i < replicates; ++i) {
    baseline_cases.push_back(Await(baseline_futures[i], baselines[i].scenario_id).total_cases);
  }

  std::vector<ScenarioDocument> docs;
  std::vector<std::shared_future<EvaluationResult>> futures;
  for (int i = 0; i < replicates; ++i) {
    docs.push_back(Germinate(template_, policy, i));
    futures.push_back(Request(docs.back()));
  }
  std::vector<EconSummary> summaries;
  for (int i = 0; i < replicates; ++i) {
    const EvaluationResult r = Await(futures[i], docs[i].scenario_id);
    summaries.push_back(CostEffectiveness(r.total_cases, r.cost, baseline_cases[i], template_.epi));
  }
  return AggregateReplicates(summaries);
}

}  // namespace polisim
