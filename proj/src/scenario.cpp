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

#include "polisim/scenario.hpp"

#include <array>
#include <charconv>
#include <cmath>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "polisim/error.hpp"

namespace polisim {
namespace {

// Minimal writer for the canonical form. Keys are emitted in call order.
class CanonicalWriter {
 public:
  void Open() { out_ += '{'; first_ = true; }
  void Close() { out_ += '}'; first_ = false; }

  void Key(std::string_view key) {
    if (!first_) out_ += ',';
    first_ = false;
    out_ += '"';
    out_ += key;
    out_ += "\":";
  }
  void Real(std::string_view key, double v) { Key(key); out_ += ShortestDecimal(v); }
  void Int(std::string_view key, std::int64_t v) { Key(key); out_ += std::to_string(v); }
  void UInt(std::string_view key, std::uint64_t v) { Key(key); out_ += std::to_string(v); }
  void Raw(std::string_view key, std::string_view raw) { Key(key); out_ += raw; }
  void String(std::string_view key, std::string_view v) {
    // Only ever called with hex digests and enum names; no escaping needed.
    Key(key);
    out_ += '"';
    out_ += v;
    out_ += '"';
  }
  void Object(std::string_view key) { Key(key); Open(); }

  std::string Take() { return std::move(out_); }

 private:
  std::string out_;
  bool first_ = true;
};

void WriteContent(CanonicalWriter& w, const ScenarioDocument& doc) {
  w.Object("policy");
  w.Raw("itn_coverage", FormatCoverage(doc.policy.itn_milli()));
  w.Raw("irs_coverage", FormatCoverage(doc.policy.irs_milli()));
  w.Close();

  const EpiParameters& e = doc.epi;
  w.Object("epi");
  w.Real("m", e.m);
  w.Real("a", e.a);
  w.Real("b", e.b);
  w.Real("c", e.c);
  w.Real("g", e.g);
  w.Real("n_eip", e.n_eip);
  w.Real("r", e.r);
  w.Int("population", e.population);
  w.Real("cfr", e.cfr);
  w.Real("disability_weight", e.disability_weight);
  w.Real("episode_duration_days", e.episode_duration_days);
  w.Real("yll_per_death", e.yll_per_death);
  w.Close();

  const InterventionEffects& k = doc.effects;
  w.Object("effects");
  w.Real("kappa_bite", k.kappa_bite);
  w.Real("kappa_kill_itn", k.kappa_kill_itn);
  w.Real("kappa_kill_irs", k.kappa_kill_irs);
  w.Real("unit_cost_itn", k.unit_cost_itn);
  w.Real("unit_cost_irs", k.unit_cost_irs);
  w.Close();

  w.Int("horizon_days", doc.horizon_days);
  w.UInt("seed", doc.seed);
  w.String("mode", SimModeName(doc.mode));
}

std::string Sha256Hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(),
                 nullptr) != 1) {
    throw Error(ErrorCode::kIo, "SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    hex += kHex[digest[i] >> 4];
    hex += kHex[digest[i] & 0xf];
  }
  return hex;
}

void Require(bool ok, std::string_view what) {
  if (!ok) throw Error(ErrorCode::kInvalidArgument, std::string(what));
}

const Json& Field(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw Error(ErrorCode::kParse, fmt::format("missing field '{}'", key));
  return *it;
}

double RealField(const Json& j, const char* key) {
  const auto& v = Field(j, key);
  if (!v.is_number()) throw Error(ErrorCode::kParse, fmt::format("field '{}' is not a number", key));
  return v.get<double>();
}

void MergeReal(const Json& j, const char* key, double& into) {
  if (j.contains(key)) into = RealField(j, key);
}

}  // namespace

std::string ShortestDecimal(double value) {
  std::array<char, 32> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc()) throw Error(ErrorCode::kInvalidArgument, "unformattable real");
  return std::string(buf.data(), end);
}

std::string_view SimModeName(SimMode mode) {
  return mode == SimMode::kStochastic ? "stochastic" : "expectation";
}

SimMode ParseSimMode(std::string_view name) {
  if (name == "stochastic") return SimMode::kStochastic;
  if (name == "expectation") return SimMode::kExpectation;
  throw Error(ErrorCode::kParse, fmt::format("unknown mode '{}'", name));
}

void Validate(const EpiParameters& e) {
  for (double v : {e.m, e.a, e.b, e.c, e.g, e.n_eip, e.r, e.cfr,
                   e.disability_weight, e.episode_duration_days, e.yll_per_death}) {
    Require(std::isfinite(v), "epi parameters must be finite");
  }
  Require(e.m > 0 && e.a > 0 && e.g > 0 && e.r > 0, "rates m, a, g, r must be > 0");
  Require(e.b > 0 && e.b <= 1 && e.c > 0 && e.c <= 1,
          "transmission probabilities b, c must lie in (0, 1]");
  Require(e.n_eip >= 0, "n_eip must be >= 0");
  Require(e.population >= 1, "population must be >= 1");
  Require(e.cfr >= 0 && e.cfr <= 1, "cfr must lie in [0, 1]");
  Require(e.disability_weight >= 0 && e.disability_weight <= 1,
          "disability_weight must lie in [0, 1]");
  Require(e.episode_duration_days >= 0 && e.yll_per_death >= 0,
          "episode duration and yll_per_death must be >= 0");
}

void Validate(const InterventionEffects& k) {
  for (double v : {k.kappa_bite, k.kappa_kill_itn, k.kappa_kill_irs,
                   k.unit_cost_itn, k.unit_cost_irs}) {
    Require(std::isfinite(v) && v >= 0, "intervention effects must be finite and >= 0");
  }
  Require(k.kappa_bite <= 1, "kappa_bite must be <= 1");
}

void Validate(const ScenarioDocument& doc) {
  Validate(doc.epi);
  Validate(doc.effects);
  Require(doc.horizon_days >= 0, "horizon_days must be >= 0");
}

std::string CanonicalContent(const ScenarioDocument& doc) {
  CanonicalWriter w;
  w.Open();
  WriteContent(w, doc);
  w.Close();
  return w.Take();
}

std::string CanonicalHash(const ScenarioDocument& doc) {
  return Sha256Hex(CanonicalContent(doc));
}

std::string CanonicalDocument(const ScenarioDocument& doc) {
  CanonicalWriter w;
  w.Open();
  w.String("scenario_id", doc.scenario_id);
  WriteContent(w, doc);
  w.Close();
  return w.Take();
}

ScenarioDocument Seal(ScenarioDocument doc) {
  doc.scenario_id = CanonicalHash(doc);
  return doc;
}

bool HasValidId(const ScenarioDocument& doc) {
  return doc.scenario_id == CanonicalHash(doc);
}

Json ToJson(const Policy& p) {
  return {{"itn_coverage", p.itn_coverage()}, {"irs_coverage", p.irs_coverage()}};
}

Policy PolicyFromJson(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kParse, "policy is not an object");
  return MakePolicy(RealField(j, "itn_coverage"), RealField(j, "irs_coverage"));
}

Json ToJson(const EpiParameters& e) {
  return {{"m", e.m},
          {"a", e.a},
          {"b", e.b},
          {"c", e.c},
          {"g", e.g},
          {"n_eip", e.n_eip},
          {"r", e.r},
          {"population", e.population},
          {"cfr", e.cfr},
          {"disability_weight", e.disability_weight},
          {"episode_duration_days", e.episode_duration_days},
          {"yll_per_death", e.yll_per_death}};
}

Json ToJson(const InterventionEffects& k) {
  return {{"kappa_bite", k.kappa_bite},
          {"kappa_kill_itn", k.kappa_kill_itn},
          {"kappa_kill_irs", k.kappa_kill_irs},
          {"unit_cost_itn", k.unit_cost_itn},
          {"unit_cost_irs", k.unit_cost_irs}};
}

void MergeFromJson(const Json& j, EpiParameters& e) {
  if (!j.is_object()) throw Error(ErrorCode::kParse, "epi is not an object");
  MergeReal(j, "m", e.m);
  MergeReal(j, "a", e.a);
  MergeReal(j, "b", e.b);
  MergeReal(j, "c", e.c);
  MergeReal(j, "g", e.g);
  MergeReal(j, "n_eip", e.n_eip);
  MergeReal(j, "r", e.r);
  if (j.contains("population")) {
    const auto& v = j.at("population");
    if (!v.is_number_integer()) throw Error(ErrorCode::kParse, "population is not an integer");
    e.population = v.get<std::int64_t>();
  }
  MergeReal(j, "cfr", e.cfr);
  MergeReal(j, "disability_weight", e.disability_weight);
  MergeReal(j, "episode_duration_days", e.episode_duration_days);
  MergeReal(j, "yll_per_death", e.yll_per_death);
}

void MergeFromJson(const Json& j, InterventionEffects& k) {
  if (!j.is_object()) throw Error(ErrorCode::kParse, "effects is not an object");
  MergeReal(j, "kappa_bite", k.kappa_bite);
  MergeReal(j, "kappa_kill_itn", k.kappa_kill_itn);
  MergeReal(j, "kappa_kill_irs", k.kappa_kill_irs);
  MergeReal(j, "unit_cost_itn", k.unit_cost_itn);
  MergeReal(j, "unit_cost_irs", k.unit_cost_irs);
}

ScenarioDocument ScenarioFromJson(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kParse, "scenario is not an object");
  ScenarioDocument doc;
  const auto& id = Field(j, "scenario_id");
  if (!id.is_string()) throw Error(ErrorCode::kParse, "scenario_id is not a string");
  doc.scenario_id = id.get<std::string>();
  doc.policy = PolicyFromJson(Field(j, "policy"));

  // Every model field must be present in a task; defaults apply only to
  // templates.
  const auto& epi = Field(j, "epi");
  for (const char* key : {"m", "a", "b", "c", "g", "n_eip", "r", "population", "cfr",
                          "disability_weight", "episode_duration_days", "yll_per_death"}) {
    Field(epi, key);
  }
  MergeFromJson(epi, doc.epi);
  const auto& effects = Field(j, "effects");
  for (const char* key : {"kappa_bite", "kappa_kill_itn", "kappa_kill_irs",
                          "unit_cost_itn", "unit_cost_irs"}) {
    Field(effects, key);
  }
  MergeFromJson(effects, doc.effects);

  const auto& horizon = Field(j, "horizon_days");
  if (!horizon.is_number_integer()) throw Error(ErrorCode::kParse, "horizon_days is not an integer");
  doc.horizon_days = horizon.get<int>();
  const auto& seed = Field(j, "seed");
  if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<std::int64_t>() >= 0)) {
    throw Error(ErrorCode::kParse, "seed is not an unsigned integer");
  }
  doc.seed = seed.get<std::uint64_t>();
  const auto& mode = Field(j, "mode");
  if (!mode.is_string()) throw Error(ErrorCode::kParse, "mode is not a string");
  doc.mode = ParseSimMode(mode.get<std::string>());
  Validate(doc);
  return doc;
}

}  // namespace polisim
