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

#include "polisim/datastore.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstring>
#include <ctime>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "polisim/error.hpp"
#include "polisim/log.hpp"

namespace polisim {
namespace {

std::string_view KindName(RecordKind kind) {
  return kind == RecordKind::kScenario ? "scenario" : "result";
}

RecordKind ParseKind(const std::string& name) {
  if (name == "scenario") return RecordKind::kScenario;
  if (name == "result") return RecordKind::kResult;
  throw Error(ErrorCode::kParse, fmt::format("unknown record kind '{}'", name));
}

std::string UtcNow() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t secs = std::chrono::system_clock::to_time_t(now);
  const auto millis =
      std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  return fmt::format("{}.{:03d}Z", buf, static_cast<int>(millis));
}

bool IsErrorResult(const StoreRecord& r) {
  return r.kind == RecordKind::kResult && r.body.contains("error") && !r.body.at("error").is_null();
}

[[noreturn]] void ThrowErrno(const std::string& what) {
  throw Error(ErrorCode::kIo, fmt::format("{}: {}", what, std::strerror(errno)));
}

}  // namespace

Json ToJson(const StoreRecord& record) {
  Json j;
  j["kind"] = KindName(record.kind);
  j["key"] = record.key;
  j["body"] = record.body;
  j["stored_at"] = record.stored_at;
  return j;
}

StoreRecord StoreRecordFromJson(const Json& j) {
  if (!j.is_object() || !j.contains("kind") || !j.contains("key") || !j.contains("body") ||
      !j.at("kind").is_string() || !j.at("key").is_string()) {
    throw Error(ErrorCode::kParse, "malformed store record");
  }
  StoreRecord r;
  r.kind = ParseKind(j.at("kind").get<std::string>());
  r.key = j.at("key").get<std::string>();
  r.body = j.at("body");
  if (j.contains("stored_at") && j.at("stored_at").is_string()) {
    r.stored_at = j.at("stored_at").get<std::string>();
  }
  return r;
}

Datastore::Datastore(std::filesystem::path path, Options options)
    : path_(std::move(path)), options_(options) {
  if (options_.access == Access::kWrite) {
    const std::string lock_path = path_.string() + ".lock";
    lock_fd_ = ::open(lock_path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (lock_fd_ < 0) ThrowErrno("open " + lock_path);
    if (::flock(lock_fd_, LOCK_EX | LOCK_NB) != 0) {
      ::close(lock_fd_);
      throw Error(ErrorCode::kLocked, fmt::format("{} is held by another writer", lock_path));
    }
    fd_ = ::open(path_.c_str(), O_RDWR | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd_ < 0) {
      ::close(lock_fd_);
      ThrowErrno("open " + path_.string());
    }
  }
  try {
    Load();
  } catch (...) {
    if (fd_ >= 0) ::close(fd_);
    if (lock_fd_ >= 0) ::close(lock_fd_);
    throw;
  }
}

Datastore::~Datastore() {
  if (fd_ >= 0) ::close(fd_);
  if (lock_fd_ >= 0) ::close(lock_fd_);
}

void Datastore::Load() {
  std::ifstream in(path_, std::ios::binary);
  if (!in) {
    if (options_.access == Access::kReadOnly && !std::filesystem::exists(path_)) return;
    if (options_.access == Access::kReadOnly) {
      throw Error(ErrorCode::kIo, fmt::format("cannot read {}", path_.string()));
    }
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string data = buffer.str();

  std::size_t begin = 0;
  std::size_t complete_end = 0;
  while (begin < data.size()) {
    const std::size_t nl = data.find('\n', begin);
    if (nl == std::string::npos) break;  // torn tail
    const std::string_view line(data.data() + begin, nl - begin);
    begin = nl + 1;
    complete_end = begin;
    if (line.empty()) continue;
    try {
      StoreRecord record = StoreRecordFromJson(Json::parse(line));
      if (Admit(record)) {
        records_.push_back(std::move(record));
        live_.push_back(true);
      }
    } catch (const std::exception& e) {
      ++corrupt_lines_;
      Logger()->warn("{}: skipping unreadable line: {}", path_.string(), e.what());
    }
  }
  if (complete_end < data.size()) {
    Logger()->warn("{}: ignoring {} byte torn record at end of log", path_.string(),
                   data.size() - complete_end);
    if (options_.access == Access::kWrite &&
        ::ftruncate(fd_, static_cast<off_t>(complete_end)) != 0) {
      ThrowErrno("truncate " + path_.string());
    }
  }
}

bool Datastore::Admit(const StoreRecord& record) {
  Slot& slot = index_[record.key];
  const std::size_t position = records_.size();
  if (record.kind == RecordKind::kScenario) {
    if (slot.scenario != kNone) return false;
    slot.scenario = position;
    return true;
  }
  if (slot.result == kNone) {
    slot.result = position;
    return true;
  }
  if (IsErrorResult(records_[slot.result]) && !IsErrorResult(record)) {
    live_[slot.result] = false;
    slot.result = position;
    return true;
  }
  return false;
}

void Datastore::AppendLine(const std::string& line) {
  if (fd_ < 0) throw Error(ErrorCode::kIo, "datastore opened read-only");
  std::size_t written = 0;
  while (written < line.size()) {
    const ssize_t n = ::write(fd_, line.data() + written, line.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      ThrowErrno("append " + path_.string());
    }
    written += static_cast<std::size_t>(n);
  }
  if (options_.sync_writes && ::fdatasync(fd_) != 0) ThrowErrno("sync " + path_.string());
}

PutOutcome Datastore::Put(StoreRecord record) {
  std::lock_guard lock(mu_);
  if (record.stored_at.empty()) record.stored_at = UtcNow();
  if (!Admit(record)) return PutOutcome::kDuplicate;
  try {
    AppendLine(Dump(ToJson(record)) + "\n");
  } catch (...) {
    // Roll the index back; the record never reached the log.
    Slot& slot = index_[record.key];
    if (record.kind == RecordKind::kScenario) {
      slot.scenario = kNone;
    } else {
      slot.result = kNone;
      for (std::size_t i = records_.size(); i-- > 0;) {
        if (records_[i].key == record.key && records_[i].kind == RecordKind::kResult) {
          live_[i] = true;
          slot.result = i;
          break;
        }
      }
    }
    throw;
  }
  records_.push_back(std::move(record));
  live_.push_back(true);
  return PutOutcome::kStored;
}

std::optional<StoreRecord> Datastore::Get(RecordKind kind, const std::string& key) const {
  std::lock_guard lock(mu_);
  auto it = index_.find(key);
  if (it == index_.end()) return std::nullopt;
  const std::size_t pos = kind == RecordKind::kScenario ? it->second.scenario : it->second.result;
  if (pos == kNone) return std::nullopt;
  return records_[pos];
}

bool Datastore::Has(RecordKind kind, const std::string& key) const {
  return Get(kind, key).has_value();
}

PutOutcome Datastore::PutScenario(const ScenarioDocument& doc) {
  StoreRecord r;
  r.kind = RecordKind::kScenario;
  r.key = doc.scenario_id;
  r.body = Json::parse(CanonicalDocument(doc));
  return Put(std::move(r));
}

PutOutcome Datastore::PutResult(const EvaluationResult& result) {
  StoreRecord r;
  r.kind = RecordKind::kResult;
  r.key = result.scenario_id;
  r.body = ToJson(result);
  return Put(std::move(r));
}

std::optional<ScenarioDocument> Datastore::GetScenario(const std::string& key) const {
  auto r = Get(RecordKind::kScenario, key);
  if (!r) return std::nullopt;
  return ScenarioFromJson(r->body);
}

std::optional<EvaluationResult> Datastore::GetResult(const std::string& key) const {
  auto r = Get(RecordKind::kResult, key);
  if (!r) return std::nullopt;
  return ResultFromJson(r->body);
}

bool Datastore::HasResult(const std::string& key) const {
  auto r = Get(RecordKind::kResult, key);
  return r && !IsErrorResult(*r);
}

std::vector<StoreRecord> Datastore::Snapshot() const {
  std::lock_guard lock(mu_);
  std::vector<StoreRecord> out;
  out.reserve(records_.size());
  for (std::size_t i = 0; i < records_.size(); ++i) {
    if (live_[i]) out.push_back(records_[i]);
  }
  return out;
}

std::size_t Datastore::size() const {
  std::lock_guard lock(mu_);
  return static_cast<std::size_t>(std::count(live_.begin(), live_.end(), true));
}

std::size_t Datastore::result_count(bool include_errors) const {
  std::lock_guard lock(mu_);
  std::size_t n = 0;
  for (std::size_t i = 0; i < records_.size(); ++i) {
    if (!live_[i] || records_[i].kind != RecordKind::kResult) continue;
    if (include_errors || !IsErrorResult(records_[i])) ++n;
  }
  return n;
}

SurfaceQuery Datastore::QuerySurface() const {
  struct Bucket {
    std::vector<double> values;
    std::size_t ineffective = 0;
  };
  std::map<Policy, Bucket> buckets;
  for (const StoreRecord& record : Snapshot()) {
    if (record.kind != RecordKind::kResult || IsErrorResult(record)) continue;
    const EvaluationResult result = ResultFromJson(record.body);
    if (!result.cost_per_daly_averted) continue;
    Bucket& bucket = buckets[result.policy];
    if (result.cost_per_daly_averted->ineffective()) {
      ++bucket.ineffective;
    } else {
      bucket.values.push_back(result.cost_per_daly_averted->value());
    }
  }

  SurfaceQuery query;
  for (const auto& [policy, bucket] : buckets) {
    SurfaceRow row;
    row.policy = policy;
    row.n = bucket.values.size();
    row.ineffective_n = bucket.ineffective;
    query.ineffective_total += bucket.ineffective;
    if (row.n == 0) {
      row.mean_cost_per_daly = std::numeric_limits<double>::quiet_NaN();
      row.stddev = std::numeric_limits<double>::quiet_NaN();
      query.ineffective_only.push_back(row);
      continue;
    }
    double sum = 0.0;
    for (double v : bucket.values) sum += v;
    row.mean_cost_per_daly = sum / static_cast<double>(row.n);
    if (row.n >= 2) {
      double ss = 0.0;
      for (double v : bucket.values) ss += (v - row.mean_cost_per_daly) * (v - row.mean_cost_per_daly);
      row.stddev = std::sqrt(ss / static_cast<double>(row.n - 1));
    } else {
      row.stddev = std::numeric_limits<double>::quiet_NaN();
    }
    query.rows.push_back(row);
  }
  return query;
}

std::string SurfaceCsv(const SurfaceQuery& query) {
  std::vector<SurfaceRow> rows = query.rows;
  rows.insert(rows.end(), query.ineffective_only.begin(), query.ineffective_only.end());
  std::sort(rows.begin(), rows.end(),
            [](const SurfaceRow& a, const SurfaceRow& b) { return a.policy < b.policy; });
  auto real = [](double v) { return std::isnan(v) ? std::string() : ShortestDecimal(v); };
  std::string out = std::string(kSurfaceCsvHeader) + "\n";
  for (const SurfaceRow& row : rows) {
    out += fmt::format("{},{},{},{},{},{}\n", FormatCoverage(row.policy.itn_milli()),
                       FormatCoverage(row.policy.irs_milli()), real(row.mean_cost_per_daly),
                       real(row.stddev), row.n, row.ineffective_n);
  }
  return out;
}

}  // namespace polisim
