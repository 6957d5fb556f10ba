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

// Append-only JSON-lines store for scenario documents and evaluation
// results, indexed in memory by scenario_id.
//
// Each line is one record:
//
//   {"kind":"result","key":"<scenario_id>","body":{...},"stored_at":"<UTC>"}
//
// Results are first-write-wins per key: once a non-error result is stored,
// later puts for that key report kDuplicate and append nothing. A non-error
// result may still supersede an earlier error result. A trailing line with no
// newline is a torn write; it is ignored on open and, for writers, cut off
// before the next append.

#pragma once

#include <cstddef>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "polisim/json.hpp"
#include "polisim/policy.hpp"
#include "polisim/result.hpp"
#include "polisim/scenario.hpp"

namespace polisim {

enum class RecordKind { kScenario, kResult };

struct StoreRecord {
  RecordKind kind = RecordKind::kResult;
  std::string key;
  Json body;
  std::string stored_at;

  friend bool operator==(const StoreRecord&, const StoreRecord&) = default;
};

enum class PutOutcome { kStored, kDuplicate };

struct SurfaceRow {
  Policy policy;
  double mean_cost_per_daly = 0.0;
  double stddev = 0.0;  // sample (n - 1); NaN when n < 2
  std::size_t n = 0;    // effective results
  std::size_t ineffective_n = 0;
};

struct SurfaceQuery {
  // Policies with at least one effective result, sorted by (itn, irs).
  std::vector<SurfaceRow> rows;
  // Policies whose every result is INEFFECTIVE (n == 0), sorted likewise.
  std::vector<SurfaceRow> ineffective_only;
  std::size_t ineffective_total = 0;
};

class Datastore {
 public:
  enum class Access { kWrite, kReadOnly };

  struct Options {
    Access access = Access::kWrite;
    bool sync_writes = false;  // fdatasync after every append
  };

  // Throws Error(kIo) if the file cannot be opened and Error(kLocked) if
  // another writer holds the lock file.
  explicit Datastore(std::filesystem::path path) : Datastore(std::move(path), Options{}) {}
  Datastore(std::filesystem::path path, Options options);
  ~Datastore();

  Datastore(const Datastore&) = delete;
  Datastore& operator=(const Datastore&) = delete;

  PutOutcome Put(StoreRecord record);
  std::optional<StoreRecord> Get(RecordKind kind, const std::string& key) const;
  bool Has(RecordKind kind, const std::string& key) const;

  PutOutcome PutScenario(const ScenarioDocument& doc);
  PutOutcome PutResult(const EvaluationResult& result);
  std::optional<ScenarioDocument> GetScenario(const std::string& key) const;
  // Non-error result if present, else the stored error result.
  std::optional<EvaluationResult> GetResult(const std::string& key) const;
  // True only for a non-error result.
  bool HasResult(const std::string& key) const;

  // Records visible through Get, in log order.
  std::vector<StoreRecord> Snapshot() const;
  std::size_t size() const;
  std::size_t result_count(bool include_errors) const;
  // Complete log lines that failed to parse (the torn tail is not counted).
  std::size_t corrupt_lines() const { return corrupt_lines_; }

  SurfaceQuery QuerySurface() const;

  const std::filesystem::path& path() const { return path_; }

 private:
  struct Slot {
    std::size_t scenario = kNone;
    std::size_t result = kNone;
  };
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  void Load();
  // Applies first-write-wins; returns false when the record must not be kept.
  bool Admit(const StoreRecord& record);
  void AppendLine(const std::string& line);

  std::filesystem::path path_;
  Options options_;
  int fd_ = -1;
  int lock_fd_ = -1;
  mutable std::mutex mu_;
  std::vector<StoreRecord> records_;  // admitted records; superseded entries kept for ordering
  std::vector<bool> live_;
  std::unordered_map<std::string, Slot> index_;
  std::size_t corrupt_lines_ = 0;
};

Json ToJson(const StoreRecord& record);
StoreRecord StoreRecordFromJson(const Json& j);

inline constexpr const char* kSurfaceCsvHeader = "itn,irs,mean_cost_per_daly,stddev,n,ineffective_n";

// Header plus one row per policy in the query (effective and
// INEFFECTIVE-only alike), sorted by (itn, irs). Reals are written in
// shortest round-trip form; NaN is an empty field.
std::string SurfaceCsv(const SurfaceQuery& query);

}  // namespace polisim
