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

#include "polisim/policy.hpp"

#include <cmath>

#include <fmt/format.h>

#include "polisim/error.hpp"

namespace polisim {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kOutOfRange: return "OUT_OF_RANGE";
    case ErrorCode::kBadStep: return "BAD_STEP";
    case ErrorCode::kInvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::kPrecondition: return "PRECONDITION";
    case ErrorCode::kParse: return "PARSE";
    case ErrorCode::kHashMismatch: return "HASH_MISMATCH";
    case ErrorCode::kProtocol: return "PROTOCOL";
    case ErrorCode::kConnectionLost: return "CONNECTION_LOST";
    case ErrorCode::kTimeout: return "TIMEOUT";
    case ErrorCode::kTaskFailed: return "TASK_FAILED";
    case ErrorCode::kIo: return "IO";
    case ErrorCode::kLocked: return "LOCKED";
  }
  return "UNKNOWN";
}

std::string FormatCoverage(int milli) {
  return fmt::format("{}.{:03d}", milli / 1000, milli % 1000);
}

std::string Policy::ToString() const {
  return FormatCoverage(itn_milli_) + "," + FormatCoverage(irs_milli_);
}

Policy MakePolicy(double itn, double irs) {
  // NaN fails both comparisons and is rejected too.
  auto in_range = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in_range(itn) || !in_range(irs)) {
    throw Error(ErrorCode::kOutOfRange,
                fmt::format("coverage ({}, {}) outside [0, 1]", itn, irs));
  }
  return Policy(static_cast<int>(std::lround(itn * 1000.0)),
                static_cast<int>(std::lround(irs * 1000.0)));
}

std::vector<Policy> PolicyGrid(double step) {
  if (!(step > 0.0 && step <= 1.0)) {
    throw Error(ErrorCode::kBadStep, fmt::format("step {} not in (0, 1]", step));
  }
  const double divisions = 1.0 / step;
  const double rounded = std::round(divisions);
  if (std::abs(divisions - rounded) > 1e-9) {
    throw Error(ErrorCode::kBadStep,
                fmt::format("1/step = {} is not an integer", divisions));
  }
  if (rounded > 1000.0) {
    // Coverages are kept in thousandths; a finer grid would repeat points.
    throw Error(ErrorCode::kBadStep, fmt::format("step {} finer than 0.001", step));
  }
  const int n = static_cast<int>(rounded);
  std::vector<Policy> grid;
  grid.reserve(static_cast<std::size_t>(n + 1) * (n + 1));
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j <= n; ++j) {
      grid.push_back(MakePolicy(static_cast<double>(i) / n,
                                static_cast<double>(j) / n));
    }
  }
  return grid;
}

}  // namespace polisim
