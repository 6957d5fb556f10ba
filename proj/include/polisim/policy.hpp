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

#pragma once

#include <compare>
#include <string>
#include <vector>

namespace polisim {

// A point in the two-dimensional intervention space. Coverages are the
// fraction of the population protected; the model has no household
// structure, so "portion of households" is read as "portion of persons".
//
// Values are snapped to the nearest 1/1000 on construction so that two
// policies entered with float noise (0.1 vs 0.1000000001) are the same task.
class Policy {
 public:
  Policy() = default;

  double itn_coverage() const { return itn_milli_ / 1000.0; }
  double irs_coverage() const { return irs_milli_ / 1000.0; }

  // Coverage in thousandths; the canonical integer form used for ordering
  // and hashing.
  int itn_milli() const { return itn_milli_; }
  int irs_milli() const { return irs_milli_; }

  bool is_zero() const { return itn_milli_ == 0 && irs_milli_ == 0; }

  // "0.500,0.250"
  std::string ToString() const;

  friend auto operator<=>(const Policy&, const Policy&) = default;

 private:
  friend Policy MakePolicy(double itn, double irs);
  Policy(int itn_milli, int irs_milli)
      : itn_milli_(itn_milli), irs_milli_(irs_milli) {}

  int itn_milli_ = 0;
  int irs_milli_ = 0;
};

// Throws Error(kOutOfRange) unless both values lie in [0, 1].
Policy MakePolicy(double itn, double irs);

// Every (i*step, j*step) for i, j in 0..1/step, ordered by itn then irs.
// Throws Error(kBadStep) unless 0 < step <= 1 and 1/step is an integer to
// within 1e-9, and also for steps below 0.001 (the coverage resolution).
std::vector<Policy> PolicyGrid(double step);

// Renders a coverage with exactly three decimals: 0.5 -> "0.500".
std::string FormatCoverage(int milli);

}  // namespace polisim
