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

#include <cstdint>
#include <random>

namespace polisim {

// Portable random stream. The engine is MT19937-64 (fully specified by the
// C++ standard, seeded with the raw 64-bit seed). Nothing here uses the
// implementation-defined <random> distributions, so another language can
// reproduce a stream from the definitions below:
//
//   Uniform()     = (next() >> 11) * 2^-53, in [0, 1)
//   Below(n)      = floor(Uniform() * n)
//   Normal()      = sqrt(-2 ln(1 - U1)) * cos(2 pi U2), two uniforms per call
//   Binomial(n,p) = inverse CDF of one uniform, see rng.cpp
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double Uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  std::uint64_t Below(std::uint64_t n) {
    return static_cast<std::uint64_t>(Uniform() * static_cast<double>(n));
  }

  double Normal();

  std::int64_t Binomial(std::int64_t trials, double p);

 private:
  std::mt19937_64 engine_;
};

// Inverse of the Binomial(trials, p) CDF at u in [0, 1): the smallest k with
// P(X <= k) > u. Monotone in u, so runs sharing a uniform stream stay
// coupled. Exposed for testing.
std::int64_t BinomialQuantile(std::int64_t trials, double p, double u);

}  // namespace polisim
