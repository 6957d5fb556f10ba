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

#include "polisim/rng.hpp"

#include <cmath>
#include <numbers>

namespace polisim {

double Rng::Normal() {
  const double u1 = 1.0 - Uniform();  // (0, 1]
  const double u2 = Uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::int64_t Rng::Binomial(std::int64_t trials, double p) {
  return BinomialQuantile(trials, p, Uniform());
}

// Sequential inverse-CDF search. Starting at zero underflows once n*p is in
// the hundreds, so the search starts at
//   L = floor(mu - sqrt(2 * 42 * mu)),  mu = n*p,
// below which the Chernoff bound exp(-t^2 / (2 mu)) puts less than 1e-18 of
// the mass, far under the 2^-53 resolution of the uniform. pmf(L) comes from
// lgamma; successive terms use pmf(k+1) = pmf(k) * (n-k)/(k+1) * p/(1-p).
std::int64_t BinomialQuantile(std::int64_t trials, double p, double u) {
  if (trials <= 0 || p <= 0.0) return 0;
  if (p >= 1.0) return trials;

  const double n = static_cast<double>(trials);
  const double mean = n * p;
  const double q = 1.0 - p;
  const double odds = p / q;

  std::int64_t k = 0;
  const double lower = std::floor(mean - std::sqrt(84.0 * mean));
  if (lower > 0.0) k = static_cast<std::int64_t>(lower);

  double pmf;
  if (k == 0) {
    pmf = std::exp(n * std::log1p(-p));
  } else {
    const double kd = static_cast<double>(k);
    pmf = std::exp(std::lgamma(n + 1.0) - std::lgamma(kd + 1.0) - std::lgamma(n - kd + 1.0) +
                   kd * std::log(p) + (n - kd) * std::log1p(-p));
  }
  double cdf = pmf;
  while (cdf <= u && k < trials) {
    pmf *= static_cast<double>(trials - k) / static_cast<double>(k + 1) * odds;
    ++k;
    cdf += pmf;
    // Past the mean with negligible remaining terms: accumulated rounding
    // left cdf a hair below u, and no further term can change the answer.
    if (static_cast<double>(k) > mean && pmf < cdf * 1e-17) break;
  }
  return k;
}

}  // namespace polisim
