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
#include <random>

#include <doctest.h>

#include "polisim/rng.hpp"

namespace polisim {
namespace {

TEST_CASE("engine is the standard MT19937-64") {
  // The C++ standard fixes the 10000th output of a default-seeded engine.
  std::mt19937_64 engine;
  engine.discard(9999);
  CHECK(engine() == 9981545732273789042ull);

  // Uniform() is the top 53 bits of the same stream.
  Rng rng(5489);
  std::mt19937_64 reference(5489);
  for (int i = 0; i < 100; ++i) {
    CHECK(rng.Uniform() == static_cast<double>(reference() >> 11) * 0x1.0p-53);
  }
}

TEST_CASE("uniform, below and normal ranges and moments") {
  Rng rng(7);
  double sum = 0.0;
  double sum_sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.Uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    const auto b = rng.Below(11);
    REQUIRE(b < 11);
    const double z = rng.Normal();
    sum += z;
    sum_sq += z * z;
  }
  CHECK(std::abs(sum / n) < 5.0 / std::sqrt(n));
  CHECK(std::abs(sum_sq / n - 1.0) < 0.02);
}

TEST_CASE("same seed, same stream") {
  Rng a(123);
  Rng b(123);
  for (int i = 0; i < 1000; ++i) CHECK(a.Binomial(9850, 0.00995) == b.Binomial(9850, 0.00995));
}

struct QuantileCase {
  std::int64_t n;
  double p;
  double u;
  std::int64_t expected;
};

TEST_CASE("binomial quantiles match scipy") {
  // From tests/oracles/binomial_oracle.py.
  const QuantileCase cases[] = {
      {10, 0.5, 0.3, 4},           {10, 0.5, 0.999, 9},          {150, 0.99, 0.5, 149},
      {150, 0.99, 0.01, 145},      {9850, 0.00995, 0.5, 98},     {9850, 0.00995, 0.05, 82},
      {9850, 0.00995, 0.95, 114},  {10000, 0.5, 0.5, 5000},      {10000, 0.5, 1e-06, 4762},
      {10000, 0.5, 0.999999, 5238}, {1000000, 0.3, 0.25, 299691}, {1, 0.2, 0.79, 0},
      {1, 0.2, 0.81, 1},
  };
  for (const auto& c : cases) {
    CAPTURE(c.n);
    CAPTURE(c.p);
    CAPTURE(c.u);
    CHECK(BinomialQuantile(c.n, c.p, c.u) == c.expected);
  }
  // Smallest k with CDF(k) > 0.
  CHECK(BinomialQuantile(10, 0.5, 0.0) == 0);
}

TEST_CASE("binomial degenerate inputs") {
  CHECK(BinomialQuantile(0, 0.5, 0.7) == 0);
  CHECK(BinomialQuantile(100, 0.0, 0.999) == 0);
  CHECK(BinomialQuantile(100, 1.0, 0.0) == 100);
  CHECK(BinomialQuantile(100, 0.5, 0.9999999999999999) <= 100);
}

TEST_CASE("binomial quantile is monotone in u and stays in range") {
  for (auto [n, p] : {std::pair<std::int64_t, double>{9850, 0.00995}, {150, 0.99}, {40, 0.3},
                      {10000, 0.5}, {3, 0.999}}) {
    std::int64_t previous = 0;
    for (int i = 0; i < 2000; ++i) {
      const double u = i / 2000.0;
      const auto k = BinomialQuantile(n, p, u);
      CHECK(k >= previous);
      CHECK(k <= n);
      previous = k;
    }
  }
}

TEST_CASE("binomial samples have the right mean and variance") {
  Rng rng(99);
  for (auto [n, p] : {std::pair<std::int64_t, double>{9850, 0.00995}, {150, 0.9}, {20, 0.25}}) {
    const int draws = 100000;
    double sum = 0.0;
    double sum_sq = 0.0;
    for (int i = 0; i < draws; ++i) {
      const double x = static_cast<double>(rng.Binomial(n, p));
      sum += x;
      sum_sq += x * x;
    }
    const double mean = sum / draws;
    const double var = sum_sq / draws - mean * mean;
    const double true_mean = n * p;
    const double true_var = n * p * (1 - p);
    CAPTURE(n);
    CHECK(std::abs(mean - true_mean) < 5.0 * std::sqrt(true_var / draws));
    CHECK(std::abs(var / true_var - 1.0) < 0.03);
  }
}

}  // namespace
}  // namespace polisim
