// Copyright 2026 The metricdp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <random>

#include <doctest.h>

#include "helpers.hpp"
#include "metricdp/rng.hpp"
#include "metricdp/stats.hpp"

using namespace metricdp;
using namespace metricdp::test;

namespace {

// log C(n, k) via lgamma.
double log_choose(std::int64_t n, std::int64_t k) {
  return std::lgamma(double(n) + 1) - std::lgamma(double(k) + 1) -
         std::lgamma(double(n - k) + 1);
}

// P(X >= s) for X ~ Binomial(n, p), direct summation.
double binom_upper_tail(std::int64_t s, std::int64_t n, double p) {
  double total = 0.0;
  for (std::int64_t k = s; k <= n; ++k) {
    total += std::exp(log_choose(n, k) + double(k) * std::log(p) +
                      double(n - k) * std::log1p(-p));
  }
  return total;
}

// P(X <= s).
double binom_lower_tail(std::int64_t s, std::int64_t n, double p) {
  double total = 0.0;
  for (std::int64_t k = 0; k <= s; ++k) {
    total += std::exp(log_choose(n, k) + double(k) * std::log(p) +
                      double(n - k) * std::log1p(-p));
  }
  return total;
}

}  // namespace

TEST_CASE("mix64 matches the splitmix64 reference vector") {
  // First output of splitmix64 seeded with 0.
  CHECK(mix64(0) == 0xE220A8397B1DCDAFULL);
}

TEST_CASE("derive_seed separates streams") {
  // No collisions across a small salt grid, and the order of salts matters.
  std::unordered_set<std::uint64_t> seen;
  for (std::uint64_t a = 0; a < 20; ++a)
    for (std::uint64_t b = 0; b < 20; ++b)
      CHECK(seen.insert(derive_seed(123, a, b)).second);
  CHECK(derive_seed(1, 2, 3) != derive_seed(1, 3, 2));
  CHECK(derive_seed(1, 2, 3) != derive_seed(2, 2, 3));
  // Same inputs, same stream.
  Rng a = make_rng(9, 1, 2, 3);
  Rng b = make_rng(9, 1, 2, 3);
  CHECK(a() == b());
}

TEST_CASE("binomial bound edge cases") {
  CHECK(binomial_lower_bound(0, 100, 0.05) == 0.0);
  CHECK(binomial_upper_bound(100, 100, 0.05) == 1.0);
  // s = n: the lower bound solves p^n = alpha.
  CHECK(binomial_lower_bound(10, 10, 0.05) ==
        doctest::Approx(std::pow(0.05, 0.1)).epsilon(1e-12));
  // s = 0: the upper bound solves (1-p)^n = alpha.
  CHECK(binomial_upper_bound(0, 20, 0.01) ==
        doctest::Approx(1.0 - std::pow(0.01, 1.0 / 20)).epsilon(1e-12));
  CHECK_THROWS_AS(binomial_lower_bound(-1, 10, 0.05), InvalidParameter);
  CHECK_THROWS_AS(binomial_lower_bound(11, 10, 0.05), InvalidParameter);
  CHECK_THROWS_AS(binomial_lower_bound(1, 10, 0.0), InvalidParameter);
  CHECK_THROWS_AS(binomial_upper_bound(1, 10, 1.0), InvalidParameter);
}

TEST_CASE("binomial bounds satisfy the Clopper-Pearson defining equations") {
  // Lower bound L: P(X >= s | L) = alpha. Upper bound U: P(X <= s | U) =
  // alpha. Verified by direct tail summation.
  const double alpha = 0.025;
  for (std::int64_t n : {10, 40}) {
    for (std::int64_t s = 1; s <= n; s += 3) {
      const double lo = binomial_lower_bound(s, n, alpha);
      CHECK(binom_upper_tail(s, n, lo) == doctest::Approx(alpha).epsilon(1e-8));
      CHECK(lo <= double(s) / double(n));
    }
    for (std::int64_t s = 0; s < n; s += 3) {
      const double up = binomial_upper_bound(s, n, alpha);
      CHECK(binom_lower_tail(s, n, up) == doctest::Approx(alpha).epsilon(1e-8));
      CHECK(up >= double(s) / double(n));
    }
  }
}

TEST_CASE("binomial bounds cover the true parameter") {
  // Simulated coverage: the lower bound exceeds the true p at rate <= alpha.
  const double p = 0.3;
  const std::int64_t n = 200;
  const double alpha = 0.05;
  const int sims = 2000;
  Rng rng = make_rng(0xc04e, 0);
  std::binomial_distribution<std::int64_t> binom(n, p);
  int lower_misses = 0, upper_misses = 0;
  for (int i = 0; i < sims; ++i) {
    const std::int64_t s = binom(rng);
    if (binomial_lower_bound(s, n, alpha) > p) ++lower_misses;
    if (binomial_upper_bound(s, n, alpha) < p) ++upper_misses;
  }
  const double slack = 3.0 * std::sqrt(alpha * (1 - alpha) / sims);
  CHECK(lower_misses / double(sims) <= alpha + slack);
  CHECK(upper_misses / double(sims) <= alpha + slack);
}

TEST_CASE("gamma cdf closed forms") {
  // Shape 1 is the exponential distribution.
  CHECK(gamma_cdf(2.0, 1.0, 0.5) ==
        doctest::Approx(1.0 - std::exp(-4.0)).epsilon(1e-12));
  // Shape 2, scale 1 at x=1: 1 - 2/e.
  CHECK(gamma_cdf(1.0, 2.0, 1.0) ==
        doctest::Approx(1.0 - 2.0 / std::exp(1.0)).epsilon(1e-12));
  CHECK(gamma_cdf(0.0, 3.0, 1.0) == 0.0);
  // Monotone in x.
  CHECK(gamma_cdf(1.0, 3.0, 1.0) < gamma_cdf(2.0, 3.0, 1.0));
}

TEST_CASE("ks critical value formula") {
  CHECK(ks_critical_value(100000, 0.001) ==
        doctest::Approx(std::sqrt(-std::log(0.0005) / 2.0) / std::sqrt(1e5))
            .epsilon(1e-12));
  // Tighter levels, larger critical value; more samples, smaller.
  CHECK(ks_critical_value(1000, 0.001) > ks_critical_value(1000, 0.05));
  CHECK(ks_critical_value(10000, 0.01) < ks_critical_value(1000, 0.01));
}
