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

#ifndef METRICDP_STATS_HPP_
#define METRICDP_STATS_HPP_

#include <cstdint>

namespace metricdp {

/// Exact (Clopper-Pearson) one-sided binomial bounds on p given `successes`
/// out of `trials`, each holding with probability >= 1 - alpha.
double binomial_lower_bound(std::int64_t successes, std::int64_t trials,
                            double alpha);
double binomial_upper_bound(std::int64_t successes, std::int64_t trials,
                            double alpha);

/// CDF of Gamma(shape, scale) at x.
double gamma_cdf(double x, double shape, double scale);

/// Asymptotic one-sample Kolmogorov-Smirnov critical value at level alpha
/// for n samples: sqrt(-ln(alpha/2) / 2) / sqrt(n).
double ks_critical_value(std::int64_t n, double alpha);

}  // namespace metricdp

#endif  // METRICDP_STATS_HPP_
