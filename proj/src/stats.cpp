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

#include "metricdp/stats.hpp"

#include <cmath>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/gamma.hpp>

#include "metricdp/errors.hpp"

namespace metricdp {

namespace {

void check_binomial_args(std::int64_t successes, std::int64_t trials,
                         double alpha) {
  if (trials < 1) throw InvalidParameter("trials must be >= 1");
  if (successes < 0 || successes > trials) {
    throw InvalidParameter("successes must lie in [0, trials]");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw InvalidParameter("alpha must lie in (0, 1)");
  }
}

}  // namespace

double binomial_lower_bound(std::int64_t successes, std::int64_t trials,
                            double alpha) {
  check_binomial_args(successes, trials, alpha);
  if (successes == 0) return 0.0;
  // Clopper-Pearson: quantile of Beta(s, n - s + 1) at alpha.
  const boost::math::beta_distribution<double> beta(
      static_cast<double>(successes), static_cast<double>(trials - successes + 1));
  return boost::math::quantile(beta, alpha);
}

double binomial_upper_bound(std::int64_t successes, std::int64_t trials,
                            double alpha) {
  check_binomial_args(successes, trials, alpha);
  if (successes == trials) return 1.0;
  // Clopper-Pearson: quantile of Beta(s + 1, n - s) at 1 - alpha.
  const boost::math::beta_distribution<double> beta(
      static_cast<double>(successes + 1), static_cast<double>(trials - successes));
  return boost::math::quantile(beta, 1.0 - alpha);
}

double gamma_cdf(double x, double shape, double scale) {
  if (!(shape > 0.0) || !(scale > 0.0)) {
    throw InvalidParameter("gamma shape and scale must be positive");
  }
  if (x <= 0.0) return 0.0;
  const boost::math::gamma_distribution<double> gamma(shape, scale);
  return boost::math::cdf(gamma, x);
}

double ks_critical_value(std::int64_t n, double alpha) {
  if (n < 1) throw InvalidParameter("n must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw InvalidParameter("alpha must lie in (0, 1)");
  }
  return std::sqrt(-std::log(alpha / 2.0) / 2.0) / std::sqrt(static_cast<double>(n));
}

}  // namespace metricdp
