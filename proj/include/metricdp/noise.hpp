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

#ifndef METRICDP_NOISE_HPP_
#define METRICDP_NOISE_HPP_

#include <Eigen/Core>

#include "metricdp/metrics.hpp"
#include "metricdp/rng.hpp"

namespace metricdp {

/// Draws Z with density p(z) proportional to exp(-eps * ||z||_2) in R^p:
/// a Gamma(shape = p, scale = 1/eps) radius times a uniform direction
/// (normalized standard Gaussian). E||Z|| = p / eps.
Eigen::VectorXd sample_l2(double epsilon, int dim, Rng& rng);

/// Draws Z with density proportional to exp(-eps * sqrt(z' Sigma^-1 z)):
/// Z = Sigma^{1/2} Y with Y from sample_l2 (the Jacobian is constant).
Eigen::VectorXd sample_mahalanobis(double epsilon,
                                   const Eigen::MatrixXd& sqrt_sigma,
                                   Rng& rng);

/// Immutable sampler bound to one metric/epsilon/dimension. Parameters are
/// validated here, not per draw.
class NoiseSampler {
 public:
  /// Euclidean-calibrated sampler.
  NoiseSampler(double epsilon, int dim);
  /// Mahalanobis-calibrated sampler; takes the symmetric square root of
  /// Sigma_lambda.
  NoiseSampler(double epsilon, Eigen::MatrixXd sqrt_sigma);

  double epsilon() const { return epsilon_; }
  int dim() const { return dim_; }
  MetricKind kind() const { return kind_; }

  Eigen::VectorXd sample(Rng& rng) const;

 private:
  MetricKind kind_;
  double epsilon_;
  int dim_;
  Eigen::MatrixXd sqrt_sigma_;
};

}  // namespace metricdp

#endif  // METRICDP_NOISE_HPP_
