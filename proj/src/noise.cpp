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

#include "metricdp/noise.hpp"

#include <cmath>

#include "metricdp/errors.hpp"

namespace metricdp {

Eigen::VectorXd sample_l2(double epsilon, int dim, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd direction(dim);
  double norm2;
  do {
    for (int i = 0; i < dim; ++i) direction[i] = normal(rng);
    norm2 = direction.squaredNorm();
  } while (norm2 == 0.0);
  direction /= std::sqrt(norm2);

  std::gamma_distribution<double> radius(static_cast<double>(dim),
                                         1.0 / epsilon);
  return radius(rng) * direction;
}

Eigen::VectorXd sample_mahalanobis(double epsilon,
                                   const Eigen::MatrixXd& sqrt_sigma,
                                   Rng& rng) {
  Eigen::VectorXd y = sample_l2(epsilon, static_cast<int>(sqrt_sigma.rows()), rng);
  return sqrt_sigma * y;
}

NoiseSampler::NoiseSampler(double epsilon, int dim)
    : kind_(MetricKind::kEuclidean), epsilon_(epsilon), dim_(dim) {
  if (!std::isfinite(epsilon) || epsilon <= 0.0) {
    throw InvalidParameter("epsilon must be positive and finite");
  }
  if (dim < 1) throw InvalidParameter("dimension must be at least 1");
}

NoiseSampler::NoiseSampler(double epsilon, Eigen::MatrixXd sqrt_sigma)
    : kind_(MetricKind::kMahalanobis),
      epsilon_(epsilon),
      dim_(static_cast<int>(sqrt_sigma.rows())),
      sqrt_sigma_(std::move(sqrt_sigma)) {
  if (!std::isfinite(epsilon) || epsilon <= 0.0) {
    throw InvalidParameter("epsilon must be positive and finite");
  }
  if (dim_ < 1) throw InvalidParameter("dimension must be at least 1");
  if (sqrt_sigma_.rows() != sqrt_sigma_.cols()) {
    throw DimensionMismatch("sqrt covariance must be square");
  }
}

Eigen::VectorXd NoiseSampler::sample(Rng& rng) const {
  if (kind_ == MetricKind::kEuclidean) {
    return sample_l2(epsilon_, dim_, rng);
  }
  return sample_mahalanobis(epsilon_, sqrt_sigma_, rng);
}

}  // namespace metricdp
