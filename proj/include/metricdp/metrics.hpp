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

#ifndef METRICDP_METRICS_HPP_
#define METRICDP_METRICS_HPP_

#include <memory>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "metricdp/embeddings.hpp"
#include "metricdp/errors.hpp"

namespace metricdp {

enum class MetricKind { kEuclidean, kMahalanobis, kIndicator };

/// Pre-factorized data for the Mahalanobis metric: Sigma, its Cholesky
/// factor (distances go through a triangular solve, never an explicit
/// inverse) and its symmetric square root (used by the noise sampler).
struct MahalanobisData {
  Eigen::MatrixXd sigma;
  Eigen::LLT<Eigen::MatrixXd> llt;
  Eigen::MatrixXd sqrt_sigma;
};

/// Distance metric for noise calibration and audit distances. Immutable and
/// freely shareable across threads. The indicator metric is valid only as an
/// audit distance; it has no density normalization in R^p and cannot
/// calibrate noise or rank neighbors.
class Metric {
 public:
  static Metric euclidean();
  static Metric indicator();
  /// Throws NotPositiveDefinite unless sigma is symmetric positive-definite.
  static Metric mahalanobis(const Eigen::MatrixXd& sigma);

  MetricKind kind() const { return kind_; }
  const MahalanobisData& mahalanobis_data() const { return *maha_; }

  /// d(x, y). For the indicator metric this is 1{x != y} (exact coordinate
  /// equality). Throws DimensionMismatch.
  double operator()(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;

 private:
  explicit Metric(MetricKind kind) : kind_(kind) {}

  MetricKind kind_;
  std::shared_ptr<const MahalanobisData> maha_;
};

double euclidean_distance(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

double mahalanobis_distance(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                            const MahalanobisData& data);

/// Sigma_lambda = lambda * SampleCov + (1 - lambda) * I, with the unbiased
/// n-1 denominator. Positive-definite for lambda < 1; at lambda = 1 a
/// degenerate embedding set raises NotPositiveDefinite (lower lambda).
Eigen::MatrixXd regularized_covariance(const EmbeddingStore& store,
                                       double lambda);

}  // namespace metricdp

#endif  // METRICDP_METRICS_HPP_
