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

#include "metricdp/metrics.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace metricdp {

namespace {

void check_dims(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (x.size() != y.size()) {
    throw DimensionMismatch("vector dimensions " + std::to_string(x.size()) +
                            " and " + std::to_string(y.size()) + " differ");
  }
}

}  // namespace

double euclidean_distance(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  check_dims(x, y);
  return (x - y).norm();
}

double mahalanobis_distance(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                            const MahalanobisData& data) {
  check_dims(x, y);
  if (x.size() != data.sigma.rows()) {
    throw DimensionMismatch("vector dimension " + std::to_string(x.size()) +
                            " does not match covariance dimension " +
                            std::to_string(data.sigma.rows()));
  }
  Eigen::VectorXd diff = x - y;
  data.llt.matrixL().solveInPlace(diff);
  return diff.norm();
}

Metric Metric::euclidean() { return Metric(MetricKind::kEuclidean); }

Metric Metric::indicator() { return Metric(MetricKind::kIndicator); }

Metric Metric::mahalanobis(const Eigen::MatrixXd& sigma) {
  if (sigma.rows() != sigma.cols()) {
    throw DimensionMismatch("covariance must be square");
  }
  if (!sigma.isApprox(sigma.transpose(), 1e-10)) {
    throw NotPositiveDefinite("covariance is not symmetric");
  }
  auto data = std::make_shared<MahalanobisData>();
  data->sigma = 0.5 * (sigma + sigma.transpose());
  data->llt.compute(data->sigma);
  if (data->llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("covariance factorization failed");
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(data->sigma);
  if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() <= 0.0) {
    throw NotPositiveDefinite("covariance has a non-positive eigenvalue");
  }
  data->sqrt_sigma = eig.eigenvectors() *
                     eig.eigenvalues().cwiseSqrt().asDiagonal() *
                     eig.eigenvectors().transpose();

  Metric metric(MetricKind::kMahalanobis);
  metric.maha_ = std::move(data);
  return metric;
}

double Metric::operator()(const Eigen::VectorXd& x,
                          const Eigen::VectorXd& y) const {
  switch (kind_) {
    case MetricKind::kEuclidean:
      return euclidean_distance(x, y);
    case MetricKind::kMahalanobis:
      return mahalanobis_distance(x, y, *maha_);
    case MetricKind::kIndicator:
      check_dims(x, y);
      return x == y ? 0.0 : 1.0;
  }
  return 0.0;
}

Eigen::MatrixXd regularized_covariance(const EmbeddingStore& store,
                                       double lambda) {
  if (lambda < 0.0 || lambda > 1.0) {
    throw InvalidParameter("lambda must lie in [0, 1]");
  }
  const int p = store.dim();
  if (lambda == 0.0) return Eigen::MatrixXd::Identity(p, p);

  const auto& m = store.matrix();
  const Eigen::Index n = m.rows();

  // Accumulate mean and scatter in double, in fixed chunk order so the
  // result does not depend on threading.
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(p);
  constexpr Eigen::Index kChunk = 4096;
  for (Eigen::Index start = 0; start < n; start += kChunk) {
    const Eigen::Index rows = std::min(kChunk, n - start);
    mean += m.middleRows(start, rows).cast<double>().colwise().sum();
  }
  mean /= static_cast<double>(n);

  Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index start = 0; start < n; start += kChunk) {
    const Eigen::Index rows = std::min(kChunk, n - start);
    Eigen::MatrixXd centered =
        m.middleRows(start, rows).cast<double>().rowwise() - mean.transpose();
    scatter.noalias() += centered.transpose() * centered;
  }
  Eigen::MatrixXd cov = scatter / static_cast<double>(n - 1);

  Eigen::MatrixXd sigma = lambda * cov;
  if (lambda < 1.0) {
    sigma += (1.0 - lambda) * Eigen::MatrixXd::Identity(p, p);
  }
  sigma = 0.5 * (sigma + sigma.transpose());

  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite(
        "regularized covariance is not positive-definite (lambda=" +
        std::to_string(lambda) + "); lower lambda");
  }
  return sigma;
}

}  // namespace metricdp
