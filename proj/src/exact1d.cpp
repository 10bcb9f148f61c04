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

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "metricdp/audit.hpp"
#include "metricdp/errors.hpp"
#include "metricdp/mechanisms.hpp"
#include "metricdp/metrics.hpp"

namespace metricdp {

namespace {

// Beyond 45 nats of the scalar Laplace density the truncated mass is below
// 3e-20, far under the 1e-8 row-sum budget.
constexpr double kTailNats = 45.0;
constexpr double kPieceTol = 1e-13;
constexpr int kMaxDepth = 30;

using Fn = std::function<Eigen::VectorXd(double)>;

Eigen::VectorXd simpson_step(const Fn& f, double a, const Eigen::VectorXd& fa,
                             double m, const Eigen::VectorXd& fm, double b,
                             const Eigen::VectorXd& fb,
                             const Eigen::VectorXd& whole, double tol,
                             int depth) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const Eigen::VectorXd flm = f(lm);
  const Eigen::VectorXd frm = f(rm);
  const Eigen::VectorXd left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const Eigen::VectorXd right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const Eigen::VectorXd delta = left + right - whole;
  if (depth <= 0 || delta.cwiseAbs().maxCoeff() <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return simpson_step(f, a, fa, lm, flm, m, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, fm, rm, frm, b, fb, right, 0.5 * tol, depth - 1);
}

Eigen::VectorXd adaptive_simpson(const Fn& f, double a, double b, double tol) {
  const double m = 0.5 * (a + b);
  const Eigen::VectorXd fa = f(a);
  const Eigen::VectorXd fm = f(m);
  const Eigen::VectorXd fb = f(b);
  const Eigen::VectorXd whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_step(f, a, fa, m, fm, b, fb, whole, tol, kMaxDepth);
}

}  // namespace

TransitionModel exact_transition_1d(const MechanismConfig& config,
                                    const EmbeddingStore& store,
                                    const std::vector<int>& redactable_ids) {
  if (store.dim() != 1) {
    throw DimensionNotOne("exact transitions need a 1-d store, got dim " +
                          std::to_string(store.dim()));
  }
  if (store.size() > 32) {
    throw InvalidParameter("exact 1-d oracle is limited to 32 words");
  }
  config.validate(store.size());
  if (redactable_ids.empty()) {
    throw InvalidParameter("redactable id list is empty");
  }
  const int n = store.size();
  for (int id : redactable_ids) {
    if (id < 0 || id >= n) {
      throw InvalidParameter("redactable id " + std::to_string(id) +
                             " outside [0, vocab)");
    }
  }

  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) x[i] = static_cast<double>(store.row(i)[0]);

  // In one dimension, Mahalanobis noise is Euclidean noise at scale
  // sqrt(Sigma), so it folds into an effective epsilon; the optional
  // metric-consistent selection rescales distances by the same factor.
  double noise_scale = 1.0;
  double sel_scale = 1.0;
  if (config.noise_metric == MetricKind::kMahalanobis) {
    const Eigen::MatrixXd sigma = regularized_covariance(store, config.lambda);
    noise_scale = std::sqrt(sigma(0, 0));
    if (config.selection == SelectionMetric::kNoiseMetric) {
      sel_scale = 1.0 / noise_scale;
    }
  }
  const double eps_eff = config.epsilon / noise_scale;

  // Breakpoints: every coordinate (kinks of the density and of |x_i - z|)
  // and every pairwise midpoint (neighbor-ranking changes). Each resulting
  // piece has a smooth integrand.
  std::vector<double> brks(x);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) brks.push_back(0.5 * (x[i] + x[j]));
  }
  const auto [min_it, max_it] = std::minmax_element(x.begin(), x.end());
  const double lo = *min_it - kTailNats / eps_eff;
  const double hi = *max_it + kTailNats / eps_eff;
  brks.push_back(lo);
  brks.push_back(hi);
  std::sort(brks.begin(), brks.end());
  brks.erase(std::unique(brks.begin(), brks.end()), brks.end());

  const int k = config.variant.candidate_count();
  const bool exclude_input = config.policy == CandidatePolicy::kExcludeInput;

  TransitionModel f;
  f.row_ids = redactable_ids;
  f.vocab_size = n;
  f.samples_per_row = 0;
  f.rows.resize(redactable_ids.size());

  struct Ranked {
    double dist;
    int id;
  };

  for (std::size_t r = 0; r < redactable_ids.size(); ++r) {
    const int w = redactable_ids[r];
    const double mu = x[w];

    std::vector<Ranked> ranked;
    ranked.reserve(n);
    const Fn integrand = [&](double z) {
      ranked.clear();
      for (int i = 0; i < n; ++i) {
        if (exclude_input && i == w) continue;
        ranked.push_back(Ranked{std::abs(x[i] - z) * sel_scale, i});
      }
      std::sort(ranked.begin(), ranked.end(),
                [](const Ranked& a, const Ranked& b) {
                  return a.dist < b.dist ||
                         (a.dist == b.dist && a.id < b.id);
                });

      Eigen::VectorXd probs = Eigen::VectorXd::Zero(n);
      switch (config.variant.kind) {
        case Variant::Kind::kVickrey: {
          const double p1 = selection_probability(
              config.variant.t, ranked[0].dist, ranked[1].dist);
          probs[ranked[0].id] += p1;
          probs[ranked[1].id] += 1.0 - p1;
          break;
        }
        case Variant::Kind::kGeneralized: {
          std::vector<double> dist(k);
          for (int c = 0; c < k; ++c) dist[c] = ranked[c].dist;
          const std::vector<double> weights =
              generalized_weights(config.variant.weights, dist);
          for (int c = 0; c < k; ++c) probs[ranked[c].id] += weights[c];
          break;
        }
        case Variant::Kind::kSnn:
          probs[ranked[1].id] = 1.0;
          break;
        case Variant::Kind::kJthNeighbor:
          probs[ranked[config.variant.j - 1].id] = 1.0;
          break;
      }
      const double density =
          0.5 * eps_eff * std::exp(-eps_eff * std::abs(z - mu));
      return Eigen::VectorXd(probs * density);
    };

    Eigen::VectorXd mass = Eigen::VectorXd::Zero(n);
    for (std::size_t b = 0; b + 1 < brks.size(); ++b) {
      if (brks[b + 1] <= brks[b]) continue;
      mass += adaptive_simpson(integrand, brks[b], brks[b + 1], kPieceTol);
    }

    for (int i = 0; i < n; ++i) {
      if (exclude_input && i == w) continue;
      f.rows[r].push_back(TransitionModel::Cell{i, mass[i], 0});
    }
  }
  return f;
}

}  // namespace metricdp
