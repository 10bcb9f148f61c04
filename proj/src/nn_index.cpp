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

#include "metricdp/nn_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "metricdp/detail/topk.hpp"
#include "metricdp/errors.hpp"
#include "metricdp/rng.hpp"

namespace metricdp {

namespace {

// Slack subtracted from cluster lower bounds, proportional to the magnitude
// of the distances involved. The exact bound d(q,x) >= d(q,c) - r holds in
// real arithmetic; the computed d(q,c) and r carry O(dim * eps) relative
// rounding, so a 1e-9 * (d + r) cushion keeps pruning strictly
// conservative with orders of magnitude to spare.
constexpr double kBoundMargin = 1e-9;

int resolve_threads(int requested) {
#ifdef _OPENMP
  return requested > 0 ? requested : omp_get_max_threads();
#else
  (void)requested;
  return 1;
#endif
}

// Nearest centroid for one row, with early abort against the best so far.
int assign_row(const Eigen::VectorXd& row_d,
               const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic,
                                   Eigen::RowMajor>& centroids,
               double* best_d2_out) {
  const int k = static_cast<int>(centroids.rows());
  const int dim = static_cast<int>(centroids.cols());
  int best = 0;
  double best_d2 = squared_l2(centroids.data(), row_d.data(), dim);
  for (int c = 1; c < k; ++c) {
    const double d2 = squared_l2_bounded(centroids.data() + std::size_t(c) * dim,
                                         row_d.data(), dim, best_d2);
    if (d2 < best_d2) {
      best_d2 = d2;
      best = c;
    }
  }
  if (best_d2_out != nullptr) *best_d2_out = best_d2;
  return best;
}

}  // namespace

NNIndex::NNIndex(const EmbeddingStore& store, NNIndexOptions options)
    : store_(&store) {
  const int n = store.size();
  const int dim = store.dim();
  if (options.clusters < 0) {
    throw InvalidParameter("clusters must be non-negative");
  }
  if (options.kmeans_iterations < 0) {
    throw InvalidParameter("kmeans_iterations must be non-negative");
  }
  if (options.sample_size <= 0) {
    throw InvalidParameter("sample_size must be positive");
  }

  int k = options.clusters;
  if (k == 0) {
    k = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
  }
  k = std::clamp(k, 1, n);
  const int threads = resolve_threads(options.threads);

  // Train centroids on a sample: uniform distinct seeds, then Lloyd passes.
  // Centroid quality only affects speed, never correctness, so a light
  // training budget is enough.
  Rng rng = make_rng(options.seed, 0xc1u);
  std::vector<int> sample(n);
  std::iota(sample.begin(), sample.end(), 0);
  if (n > options.sample_size) {
    for (int i = 0; i < options.sample_size; ++i) {
      std::uniform_int_distribution<int> pick(i, n - 1);
      std::swap(sample[i], sample[pick(rng)]);
    }
    sample.resize(options.sample_size);
    std::sort(sample.begin(), sample.end());
  }
  const int s = static_cast<int>(sample.size());

  std::vector<int> seeds(sample);
  {
    Rng seed_rng = make_rng(options.seed, 0xc2u);
    for (int i = 0; i < k; ++i) {
      std::uniform_int_distribution<int> pick(i, s - 1);
      std::swap(seeds[i], seeds[pick(seed_rng)]);
    }
    seeds.resize(k);
  }
  centroids_.resize(k, dim);
  for (int c = 0; c < k; ++c) {
    centroids_.row(c) =
        Eigen::Map<const Eigen::Matrix<float, 1, Eigen::Dynamic>>(
            store.row(seeds[c]), dim);
  }

  std::vector<int> sample_assign(s, 0);
  std::vector<Eigen::VectorXd> sums;
  std::vector<std::int64_t> counts;
  for (int iter = 0; iter < options.kmeans_iterations; ++iter) {
#pragma omp parallel for num_threads(threads) schedule(static)
    for (int i = 0; i < s; ++i) {
      sample_assign[i] =
          assign_row(store.embedding(sample[i]), centroids_, nullptr);
    }
    sums.assign(k, Eigen::VectorXd::Zero(dim));
    counts.assign(k, 0);
    for (int i = 0; i < s; ++i) {
      sums[sample_assign[i]] += store.embedding(sample[i]);
      ++counts[sample_assign[i]];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;  // keep the stale centroid
      centroids_.row(c) =
          (sums[c] / static_cast<double>(counts[c])).cast<float>().transpose();
    }
  }

  // Final assignment over every row, then per-cluster member lists in
  // ascending id order and the covering radius used for pruning.
  std::vector<int> assign(n);
  std::vector<double> assign_d2(n);
#pragma omp parallel for num_threads(threads) schedule(static)
  for (int id = 0; id < n; ++id) {
    assign[id] = assign_row(store.embedding(id), centroids_, &assign_d2[id]);
  }

  members_.assign(k, {});
  radius_.assign(k, 0.0);
  for (int id = 0; id < n; ++id) {
    members_[assign[id]].push_back(id);
    radius_[assign[id]] =
        std::max(radius_[assign[id]], std::sqrt(assign_d2[id]));
  }

  // Compact away empty clusters.
  int live = 0;
  for (int c = 0; c < k; ++c) {
    if (members_[c].empty()) continue;
    if (live != c) {
      centroids_.row(live) = centroids_.row(c);
      members_[live] = std::move(members_[c]);
      radius_[live] = radius_[c];
    }
    ++live;
  }
  centroids_.conservativeResize(live, dim);
  members_.resize(live);
  radius_.resize(live);
}

NeighborList NNIndex::query(const Eigen::VectorXd& query, int k,
                            const std::unordered_set<int>& exclude) const {
  const EmbeddingStore& store = *store_;
  detail::check_nn_query(store, query, k, exclude);
  const int dim = store.dim();
  const int n_clusters = static_cast<int>(centroids_.rows());
  const double* q = query.data();

  struct ClusterOrder {
    double dist;  // exact centroid distance, not squared
    int cluster;
  };
  std::vector<ClusterOrder> order(n_clusters);
  for (int c = 0; c < n_clusters; ++c) {
    const double d2 =
        squared_l2(centroids_.data() + std::size_t(c) * dim, q, dim);
    order[c] = ClusterOrder{std::sqrt(d2), c};
  }
  std::sort(order.begin(), order.end(),
            [](const ClusterOrder& a, const ClusterOrder& b) {
              return a.dist < b.dist ||
                     (a.dist == b.dist && a.cluster < b.cluster);
            });

  detail::TopK top(k);
  for (const ClusterOrder& co : order) {
    if (top.full()) {
      const double r = radius_[co.cluster];
      const double lb = co.dist - r - kBoundMargin * (co.dist + r);
      if (lb > 0.0 && lb * lb > top.bound()) {
        continue;  // every member strictly worse than the k-th best
      }
    }
    for (int id : members_[co.cluster]) {
      if (!exclude.empty() && exclude.count(id)) continue;
      const double bound = top.bound();
      const double d2 = squared_l2_bounded(store.row(id), q, dim, bound);
      if (d2 > bound) continue;
      top.offer(d2, id);
    }
  }
  return top.finish_sqrt();
}

NNIndex build_index(const EmbeddingStore& store, NNIndexOptions options) {
  return NNIndex(store, options);
}

}  // namespace metricdp
