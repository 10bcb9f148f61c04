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

#ifndef METRICDP_NN_INDEX_HPP_
#define METRICDP_NN_INDEX_HPP_

#include <cstdint>
#include <unordered_set>
#include <vector>

#include <Eigen/Core>

#include "metricdp/embeddings.hpp"

namespace metricdp {

struct NNIndexOptions {
  int clusters = 0;          // 0 = sqrt(n) heuristic
  int kmeans_iterations = 2;
  int sample_size = 100000;  // rows used to train centroids
  std::uint64_t seed = 0x9d2c5680;
  int threads = 0;           // 0 = hardware default
};

/// Exact Euclidean k-NN accelerator over an EmbeddingStore.
///
/// Rows are grouped by nearest centroid. A query visits clusters in order of
/// centroid distance, skips a cluster only when its triangle-inequality
/// lower bound (shrunk by a relative margin against rounding) exceeds the
/// current k-th best, and scans surviving rows with the canonical
/// squared_l2 kernel plus monotone early abort. Surviving rows therefore get
/// exactly the distance the exhaustive scan computes, and results are
/// identical to nearest_neighbors element-wise. There is no approximate
/// mode.
class NNIndex {
 public:
  NNIndex(const EmbeddingStore& store, NNIndexOptions options = {});

  const EmbeddingStore& store() const { return *store_; }
  int clusters() const { return static_cast<int>(centroids_.rows()); }

  NeighborList query(const Eigen::VectorXd& query, int k,
                     const std::unordered_set<int>& exclude = {}) const;

 private:
  const EmbeddingStore* store_;
  Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>
      centroids_;
  std::vector<double> radius_;            // max member distance per cluster
  std::vector<std::vector<int>> members_; // ascending ids per cluster
};

/// Convenience: build with defaults.
NNIndex build_index(const EmbeddingStore& store, NNIndexOptions options = {});

}  // namespace metricdp

#endif  // METRICDP_NN_INDEX_HPP_
