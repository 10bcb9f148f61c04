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

#include <random>
#include <vector>

#include <doctest.h>

#include "helpers.hpp"
#include "metricdp/nn_index.hpp"

using namespace metricdp;
using namespace metricdp::test;

namespace {

// The exactness contract: ids and distances equal, element for element,
// with no floating-point tolerance.
void check_bitwise_equal(const NeighborList& got, const NeighborList& want) {
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    CHECK(got[i].id == want[i].id);
    CHECK(got[i].distance == want[i].distance);
  }
}

void check_index_matches_scan(const EmbeddingStore& store,
                              const NNIndex& index, int queries,
                              std::uint64_t seed) {
  Rng rng = make_rng(seed, 0x9e);
  std::normal_distribution<double> gauss(0.0, 3.0);
  std::uniform_int_distribution<int> pick_row(0, store.size() - 1);
  for (int rep = 0; rep < queries; ++rep) {
    Eigen::VectorXd q(store.dim());
    if (rep % 4 == 0) {
      // Query exactly on a stored embedding: distance-zero ties.
      q = store.embedding(pick_row(rng));
    } else {
      for (int d = 0; d < store.dim(); ++d) q(d) = gauss(rng);
    }
    std::unordered_set<int> exclude;
    if (rep % 3 == 2) exclude = {pick_row(rng), pick_row(rng)};
    const int k = 1 + rep % 7;
    check_bitwise_equal(index.query(q, k, exclude),
                        nearest_neighbors_l2(store, q, k, exclude));
  }
}

}  // namespace

TEST_CASE("index options are validated") {
  const auto store = fixture_store();
  NNIndexOptions bad;
  bad.clusters = -1;
  CHECK_THROWS_AS(NNIndex(store, bad), InvalidParameter);
  bad = {};
  bad.kmeans_iterations = -2;
  CHECK_THROWS_AS(NNIndex(store, bad), InvalidParameter);
  bad = {};
  bad.sample_size = 0;
  CHECK_THROWS_AS(NNIndex(store, bad), InvalidParameter);
}

TEST_CASE("index equals exhaustive scan on random gaussian data") {
  const auto store = random_store(500, 8, 0x5eed);
  for (int clusters : {0, 1, 7, 64}) {
    NNIndexOptions opt;
    opt.clusters = clusters;
    const NNIndex index(store, opt);
    CHECK(index.clusters() >= 1);
    CHECK(index.clusters() <= 500);
    check_index_matches_scan(store, index, 60, 0x11 + clusters);
  }
}

TEST_CASE("index equals exhaustive scan on clustered data") {
  const auto store = clustered_store(3000, 16, 20, 0xfeed);
  const NNIndex index(store);
  check_index_matches_scan(store, index, 80, 0x22);
}

TEST_CASE("index is exact with untrained centroids") {
  // kmeans_iterations = 0 leaves the random seed rows as centroids; pruning
  // bounds still hold, so results stay exact.
  const auto store = random_store(300, 6, 0xbee);
  NNIndexOptions opt;
  opt.kmeans_iterations = 0;
  opt.clusters = 13;
  const NNIndex index(store, opt);
  check_index_matches_scan(store, index, 50, 0x33);
}

TEST_CASE("index is exact when training on a subsample") {
  const auto store = clustered_store(2000, 8, 10, 0x4a11);
  NNIndexOptions opt;
  opt.sample_size = 128;
  const NNIndex index(store, opt);
  check_index_matches_scan(store, index, 50, 0x44);
}

TEST_CASE("index handles duplicate embeddings and exact ties") {
  // Five copies of each of 40 lattice points: every query hits massive ties
  // and the (distance, id) order must match the scan exactly.
  std::vector<std::vector<double>> rows;
  for (int x = 0; x < 8; ++x)
    for (int y = 0; y < 5; ++y)
      for (int copy = 0; copy < 5; ++copy)
        rows.push_back({double(x), double(y)});
  const auto store = make_store(rows);
  const NNIndex index(store);

  Eigen::VectorXd q(2);
  for (double qx : {0.0, 0.5, 1.0, 3.5}) {
    for (double qy : {0.0, 0.5, 2.0}) {
      q << qx, qy;
      for (int k : {1, 5, 11, 40}) {
        check_bitwise_equal(index.query(q, k, {}),
                            nearest_neighbors_l2(store, q, k, {}));
      }
    }
  }
  check_index_matches_scan(store, index, 40, 0x55);
}

TEST_CASE("index works on tiny stores") {
  const auto store = fixture_store();
  for (int clusters : {0, 1, 3, 5, 100}) {
    NNIndexOptions opt;
    opt.clusters = clusters;
    const NNIndex index(store, opt);
    for (double x : {-1.0, 0.5, 1.2, 3.25, 7.0}) {
      for (int k = 1; k <= 5; ++k) {
        check_bitwise_equal(index.query(vec1(x), k, {}),
                            nearest_neighbors_l2(store, vec1(x), k, {}));
      }
    }
    check_bitwise_equal(index.query(vec1(1.2), 2, {1}),
                        nearest_neighbors_l2(store, vec1(1.2), 2, {1}));
  }
}

TEST_CASE("index query validates arguments like the scan") {
  const auto store = fixture_store();
  const NNIndex index(store);
  CHECK_THROWS_AS(index.query(vec1(0), 6, {}), KTooLarge);
  CHECK_THROWS_AS(index.query(vec1(0), 0, {}), InvalidParameter);
  Eigen::VectorXd q2(2);
  q2.setZero();
  CHECK_THROWS_AS(index.query(q2, 1, {}), DimensionMismatch);
}

TEST_CASE("build_index convenience wrapper") {
  const auto store = random_store(64, 4, 0x99);
  const NNIndex index = build_index(store);
  check_index_matches_scan(store, index, 20, 0x66);
}
