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

#ifndef METRICDP_TESTS_HELPERS_HPP_
#define METRICDP_TESTS_HELPERS_HPP_

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include <Eigen/Core>

#include "metricdp/audit.hpp"
#include "metricdp/embeddings.hpp"
#include "metricdp/mechanisms.hpp"
#include "metricdp/rng.hpp"

namespace metricdp::test {

// ---------------------------------------------------------------------------
// Fixtures

// Canonical 1-d five-word fixture. Consecutive gaps 1, 1.5, 1.5, 2; midpoints
// at 0.5, 1.75, 3.25, 5.
inline const char* kFixtureText = "A 0\nB 1\nC 2.5\nD 4\nE 6\n";

inline EmbeddingStore fixture_store() {
  std::istringstream in(kFixtureText);
  return load_embeddings(in, EmbeddingFormat::kGloveText, std::nullopt,
                         "fixture");
}

// Sentiment labels for the fixture: A, B positive; C, D, E negative.
inline std::unordered_set<std::string> fixture_positive() { return {"A", "B"}; }
inline std::unordered_set<std::string> fixture_negative() {
  return {"C", "D", "E"};
}

inline std::vector<int> all_ids(const EmbeddingStore& store) {
  std::vector<int> ids(store.size());
  for (int i = 0; i < store.size(); ++i) ids[i] = i;
  return ids;
}

// Builds a store directly from rows (one word per row, names w0, w1, ...).
inline EmbeddingStore make_store(const std::vector<std::vector<double>>& rows,
                                 const std::string& name = "inline") {
  if (rows.empty()) throw std::logic_error("make_store: no rows");
  const int n = static_cast<int>(rows.size());
  const int dim = static_cast<int>(rows.front().size());
  EmbeddingStore::Matrix m(n, dim);
  std::vector<std::string> vocab(n);
  for (int i = 0; i < n; ++i) {
    vocab[i] = "w" + std::to_string(i);
    for (int d = 0; d < dim; ++d) m(i, d) = static_cast<float>(rows[i][d]);
  }
  return EmbeddingStore(std::move(vocab), std::move(m), name);
}

// Random Gaussian store, used for search-equivalence properties.
inline EmbeddingStore random_store(int n, int dim, std::uint64_t seed,
                                   double spread = 1.0) {
  Rng rng = make_rng(seed, 0x517e);
  std::normal_distribution<double> gauss(0.0, spread);
  EmbeddingStore::Matrix m(n, dim);
  std::vector<std::string> vocab(n);
  for (int i = 0; i < n; ++i) {
    vocab[i] = "w" + std::to_string(i);
    for (int d = 0; d < dim; ++d) m(i, d) = static_cast<float>(gauss(rng));
  }
  return EmbeddingStore(std::move(vocab), std::move(m), "random");
}

// Gaussian-mixture store shaped like a real embedding table (clusters with
// unit in-cluster spread). Cluster structure is what makes the index useful.
inline EmbeddingStore clustered_store(int n, int dim, int clusters,
                                      std::uint64_t seed) {
  Rng rng = make_rng(seed, 0xc105);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<int> pick(0, clusters - 1);
  Eigen::MatrixXd centers(clusters, dim);
  for (int c = 0; c < clusters; ++c)
    for (int d = 0; d < dim; ++d) centers(c, d) = 5.0 * gauss(rng);
  EmbeddingStore::Matrix m(n, dim);
  std::vector<std::string> vocab(n);
  for (int i = 0; i < n; ++i) {
    vocab[i] = "w" + std::to_string(i);
    const int c = pick(rng);
    for (int d = 0; d < dim; ++d)
      m(i, d) = static_cast<float>(centers(c, d) + gauss(rng));
  }
  return EmbeddingStore(std::move(vocab), std::move(m), "clustered");
}

inline Eigen::VectorXd vec1(double x) {
  Eigen::VectorXd v(1);
  v << x;
  return v;
}

// ---------------------------------------------------------------------------
// Independent oracles

// Naive k-NN oracle: Eigen-accumulated distances (a different summation
// order than the library kernel), full sort by (distance, id). Library
// results must agree on ids exactly and on distances within tolerance.
inline NeighborList naive_neighbors(const EmbeddingStore& store,
                                    const Eigen::VectorXd& query, int k,
                                    const std::unordered_set<int>& exclude) {
  std::vector<Neighbor> all;
  for (int id = 0; id < store.size(); ++id) {
    if (exclude.count(id)) continue;
    const double d2 = (store.embedding(id) - query).squaredNorm();
    all.push_back({id, d2});
  }
  std::sort(all.begin(), all.end(), [](const Neighbor& a, const Neighbor& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return a.id < b.id;
  });
  if (static_cast<std::size_t>(k) > all.size())
    throw std::logic_error("naive_neighbors: k too large");
  all.resize(static_cast<std::size_t>(k));
  for (auto& nb : all) nb.distance = std::sqrt(nb.distance);
  return all;
}

// Dense view of a TransitionModel: rows index `f.row_ids`, columns the full
// vocabulary. Missing cells are zero.
inline Eigen::MatrixXd to_dense(const TransitionModel& f) {
  Eigen::MatrixXd m =
      Eigen::MatrixXd::Zero(static_cast<int>(f.row_ids.size()), f.vocab_size);
  for (std::size_t r = 0; r < f.rows.size(); ++r)
    for (const auto& cell : f.rows[r]) m(static_cast<int>(r), cell.col) = cell.p;
  return m;
}

// Direct Bayes oracle: dense posterior columns over the full vocabulary,
// computed with plain double loops, independent of the library's sparse path.
// Column w' is zero when the evidence mass is zero.
inline Eigen::MatrixXd naive_posterior(const Prior& prior,
                                       const TransitionModel& f) {
  const Eigen::MatrixXd dense = to_dense(f);
  const int n = static_cast<int>(prior.size());
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, f.vocab_size);
  for (int col = 0; col < f.vocab_size; ++col) {
    double evidence = 0.0;
    for (int r = 0; r < n; ++r) evidence += prior.weight(r) * dense(r, col);
    if (evidence <= 0.0) continue;
    for (int r = 0; r < n; ++r)
      g(r, col) = prior.weight(r) * dense(r, col) / evidence;
  }
  return g;
}

// Direct triple-sum oracle for E_M over the dense representations.
inline double naive_expected_inference_error(const Prior& prior,
                                             const TransitionModel& f,
                                             const WordDistance& d_e) {
  const Eigen::MatrixXd dense = to_dense(f);
  const Eigen::MatrixXd g = naive_posterior(prior, f);
  const int n = static_cast<int>(prior.size());
  double total = 0.0;
  for (int r = 0; r < n; ++r) {
    const int w = prior.ids()[r];
    for (int col = 0; col < f.vocab_size; ++col) {
      if (dense(r, col) == 0.0) continue;
      double inner = 0.0;
      for (int a = 0; a < n; ++a)
        inner += g(a, col) * d_e(prior.ids()[a], w);
      total += prior.weight(r) * dense(r, col) * inner;
    }
  }
  return total;
}

// Direct double-sum oracle for L_M. Uncovered (w, w') pairs charge loss 0,
// matching the library's documented policy.
inline double naive_expected_utility_loss(const Prior& prior,
                                          const TransitionModel& f,
                                          const WordDistance& d_l) {
  const Eigen::MatrixXd dense = to_dense(f);
  double total = 0.0;
  for (int r = 0; r < static_cast<int>(prior.size()); ++r) {
    const int w = prior.ids()[r];
    for (int col = 0; col < f.vocab_size; ++col) {
      if (dense(r, col) == 0.0 || !d_l.covered(w, col)) continue;
      total += prior.weight(r) * dense(r, col) * d_l(w, col);
    }
  }
  return total;
}

// Total variation distance between two rows of transition estimates over the
// full vocabulary.
inline double tv_distance(const TransitionModel& a, std::size_t row_a,
                          const TransitionModel& b, std::size_t row_b) {
  const Eigen::MatrixXd da = to_dense(a);
  const Eigen::MatrixXd db = to_dense(b);
  double tv = 0.0;
  for (int col = 0; col < a.vocab_size; ++col)
    tv += std::abs(da(static_cast<int>(row_a), col) -
                   db(static_cast<int>(row_b), col));
  return 0.5 * tv;
}

// ---------------------------------------------------------------------------
// Mechanism stubs

// Non-private deterministic stub: always returns the input.
class IdentityMechanism : public WordMechanism {
 public:
  int redact(int word_id, Rng&) const override { return word_id; }
};

// Two-word randomized response: flips to the other word with probability q.
// With q = e^{-eps} / (1 + e^{-eps}) this satisfies eps-DP under the
// indicator metric, with the log ratio exactly eps.
class RandomizedResponse : public WordMechanism {
 public:
  RandomizedResponse(int a, int b, double q) : a_(a), b_(b), q_(q) {}

  int redact(int word_id, Rng& rng) const override {
    const double u =
        static_cast<double>(rng() >> 11) * 0x1.0p-53;
    const int other = word_id == a_ ? b_ : a_;
    return u < q_ ? other : word_id;
  }

 private:
  int a_;
  int b_;
  double q_;
};

// Wraps a Mechanism with the noise forced to zero: the selection step sees
// the word's own embedding.
class ZeroNoiseMechanism : public WordMechanism {
 public:
  explicit ZeroNoiseMechanism(const Mechanism& mechanism)
      : mechanism_(&mechanism) {}

  int redact(int word_id, Rng& rng) const override {
    return mechanism_->redact_noised(
        word_id, mechanism_->store().embedding(word_id), rng);
  }

 private:
  const Mechanism* mechanism_;
};

// ---------------------------------------------------------------------------
// Scratch files

// Writes `text` under a per-process scratch directory and returns the path.
inline std::filesystem::path write_temp(const std::string& name,
                                        const std::string& text) {
  static const std::filesystem::path dir = [] {
    auto d = std::filesystem::temp_directory_path() /
             ("metricdp_tests_" + std::to_string(::getpid()));
    std::filesystem::create_directories(d);
    return d;
  }();
  const auto path = dir / name;
  std::ofstream out(path);
  out << text;
  if (!out) throw std::runtime_error("write_temp failed: " + path.string());
  return path;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

}  // namespace metricdp::test

#endif  // METRICDP_TESTS_HELPERS_HPP_
