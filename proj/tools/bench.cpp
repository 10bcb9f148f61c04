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

// Timing harness: exact indexed k-NN vs the exhaustive scan, and the
// OpenMP paths vs their serial references (which must agree bitwise).

#include <chrono>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "metricdp/audit.hpp"
#include "metricdp/embeddings.hpp"
#include "metricdp/mechanisms.hpp"
#include "metricdp/nn_index.hpp"
#include "metricdp/rng.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Mixture-of-Gaussians store: embedding corpora are strongly clustered, so
// the synthetic benchmark should be too.
metricdp::EmbeddingStore make_clustered_store(int n, int dim, int clusters,
                                              std::uint64_t seed) {
  metricdp::Rng rng = metricdp::make_rng(seed, 0xbe);
  std::normal_distribution<double> unit(0.0, 1.0);

  std::vector<Eigen::VectorXf> centers(clusters);
  for (int c = 0; c < clusters; ++c) {
    centers[c] = Eigen::VectorXf(dim);
    for (int d = 0; d < dim; ++d) {
      centers[c][d] = static_cast<float>(5.0 * unit(rng));
    }
  }

  metricdp::EmbeddingStore::Matrix matrix(n, dim);
  std::vector<std::string> vocab(n);
  std::uniform_int_distribution<int> pick(0, clusters - 1);
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXf& center = centers[pick(rng)];
    for (int d = 0; d < dim; ++d) {
      matrix(i, d) = center[d] + static_cast<float>(unit(rng));
    }
    vocab[i] = "w" + std::to_string(i);
  }
  return metricdp::EmbeddingStore(std::move(vocab), std::move(matrix),
                                  "synthetic");
}

}  // namespace

int main(int argc, char** argv) {
  int n = 400000;
  int dim = 300;
  int clusters = 200;
  int queries = 200;
  int k = 2;
  int tokens = 2000;
  long long samples = 200000;
  std::uint64_t seed = 7;

  CLI::App app{"metricdp benchmarks"};
  app.add_option("--n", n, "store rows");
  app.add_option("--dim", dim, "store dimensionality");
  app.add_option("--clusters", clusters, "generator mixture components");
  app.add_option("--queries", queries, "NN queries to time");
  app.add_option("--k", k, "neighbors per query");
  app.add_option("--tokens", tokens, "tokens for the redaction benchmark");
  app.add_option("--samples", samples, "samples for the transition benchmark");
  app.add_option("--seed", seed, "generator seed");
  CLI11_PARSE(app, argc, argv);

  std::printf("generating %d x %d store...\n", n, dim);
  auto t0 = Clock::now();
  const metricdp::EmbeddingStore store = make_clustered_store(n, dim, clusters, seed);
  std::printf("  %.2fs\n", seconds_since(t0));

  t0 = Clock::now();
  const metricdp::NNIndex index(store);
  std::printf("index build (%d clusters): %.2fs\n", index.clusters(),
              seconds_since(t0));

  // Queries near stored points plus noise, the redaction access pattern.
  metricdp::Rng rng = metricdp::make_rng(seed, 0x51);
  std::vector<Eigen::VectorXd> qs;
  std::uniform_int_distribution<int> pick_row(0, n - 1);
  std::normal_distribution<double> unit(0.0, 1.0);
  for (int q = 0; q < queries; ++q) {
    Eigen::VectorXd v = store.embedding(pick_row(rng));
    for (int d = 0; d < dim; ++d) v[d] += 0.5 * unit(rng);
    qs.push_back(std::move(v));
  }

  t0 = Clock::now();
  std::vector<metricdp::NeighborList> brute;
  for (const Eigen::VectorXd& q : qs) {
    brute.push_back(metricdp::nearest_neighbors_l2(store, q, k, {}));
  }
  const double brute_s = seconds_since(t0);

  t0 = Clock::now();
  std::vector<metricdp::NeighborList> indexed;
  for (const Eigen::VectorXd& q : qs) {
    indexed.push_back(index.query(q, k, {}));
  }
  const double index_s = seconds_since(t0);

  bool identical = true;
  for (int q = 0; q < queries; ++q) {
    for (int i = 0; i < k; ++i) {
      if (brute[q][i].id != indexed[q][i].id ||
          brute[q][i].distance != indexed[q][i].distance) {
        identical = false;
      }
    }
  }
  std::printf("kNN scan:  %.4fs (%.2f ms/query)\n", brute_s,
              1e3 * brute_s / queries);
  std::printf("kNN index: %.4fs (%.2f ms/query), speedup %.1fx, %s\n", index_s,
              1e3 * index_s / queries, brute_s / index_s,
              identical ? "results identical" : "RESULTS DIFFER");

  // Token redaction, serial reference vs OpenMP.
  metricdp::MechanismConfig mc;
  mc.epsilon = 50.0;
  mc.variant = metricdp::Variant::vickrey(0.5);
  const metricdp::Mechanism mech(mc, store, &index);
  std::vector<std::string> toks;
  for (int i = 0; i < tokens; ++i) toks.push_back(store.word(pick_row(rng)));
  metricdp::RedactStringOptions opts;
  opts.master_seed = seed;

  t0 = Clock::now();
  const auto serial = metricdp::redact_tokens_serial(toks, mech, opts);
  const double serial_s = seconds_since(t0);
  t0 = Clock::now();
  const auto parallel = metricdp::redact_tokens(toks, mech, opts);
  const double parallel_s = seconds_since(t0);
  std::printf("redact %d tokens: serial %.2fs, parallel %.2fs, %s\n", tokens,
              serial_s, parallel_s,
              serial == parallel ? "outputs identical" : "OUTPUTS DIFFER");

  // Transition estimation on a tiny store, serial vs OpenMP.
  const metricdp::EmbeddingStore small = make_clustered_store(64, 8, 4, seed);
  metricdp::MechanismConfig mc_small;
  mc_small.epsilon = 2.0;
  mc_small.variant = metricdp::Variant::vickrey(0.5);
  const metricdp::Mechanism mech_small(mc_small, small);
  std::vector<int> ids = {0, 1, 2, 3};

  t0 = Clock::now();
  const auto f_serial = metricdp::estimate_transition_serial(
      mech_small, ids, small.size(), samples, seed);
  const double est_serial_s = seconds_since(t0);
  t0 = Clock::now();
  const auto f_parallel = metricdp::estimate_transition(
      mech_small, ids, small.size(), samples, seed);
  const double est_parallel_s = seconds_since(t0);

  bool same = f_serial.rows.size() == f_parallel.rows.size();
  for (std::size_t r = 0; same && r < f_serial.rows.size(); ++r) {
    same = f_serial.rows[r].size() == f_parallel.rows[r].size();
    for (std::size_t c = 0; same && c < f_serial.rows[r].size(); ++c) {
      same = f_serial.rows[r][c].col == f_parallel.rows[r][c].col &&
             f_serial.rows[r][c].count == f_parallel.rows[r][c].count;
    }
  }
  std::printf(
      "estimate %lld samples x %zu words: serial %.2fs, parallel %.2fs, %s\n",
      samples, ids.size(), est_serial_s, est_parallel_s,
      same ? "counts identical" : "COUNTS DIFFER");
  return identical && same ? 0 : 1;
}
