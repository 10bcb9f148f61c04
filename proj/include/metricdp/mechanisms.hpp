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

#ifndef METRICDP_MECHANISMS_HPP_
#define METRICDP_MECHANISMS_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "metricdp/embeddings.hpp"
#include "metricdp/metrics.hpp"
#include "metricdp/nn_index.hpp"
#include "metricdp/noise.hpp"
#include "metricdp/rng.hpp"

namespace metricdp {

/// Whether the input word itself may come back as a candidate. The
/// include-input policy makes the t=0 mechanism coincide with the noisy
/// first-nearest-neighbor baseline; exclude-input reproduces the listing
/// that drops the input from the argmin and is required for the snn preset.
enum class CandidatePolicy { kIncludeInput, kExcludeInput };

/// Metric used to rank neighbor candidates. Selection is Euclidean by
/// default regardless of the noise metric; kNoiseMetric ranks with the same
/// metric that calibrated the noise (experimental).
enum class SelectionMetric { kEuclidean, kNoiseMetric };

struct Variant {
  enum class Kind { kVickrey, kGeneralized, kSnn, kJthNeighbor };

  Kind kind = Kind::kVickrey;
  double t = 0.0;                   // vickrey
  std::vector<double> weights;      // generalized, one t_r >= 0 per rank
  int j = 1;                        // jth-neighbor, 1-based rank

  static Variant vickrey(double t);
  static Variant generalized(std::vector<double> weights);
  static Variant snn();
  /// Deterministically outputs the j-th nearest neighbor of the noised
  /// embedding (j=1 with include-input is the noisy-1NN baseline).
  static Variant jth_neighbor(int j);

  /// Candidates ranked per redaction.
  int candidate_count() const;
  std::string describe() const;
};

struct MechanismConfig {
  MetricKind noise_metric = MetricKind::kEuclidean;
  double lambda = 0.5;  // covariance regularization weight, mahalanobis only
  double epsilon = 1.0;
  Variant variant;
  CandidatePolicy policy = CandidatePolicy::kIncludeInput;
  SelectionMetric selection = SelectionMetric::kEuclidean;

  void validate(int vocab_size) const;
};

/// Debug record of one redaction.
struct RedactionTrace {
  int input;
  Eigen::VectorXd noised;
  NeighborList candidates;
  std::vector<double> probabilities;  // sums to 1, aligned with candidates
  int output;
};

/// Probability of selecting the first of two candidates at distances
/// d1 <= d2 from the noised embedding:
///   (1 - t) d2 / (t d1 + (1 - t) d2).
/// t=0 always gives 1 and t=1 always gives 0. The degenerate d1 = d2 = 0
/// case at t in (0,1) resolves to the first candidate (measure-zero event;
/// a deterministic resolution keeps traces reproducible).
double selection_probability(double t, double d1, double d2);

/// Selection weights for the generalized variant: softmax of -t_r * d_r,
/// computed with a max shift.
std::vector<double> generalized_weights(const std::vector<double>& ts,
                                        const std::vector<double>& distances);

/// Word -> word randomized map. Implemented by the production mechanism and
/// by test stubs (identity, randomized response) for the audit machinery.
class WordMechanism {
 public:
  virtual ~WordMechanism() = default;
  virtual int redact(int word_id, Rng& rng) const = 0;
};

/// A configured redaction mechanism bound to a store. Pure given
/// (config, store, rng stream); safe for concurrent use with per-worker rng
/// streams. Passing an index accelerates the Euclidean candidate search
/// without changing any result.
class Mechanism : public WordMechanism {
 public:
  Mechanism(MechanismConfig config, const EmbeddingStore& store,
            const NNIndex* index = nullptr);

  const MechanismConfig& config() const { return config_; }
  const EmbeddingStore& store() const { return *store_; }
  const NoiseSampler& sampler() const { return sampler_; }

  int redact(int word_id, Rng& rng) const override;
  RedactionTrace redact_traced(int word_id, Rng& rng) const;

  /// Selection step with the noised embedding supplied by the caller (tests
  /// force Z = 0 by passing the word's own embedding).
  int redact_noised(int word_id, const Eigen::VectorXd& noised,
                    Rng& rng) const;
  RedactionTrace redact_noised_traced(int word_id,
                                      const Eigen::VectorXd& noised,
                                      Rng& rng) const;

 private:
  NeighborList candidates(int word_id, const Eigen::VectorXd& noised) const;

  MechanismConfig config_;
  const EmbeddingStore* store_;
  const NNIndex* index_;
  Metric selection_metric_;
  NoiseSampler sampler_;
};

enum class OovPolicy { kError, kPassThrough };

struct RedactStringOptions {
  OovPolicy oov = OovPolicy::kError;
  /// When set, only these ids are redacted; other in-vocabulary tokens pass
  /// through unchanged.
  const std::vector<int>* redactable = nullptr;
  std::uint64_t master_seed = 0;
  /// Offset mixed into each token's stream id (callers give every document
  /// a disjoint range so outputs do not depend on batching).
  std::uint64_t stream_offset = 0;
  int threads = 0;  // <= 0: OpenMP default
};

/// Redacts each token independently with fresh noise. Token i draws from the
/// stream derived from (master_seed, stream_offset + i), so output is
/// independent of the worker schedule. OpenMP-parallel over tokens.
std::vector<std::string> redact_tokens(const std::vector<std::string>& tokens,
                                       const Mechanism& mechanism,
                                       const RedactStringOptions& options);

/// Plain serial reference for redact_tokens; the parallel path must match it
/// byte for byte.
std::vector<std::string> redact_tokens_serial(
    const std::vector<std::string>& tokens, const Mechanism& mechanism,
    const RedactStringOptions& options);

}  // namespace metricdp

#endif  // METRICDP_MECHANISMS_HPP_
