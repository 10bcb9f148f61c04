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

#ifndef METRICDP_AUDIT_HPP_
#define METRICDP_AUDIT_HPP_

#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <Eigen/Core>

#include "metricdp/embeddings.hpp"
#include "metricdp/mechanisms.hpp"
#include "metricdp/metrics.hpp"
#include "metricdp/rng.hpp"

namespace metricdp {

/// Adversary prior over the redactable word ids. Normalized; support
/// non-empty.
class Prior {
 public:
  static Prior uniform(const std::vector<int>& ids);
  /// Weights proportional to `counts`; zero-total counts raise EmptyPrior.
  static Prior from_counts(const std::vector<int>& ids,
                           const std::vector<double>& counts);

  const std::vector<int>& ids() const { return ids_; }
  const std::vector<double>& weights() const { return weights_; }
  double weight(std::size_t row) const { return weights_[row]; }
  std::size_t size() const { return ids_.size(); }

 private:
  Prior(std::vector<int> ids, std::vector<double> weights);
  std::vector<int> ids_;
  std::vector<double> weights_;
};

/// Row-stochastic estimate of f_M(w'|w). Rows cover the redactable set,
/// columns conceptually the full vocabulary; rows are stored sparsely as
/// sorted (column, probability, count) cells. samples_per_row == 0 marks an
/// exact (quadrature) transition.
struct TransitionModel {
  struct Cell {
    int col;
    double p;
    std::int64_t count;
  };

  std::vector<int> row_ids;
  int vocab_size = 0;
  std::vector<std::vector<Cell>> rows;
  std::int64_t samples_per_row = 0;

  double probability(std::size_t row, int col) const;
  /// Max over rows of |sum - 1|.
  double max_row_sum_error() const;
};

/// Word-level audit distance (d_E for privacy, d_L for utility).
class WordDistance {
 public:
  /// 1{w != w'}.
  static WordDistance indicator();
  /// ||phi(w) - phi(w')||_2 in the store's embedding space.
  static WordDistance embedding_euclidean(const EmbeddingStore& store);
  /// 1{sentiment(w') != sentiment(w)} from positive/negative word lists.
  /// Out-of-lexicon words: strict mode raises LexiconMissingWord, otherwise
  /// loss 0 and the mass is tallied separately by the caller.
  static WordDistance sentiment_flip(
      const EmbeddingStore& store,
      const std::unordered_set<std::string>& positive,
      const std::unordered_set<std::string>& negative, bool strict = false);

  double operator()(int w, int w_prime) const;
  /// True when both words carry a sentiment label (always true for the other
  /// kinds).
  bool covered(int w, int w_prime) const;

 private:
  enum class Kind { kIndicator, kEmbeddingEuclidean, kSentimentFlip };
  WordDistance(Kind kind) : kind_(kind) {}

  Kind kind_;
  const EmbeddingStore* store_ = nullptr;
  std::shared_ptr<const std::vector<std::int8_t>> sentiment_;  // -1/0/+1 per id
  bool strict_ = false;
};

/// Monte-Carlo transition estimate: each row is the empirical output
/// frequency over N independent mechanism runs. Run (row, rep) draws from
/// the rng stream derived from (master_seed, word_id, rep), so the estimate
/// is identical for any worker count. OpenMP-parallel over rows and
/// repetition blocks.
TransitionModel estimate_transition(const WordMechanism& mechanism,
                                    const std::vector<int>& redactable_ids,
                                    int vocab_size, std::int64_t samples_per_word,
                                    std::uint64_t master_seed, int threads = 0);

/// Serial reference for estimate_transition; must match bitwise.
TransitionModel estimate_transition_serial(const WordMechanism& mechanism,
                                           const std::vector<int>& redactable_ids,
                                           int vocab_size,
                                           std::int64_t samples_per_word,
                                           std::uint64_t master_seed);

/// Exact transition kernel for one-dimensional stores (p = 1, small n).
/// Partitions the line into maximal intervals of constant neighbor ranking
/// (breakpoints at every pairwise midpoint and every embedding coordinate,
/// so each piece is smooth), then integrates the scalar Laplace density of
/// the noised embedding times the variant's selection weight by adaptive
/// quadrature. Rows sum to 1 within 1e-8. Throws DimensionNotOne.
TransitionModel exact_transition_1d(const MechanismConfig& config,
                                    const EmbeddingStore& store,
                                    const std::vector<int>& redactable_ids);

/// Bayes posterior over original words given an observed output:
///   g(w_hat | w') = pi(w_hat) f(w' | w_hat) / sum_w pi(w) f(w' | w).
/// Columns are the outputs with positive evidence mass; zero-denominator
/// columns are dropped (they occur with probability zero under the prior)
/// and listed in dropped_cols.
struct Posterior {
  std::vector<int> row_ids;   // candidate originals (prior support order)
  std::vector<int> col_ids;   // observed outputs with positive evidence
  Eigen::MatrixXd g;          // row_ids.size() x col_ids.size()
  std::vector<int> dropped_cols;
};

Posterior posterior(const Prior& prior, const TransitionModel& f);

enum class AdversaryMode {
  kPosteriorSampling,  // integrate over the posterior, as written
  kMap                 // point mass on argmax, ties to the lowest id
};

struct ExpectedValue {
  double value = 0.0;
  double half_width = 0.0;  // 95%, normal approximation, plug-in variance
  /// Probability mass on (w, w') pairs the distance does not cover
  /// (sentiment-flip only; charged loss 0, tallied here).
  double uncovered_mass = 0.0;
};

/// E_M = sum_{w,w',w_hat} pi(w) f(w'|w) g(w_hat|w') d_E(w_hat, w).
/// The half-width treats the posterior as plug-in and models each row of f
/// as a multinomial over N draws; exact transitions get half-width 0.
ExpectedValue expected_inference_error(
    const Prior& prior, const TransitionModel& f, const Posterior& g,
    const WordDistance& d_e, AdversaryMode mode = AdversaryMode::kPosteriorSampling);

/// L_M = sum_{w,w'} pi(w) f(w'|w) d_L(w, w').
ExpectedValue expected_utility_loss(const Prior& prior,
                                    const TransitionModel& f,
                                    const WordDistance& d_l);

/// One audited configuration: empirical privacy E_M, utility loss L_M and
/// their confidence half-widths.
struct AuditReport {
  double epsilon = 0.0;
  Variant variant;
  std::string mechanism_label;
  double e_m = 0.0;
  double e_m_half_width = 0.0;
  double l_m = 0.0;
  double l_m_half_width = 0.0;
  double uncovered_mass = 0.0;
  std::int64_t samples_per_word = 0;
  int repetitions = 1;
  std::uint64_t seed = 0;
};

struct DpCheckOptions {
  std::int64_t samples_per_word = 1000000;
  /// A (w, w', w_hat) cell is testable when at least one of the two
  /// empirical cells has this many hits; cells below are reported untested.
  std::int64_t min_cell_count = 50;
  /// One-sided confidence level of the lower bound on the log ratio. Split
  /// across the two Clopper-Pearson bounds, so the checker never flags a
  /// correct mechanism at more than this rate per cell.
  double alpha = 1e-3;
  std::uint64_t master_seed = 0;
  int threads = 0;
};

struct DpCheckCell {
  int w;
  int w_prime;
  int output;
  std::int64_t count_w;
  std::int64_t count_w_prime;
  double log_ratio_estimate;  // +inf when the denominator cell is empty
  double log_ratio_lower_bound;
  double bound;  // epsilon * d(phi(w), phi(w'))
  bool testable;
  bool violation;
};

struct DpCheckReport {
  std::vector<DpCheckCell> cells;
  std::int64_t untestable = 0;
  std::int64_t violations = 0;
};

/// Statistically verifies Pr{M(w)=w_hat} <= exp(eps d(phi(w), phi(w'))) *
/// Pr{M(w')=w_hat} over the given ordered pairs. A violation is flagged only
/// when the one-sided lower confidence bound of the log ratio (exact
/// binomial bounds on both cells) exceeds the metric-DP bound, so a correct
/// mechanism yields zero flags.
DpCheckReport empirical_dp_check(const WordMechanism& mechanism,
                                 const EmbeddingStore& store,
                                 const Metric& metric, double epsilon,
                                 const std::vector<std::pair<int, int>>& pairs,
                                 const DpCheckOptions& options);

}  // namespace metricdp

#endif  // METRICDP_AUDIT_HPP_
