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

#include "metricdp/audit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "metricdp/errors.hpp"
#include "metricdp/stats.hpp"

namespace metricdp {

namespace {

constexpr double kZ95 = 1.959963984540054;  // two-sided 95% normal quantile

int resolve_threads(int requested) {
#ifdef _OPENMP
  return requested > 0 ? requested : omp_get_max_threads();
#else
  (void)requested;
  return 1;
#endif
}

}  // namespace

Prior::Prior(std::vector<int> ids, std::vector<double> weights)
    : ids_(std::move(ids)), weights_(std::move(weights)) {
  if (ids_.empty()) throw EmptyPrior("prior support is empty");
  if (ids_.size() != weights_.size()) {
    throw DimensionMismatch("prior ids and weights differ in length");
  }
}

Prior Prior::uniform(const std::vector<int>& ids) {
  if (ids.empty()) throw EmptyPrior("prior support is empty");
  return Prior(ids, std::vector<double>(
                        ids.size(), 1.0 / static_cast<double>(ids.size())));
}

Prior Prior::from_counts(const std::vector<int>& ids,
                         const std::vector<double>& counts) {
  if (ids.empty()) throw EmptyPrior("prior support is empty");
  if (ids.size() != counts.size()) {
    throw DimensionMismatch("prior ids and counts differ in length");
  }
  double total = 0.0;
  for (double c : counts) {
    if (!(c >= 0.0) || !std::isfinite(c)) {
      throw InvalidParameter("prior counts must be finite and >= 0");
    }
    total += c;
  }
  if (total <= 0.0) throw EmptyPrior("prior counts sum to zero");
  std::vector<double> weights(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) weights[i] = counts[i] / total;
  return Prior(ids, std::move(weights));
}

double TransitionModel::probability(std::size_t row, int col) const {
  const std::vector<Cell>& cells = rows.at(row);
  const auto it = std::lower_bound(
      cells.begin(), cells.end(), col,
      [](const Cell& c, int target) { return c.col < target; });
  if (it == cells.end() || it->col != col) return 0.0;
  return it->p;
}

double TransitionModel::max_row_sum_error() const {
  double worst = 0.0;
  for (const std::vector<Cell>& cells : rows) {
    double sum = 0.0;
    for (const Cell& c : cells) sum += c.p;
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  return worst;
}

WordDistance WordDistance::indicator() { return WordDistance(Kind::kIndicator); }

WordDistance WordDistance::embedding_euclidean(const EmbeddingStore& store) {
  WordDistance d(Kind::kEmbeddingEuclidean);
  d.store_ = &store;
  return d;
}

WordDistance WordDistance::sentiment_flip(
    const EmbeddingStore& store,
    const std::unordered_set<std::string>& positive,
    const std::unordered_set<std::string>& negative, bool strict) {
  WordDistance d(Kind::kSentimentFlip);
  d.store_ = &store;
  d.strict_ = strict;
  auto labels = std::make_shared<std::vector<std::int8_t>>(store.size(), 0);
  for (int id = 0; id < store.size(); ++id) {
    const std::string& w = store.word(id);
    const bool pos = positive.count(w) > 0;
    const bool neg = negative.count(w) > 0;
    if (pos == neg) continue;  // absent, or contradictory: leave unlabeled
    (*labels)[id] = pos ? 1 : -1;
  }
  d.sentiment_ = std::move(labels);
  return d;
}

double WordDistance::operator()(int w, int w_prime) const {
  switch (kind_) {
    case Kind::kIndicator:
      return w == w_prime ? 0.0 : 1.0;
    case Kind::kEmbeddingEuclidean:
      return (store_->embedding(w) - store_->embedding(w_prime)).norm();
    case Kind::kSentimentFlip: {
      const std::int8_t a = (*sentiment_)[w];
      const std::int8_t b = (*sentiment_)[w_prime];
      if (a == 0 || b == 0) {
        if (strict_) {
          throw LexiconMissingWord(store_->word(a == 0 ? w : w_prime));
        }
        return 0.0;
      }
      return a == b ? 0.0 : 1.0;
    }
  }
  return 0.0;
}

bool WordDistance::covered(int w, int w_prime) const {
  if (kind_ != Kind::kSentimentFlip) return true;
  // Strict lexicons treat every pair as covered so evaluation reaches the
  // distance, which raises on the missing label instead of tallying it.
  if (strict_) return true;
  return (*sentiment_)[w] != 0 && (*sentiment_)[w_prime] != 0;
}

namespace {

// Count-based row estimation shared by the transition estimator and the DP
// checker. Run (word, rep) uses the stream derived from (seed, word, rep);
// counts are integers, so any merge order gives the same result.
std::vector<std::map<int, std::int64_t>> count_outputs(
    const WordMechanism& mechanism, const std::vector<int>& ids,
    std::int64_t samples_per_word, std::uint64_t master_seed, int threads,
    bool parallel) {
  const int n_rows = static_cast<int>(ids.size());
  std::vector<std::map<int, std::int64_t>> counts(n_rows);

  constexpr std::int64_t kBlock = 1 << 16;
  struct Job {
    int row;
    std::int64_t rep_begin;
    std::int64_t rep_end;
  };
  std::vector<Job> jobs;
  for (int r = 0; r < n_rows; ++r) {
    for (std::int64_t b = 0; b < samples_per_word; b += kBlock) {
      jobs.push_back(Job{r, b, std::min(b + kBlock, samples_per_word)});
    }
  }
  const int n_jobs = static_cast<int>(jobs.size());
  const int n_threads = parallel ? resolve_threads(threads) : 1;

#pragma omp parallel for num_threads(n_threads) schedule(dynamic) if (parallel)
  for (int j = 0; j < n_jobs; ++j) {
    const Job& job = jobs[j];
    const int word = ids[job.row];
    std::map<int, std::int64_t> local;
    for (std::int64_t rep = job.rep_begin; rep < job.rep_end; ++rep) {
      Rng rng = make_rng(master_seed, static_cast<std::uint64_t>(word),
                         static_cast<std::uint64_t>(rep));
      ++local[mechanism.redact(word, rng)];
    }
#pragma omp critical(metricdp_count_merge)
    {
      for (const auto& [col, c] : local) counts[job.row][col] += c;
    }
  }
  return counts;
}

TransitionModel counts_to_model(
    const std::vector<std::map<int, std::int64_t>>& counts,
    const std::vector<int>& ids, int vocab_size,
    std::int64_t samples_per_word) {
  TransitionModel f;
  f.row_ids = ids;
  f.vocab_size = vocab_size;
  f.samples_per_row = samples_per_word;
  f.rows.resize(ids.size());
  const double n = static_cast<double>(samples_per_word);
  for (std::size_t r = 0; r < ids.size(); ++r) {
    f.rows[r].reserve(counts[r].size());
    for (const auto& [col, c] : counts[r]) {
      f.rows[r].push_back(
          TransitionModel::Cell{col, static_cast<double>(c) / n, c});
    }
  }
  return f;
}

void check_estimation_args(const std::vector<int>& ids, int vocab_size,
                           std::int64_t samples_per_word) {
  if (ids.empty()) throw InvalidParameter("redactable id list is empty");
  if (samples_per_word < 1) {
    throw InvalidParameter("samples_per_word must be >= 1");
  }
  for (int id : ids) {
    if (id < 0 || id >= vocab_size) {
      throw InvalidParameter("redactable id " + std::to_string(id) +
                             " outside [0, vocab)");
    }
  }
}

}  // namespace

TransitionModel estimate_transition(const WordMechanism& mechanism,
                                    const std::vector<int>& redactable_ids,
                                    int vocab_size,
                                    std::int64_t samples_per_word,
                                    std::uint64_t master_seed, int threads) {
  check_estimation_args(redactable_ids, vocab_size, samples_per_word);
  const auto counts =
      count_outputs(mechanism, redactable_ids, samples_per_word, master_seed,
                    threads, /*parallel=*/true);
  return counts_to_model(counts, redactable_ids, vocab_size, samples_per_word);
}

TransitionModel estimate_transition_serial(const WordMechanism& mechanism,
                                           const std::vector<int>& redactable_ids,
                                           int vocab_size,
                                           std::int64_t samples_per_word,
                                           std::uint64_t master_seed) {
  check_estimation_args(redactable_ids, vocab_size, samples_per_word);
  const auto counts =
      count_outputs(mechanism, redactable_ids, samples_per_word, master_seed,
                    /*threads=*/1, /*parallel=*/false);
  return counts_to_model(counts, redactable_ids, vocab_size, samples_per_word);
}

Posterior posterior(const Prior& prior, const TransitionModel& f) {
  // Row lookup for the prior support.
  std::unordered_map<int, std::size_t> row_of;
  for (std::size_t r = 0; r < f.row_ids.size(); ++r) row_of[f.row_ids[r]] = r;
  std::vector<std::size_t> support_rows(prior.size());
  for (std::size_t i = 0; i < prior.size(); ++i) {
    const auto it = row_of.find(prior.ids()[i]);
    if (it == row_of.end()) {
      throw InvalidParameter("prior word id " +
                             std::to_string(prior.ids()[i]) +
                             " has no transition row");
    }
    support_rows[i] = it->second;
  }

  // Evidence mass per output column, accumulated in ascending column order.
  std::map<int, double> evidence;
  for (std::size_t i = 0; i < prior.size(); ++i) {
    const double pi = prior.weight(i);
    for (const TransitionModel::Cell& cell : f.rows[support_rows[i]]) {
      evidence[cell.col] += pi * cell.p;
    }
  }

  Posterior post;
  post.row_ids = prior.ids();
  std::unordered_map<int, std::size_t> col_index;
  for (const auto& [col, mass] : evidence) {
    if (mass > 0.0) {
      col_index[col] = post.col_ids.size();
      post.col_ids.push_back(col);
    } else {
      post.dropped_cols.push_back(col);
    }
  }

  post.g = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(prior.size()),
                                 static_cast<Eigen::Index>(post.col_ids.size()));
  for (std::size_t i = 0; i < prior.size(); ++i) {
    const double pi = prior.weight(i);
    for (const TransitionModel::Cell& cell : f.rows[support_rows[i]]) {
      const auto it = col_index.find(cell.col);
      if (it == col_index.end()) continue;
      post.g(static_cast<Eigen::Index>(i),
             static_cast<Eigen::Index>(it->second)) =
          pi * cell.p / evidence[cell.col];
    }
  }
  return post;
}

ExpectedValue expected_inference_error(const Prior& prior,
                                       const TransitionModel& f,
                                       const Posterior& g,
                                       const WordDistance& d_e,
                                       AdversaryMode mode) {
  std::unordered_map<int, std::size_t> row_of;
  for (std::size_t r = 0; r < f.row_ids.size(); ++r) row_of[f.row_ids[r]] = r;
  std::unordered_map<int, std::size_t> col_of;
  for (std::size_t c = 0; c < g.col_ids.size(); ++c) col_of[g.col_ids[c]] = c;
  if (g.row_ids != prior.ids()) {
    throw InvalidParameter("posterior rows do not match the prior support");
  }

  const std::size_t n = prior.size();
  const Eigen::Index n_cols = static_cast<Eigen::Index>(g.col_ids.size());

  // MAP adversary: per observed output, a point mass on the posterior
  // argmax, ties to the lowest word id.
  std::vector<std::size_t> map_pick;
  if (mode == AdversaryMode::kMap) {
    map_pick.resize(g.col_ids.size());
    for (Eigen::Index c = 0; c < n_cols; ++c) {
      std::size_t best = 0;
      for (std::size_t i = 1; i < n; ++i) {
        const double gi = g.g(static_cast<Eigen::Index>(i), c);
        const double gb = g.g(static_cast<Eigen::Index>(best), c);
        if (gi > gb ||
            (gi == gb && g.row_ids[i] < g.row_ids[best])) {
          best = i;
        }
      }
      map_pick[c] = best;
    }
  }

  // inner(i, col) = adversary's expected d_E given output col, input id_i.
  const auto inner = [&](std::size_t i, std::size_t col, double* uncovered) {
    const int w = prior.ids()[i];
    if (mode == AdversaryMode::kMap) {
      const int w_hat = g.row_ids[map_pick[col]];
      if (!d_e.covered(w_hat, w)) {
        *uncovered = 1.0;
        return 0.0;
      }
      *uncovered = 0.0;
      return d_e(w_hat, w);
    }
    double acc = 0.0;
    double unc = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
      const double ga = g.g(static_cast<Eigen::Index>(a),
                            static_cast<Eigen::Index>(col));
      if (ga == 0.0) continue;
      const int w_hat = g.row_ids[a];
      if (!d_e.covered(w_hat, w)) {
        unc += ga;
        continue;
      }
      acc += ga * d_e(w_hat, w);
    }
    *uncovered = unc;
    return acc;
  };

  double value = 0.0;
  double variance = 0.0;
  double uncovered_mass = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double pi = prior.weight(i);
    if (pi == 0.0) continue;
    const std::size_t row = row_of.at(prior.ids()[i]);
    double row_mean = 0.0;
    double row_sq = 0.0;
    for (const TransitionModel::Cell& cell : f.rows[row]) {
      const auto it = col_of.find(cell.col);
      if (it == col_of.end()) continue;  // zero-evidence column
      double unc = 0.0;
      const double h = inner(i, it->second, &unc);
      row_mean += cell.p * h;
      row_sq += cell.p * h * h;
      uncovered_mass += pi * cell.p * unc;
    }
    value += pi * row_mean;
    if (f.samples_per_row > 0) {
      const double row_var = std::max(0.0, row_sq - row_mean * row_mean) /
                             static_cast<double>(f.samples_per_row);
      variance += pi * pi * row_var;
    }
  }

  ExpectedValue out;
  out.value = value;
  out.half_width = kZ95 * std::sqrt(variance);
  out.uncovered_mass = uncovered_mass;
  return out;
}

ExpectedValue expected_utility_loss(const Prior& prior,
                                    const TransitionModel& f,
                                    const WordDistance& d_l) {
  std::unordered_map<int, std::size_t> row_of;
  for (std::size_t r = 0; r < f.row_ids.size(); ++r) row_of[f.row_ids[r]] = r;

  double value = 0.0;
  double variance = 0.0;
  double uncovered_mass = 0.0;
  for (std::size_t i = 0; i < prior.size(); ++i) {
    const double pi = prior.weight(i);
    if (pi == 0.0) continue;
    const auto it = row_of.find(prior.ids()[i]);
    if (it == row_of.end()) {
      throw InvalidParameter("prior word id " +
                             std::to_string(prior.ids()[i]) +
                             " has no transition row");
    }
    const int w = prior.ids()[i];
    double row_mean = 0.0;
    double row_sq = 0.0;
    for (const TransitionModel::Cell& cell : f.rows[it->second]) {
      if (!d_l.covered(w, cell.col)) {
        uncovered_mass += pi * cell.p;
        continue;
      }
      const double d = d_l(w, cell.col);
      row_mean += cell.p * d;
      row_sq += cell.p * d * d;
    }
    value += pi * row_mean;
    if (f.samples_per_row > 0) {
      const double row_var = std::max(0.0, row_sq - row_mean * row_mean) /
                             static_cast<double>(f.samples_per_row);
      variance += pi * pi * row_var;
    }
  }

  ExpectedValue out;
  out.value = value;
  out.half_width = kZ95 * std::sqrt(variance);
  out.uncovered_mass = uncovered_mass;
  return out;
}

DpCheckReport empirical_dp_check(const WordMechanism& mechanism,
                                 const EmbeddingStore& store,
                                 const Metric& metric, double epsilon,
                                 const std::vector<std::pair<int, int>>& pairs,
                                 const DpCheckOptions& options) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw InvalidParameter("epsilon must be positive and finite");
  }
  if (pairs.empty()) throw InvalidParameter("no word pairs to check");
  if (options.samples_per_word < 1) {
    throw InvalidParameter("samples_per_word must be >= 1");
  }
  if (!(options.alpha > 0.0 && options.alpha < 1.0)) {
    throw InvalidParameter("alpha must lie in (0, 1)");
  }

  std::vector<int> words;
  for (const auto& [w, wp] : pairs) {
    words.push_back(w);
    words.push_back(wp);
  }
  std::sort(words.begin(), words.end());
  words.erase(std::unique(words.begin(), words.end()), words.end());
  check_estimation_args(words, store.size(), options.samples_per_word);

  const auto counts =
      count_outputs(mechanism, words, options.samples_per_word,
                    options.master_seed, options.threads, /*parallel=*/true);
  std::unordered_map<int, std::size_t> row_of;
  for (std::size_t r = 0; r < words.size(); ++r) row_of[words[r]] = r;

  // The overall level alpha is split across the two one-sided binomial
  // bounds; each cell's lower bound then holds with probability >= 1-alpha.
  const double side_alpha = options.alpha / 2.0;
  constexpr double kInf = std::numeric_limits<double>::infinity();

  DpCheckReport report;
  for (const auto& [w, wp] : pairs) {
    const std::map<int, std::int64_t>& row_w = counts[row_of.at(w)];
    const std::map<int, std::int64_t>& row_wp = counts[row_of.at(wp)];
    const double bound =
        epsilon * metric(store.embedding(w), store.embedding(wp));

    std::vector<int> outputs;
    for (const auto& kv : row_w) outputs.push_back(kv.first);
    for (const auto& kv : row_wp) outputs.push_back(kv.first);
    std::sort(outputs.begin(), outputs.end());
    outputs.erase(std::unique(outputs.begin(), outputs.end()), outputs.end());

    for (int out : outputs) {
      const auto cw = row_w.find(out);
      const auto cwp = row_wp.find(out);
      DpCheckCell cell;
      cell.w = w;
      cell.w_prime = wp;
      cell.output = out;
      cell.count_w = cw == row_w.end() ? 0 : cw->second;
      cell.count_w_prime = cwp == row_wp.end() ? 0 : cwp->second;
      cell.bound = bound;
      cell.testable =
          std::max(cell.count_w, cell.count_w_prime) >= options.min_cell_count;
      if (cell.count_w == 0) {
        cell.log_ratio_estimate = -kInf;
      } else if (cell.count_w_prime == 0) {
        cell.log_ratio_estimate = kInf;
      } else {
        cell.log_ratio_estimate = std::log(static_cast<double>(cell.count_w) /
                                           static_cast<double>(cell.count_w_prime));
      }
      const double p_low =
          binomial_lower_bound(cell.count_w, options.samples_per_word, side_alpha);
      const double p_high = binomial_upper_bound(
          cell.count_w_prime, options.samples_per_word, side_alpha);
      cell.log_ratio_lower_bound =
          p_low == 0.0 ? -kInf : std::log(p_low / p_high);
      cell.violation = cell.testable && cell.log_ratio_lower_bound > cell.bound;
      if (!cell.testable) ++report.untestable;
      if (cell.violation) ++report.violations;
      report.cells.push_back(cell);
    }
  }
  return report;
}

}  // namespace metricdp
