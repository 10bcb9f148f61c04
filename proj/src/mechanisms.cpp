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

#include "metricdp/mechanisms.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <unordered_set>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "metricdp/errors.hpp"

namespace metricdp {

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

int resolve_threads(int requested) {
#ifdef _OPENMP
  return requested > 0 ? requested : omp_get_max_threads();
#else
  (void)requested;
  return 1;
#endif
}

// 53-bit uniform in [0, 1). Pinned bit-for-bit so selection draws do not
// depend on the standard library's distribution internals.
double uniform_unit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Inverse-CDF pick over explicit probabilities; consumes one draw.
int pick_index(const std::vector<double>& probs, Rng& rng) {
  const double u = uniform_unit(rng);
  double cum = 0.0;
  const int n = static_cast<int>(probs.size());
  for (int i = 0; i < n; ++i) {
    cum += probs[i];
    if (u < cum) return i;
  }
  return n - 1;  // guards cumulative rounding below 1
}

}  // namespace

Variant Variant::vickrey(double t) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw InvalidParameter("vickrey t must lie in [0, 1]");
  }
  Variant v;
  v.kind = Kind::kVickrey;
  v.t = t;
  return v;
}

Variant Variant::generalized(std::vector<double> weights) {
  if (weights.empty()) {
    throw InvalidParameter("generalized variant needs at least one weight");
  }
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw InvalidParameter("generalized weights must be finite and >= 0");
    }
  }
  Variant v;
  v.kind = Kind::kGeneralized;
  v.weights = std::move(weights);
  return v;
}

Variant Variant::snn() {
  Variant v;
  v.kind = Kind::kSnn;
  v.t = 1.0;
  return v;
}

Variant Variant::jth_neighbor(int j) {
  if (j < 1) throw InvalidParameter("neighbor rank j must be >= 1");
  Variant v;
  v.kind = Kind::kJthNeighbor;
  v.j = j;
  return v;
}

int Variant::candidate_count() const {
  switch (kind) {
    case Kind::kVickrey:
    case Kind::kSnn:
      return 2;
    case Kind::kGeneralized:
      return static_cast<int>(weights.size());
    case Kind::kJthNeighbor:
      return j;
  }
  return 2;
}

std::string Variant::describe() const {
  switch (kind) {
    case Kind::kVickrey:
      return "vickrey(t=" + format_double(t) + ")";
    case Kind::kGeneralized: {
      std::string s = "generalized(t=[";
      for (std::size_t i = 0; i < weights.size(); ++i) {
        if (i > 0) s += ",";
        s += format_double(weights[i]);
      }
      return s + "])";
    }
    case Kind::kSnn:
      return "snn";
    case Kind::kJthNeighbor:
      return "neighbor(j=" + std::to_string(j) + ")";
  }
  return "unknown";
}

void MechanismConfig::validate(int vocab_size) const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw InvalidParameter("epsilon must be positive and finite");
  }
  if (noise_metric == MetricKind::kIndicator) {
    throw InvalidParameter("the indicator metric cannot calibrate noise");
  }
  if (noise_metric == MetricKind::kMahalanobis &&
      !(lambda >= 0.0 && lambda <= 1.0)) {
    throw InvalidParameter("lambda must lie in [0, 1]");
  }
  switch (variant.kind) {
    case Variant::Kind::kVickrey:
      if (!(variant.t >= 0.0 && variant.t <= 1.0)) {
        throw InvalidParameter("vickrey t must lie in [0, 1]");
      }
      break;
    case Variant::Kind::kGeneralized:
      if (variant.weights.empty()) {
        throw InvalidParameter("generalized variant needs at least one weight");
      }
      for (double w : variant.weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
          throw InvalidParameter("generalized weights must be finite and >= 0");
        }
      }
      break;
    case Variant::Kind::kSnn:
      if (policy != CandidatePolicy::kExcludeInput) {
        throw ConfigError("snn requires the exclude-input candidate policy");
      }
      break;
    case Variant::Kind::kJthNeighbor:
      if (variant.j < 1) {
        throw InvalidParameter("neighbor rank j must be >= 1");
      }
      break;
  }
  const int excluded = policy == CandidatePolicy::kExcludeInput ? 1 : 0;
  if (variant.candidate_count() > vocab_size - excluded) {
    throw VocabularyTooSmall(
        "variant " + variant.describe() + " needs " +
        std::to_string(variant.candidate_count()) + " candidates but only " +
        std::to_string(vocab_size - excluded) + " are available");
  }
}

double selection_probability(double t, double d1, double d2) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw InvalidParameter("t must lie in [0, 1]");
  }
  if (!(d1 >= 0.0) || !(d2 >= d1) || !std::isfinite(d2)) {
    throw InvalidParameter("distances must satisfy 0 <= d1 <= d2 < inf");
  }
  if (t == 0.0) return 1.0;
  if (t == 1.0) return 0.0;
  if (d2 == 0.0) return 1.0;  // coincident candidates: resolve to the 1st
  return (1.0 - t) * d2 / (t * d1 + (1.0 - t) * d2);
}

std::vector<double> generalized_weights(const std::vector<double>& ts,
                                        const std::vector<double>& distances) {
  if (ts.size() != distances.size()) {
    throw DimensionMismatch("weights and distances differ in length");
  }
  if (ts.empty()) throw InvalidParameter("empty weight vector");
  const std::size_t k = ts.size();
  std::vector<double> score(k);
  double max_score = -std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < k; ++r) {
    score[r] = -ts[r] * distances[r];
    max_score = std::max(max_score, score[r]);
  }
  double total = 0.0;
  for (std::size_t r = 0; r < k; ++r) {
    score[r] = std::exp(score[r] - max_score);
    total += score[r];
  }
  for (std::size_t r = 0; r < k; ++r) score[r] /= total;
  return score;
}

namespace {

NoiseSampler make_sampler(const MechanismConfig& config,
                          const EmbeddingStore& store, const Metric& noise) {
  if (config.noise_metric == MetricKind::kMahalanobis) {
    return NoiseSampler(config.epsilon, noise.mahalanobis_data().sqrt_sigma);
  }
  return NoiseSampler(config.epsilon, store.dim());
}

Metric make_noise_metric(const MechanismConfig& config,
                         const EmbeddingStore& store) {
  if (config.noise_metric == MetricKind::kMahalanobis) {
    return Metric::mahalanobis(regularized_covariance(store, config.lambda));
  }
  return Metric::euclidean();
}

}  // namespace

Mechanism::Mechanism(MechanismConfig config, const EmbeddingStore& store,
                     const NNIndex* index)
    : config_(std::move(config)),
      store_(&store),
      index_(index),
      selection_metric_(Metric::euclidean()),
      sampler_(NoiseSampler(1.0, 1)) {
  config_.validate(store.size());
  const Metric noise = make_noise_metric(config_, store);
  sampler_ = make_sampler(config_, store, noise);
  if (config_.selection == SelectionMetric::kNoiseMetric) {
    selection_metric_ = noise;
  }
  if (index_ != nullptr && &index_->store() != store_) {
    throw ConfigError("index was built over a different store");
  }
}

NeighborList Mechanism::candidates(int word_id,
                                   const Eigen::VectorXd& noised) const {
  std::unordered_set<int> exclude;
  if (config_.policy == CandidatePolicy::kExcludeInput) {
    exclude.insert(word_id);
  }
  const int k = config_.variant.candidate_count();
  if (index_ != nullptr &&
      selection_metric_.kind() == MetricKind::kEuclidean) {
    return index_->query(noised, k, exclude);
  }
  return nearest_neighbors(*store_, noised, k, exclude, selection_metric_);
}

int Mechanism::redact(int word_id, Rng& rng) const {
  const Eigen::VectorXd noised = store_->embedding(word_id) + sampler_.sample(rng);
  return redact_noised(word_id, noised, rng);
}

RedactionTrace Mechanism::redact_traced(int word_id, Rng& rng) const {
  const Eigen::VectorXd noised = store_->embedding(word_id) + sampler_.sample(rng);
  return redact_noised_traced(word_id, noised, rng);
}

int Mechanism::redact_noised(int word_id, const Eigen::VectorXd& noised,
                             Rng& rng) const {
  const NeighborList cands = candidates(word_id, noised);
  switch (config_.variant.kind) {
    case Variant::Kind::kVickrey: {
      const double p1 = selection_probability(config_.variant.t,
                                              cands[0].distance,
                                              cands[1].distance);
      return uniform_unit(rng) < p1 ? cands[0].id : cands[1].id;
    }
    case Variant::Kind::kGeneralized: {
      std::vector<double> dist(cands.size());
      for (std::size_t r = 0; r < cands.size(); ++r) dist[r] = cands[r].distance;
      const std::vector<double> probs =
          generalized_weights(config_.variant.weights, dist);
      return cands[pick_index(probs, rng)].id;
    }
    case Variant::Kind::kSnn:
      return cands[1].id;
    case Variant::Kind::kJthNeighbor:
      return cands[config_.variant.j - 1].id;
  }
  return word_id;
}

RedactionTrace Mechanism::redact_noised_traced(int word_id,
                                               const Eigen::VectorXd& noised,
                                               Rng& rng) const {
  RedactionTrace trace;
  trace.input = word_id;
  trace.noised = noised;
  trace.candidates = candidates(word_id, noised);
  const NeighborList& cands = trace.candidates;
  switch (config_.variant.kind) {
    case Variant::Kind::kVickrey: {
      const double p1 = selection_probability(config_.variant.t,
                                              cands[0].distance,
                                              cands[1].distance);
      trace.probabilities = {p1, 1.0 - p1};
      trace.output = uniform_unit(rng) < p1 ? cands[0].id : cands[1].id;
      break;
    }
    case Variant::Kind::kGeneralized: {
      std::vector<double> dist(cands.size());
      for (std::size_t r = 0; r < cands.size(); ++r) dist[r] = cands[r].distance;
      trace.probabilities = generalized_weights(config_.variant.weights, dist);
      trace.output = cands[pick_index(trace.probabilities, rng)].id;
      break;
    }
    case Variant::Kind::kSnn:
      trace.probabilities = {0.0, 1.0};
      trace.output = cands[1].id;
      break;
    case Variant::Kind::kJthNeighbor:
      trace.probabilities.assign(cands.size(), 0.0);
      trace.probabilities[config_.variant.j - 1] = 1.0;
      trace.output = cands[config_.variant.j - 1].id;
      break;
  }
  return trace;
}

namespace {

// Shared worker for the parallel and serial token paths; both must produce
// identical bytes.
std::vector<std::string> redact_tokens_run(
    const std::vector<std::string>& tokens, const Mechanism& mechanism,
    const EmbeddingStore& store, const RedactStringOptions& options,
    bool parallel) {
  const int n = static_cast<int>(tokens.size());
  std::vector<int> ids(n);
  for (int i = 0; i < n; ++i) {
    const std::optional<int> id = store.lookup(tokens[i]);
    if (!id.has_value()) {
      if (options.oov == OovPolicy::kError) {
        throw OutOfVocabulary(tokens[i], i);
      }
      ids[i] = -1;
      continue;
    }
    ids[i] = *id;
  }
  std::unordered_set<int> redactable;
  if (options.redactable != nullptr) {
    redactable.insert(options.redactable->begin(), options.redactable->end());
  }

  std::vector<std::string> out(n);
  const auto one = [&](int i) {
    if (ids[i] < 0 ||
        (options.redactable != nullptr && !redactable.count(ids[i]))) {
      out[i] = tokens[i];
      return;
    }
    Rng rng = make_rng(options.master_seed, options.stream_offset + i);
    out[i] = store.word(mechanism.redact(ids[i], rng));
  };

  if (parallel) {
    const int threads = resolve_threads(options.threads);
#pragma omp parallel for num_threads(threads) schedule(static)
    for (int i = 0; i < n; ++i) one(i);
  } else {
    for (int i = 0; i < n; ++i) one(i);
  }
  return out;
}

}  // namespace

std::vector<std::string> redact_tokens(const std::vector<std::string>& tokens,
                                       const Mechanism& mechanism,
                                       const RedactStringOptions& options) {
  return redact_tokens_run(tokens, mechanism, mechanism.store(), options,
                           /*parallel=*/true);
}

std::vector<std::string> redact_tokens_serial(
    const std::vector<std::string>& tokens, const Mechanism& mechanism,
    const RedactStringOptions& options) {
  return redact_tokens_run(tokens, mechanism, mechanism.store(), options,
                           /*parallel=*/false);
}

}  // namespace metricdp
