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

#include "cli_app.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <unordered_set>

#include "CLI11.hpp"

#include "metricdp/audit.hpp"
#include "metricdp/embeddings.hpp"
#include "metricdp/errors.hpp"
#include "metricdp/mechanisms.hpp"
#include "metricdp/metrics.hpp"
#include "metricdp/nn_index.hpp"
#include "metricdp/report_io.hpp"
#include "metricdp/tuner.hpp"

namespace metricdp::cli {

namespace {

const char* const kKnownKeys[] = {
    "embeddings",        "embeddings.format", "embeddings.limit",
    "words",             "corpus",            "output_dir",
    "seed",              "threads",           "lexicon.positive",
    "lexicon.negative",  "lexicon.strict",    "index.enabled",
    "index.clusters",    "mechanism.variant", "mechanism.epsilon",
    "mechanism.t",       "mechanism.weights", "mechanism.j",
    "mechanism.noise",   "mechanism.lambda",  "mechanism.policy",
    "mechanism.selection", "mechanism.oov",   "audit.prior",
    "audit.d_e",         "audit.d_l",         "audit.samples",
    "audit.exact1d",     "audit.adversary",   "tuner.budget",
    "tuner.epsilon0",    "tuner.t_grid",      "tuner.max_doublings",
    "sweep.epsilons",    "sweep.t_values",    "sweep.repetitions",
    "dpcheck.pairs",     "dpcheck.samples",   "dpcheck.min_count",
    "dpcheck.alpha",
};

std::string trim(const std::string& s) {
  const std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size() || !std::isfinite(v)) throw std::exception();
    return v;
  } catch (...) {
    throw ConfigError("config key '" + key + "': '" + value +
                      "' is not a number");
  }
}

}  // namespace

bool is_known_key(const std::string& key) {
  for (const char* k : kKnownKeys) {
    if (key == k) return true;
  }
  return false;
}

std::map<std::string, std::string> parse_config_stream(
    std::istream& in, const std::string& name) {
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(name + ":" + std::to_string(line_no) +
                        ": expected 'key = value'");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError(name + ":" + std::to_string(line_no) + ": empty key");
    }
    if (!is_known_key(key)) {
      throw ConfigError(name + ":" + std::to_string(line_no) +
                        ": unknown config key '" + key + "'");
    }
    kv[key] = value;
  }
  return kv;
}

std::map<std::string, std::string> parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config_stream(in, path);
}

RunConfig::RunConfig(std::map<std::string, std::string> kv)
    : kv_(std::move(kv)) {}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (!is_known_key(key)) {
    throw ConfigError("unknown config key '" + key + "'");
  }
  kv_[key] = value;
}

bool RunConfig::has(const std::string& key) const { return kv_.count(key) > 0; }

std::string RunConfig::get_string(const std::string& key,
                                  const std::string& fallback) const {
  const auto it = kv_.find(key);
  return it == kv_.end() ? fallback : it->second;
}

std::string RunConfig::require(const std::string& key) const {
  const auto it = kv_.find(key);
  if (it == kv_.end() || it->second.empty()) {
    throw ConfigError("required config key '" + key + "' is missing");
  }
  return it->second;
}

double RunConfig::get_double(const std::string& key, double fallback) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  return parse_double(key, it->second);
}

std::int64_t RunConfig::get_int(const std::string& key,
                                std::int64_t fallback) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  const std::string& value = it->second;
  std::int64_t v = 0;
  const auto [ptr, ec] =
      std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError("config key '" + key + "': '" + value +
                      "' is not an integer");
  }
  return v;
}

bool RunConfig::get_bool(const std::string& key, bool fallback) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  const std::string& v = it->second;
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError("config key '" + key + "': '" + v + "' is not a boolean");
}

std::vector<double> RunConfig::get_double_list(const std::string& key) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return {};
  std::vector<double> out;
  std::stringstream ss(it->second);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string v = trim(item);
    if (v.empty()) continue;
    out.push_back(parse_double(key, v));
  }
  return out;
}

std::string RunConfig::canonical_text() const {
  std::string text;
  for (const auto& [key, value] : kv_) {
    text += key;
    text += " = ";
    text += value;
    text += "\n";
  }
  return text;
}

namespace {

// ---------------------------------------------------------------------------
// Shared builders
// ---------------------------------------------------------------------------

EmbeddingStore load_store(const RunConfig& cfg) {
  const std::string path = cfg.require("embeddings");
  const std::string format_name = cfg.get_string("embeddings.format", "glove");
  EmbeddingFormat format;
  if (format_name == "glove") {
    format = EmbeddingFormat::kGloveText;
  } else if (format_name == "fasttext") {
    format = EmbeddingFormat::kFasttextText;
  } else {
    throw ConfigError("embeddings.format must be 'glove' or 'fasttext', got '" +
                      format_name + "'");
  }
  const std::int64_t limit = cfg.get_int("embeddings.limit", 0);
  if (limit < 0) throw ConfigError("embeddings.limit must be >= 0");
  return load_embeddings_file(
      path, format,
      limit == 0 ? std::nullopt : std::optional<int>(static_cast<int>(limit)));
}

std::vector<int> load_redactable(const RunConfig& cfg,
                                 const EmbeddingStore& store) {
  if (!cfg.has("words")) {
    std::vector<int> all(store.size());
    for (int i = 0; i < store.size(); ++i) all[i] = i;
    return all;
  }
  std::vector<std::string> missing;
  const std::vector<int> ids =
      load_word_list_file(cfg.require("words"), store, &missing);
  if (!missing.empty()) {
    std::cerr << "note: " << missing.size()
              << " word(s) from the list are not in the vocabulary (first: '"
              << missing.front() << "')\n";
  }
  if (ids.empty()) {
    throw ConfigError("no word in '" + cfg.require("words") +
                      "' is present in the vocabulary");
  }
  return ids;
}

MechanismConfig mechanism_config(const RunConfig& cfg) {
  MechanismConfig mc;
  const std::string variant = cfg.get_string("mechanism.variant", "vickrey");
  if (variant == "vickrey") {
    mc.variant = Variant::vickrey(cfg.get_double("mechanism.t", 0.0));
  } else if (variant == "laplace") {
    mc.variant = Variant::vickrey(0.0);
  } else if (variant == "generalized") {
    std::vector<double> weights = cfg.get_double_list("mechanism.weights");
    if (weights.empty()) {
      throw ConfigError(
          "mechanism.weights is required for the generalized variant");
    }
    mc.variant = Variant::generalized(std::move(weights));
  } else if (variant == "snn") {
    mc.variant = Variant::snn();
  } else if (variant == "neighbor") {
    mc.variant =
        Variant::jth_neighbor(static_cast<int>(cfg.get_int("mechanism.j", 1)));
  } else {
    throw ConfigError("mechanism.variant must be one of vickrey, laplace, "
                      "generalized, snn, neighbor; got '" + variant + "'");
  }

  mc.epsilon = cfg.get_double("mechanism.epsilon", 1.0);
  const std::string noise = cfg.get_string("mechanism.noise", "euclidean");
  if (noise == "euclidean") {
    mc.noise_metric = MetricKind::kEuclidean;
  } else if (noise == "mahalanobis") {
    mc.noise_metric = MetricKind::kMahalanobis;
  } else {
    throw ConfigError("mechanism.noise must be 'euclidean' or 'mahalanobis'");
  }
  mc.lambda = cfg.get_double("mechanism.lambda", 0.5);

  const std::string default_policy =
      variant == "snn" ? "exclude" : "include";
  const std::string policy = cfg.get_string("mechanism.policy", default_policy);
  if (policy == "include") {
    mc.policy = CandidatePolicy::kIncludeInput;
  } else if (policy == "exclude") {
    mc.policy = CandidatePolicy::kExcludeInput;
  } else {
    throw ConfigError("mechanism.policy must be 'include' or 'exclude'");
  }

  const std::string selection =
      cfg.get_string("mechanism.selection", "euclidean");
  if (selection == "euclidean") {
    mc.selection = SelectionMetric::kEuclidean;
  } else if (selection == "noise") {
    mc.selection = SelectionMetric::kNoiseMetric;
  } else {
    throw ConfigError("mechanism.selection must be 'euclidean' or 'noise'");
  }
  return mc;
}

std::string mechanism_label(const MechanismConfig& mc) {
  std::string label = mc.variant.describe();
  label += mc.policy == CandidatePolicy::kExcludeInput ? " exclude-input"
                                                       : " include-input";
  if (mc.noise_metric == MetricKind::kMahalanobis) label += " mahalanobis";
  return label;
}

bool want_index(const RunConfig& cfg, const EmbeddingStore& store) {
  if (cfg.has("index.enabled")) return cfg.get_bool("index.enabled", true);
  return store.size() >= 4096;
}

NNIndexOptions index_options(const RunConfig& cfg) {
  NNIndexOptions opts;
  opts.clusters = static_cast<int>(cfg.get_int("index.clusters", 0));
  opts.threads = static_cast<int>(cfg.get_int("threads", 0));
  return opts;
}

std::vector<std::string> read_tokens(const std::string& text) {
  std::vector<std::string> tokens;
  std::stringstream ss(text);
  std::string tok;
  while (ss >> tok) tokens.push_back(tok);
  return tokens;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open file '" + path + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

std::unordered_set<std::string> read_word_set(const std::string& path) {
  std::unordered_set<std::string> words;
  for (const std::string& line : read_lines(path)) {
    const std::string w = trim(line);
    if (!w.empty() && w[0] != ';' && w[0] != '#') words.insert(w);
  }
  return words;
}

Prior make_prior(const RunConfig& cfg, const EmbeddingStore& store,
                 const std::vector<int>& redactable) {
  std::string kind = cfg.get_string("audit.prior", "auto");
  if (kind == "auto") kind = cfg.has("corpus") ? "corpus" : "uniform";
  if (kind == "uniform") return Prior::uniform(redactable);
  if (kind != "corpus") {
    throw ConfigError("audit.prior must be 'uniform', 'corpus' or 'auto'");
  }
  std::unordered_map<int, double> freq;
  for (const std::string& line : read_lines(cfg.require("corpus"))) {
    for (const std::string& tok : read_tokens(line)) {
      const std::optional<int> id = store.lookup(tok);
      if (id.has_value()) freq[*id] += 1.0;
    }
  }
  std::vector<double> counts(redactable.size(), 0.0);
  for (std::size_t i = 0; i < redactable.size(); ++i) {
    const auto it = freq.find(redactable[i]);
    if (it != freq.end()) counts[i] = it->second;
  }
  return Prior::from_counts(redactable, counts);
}

WordDistance make_distance(const RunConfig& cfg, const EmbeddingStore& store,
                           const std::string& key,
                           const std::string& fallback) {
  std::string kind = cfg.get_string(key, fallback);
  if (kind == "auto") {
    kind = cfg.has("lexicon.positive") && cfg.has("lexicon.negative")
               ? "sentiment"
               : "indicator";
  }
  if (kind == "indicator") return WordDistance::indicator();
  if (kind == "euclidean") return WordDistance::embedding_euclidean(store);
  if (kind != "sentiment") {
    throw ConfigError(key + " must be 'indicator', 'euclidean', 'sentiment' "
                            "or 'auto'");
  }
  const auto positive = read_word_set(cfg.require("lexicon.positive"));
  const auto negative = read_word_set(cfg.require("lexicon.negative"));
  return WordDistance::sentiment_flip(store, positive, negative,
                                      cfg.get_bool("lexicon.strict", false));
}

std::filesystem::path output_dir(const RunConfig& cfg) {
  const std::filesystem::path dir = cfg.get_string("output_dir", "out");
  std::filesystem::create_directories(dir);
  return dir;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  return out;
}

OutputHeader make_header(const RunConfig& cfg) {
  OutputHeader header;
  header.config_hash = hash_hex(fnv1a_hash(cfg.canonical_text()));
  header.seed = static_cast<std::uint64_t>(cfg.get_int("seed", 0));
  return header;
}

struct AuditPipeline {
  // Heap-held so distances, index and mechanisms can pin its address across
  // moves of the pipeline itself.
  std::unique_ptr<EmbeddingStore> store;
  std::vector<int> redactable;
  MechanismConfig mech_config;
  std::optional<NNIndex> index;
  Prior prior;
  WordDistance d_e;
  WordDistance d_l;
  bool exact;
  std::int64_t samples;
  std::uint64_t seed;
  int threads;
  AdversaryMode adversary;
};

AuditPipeline make_pipeline(const RunConfig& cfg) {
  auto store = std::make_unique<EmbeddingStore>(load_store(cfg));
  std::vector<int> redactable = load_redactable(cfg, *store);
  const MechanismConfig mc = mechanism_config(cfg);

  const std::string exact_mode = cfg.get_string("audit.exact1d", "auto");
  bool exact;
  if (exact_mode == "auto") {
    exact = store->dim() == 1 && store->size() <= 32;
  } else if (exact_mode == "1" || exact_mode == "true") {
    exact = true;
  } else if (exact_mode == "0" || exact_mode == "false") {
    exact = false;
  } else {
    throw ConfigError("audit.exact1d must be 'auto', '0' or '1'");
  }

  const std::string adversary = cfg.get_string("audit.adversary", "sampling");
  if (adversary != "sampling" && adversary != "map") {
    throw ConfigError("audit.adversary must be 'sampling' or 'map'");
  }

  Prior prior = make_prior(cfg, *store, redactable);

  AuditPipeline p{std::move(store),
                  std::move(redactable),
                  mc,
                  std::nullopt,
                  std::move(prior),
                  WordDistance::indicator(),
                  WordDistance::indicator(),
                  exact,
                  cfg.get_int("audit.samples", 100000),
                  static_cast<std::uint64_t>(cfg.get_int("seed", 0)),
                  static_cast<int>(cfg.get_int("threads", 0)),
                  adversary == "map" ? AdversaryMode::kMap
                                     : AdversaryMode::kPosteriorSampling};
  p.d_e = make_distance(cfg, *p.store, "audit.d_e", "indicator");
  p.d_l = make_distance(cfg, *p.store, "audit.d_l", "auto");
  if (!p.exact && want_index(cfg, *p.store)) {
    p.index.emplace(*p.store, index_options(cfg));
  }
  return p;
}

// One full audit of the pipeline's mechanism family at (epsilon, variant).
// The transition kernel lands in *f_out when requested.
AuditReport run_audit(AuditPipeline& p, double epsilon, const Variant& variant,
                      std::uint64_t seed, TransitionModel* f_out = nullptr) {
  MechanismConfig mc = p.mech_config;
  mc.epsilon = epsilon;
  mc.variant = variant;

  TransitionModel f;
  if (p.exact) {
    f = exact_transition_1d(mc, *p.store, p.redactable);
  } else {
    const Mechanism mech(mc, *p.store, p.index ? &*p.index : nullptr);
    f = estimate_transition(mech, p.redactable, p.store->size(), p.samples,
                            seed, p.threads);
  }
  const Posterior g = posterior(p.prior, f);
  const ExpectedValue e = expected_inference_error(p.prior, f, g, p.d_e,
                                                   p.adversary);
  const ExpectedValue l = expected_utility_loss(p.prior, f, p.d_l);

  AuditReport report;
  report.epsilon = epsilon;
  report.variant = variant;
  report.mechanism_label = mechanism_label(mc);
  report.e_m = e.value;
  report.e_m_half_width = e.half_width;
  report.l_m = l.value;
  report.l_m_half_width = l.half_width;
  report.uncovered_mass = l.uncovered_mass;
  report.samples_per_word = f.samples_per_row;
  report.repetitions = 1;
  report.seed = seed;
  if (f_out != nullptr) *f_out = std::move(f);
  return report;
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

int cmd_inspect(const RunConfig& cfg) {
  const EmbeddingStore store = load_store(cfg);
  double min_norm = std::numeric_limits<double>::infinity();
  double max_norm = 0.0;
  double sum_norm = 0.0;
  const Eigen::VectorXd origin = Eigen::VectorXd::Zero(store.dim());
  for (int id = 0; id < store.size(); ++id) {
    const double n =
        std::sqrt(squared_l2(store.row(id), origin.data(), store.dim()));
    min_norm = std::min(min_norm, n);
    max_norm = std::max(max_norm, n);
    sum_norm += n;
  }
  std::cout << "name: " << store.name() << "\n"
            << "words: " << store.size() << "\n"
            << "dim: " << store.dim() << "\n"
            << "norm_min: " << min_norm << "\n"
            << "norm_mean: " << sum_norm / store.size() << "\n"
            << "norm_max: " << max_norm << "\n";
  if (cfg.has("words")) {
    std::vector<std::string> missing;
    const std::vector<int> ids =
        load_word_list_file(cfg.require("words"), store, &missing);
    std::cout << "word_list_found: " << ids.size() << "\n"
              << "word_list_missing: " << missing.size() << "\n";
  }
  return 0;
}

int cmd_redact(const RunConfig& cfg) {
  const EmbeddingStore store = load_store(cfg);
  const MechanismConfig mc = mechanism_config(cfg);
  std::optional<NNIndex> index;
  if (want_index(cfg, store)) index.emplace(store, index_options(cfg));
  const Mechanism mechanism(mc, store, index ? &*index : nullptr);

  std::optional<std::vector<int>> redactable;
  if (cfg.has("words")) redactable = load_redactable(cfg, store);

  const std::string oov = cfg.get_string("mechanism.oov", "error");
  if (oov != "error" && oov != "pass") {
    throw ConfigError("mechanism.oov must be 'error' or 'pass'");
  }

  RedactStringOptions options;
  options.oov = oov == "pass" ? OovPolicy::kPassThrough : OovPolicy::kError;
  options.redactable = redactable ? &*redactable : nullptr;
  options.master_seed = static_cast<std::uint64_t>(cfg.get_int("seed", 0));
  options.threads = static_cast<int>(cfg.get_int("threads", 0));

  const std::vector<std::string> documents = read_lines(cfg.require("corpus"));
  const std::filesystem::path dir = output_dir(cfg);
  std::ofstream out = open_output(dir / "redacted.txt");
  std::ofstream summary = open_output(dir / "redact_summary.csv");
  const OutputHeader header = make_header(cfg);
  summary << "# config_hash=" << header.config_hash << "\n"
          << "# seed=" << header.seed << "\n"
          << "doc,tokens,redacted,changed,passthrough\n";

  std::unordered_set<int> redactable_set;
  if (redactable) redactable_set.insert(redactable->begin(), redactable->end());

  std::uint64_t offset = 0;
  for (std::size_t d = 0; d < documents.size(); ++d) {
    const std::vector<std::string> tokens = read_tokens(documents[d]);
    options.stream_offset = offset;
    offset += tokens.size();
    const std::vector<std::string> redacted =
        redact_tokens(tokens, mechanism, options);

    std::int64_t sent = 0, changed = 0;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      const std::optional<int> id = store.lookup(tokens[i]);
      const bool eligible =
          id.has_value() && (!redactable || redactable_set.count(*id) > 0);
      if (eligible) {
        ++sent;
        if (redacted[i] != tokens[i]) ++changed;
      }
      if (i > 0) out << ' ';
      out << redacted[i];
    }
    out << '\n';
    summary << d << ',' << tokens.size() << ',' << sent << ',' << changed
            << ',' << (static_cast<std::int64_t>(tokens.size()) - sent) << "\n";
  }
  return 0;
}

int cmd_audit(const RunConfig& cfg) {
  AuditPipeline p = make_pipeline(cfg);
  TransitionModel f;
  const AuditReport report =
      run_audit(p, p.mech_config.epsilon, p.mech_config.variant, p.seed, &f);

  const OutputHeader header = make_header(cfg);
  const std::filesystem::path dir = output_dir(cfg);
  open_output(dir / "audit.json") << audit_report_json(report, header);
  std::ofstream csv = open_output(dir / "transition.csv");
  write_transition_csv(csv, f, *p.store, header);
  std::cout << "e_m=" << report.e_m << " l_m=" << report.l_m
            << " uncovered=" << report.uncovered_mass << "\n";
  return 0;
}

int cmd_tune(const RunConfig& cfg) {
  AuditPipeline p = make_pipeline(cfg);

  TunerConfig tc;
  tc.budget = cfg.get_double("tuner.budget", 0.1);
  tc.epsilon0 = cfg.get_double("tuner.epsilon0", 0.25);
  tc.t_grid = cfg.has("tuner.t_grid") ? cfg.get_double_list("tuner.t_grid")
                                      : TunerConfig::default_t_grid();
  tc.max_doublings =
      static_cast<int>(cfg.get_int("tuner.max_doublings", 40));

  std::uint64_t counter = 0;
  const AuditFn audit = [&](double epsilon, const Variant& variant) {
    return run_audit(p, epsilon, variant, derive_seed(p.seed, counter++));
  };
  const TuneResult result = tune(audit, tc);

  const OutputHeader header = make_header(cfg);
  const std::filesystem::path dir = output_dir(cfg);
  open_output(dir / "tune.json") << tune_result_json(result, header);
  std::ofstream log = open_output(dir / "search_log.csv");
  write_search_log_csv(log, result, header);
  std::cout << "epsilon_opt=" << result.epsilon_opt
            << " t_opt=" << result.t_opt << " e_m=" << result.best.e_m
            << " l_m=" << result.best.l_m << "\n";
  return 0;
}

int cmd_sweep(const RunConfig& cfg) {
  AuditPipeline p = make_pipeline(cfg);

  std::vector<double> epsilons = cfg.get_double_list("sweep.epsilons");
  if (epsilons.empty()) {
    throw ConfigError("sweep.epsilons is required (comma-separated list)");
  }
  std::vector<double> ts = cfg.has("sweep.t_values")
                               ? cfg.get_double_list("sweep.t_values")
                               : TunerConfig::default_t_grid();
  std::vector<Variant> variants;
  variants.reserve(ts.size());
  for (double t : ts) variants.push_back(Variant::vickrey(t));

  const int repetitions =
      static_cast<int>(cfg.get_int("sweep.repetitions", 100));
  const SeededAuditFn audit = [&](double epsilon, const Variant& variant,
                                  std::uint64_t seed) {
    return run_audit(p, epsilon, variant, seed);
  };
  const TradeoffCurve curve =
      sweep(audit, epsilons, variants, repetitions, p.seed);

  const OutputHeader header = make_header(cfg);
  const std::filesystem::path dir = output_dir(cfg);
  std::ofstream csv = open_output(dir / "curve.csv");
  write_curve_csv(csv, curve, header);
  std::cout << "points=" << curve.points.size() << "\n";
  return 0;
}

int cmd_dpcheck(const RunConfig& cfg) {
  const EmbeddingStore store = load_store(cfg);
  const std::vector<int> redactable = load_redactable(cfg, store);
  const MechanismConfig mc = mechanism_config(cfg);
  std::optional<NNIndex> index;
  if (want_index(cfg, store)) index.emplace(store, index_options(cfg));
  const Mechanism mechanism(mc, store, index ? &*index : nullptr);

  std::vector<std::pair<int, int>> pairs;
  const std::string pair_spec = cfg.get_string("dpcheck.pairs", "all");
  if (pair_spec == "all") {
    for (int a : redactable) {
      for (int b : redactable) {
        if (a != b) pairs.emplace_back(a, b);
      }
    }
  } else {
    for (const std::string& line : read_lines(pair_spec)) {
      const std::string stripped = trim(line);
      if (stripped.empty() || stripped[0] == '#') continue;
      std::string a = stripped, b;
      const std::size_t comma = stripped.find(',');
      if (comma != std::string::npos) {
        a = trim(stripped.substr(0, comma));
        b = trim(stripped.substr(comma + 1));
      } else {
        std::stringstream ss(stripped);
        ss >> a >> b;
      }
      const std::optional<int> ia = store.lookup(a);
      const std::optional<int> ib = store.lookup(b);
      if (!ia || !ib) {
        throw ConfigError("dpcheck pair word '" + (!ia ? a : b) +
                          "' is not in the vocabulary");
      }
      pairs.emplace_back(*ia, *ib);
    }
  }

  const Metric metric =
      mc.noise_metric == MetricKind::kMahalanobis
          ? Metric::mahalanobis(regularized_covariance(store, mc.lambda))
          : Metric::euclidean();

  DpCheckOptions options;
  options.samples_per_word = cfg.get_int("dpcheck.samples", 1000000);
  options.min_cell_count = cfg.get_int("dpcheck.min_count", 50);
  options.alpha = cfg.get_double("dpcheck.alpha", 1e-3);
  options.master_seed = static_cast<std::uint64_t>(cfg.get_int("seed", 0));
  options.threads = static_cast<int>(cfg.get_int("threads", 0));

  const DpCheckReport report = empirical_dp_check(
      mechanism, store, metric, mc.epsilon, pairs, options);

  const OutputHeader header = make_header(cfg);
  const std::filesystem::path dir = output_dir(cfg);
  std::ofstream csv = open_output(dir / "dp_report.csv");
  write_dp_report_csv(csv, report, store, header);
  std::cout << "cells=" << report.cells.size()
            << " untestable=" << report.untestable
            << " violations=" << report.violations << "\n";
  return report.violations > 0 ? 3 : 0;
}

// ---------------------------------------------------------------------------
// Argument wiring
// ---------------------------------------------------------------------------

struct CommonFlags {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string embeddings;
  std::string corpus;
  std::string output;
  std::string seed;
  std::string threads;
  std::string epsilon;
};

void add_common(CLI::App* cmd, CommonFlags* flags) {
  cmd->add_option("-c,--config", flags->config_path,
                  "flat key = value config file");
  cmd->add_option("-s,--set", flags->overrides,
                  "override a config key, e.g. --set mechanism.t=0.5");
  cmd->add_option("--embeddings", flags->embeddings, "embedding file path");
  cmd->add_option("--corpus", flags->corpus, "corpus file path");
  cmd->add_option("--output-dir", flags->output, "output directory");
  cmd->add_option("--seed", flags->seed, "master seed");
  cmd->add_option("--threads", flags->threads, "worker threads (0 = auto)");
  cmd->add_option("--epsilon", flags->epsilon, "privacy parameter");
}

RunConfig build_config(const CommonFlags& flags) {
  RunConfig cfg(flags.config_path.empty()
                    ? std::map<std::string, std::string>{}
                    : parse_config_file(flags.config_path));
  for (const std::string& pair : flags.overrides) {
    const std::size_t eq = pair.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("--set expects key=value, got '" + pair + "'");
    }
    cfg.set(trim(pair.substr(0, eq)), trim(pair.substr(eq + 1)));
  }
  if (!flags.embeddings.empty()) cfg.set("embeddings", flags.embeddings);
  if (!flags.corpus.empty()) cfg.set("corpus", flags.corpus);
  if (!flags.output.empty()) cfg.set("output_dir", flags.output);
  if (!flags.seed.empty()) cfg.set("seed", flags.seed);
  if (!flags.threads.empty()) cfg.set("threads", flags.threads);
  if (!flags.epsilon.empty()) cfg.set("mechanism.epsilon", flags.epsilon);
  return cfg;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"metric-DP text redaction toolkit"};
  app.require_subcommand(1);

  struct Command {
    const char* name;
    const char* help;
    int (*fn)(const RunConfig&);
    CommonFlags flags;
  };
  Command commands[] = {
      {"redact", "redact a corpus token by token", cmd_redact, {}},
      {"audit", "estimate transitions and privacy/utility measures",
       cmd_audit, {}},
      {"tune", "constrained (epsilon, t) selection", cmd_tune, {}},
      {"sweep", "tradeoff curve over (epsilon, t) grids", cmd_sweep, {}},
      {"dpcheck", "statistical metric-DP verification", cmd_dpcheck, {}},
      {"inspect", "embedding store statistics", cmd_inspect, {}},
  };
  for (Command& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    add_common(sub, &c.flags);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    for (Command& c : commands) {
      if (app.got_subcommand(c.name)) {
        return c.fn(build_config(c.flags));
      }
    }
    std::cerr << "error: no command given\n";
    return 1;
  } catch (const OutOfVocabulary& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace metricdp::cli
