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

#include "metricdp/embeddings.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

#include "metricdp/detail/topk.hpp"
#include "metricdp/metrics.hpp"

namespace metricdp {

EmbeddingStore::EmbeddingStore(std::vector<std::string> vocab, Matrix matrix,
                               std::string name)
    : vocab_(std::move(vocab)), matrix_(std::move(matrix)), name_(std::move(name)) {
  if (vocab_.size() != static_cast<std::size_t>(matrix_.rows())) {
    throw DimensionMismatch("vocabulary size " + std::to_string(vocab_.size()) +
                            " does not match matrix rows " +
                            std::to_string(matrix_.rows()));
  }
  if (vocab_.size() < 2) {
    throw VocabularyTooSmall("store needs at least 2 words, got " +
                             std::to_string(vocab_.size()));
  }
  if (matrix_.cols() < 1) {
    throw DimensionMismatch("embedding dimension must be positive");
  }
  index_.reserve(vocab_.size());
  for (std::size_t i = 0; i < vocab_.size(); ++i) {
    auto [it, inserted] = index_.emplace(vocab_[i], static_cast<int>(i));
    if (!inserted) throw DuplicateWord(vocab_[i], i + 1);
  }
  for (Eigen::Index i = 0; i < matrix_.rows(); ++i) {
    for (Eigen::Index j = 0; j < matrix_.cols(); ++j) {
      if (!std::isfinite(matrix_(i, j))) {
        throw MalformedNumber("non-finite coordinate", i + 1);
      }
    }
  }
}

Eigen::VectorXd EmbeddingStore::embedding(int id) const {
  return matrix_.row(id).cast<double>();
}

std::optional<int> EmbeddingStore::lookup(const std::string& token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

namespace {

// Splits on runs of spaces/tabs; embedding files are single-space separated
// but padded variants exist in the wild.
std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

float parse_coord(std::string_view field, std::size_t line_no) {
  float value;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    throw MalformedNumber("malformed number \"" + std::string(field) + "\"", line_no);
  }
  if (!std::isfinite(value)) {
    throw MalformedNumber("non-finite number \"" + std::string(field) + "\"", line_no);
  }
  return value;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

EmbeddingStore load_embeddings(std::istream& in, EmbeddingFormat format,
                               std::optional<int> limit, std::string name) {
  std::string line;
  std::size_t line_no = 0;
  int dim = -1;
  std::size_t reserve_rows = 1024;

  if (format == EmbeddingFormat::kFasttextText) {
    // Header: "n p".
    while (std::getline(in, line)) {
      ++line_no;
      strip_cr(line);
      if (!line.empty()) break;
    }
    if (line.empty()) throw EmptyFile("empty embedding stream");
    auto fields = split_fields(line);
    if (fields.size() != 2) {
      throw MalformedNumber("expected \"n p\" header", line_no);
    }
    long n = 0, p = 0;
    auto parse_int = [&](std::string_view f, long& out) {
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), out);
      if (ec != std::errc{} || ptr != f.data() + f.size() || out <= 0) {
        throw MalformedNumber("malformed header field \"" + std::string(f) + "\"",
                              line_no);
      }
    };
    parse_int(fields[0], n);
    parse_int(fields[1], p);
    dim = static_cast<int>(p);
    reserve_rows = static_cast<std::size_t>(n);
  }

  std::vector<std::string> vocab;
  std::vector<float> coords;
  std::unordered_map<std::string, std::size_t> seen;
  vocab.reserve(reserve_rows);
  if (dim > 0) coords.reserve(reserve_rows * static_cast<std::size_t>(dim));

  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    if (limit && static_cast<int>(vocab.size()) >= *limit) break;

    auto fields = split_fields(line);
    if (fields.size() < 2) {
      throw MalformedNumber("row needs a word and at least one coordinate",
                            line_no);
    }
    if (dim < 0) {
      dim = static_cast<int>(fields.size()) - 1;
    } else if (static_cast<int>(fields.size()) - 1 != dim) {
      throw DimensionMismatch("row length " +
                              std::to_string(fields.size() - 1) + " != " +
                              std::to_string(dim) + " at line " +
                              std::to_string(line_no));
    }

    std::string token(fields[0]);
    auto [it, inserted] = seen.emplace(std::move(token), vocab.size());
    if (!inserted) throw DuplicateWord(it->first, line_no);
    vocab.push_back(it->first);
    for (int j = 1; j <= dim; ++j) {
      coords.push_back(parse_coord(fields[j], line_no));
    }
  }

  if (vocab.empty()) throw EmptyFile("no embedding rows in stream");
  if (vocab.size() < 2) {
    throw VocabularyTooSmall("embedding stream has a single word");
  }

  EmbeddingStore::Matrix matrix(vocab.size(), dim);
  std::copy(coords.begin(), coords.end(), matrix.data());
  return EmbeddingStore(std::move(vocab), std::move(matrix), std::move(name));
}

EmbeddingStore load_embeddings_file(const std::string& path,
                                    EmbeddingFormat format,
                                    std::optional<int> limit) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open embedding file: " + path);
  return load_embeddings(in, format, limit, path);
}

std::vector<int> load_word_list(std::istream& in, const EmbeddingStore& store,
                                std::vector<std::string>* missing) {
  std::vector<int> ids;
  std::string line;
  while (std::getline(in, line)) {
    strip_cr(line);
    if (line.empty()) continue;
    if (auto id = store.lookup(line)) {
      ids.push_back(*id);
    } else if (missing) {
      missing->push_back(line);
    }
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

std::vector<int> load_word_list_file(const std::string& path,
                                     const EmbeddingStore& store,
                                     std::vector<std::string>* missing) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open word list: " + path);
  return load_word_list(in, store, missing);
}

double squared_l2(const float* row, const double* query, int dim) {
  double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
  int i = 0;
  for (; i + 4 <= dim; i += 4) {
    const double d0 = static_cast<double>(row[i]) - query[i];
    const double d1 = static_cast<double>(row[i + 1]) - query[i + 1];
    const double d2 = static_cast<double>(row[i + 2]) - query[i + 2];
    const double d3 = static_cast<double>(row[i + 3]) - query[i + 3];
    a0 += d0 * d0;
    a1 += d1 * d1;
    a2 += d2 * d2;
    a3 += d3 * d3;
  }
  double tail = 0.0;
  for (; i < dim; ++i) {
    const double d = static_cast<double>(row[i]) - query[i];
    tail += d * d;
  }
  return ((a0 + a1) + (a2 + a3)) + tail;
}

double squared_l2_bounded(const float* row, const double* query, int dim,
                          double bound) {
  double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
  int i = 0;
  // Same lane assignment as squared_l2; the periodic check only reads the
  // lanes, so a surviving row produces the identical sum.
  for (; i + 16 <= dim; i += 16) {
    for (int u = 0; u < 16; u += 4) {
      const double d0 = static_cast<double>(row[i + u]) - query[i + u];
      const double d1 = static_cast<double>(row[i + u + 1]) - query[i + u + 1];
      const double d2 = static_cast<double>(row[i + u + 2]) - query[i + u + 2];
      const double d3 = static_cast<double>(row[i + u + 3]) - query[i + u + 3];
      a0 += d0 * d0;
      a1 += d1 * d1;
      a2 += d2 * d2;
      a3 += d3 * d3;
    }
    const double partial = (a0 + a1) + (a2 + a3);
    if (partial > bound) return partial;
  }
  for (; i + 4 <= dim; i += 4) {
    const double d0 = static_cast<double>(row[i]) - query[i];
    const double d1 = static_cast<double>(row[i + 1]) - query[i + 1];
    const double d2 = static_cast<double>(row[i + 2]) - query[i + 2];
    const double d3 = static_cast<double>(row[i + 3]) - query[i + 3];
    a0 += d0 * d0;
    a1 += d1 * d1;
    a2 += d2 * d2;
    a3 += d3 * d3;
  }
  double tail = 0.0;
  for (; i < dim; ++i) {
    const double d = static_cast<double>(row[i]) - query[i];
    tail += d * d;
  }
  return ((a0 + a1) + (a2 + a3)) + tail;
}

namespace detail {

void check_nn_query(const EmbeddingStore& store, const Eigen::VectorXd& query,
                    int k, const std::unordered_set<int>& exclude) {
  if (query.size() != store.dim()) {
    throw DimensionMismatch("query dimension " + std::to_string(query.size()) +
                            " != store dimension " +
                            std::to_string(store.dim()));
  }
  if (k <= 0) throw InvalidParameter("k must be positive");
  int excluded_in_range = 0;
  for (int id : exclude) {
    if (id >= 0 && id < store.size()) ++excluded_in_range;
  }
  if (k > store.size() - excluded_in_range) {
    throw KTooLarge("k=" + std::to_string(k) + " exceeds " +
                    std::to_string(store.size() - excluded_in_range) +
                    " available candidates");
  }
}

}  // namespace detail

NeighborList nearest_neighbors_l2(const EmbeddingStore& store,
                                  const Eigen::VectorXd& query, int k,
                                  const std::unordered_set<int>& exclude) {
  detail::check_nn_query(store, query, k, exclude);
  const int n = store.size();
  const int dim = store.dim();
  const double* q = query.data();

  detail::TopK top(k);
  for (int id = 0; id < n; ++id) {
    if (!exclude.empty() && exclude.count(id)) continue;
    const double bound = top.bound();
    const double d2 = squared_l2_bounded(store.row(id), q, dim, bound);
    if (d2 > bound) continue;
    top.offer(d2, id);
  }
  return top.finish_sqrt();
}

NeighborList nearest_neighbors(const EmbeddingStore& store,
                               const Eigen::VectorXd& query, int k,
                               const std::unordered_set<int>& exclude,
                               const Metric& metric) {
  if (metric.kind() == MetricKind::kEuclidean) {
    return nearest_neighbors_l2(store, query, k, exclude);
  }
  if (metric.kind() == MetricKind::kIndicator) {
    throw InvalidParameter(
        "the indicator metric cannot rank neighbors in R^p");
  }
  detail::check_nn_query(store, query, k, exclude);

  // Mahalanobis ranking: whiten once per candidate. Experimental path, plain
  // full scan.
  const MahalanobisData& data = metric.mahalanobis_data();
  const int n = store.size();
  detail::TopK top(k);
  Eigen::VectorXd diff(store.dim());
  for (int id = 0; id < n; ++id) {
    if (!exclude.empty() && exclude.count(id)) continue;
    diff = store.embedding(id) - query;
    data.llt.matrixL().solveInPlace(diff);
    top.offer(diff.squaredNorm(), id);
  }
  return top.finish_sqrt();
}

}  // namespace metricdp
