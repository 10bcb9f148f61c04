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

#ifndef METRICDP_EMBEDDINGS_HPP_
#define METRICDP_EMBEDDINGS_HPP_

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <Eigen/Core>

#include "metricdp/errors.hpp"

namespace metricdp {

class Metric;  // metrics.hpp

/// Immutable vocabulary + n x p embedding matrix. Word ids are row indices,
/// 0..n-1, stable for the store's lifetime. Coordinates are stored as float
/// (embedding files carry ~6 significant digits); all distance arithmetic
/// accumulates in double.
class EmbeddingStore {
 public:
  using Matrix =
      Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  EmbeddingStore(std::vector<std::string> vocab, Matrix matrix,
                 std::string name);

  int size() const { return static_cast<int>(vocab_.size()); }
  int dim() const { return static_cast<int>(matrix_.cols()); }
  const std::string& name() const { return name_; }
  const std::vector<std::string>& vocab() const { return vocab_; }
  const std::string& word(int id) const { return vocab_[id]; }
  const Matrix& matrix() const { return matrix_; }

  const float* row(int id) const { return matrix_.data() + std::size_t(id) * dim(); }

  /// Embedding of word `id` widened to double, for noise addition.
  Eigen::VectorXd embedding(int id) const;

  /// Id for `token`, or nullopt when out of vocabulary. Case-sensitive,
  /// exact match.
  std::optional<int> lookup(const std::string& token) const;

 private:
  std::vector<std::string> vocab_;
  Matrix matrix_;
  std::string name_;
  std::unordered_map<std::string, int> index_;
};

enum class EmbeddingFormat { kGloveText, kFasttextText };

/// Parses a glove-text ("word c1 ... cp" per line) or fasttext-text
/// ("n p" header, then the same row format) stream. Row order is preserved;
/// `limit` truncates after the first `limit` valid rows.
EmbeddingStore load_embeddings(std::istream& in, EmbeddingFormat format,
                               std::optional<int> limit = std::nullopt,
                               std::string name = "stream");

EmbeddingStore load_embeddings_file(const std::string& path,
                                    EmbeddingFormat format,
                                    std::optional<int> limit = std::nullopt);

/// Reads a newline-delimited word list and maps it onto store ids, ascending.
/// Words absent from the vocabulary are collected in `missing` when given.
std::vector<int> load_word_list(std::istream& in, const EmbeddingStore& store,
                                std::vector<std::string>* missing = nullptr);

std::vector<int> load_word_list_file(const std::string& path,
                                     const EmbeddingStore& store,
                                     std::vector<std::string>* missing = nullptr);

struct Neighbor {
  int id;
  double distance;
};

/// Neighbors sorted by (distance, id) ascending. Ties break toward the
/// smaller vocabulary id.
using NeighborList = std::vector<Neighbor>;

/// Canonical squared-L2 kernel: four independent accumulator lanes over the
/// coordinates, combined in a fixed order. Every exact search path (scan and
/// index) uses this same kernel so results agree bitwise.
double squared_l2(const float* row, const double* query, int dim);

/// Same kernel with early termination: returns a value > `bound` as soon as
/// the partial sum exceeds it (partial sums of squares are monotone, so an
/// aborted row provably cannot beat `bound`). Exact for survivors.
double squared_l2_bounded(const float* row, const double* query, int dim,
                          double bound);

/// Exact k-nearest-neighbor scan over the full store. Results are sorted by
/// (distance, id); excluded ids never appear. Throws KTooLarge when fewer
/// than k candidates remain and DimensionMismatch on a bad query.
NeighborList nearest_neighbors(const EmbeddingStore& store,
                               const Eigen::VectorXd& query, int k,
                               const std::unordered_set<int>& exclude,
                               const Metric& metric);

/// Euclidean-only overload used on hot paths (no Metric indirection).
NeighborList nearest_neighbors_l2(const EmbeddingStore& store,
                                  const Eigen::VectorXd& query, int k,
                                  const std::unordered_set<int>& exclude);

}  // namespace metricdp

#endif  // METRICDP_EMBEDDINGS_HPP_
