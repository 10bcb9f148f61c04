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

#ifndef METRICDP_DETAIL_TOPK_HPP_
#define METRICDP_DETAIL_TOPK_HPP_

#include <cmath>
#include <limits>
#include <queue>
#include <vector>

#include "metricdp/embeddings.hpp"

namespace metricdp::detail {

// Total order shared by every exact search path: (squared distance, id).
inline bool topk_better(double d2_a, int id_a, double d2_b, int id_b) {
  return d2_a < d2_b || (d2_a == d2_b && id_a < id_b);
}

// Best-k accumulator under (d2, id). The worst kept entry bounds the early
// abort in the distance kernel.
class TopK {
 public:
  explicit TopK(int k) : k_(k) {}

  bool full() const { return static_cast<int>(heap_.size()) == k_; }

  // Early-abort bound: a candidate whose squared distance strictly exceeds
  // this cannot enter the result.
  double bound() const {
    return full() ? heap_.top().d2 : std::numeric_limits<double>::infinity();
  }

  void offer(double d2, int id) {
    if (!full()) {
      heap_.push(Entry{d2, id});
      return;
    }
    const Entry& worst = heap_.top();
    if (!topk_better(d2, id, worst.d2, worst.id)) return;
    heap_.pop();
    heap_.push(Entry{d2, id});
  }

  NeighborList finish_sqrt() {
    NeighborList out(heap_.size());
    for (std::size_t i = heap_.size(); i-- > 0;) {
      out[i] = Neighbor{heap_.top().id, std::sqrt(heap_.top().d2)};
      heap_.pop();
    }
    return out;
  }

 private:
  struct Entry {
    double d2;
    int id;
  };
  struct WorseOnTop {
    bool operator()(const Entry& a, const Entry& b) const {
      return topk_better(a.d2, a.id, b.d2, b.id);
    }
  };

  int k_;
  std::priority_queue<Entry, std::vector<Entry>, WorseOnTop> heap_;
};

void check_nn_query(const EmbeddingStore& store, const Eigen::VectorXd& query,
                    int k, const std::unordered_set<int>& exclude);

}  // namespace metricdp::detail

#endif  // METRICDP_DETAIL_TOPK_HPP_
