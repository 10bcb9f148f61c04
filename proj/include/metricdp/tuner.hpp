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

#ifndef METRICDP_TUNER_HPP_
#define METRICDP_TUNER_HPP_

#include <functional>
#include <string>
#include <vector>

#include "metricdp/audit.hpp"

namespace metricdp {

/// Evaluates one (epsilon, variant) point of a mechanism family. Injected so
/// tests can plug the exact 1-d oracle while production uses fixed-seed
/// Monte-Carlo audits; either way the search is deterministic.
using AuditFn = std::function<AuditReport(double epsilon, const Variant&)>;

struct TunerConfig {
  double budget = 0.1;        // maximum utility loss C, in d_L units
  double epsilon0 = 0.25;     // initial privacy parameter
  std::vector<double> t_grid; // defaults to {0.05, 0.10, ..., 1.00}
  int max_doublings = 40;

  static std::vector<double> default_t_grid();
  void validate() const;
};

struct SearchEntry {
  enum class Phase { kDoubling, kGrid };
  Phase phase;
  double epsilon;
  double t;
  double e_m;
  double l_m;
  bool feasible;  // L <= C
};

struct TuneResult {
  double epsilon_opt = 0.0;
  double t_opt = 0.0;
  AuditReport best;
  std::vector<SearchEntry> log;
};

/// Constrained parameter selection: starting from (epsilon0, t = 0), doubles
/// epsilon while L >= C (raising BudgetUnreachable at the doubling cap),
/// then evaluates every grid t at the resulting epsilon and keeps the
/// feasible maximizer of E_M; ties go to the smaller t (strict improvement
/// required). Every evaluation lands in the search log.
TuneResult tune(const AuditFn& audit, const TunerConfig& config);

/// One AuditReport per (epsilon, variant) grid point, keyed uniquely.
struct TradeoffCurve {
  std::vector<AuditReport> points;
};

/// Full lattice sweep. With repetitions > 1 each grid point is audited that
/// many times under derived seeds and the report carries the mean and the
/// 95% half-width across runs.
using SeededAuditFn =
    std::function<AuditReport(double epsilon, const Variant&, std::uint64_t seed)>;

TradeoffCurve sweep(const SeededAuditFn& audit,
                    const std::vector<double>& epsilon_grid,
                    const std::vector<Variant>& variant_grid, int repetitions,
                    std::uint64_t master_seed);

}  // namespace metricdp

#endif  // METRICDP_TUNER_HPP_
