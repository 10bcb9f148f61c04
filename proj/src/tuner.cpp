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

#include "metricdp/tuner.hpp"

#include <cmath>

#include "metricdp/errors.hpp"
#include "metricdp/rng.hpp"

namespace metricdp {

std::vector<double> TunerConfig::default_t_grid() {
  std::vector<double> grid;
  grid.reserve(20);
  for (int i = 1; i <= 20; ++i) grid.push_back(static_cast<double>(i) / 20.0);
  return grid;
}

void TunerConfig::validate() const {
  if (!(budget > 0.0) || !std::isfinite(budget)) {
    throw InvalidParameter("budget C must be positive and finite");
  }
  if (!(epsilon0 > 0.0) || !std::isfinite(epsilon0)) {
    throw InvalidParameter("epsilon0 must be positive and finite");
  }
  if (t_grid.empty()) throw InvalidParameter("t grid is empty");
  for (double t : t_grid) {
    if (!(t >= 0.0 && t <= 1.0)) {
      throw InvalidParameter("t grid values must lie in [0, 1]");
    }
  }
  if (max_doublings < 0) {
    throw InvalidParameter("max_doublings must be >= 0");
  }
}

TuneResult tune(const AuditFn& audit, const TunerConfig& config) {
  config.validate();
  TuneResult result;

  // Doubling phase at t = 0: grow epsilon until the loss drops under the
  // budget. The loop condition is L >= C as listed; feasibility below is
  // L <= C, so the phase always ends on a feasible point.
  double epsilon = config.epsilon0;
  const Variant base = Variant::vickrey(0.0);
  AuditReport report = audit(epsilon, base);
  result.log.push_back(SearchEntry{SearchEntry::Phase::kDoubling, epsilon, 0.0,
                                   report.e_m, report.l_m,
                                   report.l_m <= config.budget});
  int doublings = 0;
  while (report.l_m >= config.budget) {
    if (doublings == config.max_doublings) {
      throw BudgetUnreachable(epsilon, report.l_m);
    }
    epsilon *= 2.0;
    ++doublings;
    report = audit(epsilon, base);
    result.log.push_back(SearchEntry{SearchEntry::Phase::kDoubling, epsilon,
                                     0.0, report.e_m, report.l_m,
                                     report.l_m <= config.budget});
  }

  // Grid phase: the t = 0 point that ended the doubling seeds the optimum,
  // so a fully infeasible grid still returns a feasible answer.
  result.epsilon_opt = epsilon;
  result.t_opt = 0.0;
  result.best = report;
  for (double t : config.t_grid) {
    const AuditReport r = audit(epsilon, Variant::vickrey(t));
    const bool feasible = r.l_m <= config.budget;
    result.log.push_back(SearchEntry{SearchEntry::Phase::kGrid, epsilon, t,
                                     r.e_m, r.l_m, feasible});
    if (feasible && r.e_m > result.best.e_m) {
      result.t_opt = t;
      result.best = r;
    }
  }
  return result;
}

TradeoffCurve sweep(const SeededAuditFn& audit,
                    const std::vector<double>& epsilon_grid,
                    const std::vector<Variant>& variant_grid, int repetitions,
                    std::uint64_t master_seed) {
  if (epsilon_grid.empty() || variant_grid.empty()) {
    throw InvalidParameter("sweep grids must be non-empty");
  }
  if (repetitions < 1) throw InvalidParameter("repetitions must be >= 1");

  constexpr double kZ95 = 1.959963984540054;
  TradeoffCurve curve;
  std::uint64_t point = 0;
  for (double epsilon : epsilon_grid) {
    for (const Variant& variant : variant_grid) {
      const std::uint64_t point_seed = derive_seed(master_seed, point);
      AuditReport agg;
      double sum_e = 0.0, sum_l = 0.0, sq_e = 0.0, sq_l = 0.0;
      for (int rep = 0; rep < repetitions; ++rep) {
        const AuditReport r =
            audit(epsilon, variant,
                  derive_seed(master_seed, point, static_cast<std::uint64_t>(rep)));
        if (rep == 0) agg = r;
        sum_e += r.e_m;
        sum_l += r.l_m;
        sq_e += r.e_m * r.e_m;
        sq_l += r.l_m * r.l_m;
      }
      const double n = static_cast<double>(repetitions);
      agg.epsilon = epsilon;
      agg.variant = variant;
      agg.e_m = sum_e / n;
      agg.l_m = sum_l / n;
      if (repetitions > 1) {
        const double var_e =
            std::max(0.0, (sq_e - n * agg.e_m * agg.e_m) / (n - 1.0));
        const double var_l =
            std::max(0.0, (sq_l - n * agg.l_m * agg.l_m) / (n - 1.0));
        agg.e_m_half_width = kZ95 * std::sqrt(var_e / n);
        agg.l_m_half_width = kZ95 * std::sqrt(var_l / n);
      }
      agg.repetitions = repetitions;
      agg.seed = point_seed;
      curve.points.push_back(agg);
      ++point;
    }
  }
  return curve;
}

}  // namespace metricdp
