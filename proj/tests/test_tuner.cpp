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

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <vector>

#include <doctest.h>

#include "helpers.hpp"
#include "metricdp/audit.hpp"
#include "metricdp/errors.hpp"
#include "metricdp/rng.hpp"
#include "metricdp/tuner.hpp"

using namespace metricdp;
using namespace metricdp::test;

namespace {

// Audit stub driven by closed-form loss and error surfaces.
AuditFn surface_audit(double (*e_of)(double, double),
                      double (*l_of)(double, double)) {
  return [e_of, l_of](double epsilon, const Variant& variant) {
    AuditReport report;
    report.epsilon = epsilon;
    report.variant = variant;
    report.e_m = e_of(epsilon, variant.t);
    report.l_m = l_of(epsilon, variant.t);
    return report;
  };
}

// Exact audit over the 1-d fixture: quadrature transitions, uniform prior,
// embedding-distance privacy, sentiment utility.
AuditFn exact_fixture_audit(const EmbeddingStore& store, const Prior& prior,
                            const WordDistance& d_e, const WordDistance& d_l) {
  return [&store, &prior, &d_e, &d_l](double epsilon, const Variant& variant) {
    MechanismConfig config;
    config.epsilon = epsilon;
    config.variant = variant;
    const TransitionModel f = exact_transition_1d(config, store, prior.ids());
    const Posterior post = posterior(prior, f);
    AuditReport report;
    report.epsilon = epsilon;
    report.variant = variant;
    report.e_m = expected_inference_error(prior, f, post, d_e).value;
    report.l_m = expected_utility_loss(prior, f, d_l).value;
    return report;
  };
}

// Independent reformulation of the search: find the smallest doubling count
// whose t=0 loss is under budget by direct scan, then pick the feasible E_M
// maximizer over {t=0 seed} + grid by scanning from the top down (>= keeps
// the smallest tied t).
struct OracleResult {
  double epsilon;
  double t;
  double e_m;
  double l_m;
};

OracleResult tune_oracle(const AuditFn& audit, const TunerConfig& config) {
  double epsilon = config.epsilon0;
  int k = 0;
  while (true) {
    const AuditReport r = audit(epsilon, Variant::vickrey(0.0));
    if (r.l_m < config.budget) break;
    if (k == config.max_doublings) throw BudgetUnreachable(epsilon, r.l_m);
    epsilon *= 2.0;
    ++k;
  }

  std::vector<std::pair<double, AuditReport>> candidates;
  candidates.emplace_back(0.0, audit(epsilon, Variant::vickrey(0.0)));
  for (double t : config.t_grid) {
    const AuditReport r = audit(epsilon, Variant::vickrey(t));
    if (r.l_m <= config.budget) candidates.emplace_back(t, r);
  }
  std::size_t best = candidates.size() - 1;
  for (std::size_t i = candidates.size(); i-- > 0;) {
    if (candidates[i].second.e_m >= candidates[best].second.e_m) best = i;
  }
  return OracleResult{epsilon, candidates[best].first,
                      candidates[best].second.e_m,
                      candidates[best].second.l_m};
}

void check_matches_oracle(const AuditFn& audit, const TunerConfig& config) {
  const TuneResult got = tune(audit, config);
  const OracleResult want = tune_oracle(audit, config);
  CHECK(got.epsilon_opt == want.epsilon);
  CHECK(got.t_opt == want.t);
  CHECK(got.best.e_m == want.e_m);
  CHECK(got.best.l_m == want.l_m);
}

}  // namespace

TEST_CASE("tuner: default grid spans (0, 1] in steps of 0.05") {
  const std::vector<double> grid = TunerConfig::default_t_grid();
  REQUIRE(grid.size() == 20);
  for (int i = 0; i < 20; ++i) {
    CHECK(grid[i] == doctest::Approx((i + 1) / 20.0).epsilon(1e-15));
  }
  CHECK(grid.front() == doctest::Approx(0.05));
  CHECK(grid.back() == 1.0);
}

TEST_CASE("tuner: configuration validation") {
  TunerConfig ok;
  ok.t_grid = TunerConfig::default_t_grid();
  CHECK_NOTHROW(ok.validate());

  TunerConfig c = ok;
  c.budget = 0.0;
  CHECK_THROWS_AS(c.validate(), InvalidParameter);
  c = ok;
  c.budget = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(c.validate(), InvalidParameter);
  c = ok;
  c.epsilon0 = -1.0;
  CHECK_THROWS_AS(c.validate(), InvalidParameter);
  c = ok;
  c.epsilon0 = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(c.validate(), InvalidParameter);
  c = ok;
  c.t_grid.clear();
  CHECK_THROWS_AS(c.validate(), InvalidParameter);
  c = ok;
  c.t_grid.push_back(1.5);
  CHECK_THROWS_AS(c.validate(), InvalidParameter);
  c = ok;
  c.t_grid.push_back(-0.1);
  CHECK_THROWS_AS(c.validate(), InvalidParameter);
  c = ok;
  c.max_doublings = -1;
  CHECK_THROWS_AS(c.validate(), InvalidParameter);
}

TEST_CASE("tuner: free-lunch surface needs no doubling and maxes t") {
  // L is always zero; E grows linearly in t.
  const AuditFn audit = surface_audit(
      [](double, double t) { return t; }, [](double, double) { return 0.0; });
  TunerConfig config;
  config.budget = 0.1;
  config.epsilon0 = 0.25;
  config.t_grid = TunerConfig::default_t_grid();

  const TuneResult result = tune(audit, config);
  CHECK(result.epsilon_opt == 0.25);
  CHECK(result.t_opt == 1.0);
  CHECK(result.best.e_m == 1.0);
  REQUIRE(result.log.size() == 21);
  CHECK(result.log[0].phase == SearchEntry::Phase::kDoubling);
  for (std::size_t i = 1; i < result.log.size(); ++i) {
    CHECK(result.log[i].phase == SearchEntry::Phase::kGrid);
    CHECK(result.log[i].epsilon == 0.25);
    CHECK(result.log[i].feasible);
  }
  check_matches_oracle(audit, config);
}

TEST_CASE("tuner: flat error surface keeps the t=0 seed") {
  // Constant E means no grid point strictly improves, so the doubling-end
  // point wins and t stays 0.
  const AuditFn audit = surface_audit(
      [](double, double) { return 1.0; }, [](double, double) { return 0.0; });
  TunerConfig config;
  config.budget = 0.5;
  config.epsilon0 = 1.0;
  config.t_grid = TunerConfig::default_t_grid();

  const TuneResult result = tune(audit, config);
  CHECK(result.t_opt == 0.0);
  CHECK(result.epsilon_opt == 1.0);
  check_matches_oracle(audit, config);
}

TEST_CASE("tuner: ties go to the smallest winning t") {
  // E steps up at t = 0.5 and stays flat: the first grid point reaching the
  // plateau wins.
  const AuditFn audit = surface_audit(
      [](double, double t) { return t >= 0.5 ? 1.0 : 0.25; },
      [](double, double) { return 0.0; });
  TunerConfig config;
  config.budget = 1.0;
  config.epsilon0 = 2.0;
  config.t_grid = TunerConfig::default_t_grid();

  const TuneResult result = tune(audit, config);
  CHECK(result.t_opt == 0.5);
  CHECK(result.best.e_m == 1.0);
  check_matches_oracle(audit, config);
}

TEST_CASE("tuner: doubles epsilon until the loss clears the budget") {
  // L = 1/epsilon at t = 0: 0.25 -> 4, 0.5 -> 2, ..., 4 -> 0.25 < 0.3.
  const AuditFn audit = surface_audit(
      [](double, double t) { return t; },
      [](double epsilon, double) { return 1.0 / epsilon; });
  TunerConfig config;
  config.budget = 0.3;
  config.epsilon0 = 0.25;
  config.t_grid = TunerConfig::default_t_grid();

  const TuneResult result = tune(audit, config);
  CHECK(result.epsilon_opt == 4.0);

  int doubling_entries = 0;
  for (const SearchEntry& entry : result.log) {
    if (entry.phase == SearchEntry::Phase::kDoubling) {
      ++doubling_entries;
      CHECK(entry.t == 0.0);
    } else {
      CHECK(entry.epsilon == 4.0);
    }
  }
  CHECK(doubling_entries == 5);
  check_matches_oracle(audit, config);
}

TEST_CASE("tuner: a loss exactly at the budget still doubles") {
  // The doubling loop runs while L >= C, so L == C is not good enough.
  const AuditFn audit = surface_audit(
      [](double, double t) { return t; },
      [](double epsilon, double) { return 0.3 / epsilon; });
  TunerConfig config;
  config.budget = 0.3;
  config.epsilon0 = 1.0;
  config.t_grid = TunerConfig::default_t_grid();

  const TuneResult result = tune(audit, config);
  CHECK(result.epsilon_opt == 2.0);
  check_matches_oracle(audit, config);
}

TEST_CASE("tuner: unreachable budget raises after the doubling cap") {
  const AuditFn audit = surface_audit(
      [](double, double t) { return t; }, [](double, double) { return 1.0; });
  TunerConfig config;
  config.budget = 0.5;
  config.epsilon0 = 1.0;
  config.t_grid = TunerConfig::default_t_grid();
  config.max_doublings = 3;

  try {
    tune(audit, config);
    FAIL("expected BudgetUnreachable");
  } catch (const BudgetUnreachable& e) {
    CHECK(e.epsilon() == 8.0);  // 1 * 2^3
    CHECK(e.loss() == 1.0);
  }

  config.max_doublings = 0;
  try {
    tune(audit, config);
    FAIL("expected BudgetUnreachable");
  } catch (const BudgetUnreachable& e) {
    CHECK(e.epsilon() == 1.0);
  }
}

TEST_CASE("tuner: infeasible grid tail is skipped") {
  // L grows with t and crosses the budget between 0.30 and 0.35; E grows
  // with t, so the optimum sits exactly at the feasibility edge.
  const AuditFn audit = surface_audit(
      [](double, double t) { return t; },
      [](double epsilon, double t) { return (0.5 + t) / epsilon; });
  TunerConfig config;
  config.budget = 0.2;
  config.epsilon0 = 0.25;
  config.t_grid = TunerConfig::default_t_grid();

  const TuneResult result = tune(audit, config);
  CHECK(result.epsilon_opt == 4.0);
  CHECK(result.t_opt == doctest::Approx(0.3).epsilon(1e-15));
  for (const SearchEntry& entry : result.log) {
    if (entry.phase == SearchEntry::Phase::kGrid && entry.t > 0.31) {
      CHECK_FALSE(entry.feasible);
    }
  }
  check_matches_oracle(audit, config);
}

TEST_CASE("tuner: exact fixture audit reproduces the known optimum") {
  const EmbeddingStore store = fixture_store();
  const Prior prior = Prior::uniform(all_ids(store));
  const WordDistance d_e = WordDistance::embedding_euclidean(store);
  const WordDistance d_l = WordDistance::sentiment_flip(
      store, fixture_positive(), fixture_negative());
  const AuditFn audit = exact_fixture_audit(store, prior, d_e, d_l);

  TunerConfig config;
  config.budget = 0.15;
  config.epsilon0 = 0.25;
  config.t_grid = TunerConfig::default_t_grid();

  const TuneResult result = tune(audit, config);
  CHECK(result.epsilon_opt == 1.0);  // 0.25 doubled twice
  CHECK(result.t_opt == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(result.best.l_m <= 0.15);
  CHECK(result.best.l_m == doctest::Approx(0.147044).epsilon(1e-3));
  REQUIRE(result.log.size() == 23);  // 3 doubling + 20 grid evaluations

  // The doubling trace shrinks the loss monotonically here.
  CHECK(result.log[0].l_m > result.log[1].l_m);
  CHECK(result.log[1].l_m > result.log[2].l_m);
  CHECK(result.log[2].feasible);

  // Search invariants: the winner is feasible and dominates every feasible
  // grid point.
  for (const SearchEntry& entry : result.log) {
    if (entry.phase == SearchEntry::Phase::kGrid && entry.feasible) {
      CHECK(entry.e_m <= result.best.e_m + 1e-15);
    }
  }
  check_matches_oracle(audit, config);

  // Exact audits make the whole search reproducible.
  const TuneResult again = tune(audit, config);
  CHECK(again.epsilon_opt == result.epsilon_opt);
  CHECK(again.t_opt == result.t_opt);
  CHECK(again.best.e_m == result.best.e_m);
  REQUIRE(again.log.size() == result.log.size());
  for (std::size_t i = 0; i < again.log.size(); ++i) {
    CHECK(again.log[i].e_m == result.log[i].e_m);
    CHECK(again.log[i].l_m == result.log[i].l_m);
  }
}

TEST_CASE("sweep: validation and single-point equivalence") {
  const SeededAuditFn audit = [](double epsilon, const Variant& variant,
                                 std::uint64_t seed) {
    AuditReport report;
    report.epsilon = epsilon;
    report.variant = variant;
    report.e_m = 0.25;
    report.l_m = 0.5;
    report.e_m_half_width = 0.01;
    report.l_m_half_width = 0.02;
    report.seed = seed;
    return report;
  };

  CHECK_THROWS_AS(sweep(audit, {}, {Variant::snn()}, 1, 0), InvalidParameter);
  CHECK_THROWS_AS(sweep(audit, {1.0}, {}, 1, 0), InvalidParameter);
  CHECK_THROWS_AS(sweep(audit, {1.0}, {Variant::snn()}, 0, 0),
                  InvalidParameter);

  const TradeoffCurve curve = sweep(audit, {2.0}, {Variant::vickrey(0.5)}, 1, 9);
  REQUIRE(curve.points.size() == 1);
  const AuditReport& p = curve.points[0];
  CHECK(p.epsilon == 2.0);
  CHECK(p.variant.t == 0.5);
  CHECK(p.e_m == 0.25);
  CHECK(p.l_m == 0.5);
  // A single repetition keeps the audit's own confidence half-widths.
  CHECK(p.e_m_half_width == 0.01);
  CHECK(p.l_m_half_width == 0.02);
  CHECK(p.repetitions == 1);
  CHECK(p.seed == derive_seed(9, 0));
}

TEST_CASE("sweep: repetition mean and half-width by hand") {
  // Map each derived rep seed to a fixed value: 1, 2, 4.
  const std::uint64_t master = 77;
  std::map<std::uint64_t, double> values = {
      {derive_seed(master, 0, 0), 1.0},
      {derive_seed(master, 0, 1), 2.0},
      {derive_seed(master, 0, 2), 4.0},
  };
  const SeededAuditFn audit = [&values](double epsilon, const Variant& variant,
                                        std::uint64_t seed) {
    AuditReport report;
    report.epsilon = epsilon;
    report.variant = variant;
    report.e_m = values.at(seed);
    report.l_m = 2.0 * values.at(seed);
    return report;
  };

  const TradeoffCurve curve =
      sweep(audit, {1.0}, {Variant::vickrey(0.0)}, 3, master);
  REQUIRE(curve.points.size() == 1);
  const AuditReport& p = curve.points[0];

  const double mean = 7.0 / 3.0;
  const double var = ((1.0 + 4.0 + 16.0) - 3.0 * mean * mean) / 2.0;
  const double hw = 1.959963984540054 * std::sqrt(var / 3.0);
  CHECK(p.e_m == doctest::Approx(mean).epsilon(1e-14));
  CHECK(p.e_m_half_width == doctest::Approx(hw).epsilon(1e-12));
  CHECK(p.l_m == doctest::Approx(2.0 * mean).epsilon(1e-14));
  CHECK(p.l_m_half_width == doctest::Approx(2.0 * hw).epsilon(1e-12));
  CHECK(p.repetitions == 3);
}

TEST_CASE("sweep: grid points arrive in row-major order") {
  const SeededAuditFn audit = [](double epsilon, const Variant& variant,
                                 std::uint64_t) {
    AuditReport report;
    report.epsilon = epsilon;
    report.variant = variant;
    return report;
  };
  const std::vector<Variant> variants = {Variant::vickrey(0.0),
                                         Variant::snn()};
  const TradeoffCurve curve = sweep(audit, {1.0, 2.0}, variants, 1, 0);
  REQUIRE(curve.points.size() == 4);
  CHECK(curve.points[0].epsilon == 1.0);
  CHECK(curve.points[1].epsilon == 1.0);
  CHECK(curve.points[2].epsilon == 2.0);
  CHECK(curve.points[3].epsilon == 2.0);
  CHECK(curve.points[0].variant.kind == Variant::Kind::kVickrey);
  CHECK(curve.points[1].variant.kind == Variant::Kind::kSnn);
  CHECK(curve.points[2].variant.kind == Variant::Kind::kVickrey);
  CHECK(curve.points[3].variant.kind == Variant::Kind::kSnn);
  // Point seeds are distinct across the lattice.
  CHECK(curve.points[0].seed != curve.points[1].seed);
  CHECK(curve.points[1].seed != curve.points[2].seed);
}

TEST_CASE("sweep: exact audits show the privacy-utility trends") {
  const EmbeddingStore store = fixture_store();
  const Prior prior = Prior::uniform(all_ids(store));
  const WordDistance d_e = WordDistance::embedding_euclidean(store);
  const WordDistance d_l = WordDistance::sentiment_flip(
      store, fixture_positive(), fixture_negative());
  const AuditFn exact = exact_fixture_audit(store, prior, d_e, d_l);
  const SeededAuditFn audit = [&exact](double epsilon, const Variant& variant,
                                       std::uint64_t) {
    return exact(epsilon, variant);
  };

  SUBCASE("adversary error falls as epsilon grows, t fixed at 0") {
    const std::vector<double> eps_grid = {0.5, 1.0, 2.0, 4.0, 8.0, 16.0};
    const TradeoffCurve curve =
        sweep(audit, eps_grid, {Variant::vickrey(0.0)}, 1, 0);
    REQUIRE(curve.points.size() == eps_grid.size());
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
      CHECK(curve.points[i].e_m < curve.points[i - 1].e_m);
      CHECK(curve.points[i].l_m < curve.points[i - 1].l_m);
    }
  }

  SUBCASE("second-pick pressure raises both error and loss") {
    std::vector<Variant> variants;
    for (double t : {0.0, 0.25, 0.5, 0.75}) variants.push_back(Variant::vickrey(t));
    const TradeoffCurve curve = sweep(audit, {4.0}, variants, 1, 0);
    REQUIRE(curve.points.size() == 4);
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
      CHECK(curve.points[i].e_m > curve.points[i - 1].e_m);
      CHECK(curve.points[i].l_m > curve.points[i - 1].l_m);
    }

    // Always taking the second pick is the extreme of this trade under the
    // euclidean adversary distance: error tops every interior mixture.
    const TradeoffCurve ends = sweep(
        audit, {4.0}, {Variant::vickrey(0.0), Variant::vickrey(1.0)}, 1, 0);
    CHECK(ends.points[1].e_m > ends.points[0].e_m);
    CHECK(ends.points[1].e_m > curve.points[3].e_m);
  }
}
