// Copyright 2026 The cepshed Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "cepshed/planner.hpp"
#include "cepshed/verify.hpp"
#include "test_support.hpp"

namespace cepshed {
namespace {

using testing::bits;
using testing::error_of;
using testing::running_instance;

// Exhaustive optima written directly from the problem statements, sharing no
// code with the library's solvers.
double oracle_imls(const ProblemInstance& inst) {
  const std::size_t n = inst.num_types(), nq = inst.num_queries();
  double best = 0.0;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    double mem = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (mask >> j & 1u) mem += inst.memory_rate(j);
    }
    if (mem > *inst.memory_budget() + 1e-9) continue;
    double v = 0.0;
    for (std::size_t i = 0; i < nq; ++i) {
      bool all = true;
      for (auto h : inst.queries()[i].pattern()) all = all && (mask >> h.index() & 1u);
      if (all) v += inst.value(i);
    }
    best = std::max(best, v);
  }
  return best;
}

double oracle_icls(const ProblemInstance& inst) {
  const std::size_t nq = inst.num_queries();
  double best = 0.0;
  for (std::uint32_t mask = 0; mask < (1u << nq); ++mask) {
    double cpu = 0.0, v = 0.0;
    for (std::size_t i = 0; i < nq; ++i) {
      if (mask >> i & 1u) {
        cpu += inst.cpu(i);
        v += inst.value(i);
      }
    }
    if (cpu <= *inst.cpu_budget() + 1e-9) best = std::max(best, v);
  }
  return best;
}

double oracle_idls(const ProblemInstance& inst) {
  // a query set is feasible when its type union fits M and its cpu fits C
  const std::size_t nq = inst.num_queries();
  double best = 0.0;
  for (std::uint32_t mask = 0; mask < (1u << nq); ++mask) {
    std::vector<bool> used(inst.num_types(), false);
    double cpu = 0.0, v = 0.0, mem = 0.0;
    for (std::size_t i = 0; i < nq; ++i) {
      if (!(mask >> i & 1u)) continue;
      cpu += inst.cpu(i);
      v += inst.value(i);
      for (auto h : inst.queries()[i].pattern()) used[h.index()] = true;
    }
    for (std::size_t j = 0; j < used.size(); ++j) {
      if (used[j]) mem += inst.memory_rate(j);
    }
    if (cpu <= *inst.cpu_budget() + 1e-9 && mem <= *inst.memory_budget() + 1e-9) {
      best = std::max(best, v);
    }
  }
  return best;
}

std::vector<ProblemInstance> suite(std::size_t count, std::uint64_t seed,
                                   std::size_t max_types = 8) {
  auto rng = make_engine(seed, 99, 0);
  RandomInstanceOptions opt;
  opt.max_types = max_types;
  opt.max_queries = 6;
  std::vector<ProblemInstance> out;
  for (std::size_t t = 0; t < count; ++t) out.push_back(random_instance(rng, opt));
  return out;
}

TEST(Instance, DerivedQuantities) {
  const auto inst = running_instance(3.0, 4.0);
  EXPECT_EQ(inst.memory_rate(0), 1.0);
  EXPECT_EQ(inst.value(2), 6.0);
  EXPECT_EQ(inst.footprint(2), 4.0);
  EXPECT_EQ(inst.p(), 3u);  // C appears in all three queries
  EXPECT_EQ(inst.d(), 4u);
  EXPECT_DOUBLE_EQ(inst.f(), 4.0 / 3.0);
  EXPECT_EQ(inst.total_cpu(), 6.0);
}

TEST(Instance, ValidatesInputs) {
  EXPECT_EQ(error_of([] { running_instance(-1.0, std::nullopt); }),
            ErrorCode::kNonPositiveBudget);
  Alphabet sigma{{"A", 1.0, 1.0}};
  EXPECT_EQ(error_of([&] {
              ProblemInstance(sigma, {Query("q", sigma.handles({"A"}), 1.0, 1.0, 1.0)}, 1.0,
                              std::nullopt);
            }),
            ErrorCode::kMissingMatchRate);
  EXPECT_EQ(error_of([] { running_instance(std::nullopt, 1.0).require_memory_budget(); }),
            ErrorCode::kMissingBudget);
  EXPECT_EQ(error_of([] { imls_bicriteria(running_instance(std::nullopt, 1.0), 0.5); }),
            ErrorCode::kMissingBudget);
}

TEST(Evaluation, CouplingRules) {
  const auto inst = running_instance(3.0, 4.0);
  IntegralPlan bad{bits({1, 0, 1, 0, 1}), bits({1, 1, 1})};
  EXPECT_EQ(error_of([&] { evaluate_integral(inst, bad, Coupling::kInequality); }),
            ErrorCode::kCouplingViolation);
  IntegralPlan partial{bits({1, 0, 1, 0, 1}), bits({1, 0, 0})};
  EXPECT_EQ(evaluate_integral(inst, partial, Coupling::kInequality).expected_utility, 2.0);
  EXPECT_EQ(evaluate_integral(inst, partial, Coupling::kEquality).expected_utility, 6.0);

  FractionalPlan fp{{0.5, 1.0, 0.5, 1.0, 1.0}, {0.25, 0.5, 0.25}};
  const auto ev = evaluate_fractional(inst, fp, Coupling::kInequality);
  EXPECT_DOUBLE_EQ(ev.expected_utility, 2.0 * 0.25 + 4.0 * 0.5 + 6.0 * 0.25);
  FractionalPlan over{{0.5, 1.0, 0.5, 1.0, 1.0}, {0.3, 0.5, 0.25}};
  EXPECT_EQ(error_of([&] { evaluate_fractional(inst, over, Coupling::kInequality); }),
            ErrorCode::kCouplingViolation);
  EXPECT_EQ(error_of([&] { evaluate_integral(inst, IntegralPlan{bits({1}), bits({1})},
                                             Coupling::kEquality); }),
            ErrorCode::kDimensionMismatch);
}

TEST(RunningExample, MemoryBoundKeepsACE) {
  const auto inst = running_instance(3.0, std::nullopt);
  const auto brute = brute_force_integral(inst, Variant::kImls);
  EXPECT_EQ(brute.plan.keep_event, bits({1, 0, 1, 0, 1}));
  EXPECT_EQ(brute.plan.keep_query, bits({1, 1, 0}));
  EXPECT_EQ(brute.evaluation.expected_utility, 6.0);
  const auto dp = imls_multitenant_dp(inst);
  EXPECT_EQ(dp.plan, brute.plan);
  EXPECT_EQ(dp.evaluation.expected_utility, 6.0);
}

TEST(RunningExample, CpuBoundKeepsQ2Q3) {
  const auto inst = running_instance(std::nullopt, 4.0);
  const auto dp = icls_dp(inst);
  EXPECT_EQ(dp.plan.keep_query, bits({0, 1, 1}));
  EXPECT_EQ(dp.evaluation.expected_utility, 10.0);
  EXPECT_EQ(fcls_greedy(inst).evaluation.expected_utility, 10.0);
  EXPECT_EQ(brute_force_integral(inst, Variant::kIcls).plan, dp.plan);
}

TEST(RunningExample, DualBoundKeepsACEWithQ1Q2) {
  const auto inst = running_instance(3.0, 4.0);
  const auto r = brute_force_integral(inst, Variant::kIdls);
  EXPECT_EQ(r.plan.keep_event, bits({1, 0, 1, 0, 1}));
  EXPECT_EQ(r.plan.keep_query, bits({1, 1, 0}));
  EXPECT_EQ(r.evaluation.expected_utility, 6.0);
}

TEST(RunningExample, GreedyRejectsOversizedQuery) {
  // Q3 needs all four of A..D, more than M = 3
  EXPECT_EQ(error_of([] { imls_knapsack_greedy(running_instance(3.0, std::nullopt)); }),
            ErrorCode::kQueryLargerThanBudget);
  EXPECT_EQ(error_of([] { idls_2d_knapsack(running_instance(3.0, 4.0)); }),
            ErrorCode::kQueryLargerThanBudget);
}

TEST(BruteForce, MatchesIndependentOracle) {
  for (const auto& inst : suite(150, 1)) {
    EXPECT_NEAR(brute_force_integral(inst, Variant::kImls).evaluation.expected_utility,
                oracle_imls(inst), 1e-9);
    EXPECT_NEAR(brute_force_integral(inst, Variant::kIcls).evaluation.expected_utility,
                oracle_icls(inst), 1e-9);
    EXPECT_NEAR(brute_force_integral(inst, Variant::kIdls).evaluation.expected_utility,
                oracle_idls(inst), 1e-9);
  }
}

TEST(BruteForce, RefusesLargeInstances) {
  auto rng = make_engine(1, 98, 0);
  RandomInstanceOptions opt;
  opt.min_types = 21;
  opt.max_types = 21;
  const auto inst = random_instance(rng, opt);
  EXPECT_EQ(error_of([&] { brute_force_integral(inst, Variant::kImls); }),
            ErrorCode::kInstanceTooLarge);
  EXPECT_EQ(error_of([&] { brute_force_integral(suite(1, 2)[0], Variant::kFmls); }),
            ErrorCode::kUnsupported);
}

TEST(Multitenant, ExactOnRandomInstances) {
  MultitenantOptions mo;
  mo.grid.resolution = 1.0;
  for (const auto& inst : suite(150, 3)) {
    const auto r = imls_multitenant_dp(inst, mo);
    EXPECT_NEAR(r.evaluation.expected_utility, oracle_imls(inst), 1e-9);
    EXPECT_TRUE(r.evaluation.feasible_memory);
  }
}

TEST(Multitenant, Limits) {
  // one query touching every type makes a single 18-type component
  Alphabet sigma;
  std::vector<TypeHandle> all;
  for (std::uint32_t j = 0; j < 18; ++j) {
    sigma.add({"T" + std::to_string(j), 1.0, 1.0});
    all.push_back(TypeHandle{j});
  }
  const ProblemInstance big(sigma, {Query("q", all, 1.0, 1.0, 1.0, 1.0)}, 5.0, std::nullopt);
  EXPECT_EQ(error_of([&] { imls_multitenant_dp(big); }), ErrorCode::kComponentTooLarge);

  EXPECT_EQ(error_of([] {
              MultitenantOptions o;
              o.grid.resolution = 1e-9;
              imls_multitenant_dp(running_instance(3.0, std::nullopt), o);
            }),
            ErrorCode::kLatticeTooLarge);
  MultitenantOptions exact;
  exact.grid.resolution = 1.0;
  exact.grid.require_exact = true;
  EXPECT_EQ(error_of([&] { imls_multitenant_dp(running_instance(2.5, std::nullopt), exact); }),
            ErrorCode::kNonIntegralBudget);
  // without require_exact the budget is floored onto the grid
  exact.grid.require_exact = false;
  EXPECT_EQ(imls_multitenant_dp(running_instance(2.5, std::nullopt), exact)
                .evaluation.expected_utility,
            4.0);
}

TEST(Bicriteria, BoundsHoldAndCertificateIsConsistent) {
  for (const auto& inst : suite(100, 5)) {
    const double opt_loss = inst.total_value() - oracle_imls(inst);
    for (double tau : {0.25, 0.5, 0.75}) {
      const auto r = imls_bicriteria(inst, tau);
      EXPECT_LE(r.evaluation.loss(inst), opt_loss / tau + 1e-9);
      EXPECT_LE(r.evaluation.memory_use, *inst.memory_budget() / (1.0 - tau) + 1e-9);
      ASSERT_TRUE(r.evaluation.guarantee);
      EXPECT_EQ(r.evaluation.guarantee->kind, GuaranteeKind::kBicriteria);
      // the LP loss never exceeds the integral optimum
      EXPECT_LE(r.evaluation.guarantee->bound * tau, opt_loss + 1e-9);
    }
  }
  EXPECT_EQ(error_of([] { imls_bicriteria(running_instance(3.0, std::nullopt), 1.0); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(error_of([] { imls_bicriteria(running_instance(3.0, std::nullopt), 0.0); }),
            ErrorCode::kInvalidArgument);
}

TEST(Tricriteria, BoundsHold) {
  for (const auto& inst : suite(100, 6)) {
    const double opt_loss = inst.total_value() - oracle_idls(inst);
    for (double tau : {0.25, 0.5, 0.75}) {
      const auto r = idls_tricriteria(inst, tau).evaluation;
      EXPECT_LE(r.loss(inst), opt_loss / tau + 1e-9);
      EXPECT_LE(r.memory_use, *inst.memory_budget() / (1.0 - tau) + 1e-9);
      EXPECT_LE(r.cpu_use, *inst.cpu_budget() / (1.0 - tau) + 1e-9);
    }
  }
}

TEST(Greedy, RatioOnSmallFootprints) {
  for (const auto& base : suite(150, 7)) {
    double worst = 0.0;
    for (std::size_t i = 0; i < base.num_queries(); ++i) worst = std::max(worst, base.footprint(i));
    const auto inst = base.with_budgets(std::max(*base.memory_budget(), worst + 1.0),
                                        base.cpu_budget());
    const double ratio = (1.0 - inst.f()) / static_cast<double>(inst.p());
    const auto g = imls_knapsack_greedy(inst).evaluation;
    EXPECT_GE(g.expected_utility, ratio * oracle_imls(inst) - 1e-9);
    EXPECT_TRUE(g.feasible_memory);
    KnapsackOptions ko;
    ko.grid.resolution = 1.0;
    const auto k2 = idls_2d_knapsack(inst, ko).evaluation;
    EXPECT_GE(k2.expected_utility, ratio * oracle_idls(inst) - 1e-9);
    EXPECT_TRUE(k2.feasible_memory);
    EXPECT_TRUE(k2.feasible_cpu);
  }
}

TEST(Icls, DpExactAndFptasBound) {
  KnapsackOptions ko;
  ko.grid.resolution = 1.0;
  for (const auto& inst : suite(150, 8)) {
    const double opt = oracle_icls(inst);
    EXPECT_NEAR(icls_dp(inst, ko).evaluation.expected_utility, opt, 1e-9);
    for (double eps : {0.5, 0.1, 0.01}) {
      const auto r = icls_fptas(inst, eps).evaluation;
      EXPECT_GE(r.expected_utility, (1.0 - eps) * opt - 1e-9);
      EXPECT_TRUE(r.feasible_cpu);
    }
  }
  EXPECT_EQ(error_of([] { icls_fptas(running_instance(std::nullopt, 4.0), 1.0); }),
            ErrorCode::kInvalidArgument);
}

TEST(Icls, TiesPreferEarlierSkips) {
  // Q1 and Q2 are interchangeable; the lexicographically smallest optimal
  // selection skips Q1.
  Alphabet sigma{{"A", 1.0, 1.0}};
  const auto a = sigma.handles({"A"});
  const ProblemInstance inst(sigma,
                             {Query("Q1", a, 1.0, 1.0, 1.0, 1.0),
                              Query("Q2", a, 1.0, 1.0, 1.0, 1.0)},
                             std::nullopt, 1.0);
  EXPECT_EQ(icls_dp(inst).plan.keep_query, bits({0, 1}));
  EXPECT_EQ(brute_force_integral(inst, Variant::kIcls).plan.keep_query, bits({0, 1}));
}

TEST(Fcls, GreedyMatchesLinearProgram) {
  for (const auto& inst : suite(100, 9)) {
    const auto lp = solve_lp(fcls_linear_program(inst));
    ASSERT_EQ(lp.status, LpStatus::kOptimal);
    const auto g = fcls_greedy(inst);
    EXPECT_NEAR(g.evaluation.expected_utility, lp.objective_value, 1e-9);
    EXPECT_LE(g.evaluation.cpu_use, *inst.cpu_budget() + 1e-9);
    // at most one query is split
    const auto split = std::count_if(g.plan.sample_query.begin(), g.plan.sample_query.end(),
                                     [](double y) { return y > 0.0 && y < 1.0; });
    EXPECT_LE(split, 1);
  }
}

TEST(Fmls, GridFactorValues) {
  EXPECT_DOUBLE_EQ(grid_factor(8, 2), 8.0 * 7.0 / 64.0);
  EXPECT_DOUBLE_EQ(grid_factor(4, 3), 4.0 * 3.0 * 2.0 / 64.0);
  EXPECT_EQ(grid_factor(2, 3), 0.0);
}

TEST(Fmls, DegenerateBudgetKeepsEverything) {
  const auto r = fmls_grid_search(running_instance(5.0, std::nullopt), 4);
  EXPECT_EQ(r.plan.sample_event, std::vector<double>(5, 1.0));
  EXPECT_EQ(r.evaluation.expected_utility, 12.0);
  EXPECT_EQ(r.evaluation.guarantee->kind, GuaranteeKind::kExact);
}

TEST(Fmls, GridSearchIsExhaustiveAndNested) {
  const auto inst = running_instance(3.0, std::nullopt);
  // brute force over the 4-grid by nested loops
  double best = 0.0;
  const int k = 4;
  for (int a = 0; a <= k; ++a)
    for (int b = 0; a + b <= k; ++b)
      for (int c = 0; a + b + c <= k; ++c)
        for (int d = 0; a + b + c + d <= k; ++d) {
          const int e = k - a - b - c - d;
          std::vector<double> x;
          for (int q : {a, b, c, d, e}) x.push_back(std::min(1.0, 3.0 * q / k));
          best = std::max(best, fractional_objective(inst, x));
        }
  const auto r = fmls_grid_search(inst, k);
  EXPECT_NEAR(r.evaluation.expected_utility, best, 1e-12);
  EXPECT_LE(r.evaluation.memory_use, 3.0 + 1e-12);
  EXPECT_GE(fmls_grid_search(inst, 2 * k).evaluation.expected_utility,
            r.evaluation.expected_utility);
}

TEST(Fmls, Errors) {
  EXPECT_EQ(error_of([] { fmls_grid_search(running_instance(0.0, std::nullopt), 4); }),
            ErrorCode::kNonPositiveBudget);
  EXPECT_EQ(error_of([] { fmls_grid_search(running_instance(3.0, std::nullopt), 0); }),
            ErrorCode::kInvalidArgument);
  GridSearchOptions small;
  small.max_points = 10;
  EXPECT_EQ(error_of([&] { fmls_grid_search(running_instance(3.0, std::nullopt), 8, small); }),
            ErrorCode::kGridTooLarge);
}

TEST(Fmls, NonconcavityWitness) {
  const auto w = nonconcavity_witness(running_instance(3.0, std::nullopt));
  EXPECT_GT(w.curvature, 0.0);
  Alphabet sigma{{"A", 1.0, 1.0}, {"B", 1.0, 1.0}};
  const ProblemInstance linear(sigma, {Query("q", sigma.handles({"A"}), 1.0, 1.0, 1.0, 1.0)},
                               1.0, std::nullopt);
  EXPECT_EQ(error_of([&] { nonconcavity_witness(linear); }), ErrorCode::kAllQueriesLinear);
  for (const auto& inst : suite(60, 10)) {
    const bool multi = std::any_of(inst.queries().begin(), inst.queries().end(),
                                   [](const Query& q) { return q.length() >= 2; });
    if (multi) {
      EXPECT_GT(nonconcavity_witness(inst).curvature, 0.0);
    }
  }
}

TEST(Discretization, RoundsWeightsUpAndCapacitiesDown) {
  DiscretizationOptions o;
  o.resolution = 0.5;
  EXPECT_EQ(detail::weight_units(1.2, o), 3);
  EXPECT_EQ(detail::weight_units(1.0, o), 2);
  EXPECT_EQ(detail::capacity_units(1.2, o), 2);
  EXPECT_EQ(detail::capacity_units(1.5, o), 3);
  o.resolution = 0.0;
  EXPECT_EQ(error_of([&] { detail::check_resolution(o); }), ErrorCode::kInvalidArgument);
}

}  // namespace
}  // namespace cepshed
