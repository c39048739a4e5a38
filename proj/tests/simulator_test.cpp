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

#include <cmath>
#include <vector>

#include "cepshed/estimation.hpp"
#include "cepshed/simulator.hpp"
#include "test_support.hpp"

namespace cepshed {
namespace {

using testing::bits;
using testing::error_of;

// Distinct-type workload whose analytic match rates are easy to reach in a
// short simulation.
ProblemInstance busy_instance(std::optional<double> memory = 100.0) {
  Alphabet sigma{{"A", 1.0, 2.0}, {"B", 2.0, 1.0}, {"C", 1.0, 1.5}};
  std::vector<Query> raw{Query("ab", sigma.handles({"A", "B"}), 2.0, 1.0, 0.5),
                         Query("bca", sigma.handles({"B", "C", "A"}), 3.0, 2.0, 1.0)};
  const auto rates = declared_rates(sigma);
  std::vector<Query> qs;
  for (const auto& q : raw) qs.push_back(q.with_expected_matches(expected_matches_analytic(q, rates)));
  return ProblemInstance(sigma, qs, memory, std::nullopt);
}

IntegralPlan keep_all(const ProblemInstance& inst) {
  return IntegralPlan{std::vector<bool>(inst.num_types(), true),
                      std::vector<bool>(inst.num_queries(), true)};
}

TEST(Streams, PoissonCountsAndOrdering) {
  Alphabet sigma{{"A", 1.0, 3.0}, {"B", 1.0, 0.5}};
  const auto s = generate_stream(declared_rates(sigma), 2000.0, 7);
  std::size_t a = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i].type.index() == 0) ++a;
    if (i > 0) {
      EXPECT_LT(s[i - 1].timestamp, s[i].timestamp);
    }
    EXPECT_LT(s[i].timestamp, 2000.0);
  }
  // 6000 expected, sd ~77
  EXPECT_NEAR(static_cast<double>(a), 6000.0, 400.0);
  EXPECT_NEAR(static_cast<double>(s.size() - a), 1000.0, 200.0);
  EXPECT_EQ(generate_stream(declared_rates(sigma), 50.0, 3),
            generate_stream(declared_rates(sigma), 50.0, 3));
  EXPECT_EQ(error_of([&] { generate_stream(declared_rates(sigma), 0.0, 3); }),
            ErrorCode::kInvalidArgument);
}

TEST(Streams, ApplyPlan) {
  const testing::RunningExample ex;
  const auto kept = apply_plan(ex.seq, IntegralPlan{bits({1, 0, 1, 0, 1}), bits({1, 1, 0})});
  EXPECT_EQ(kept.size(), 6u);
  const auto r = utility(ex.sigma, kept, ex.queries, MatchSemantics::kAnyMatch);
  EXPECT_EQ(r.total_utility, 6.0);
  EXPECT_EQ(r.per_query_counts.at("Q3"), 0u);

  Alphabet sigma{{"A", 1.0, 4.0}};
  const auto s = generate_stream(declared_rates(sigma), 1000.0, 1);
  const auto half = apply_plan(s, FractionalPlan{{0.25}, {}}, 2);
  EXPECT_NEAR(static_cast<double>(half.size()) / static_cast<double>(s.size()), 0.25, 0.03);
}

TEST(Simulate, FullKeepMatchesExpectedUtility) {
  const auto inst = busy_instance();
  SimulationConfig cfg;
  cfg.duration = 600.0;
  cfg.trials = 40;
  cfg.seed = 5;
  const auto r = simulate(inst, keep_all(inst), cfg);
  EXPECT_LE(std::abs(r.mean_utility - inst.total_value()), 3.0 * r.utility_stderr);
  EXPECT_GT(r.utility_stderr, 0.0);
  EXPECT_EQ(r.planned_memory, inst.total_memory_rate());
  // each type stays for the longest window it serves: A, B for 3, C for 3
  EXPECT_NEAR(r.mean_average_occupancy, 3.0 * inst.total_memory_rate(), 0.5);
  EXPECT_GE(r.max_peak_occupancy, r.mean_peak_occupancy);
}

TEST(Simulate, DroppedQueriesProduceNothing) {
  const auto inst = testing::running_instance(3.0, std::nullopt);
  SimulationConfig cfg;
  cfg.duration = 100.0;
  cfg.trials = 5;
  const auto r = simulate(inst, IntegralPlan{bits({1, 0, 1, 0, 1}), bits({1, 1, 0})}, cfg);
  EXPECT_EQ(r.per_query[2].mean_matches, 0.0);
  EXPECT_GT(r.per_query[0].mean_matches, 0.0);
  EXPECT_EQ(r.planned_memory, 3.0);
}

TEST(Simulate, FractionalPlanHitsItsExpectedValue) {
  const auto inst = busy_instance();
  FractionalPlan fp{{0.8, 0.5, 1.0}, {0.3, 0.2}};
  const auto ev = evaluate_fractional(inst, fp, Coupling::kInequality);
  SimulationConfig cfg;
  cfg.duration = 600.0;
  cfg.trials = 40;
  cfg.seed = 9;
  const auto r = simulate(inst, fp, cfg);
  EXPECT_LE(std::abs(r.mean_utility - ev.expected_utility), 3.0 * r.utility_stderr);
}

TEST(Simulate, ReportsAreReproducibleAcrossRunsAndThreads) {
  const auto inst = busy_instance();
  SimulationConfig cfg;
  cfg.duration = 200.0;
  cfg.trials = 9;
  cfg.seed = 1234;
  const auto a = simulate(inst, keep_all(inst), cfg);
  const auto b = simulate(inst, keep_all(inst), cfg);
  cfg.threads = 4;
  const auto c = simulate(inst, keep_all(inst), cfg);
  EXPECT_TRUE(a == b);
  EXPECT_TRUE(a == c);
  cfg.seed = 1235;
  EXPECT_FALSE(a == simulate(inst, keep_all(inst), cfg));
}

TEST(Simulate, RejectsBadConfigurations) {
  const auto inst = busy_instance();
  SimulationConfig cfg;
  cfg.trials = 0;
  EXPECT_EQ(error_of([&] { simulate(inst, keep_all(inst), cfg); }), ErrorCode::kInvalidArgument);
  cfg.trials = 1;
  cfg.duration = 1.0;  // shorter than every window
  EXPECT_EQ(error_of([&] { simulate(inst, keep_all(inst), cfg); }), ErrorCode::kInvalidArgument);
  cfg.duration = 10.0;
  EXPECT_EQ(error_of([&] { simulate(inst, IntegralPlan{bits({1}), bits({1})}, cfg); }),
            ErrorCode::kDimensionMismatch);
}

TEST(Adversarial, OfflineWinsByFactorM) {
  const auto r = adversarial_demo(10, 20000, 3);
  EXPECT_EQ(r.offline_mean, 1.0);
  const double sigma = std::sqrt(0.1 * 0.9 / 20000.0);
  EXPECT_LE(std::abs(r.online_mean - 0.1), 3.0 * sigma);
  EXPECT_EQ(error_of([] { adversarial_demo(1, 10, 0); }), ErrorCode::kInvalidArgument);
}

}  // namespace
}  // namespace cepshed
