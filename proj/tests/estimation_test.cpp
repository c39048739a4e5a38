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

TEST(Estimation, RatesFromSample) {
  const testing::RunningExample ex;
  const auto r = estimate_rates(ex.sigma, ex.seq, 10.0);
  for (double v : r.per_type_rate) EXPECT_DOUBLE_EQ(v, 0.2);
  EXPECT_EQ(testing::error_of([&] { estimate_rates(ex.sigma, ex.seq, 0.0); }),
            ErrorCode::kNonPositiveSpan);
  EXPECT_EQ(testing::error_of([&] { estimate_rates(ex.sigma, ex.seq, 5.0); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(declared_rates(ex.sigma).per_type_rate[0], 0.2);
}

TEST(Estimation, EmpiricalRateOnRunningExample) {
  const testing::RunningExample ex;
  EXPECT_DOUBLE_EQ(expected_matches_empirical(ex.sigma, ex.seq, 10.0, ex.queries[2],
                                              MatchSemantics::kAnyMatch),
                   0.2);
}

// Distinct-type patterns: the expected number of ordered picks inside a
// window of length T is prod(lambda_j T) / |Q|!, as the volume of the ordered
// simplex.
double ordered_pick_rate(const std::vector<double>& lambdas, double window) {
  double v = 1.0;
  double fact = 1.0;
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    v *= lambdas[k] * window;
    fact *= static_cast<double>(k + 1);
  }
  return v / fact / window;
}

TEST(Estimation, AnalyticMatchesOrderedVolume) {
  Alphabet sigma{{"A", 1.0, 1.0}, {"B", 1.0, 0.5}, {"C", 1.0, 3.0}};
  const auto rates = declared_rates(sigma);
  const Query ab("ab", sigma.handles({"A", "B"}), 2.0, 1.0, 1.0);
  EXPECT_DOUBLE_EQ(expected_matches_analytic(ab, rates), ordered_pick_rate({1.0, 0.5}, 2.0));
  const Query abc("abc", sigma.handles({"A", "B", "C"}), 1.5, 1.0, 1.0);
  EXPECT_DOUBLE_EQ(expected_matches_analytic(abc, rates),
                   ordered_pick_rate({1.0, 0.5, 3.0}, 1.5));

  Alphabet unit{{"A", 1.0, 1.0}, {"B", 1.0, 1.0}};
  const Query q("q", unit.handles({"A", "B"}), 2.0, 1.0, 1.0);
  EXPECT_EQ(expected_matches_analytic(q, declared_rates(unit)), 1.0);
}

TEST(Estimation, RepeatedTypesUseFallingFactorial) {
  Alphabet sigma{{"A", 1.0, 3.0}};
  const auto rates = declared_rates(sigma);
  const Query aa("aa", sigma.handles({"A", "A"}), 1.0, 1.0, 1.0);
  EXPECT_DOUBLE_EQ(expected_matches_analytic(aa, rates), 3.0 * 2.0 / 2.0);
  const Query sparse("aa", sigma.handles({"A", "A"}), 0.25, 1.0, 1.0);
  // l = 0.75 < 1: the second factor is negative, so the estimate clamps to 0
  EXPECT_EQ(expected_matches_analytic(sparse, rates), 0.0);
}

TEST(Estimation, AnalyticRejectsOtherSemantics) {
  Alphabet sigma{{"A", 1.0, 1.0}};
  const Query q("q", sigma.handles({"A"}), 1.0, 1.0, 1.0);
  EXPECT_EQ(testing::error_of([&] {
              expected_matches_analytic(q, declared_rates(sigma), MatchSemantics::kNextMatch);
            }),
            ErrorCode::kUnsupportedSemantics);
}

TEST(Estimation, AnalyticAgreesWithMonteCarlo) {
  Alphabet sigma{{"A", 1.0, 1.5}, {"B", 1.0, 0.7}, {"C", 1.0, 2.0}};
  const auto rates = declared_rates(sigma);
  const Query q("q", sigma.handles({"A", "C", "B"}), 1.8, 1.0, 1.0);
  const double want = expected_matches_analytic(q, rates);
  auto rng = make_engine(42, 0, 0);
  constexpr int kWindows = 20000;
  double sum = 0.0, sum2 = 0.0;
  for (int w = 0; w < kWindows; ++w) {
    const auto s = generate_stream(rates, q.window(), rng);
    const double c =
        static_cast<double>(count_matches(sigma, s, q, MatchSemantics::kAnyMatch));
    sum += c;
    sum2 += c * c;
  }
  const double mean = sum / kWindows;
  const double se = std::sqrt((sum2 / kWindows - mean * mean) / kWindows);
  EXPECT_LE(std::abs(mean / q.window() - want), 3.0 * se / q.window());
}

}  // namespace
}  // namespace cepshed
