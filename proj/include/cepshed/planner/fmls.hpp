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

// Fractional memory-bound shedding: sample type j at rate x̄_j with
// sum_j a_j x̄_j <= M.  Query i then survives with probability prod x̄_j and
// the objective sum_i v_i prod_j x̄_j is a polynomial with nonnegative
// coefficients, maximized here by grid search over the simplex.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "cepshed/error.hpp"
#include "cepshed/planner/instance.hpp"

namespace cepshed {

/// Substitution x̄'_j = a_j x̄_j / M turns the budget into sum x̄'_j <= 1 with
/// box bounds x̄'_j <= a_j / M.
struct NormalizedInstance {
  std::vector<double> upper;  // a_j / M
  double total = 0.0;         // sum_j a_j / M
  bool degenerate = false;    // keeping everything already fits
};

inline NormalizedInstance fmls_normalize(const ProblemInstance& inst) {
  const double m = inst.require_memory_budget();
  NormalizedInstance out;
  for (std::size_t j = 0; j < inst.num_types(); ++j) {
    const double b = m > 0.0 ? inst.memory_rate(j) / m : std::numeric_limits<double>::infinity();
    out.upper.push_back(b);
    out.total += b;
  }
  out.degenerate = inst.total_memory_rate() <= m;
  return out;
}

/// The objective sum_i v_i prod_{positions} x̄_j.
inline double fractional_objective(const ProblemInstance& inst, const std::vector<double>& x) {
  double total = 0.0;
  for (std::size_t i = 0; i < inst.num_queries(); ++i) {
    double prod = inst.value(i);
    for (auto h : inst.queries()[i].pattern()) prod *= x[h.index()];
    total += prod;
  }
  return total;
}

inline double binomial(std::size_t n, std::size_t k) {
  k = std::min(k, n - k);
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) {
    r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  }
  return r;
}

/// k! / ((k - d)! k^d), zero for k < d.
inline double grid_factor(std::size_t k, std::size_t d) {
  if (k < d) return 0.0;
  double r = 1.0;
  for (std::size_t t = 0; t < d; ++t) r *= static_cast<double>(k - t) / static_cast<double>(k);
  return r;
}

struct GridSearchOptions {
  std::size_t max_points = 20'000'000;
};

/// Evaluates every point q of the k-grid on the standard simplex, mapped to
/// the feasible plan x̄_j = min(1, q_j M / a_j).  Returns the best point; ties
/// keep the earliest point in lexicographic order of q.
inline FractionalResult fmls_grid_search(const ProblemInstance& inst, std::size_t k,
                                         const GridSearchOptions& opt = {}) {
  if (k == 0) fail(ErrorCode::kInvalidArgument, "grid resolution k must be positive");
  const double m = inst.require_memory_budget();
  if (!(m > 0.0)) fail(ErrorCode::kNonPositiveBudget, "fractional planning needs M > 0");
  const std::size_t n = inst.num_types();
  const auto norm = fmls_normalize(inst);

  FractionalResult out;
  out.plan.sample_query.assign(inst.num_queries(), 0.0);
  if (norm.degenerate || n == 0) {
    out.plan.sample_event.assign(n, 1.0);
  } else {
    const double points = binomial(n + k - 1, n - 1);
    if (points > static_cast<double>(opt.max_points)) {
      fail(ErrorCode::kGridTooLarge, "k-grid has " + std::to_string(points) +
                                         " points, limit is " + std::to_string(opt.max_points));
    }
    std::vector<std::size_t> q(n, 0);
    q[n - 1] = k;  // lexicographically smallest composition
    std::vector<double> x(n), best_x;
    double best = -1.0;
    while (true) {
      for (std::size_t j = 0; j < n; ++j) {
        const double share = static_cast<double>(q[j]) / static_cast<double>(k);
        x[j] = std::min(1.0, share * m / inst.memory_rate(j));
      }
      const double value = fractional_objective(inst, x);
      if (best < 0.0 || detail::improves(value, best)) {
        best = value;
        best_x = x;
      }
      // Next composition: bump the rightmost slot that has mass after it and
      // move the remaining tail mass to the last slot.
      std::size_t j = n - 1;
      std::size_t tail = q[n - 1];
      while (j > 0 && tail == 0) {
        --j;
        tail += q[j];
      }
      if (tail == 0 || j == 0) break;
      --j;
      ++q[j];
      for (std::size_t r = j + 1; r < n; ++r) q[r] = 0;
      q[n - 1] = tail - 1;
    }
    out.plan.sample_event = best_x;
  }
  for (std::size_t i = 0; i < inst.num_queries(); ++i) {
    out.plan.sample_query[i] = survival_probability(inst, out.plan, i);
  }
  out.evaluation = evaluate_fractional(inst, out.plan, Coupling::kEquality);

  Guarantee g{GuaranteeKind::kGridRelative, static_cast<double>(k), 0.0, {}, {}, "heuristic"};
  if (norm.degenerate) {
    g = Guarantee{GuaranteeKind::kExact, 0.0, out.evaluation.expected_utility, {}, {},
                  "budget covers all types"};
  } else {
    bool regular = true;
    for (const auto& q : inst.queries()) {
      regular = regular && !q.has_repeated_types() && q.length() == inst.d();
    }
    bool all_large = true;
    double min_ratio = 1.0;
    for (double b : norm.upper) {
      all_large = all_large && b >= 1.0;
      min_ratio = std::min(min_ratio, b);
    }
    const double factor = grid_factor(k, inst.d());
    if (regular && inst.num_queries() > 0) {
      g.bound = std::pow(min_ratio, static_cast<double>(inst.d())) * factor;
      g.note = "absolute: beta * k!/((k-d)! k^d)";
    } else if (all_large) {
      g.bound = factor;
      g.note = "relative: simplex case";
    }
  }
  out.evaluation.guarantee = g;
  return out;
}

struct NonconcavityWitness {
  std::size_t query = 0;           // query whose term certifies the curvature
  std::vector<double> direction;   // e_a + e_b
  std::vector<double> point;       // simplex center
  double curvature = 0.0;          // central second difference / h^2
  double step = 1e-3;
};

/// Second central difference of the fractional objective along e_a + e_b at
/// the simplex center, where a, b are the first two pattern types of a query
/// with at least two events.  A positive value shows the objective is not
/// concave.
inline NonconcavityWitness nonconcavity_witness(const ProblemInstance& inst, double h = 1e-3) {
  const std::size_t n = inst.num_types();
  std::size_t chosen = inst.num_queries();
  for (std::size_t i = 0; i < inst.num_queries(); ++i) {
    if (inst.queries()[i].length() < 2) continue;
    if (chosen == inst.num_queries()) chosen = i;
    if (inst.value(i) > 0.0) {
      chosen = i;
      break;
    }
  }
  if (chosen == inst.num_queries()) {
    fail(ErrorCode::kAllQueriesLinear, "every query has a single event; the objective is linear");
  }
  const auto pattern = inst.queries()[chosen].pattern();
  NonconcavityWitness w;
  w.query = chosen;
  w.step = h;
  w.direction.assign(n, 0.0);
  w.direction[pattern[0].index()] += 1.0;
  w.direction[pattern[1].index()] += 1.0;
  if (pattern[0] == pattern[1]) w.direction[pattern[0].index()] = 1.0;
  w.point.assign(n, 1.0 / static_cast<double>(n));

  auto at = [&](double t) {
    std::vector<double> x = w.point;
    for (std::size_t j = 0; j < n; ++j) x[j] += t * w.direction[j];
    return fractional_objective(inst, x);
  };
  w.curvature = (at(h) - 2.0 * at(0.0) + at(-h)) / (h * h);
  return w;
}

}  // namespace cepshed
