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

// CPU-bound shedding.  Each query is a knapsack item with value v_i and
// weight cpu_i against capacity C; the integral variant is 0-1 knapsack and
// the fractional one its LP relaxation.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "cepshed/error.hpp"
#include "cepshed/lp_solver.hpp"
#include "cepshed/planner/discretize.hpp"
#include "cepshed/planner/instance.hpp"

namespace cepshed {

namespace detail {

inline double cpu_capacity(const ProblemInstance& inst) {
  return inst.require_cpu_budget();  // validated >= 0 by the instance
}

inline SolverResult finish_query_plan(const ProblemInstance& inst, std::vector<bool> chosen) {
  SolverResult out;
  out.plan.keep_query = std::move(chosen);
  out.plan.keep_event = union_of_types(inst, out.plan.keep_query);
  out.evaluation = evaluate_integral(inst, out.plan, Coupling::kInequality);
  return out;
}

}  // namespace detail

struct KnapsackOptions {
  DiscretizationOptions grid;
  std::size_t max_cells = 50'000'000;
};

/// 0-1 knapsack over queries by DP on integer CPU units.
inline SolverResult icls_dp(const ProblemInstance& inst, const KnapsackOptions& opt = {}) {
  detail::check_resolution(opt.grid);
  const double c = detail::cpu_capacity(inst);
  const std::size_t nq = inst.num_queries();
  const std::int64_t cap = detail::capacity_units(c, opt.grid);
  if (static_cast<double>(cap + 1) * static_cast<double>(nq + 1) >
      static_cast<double>(opt.max_cells)) {
    fail(ErrorCode::kLatticeTooLarge, "cpu grid of " + std::to_string(cap + 1) +
                                          " cells is too large; use a coarser resolution");
  }
  std::vector<std::int64_t> w(nq);
  for (std::size_t i = 0; i < nq; ++i) w[i] = detail::weight_units(inst.cpu(i), opt.grid);

  // best[i][u]: max value from queries i.. with u units left.  Filling from
  // the back lets reconstruction walk forward and prefer skipping on ties,
  // giving the lexicographically smallest optimal selection.
  const auto width = static_cast<std::size_t>(cap) + 1;
  std::vector<std::vector<double>> best(nq + 1, std::vector<double>(width, 0.0));
  for (std::size_t i = nq; i-- > 0;) {
    for (std::size_t u = 0; u < width; ++u) {
      double v = best[i + 1][u];
      if (w[i] <= static_cast<std::int64_t>(u)) {
        const double take = best[i + 1][u - static_cast<std::size_t>(w[i])] + inst.value(i);
        if (detail::improves(take, v)) v = take;
      }
      best[i][u] = v;
    }
  }
  std::vector<bool> chosen(nq, false);
  std::size_t u = width - 1;
  for (std::size_t i = 0; i < nq; ++i) {
    if (best[i][u] == best[i + 1][u]) continue;
    chosen[i] = true;
    u -= static_cast<std::size_t>(w[i]);
  }
  auto out = detail::finish_query_plan(inst, std::move(chosen));
  out.evaluation.guarantee =
      Guarantee{GuaranteeKind::kExact, 0.0, out.evaluation.expected_utility, {}, {},
                "exact at resolution " + std::to_string(opt.grid.resolution)};
  return out;
}

/// Value-scaling FPTAS: values are floored to multiples of eps * v_max / |Q|
/// and a DP finds the lightest set for every scaled value.  Weights stay
/// real, so the result is feasible without rounding and within (1 - eps) of
/// the optimum.
inline SolverResult icls_fptas(const ProblemInstance& inst, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) {
    fail(ErrorCode::kInvalidArgument, "eps must lie strictly between 0 and 1");
  }
  const double c = detail::cpu_capacity(inst);
  const double cap = c + detail::kBudgetTolerance * std::max(1.0, c);
  const std::size_t nq = inst.num_queries();

  std::vector<std::size_t> items;  // queries that fit on their own
  double vmax = 0.0;
  for (std::size_t i = 0; i < nq; ++i) {
    if (inst.cpu(i) <= cap) {
      items.push_back(i);
      vmax = std::max(vmax, inst.value(i));
    }
  }
  std::vector<bool> chosen(nq, false);
  if (vmax > 0.0) {
    const double scale = eps * vmax / static_cast<double>(items.size());
    std::vector<std::size_t> sv(items.size());
    std::size_t total = 0;
    for (std::size_t k = 0; k < items.size(); ++k) {
      sv[k] = static_cast<std::size_t>(std::floor(inst.value(items[k]) / scale));
      total += sv[k];
    }
    constexpr double kInf = std::numeric_limits<double>::infinity();
    // lightest[k][s]: min weight reaching scaled value exactly s using items k..
    std::vector<std::vector<double>> lightest(items.size() + 1,
                                              std::vector<double>(total + 1, kInf));
    lightest[items.size()][0] = 0.0;
    for (std::size_t k = items.size(); k-- > 0;) {
      const double wk = inst.cpu(items[k]);
      for (std::size_t s = 0; s <= total; ++s) {
        double v = lightest[k + 1][s];
        if (s >= sv[k] && lightest[k + 1][s - sv[k]] + wk < v) v = lightest[k + 1][s - sv[k]] + wk;
        lightest[k][s] = v;
      }
    }
    std::size_t target = 0;
    for (std::size_t s = total + 1; s-- > 0;) {
      if (lightest[0][s] <= cap) {
        target = s;
        break;
      }
    }
    for (std::size_t k = 0; k < items.size(); ++k) {
      if (lightest[k][target] == lightest[k + 1][target]) continue;  // skipping is as good
      chosen[items[k]] = true;
      target -= sv[k];
    }
  } else {
    // every fitting item is worthless; nothing to gain
  }
  auto out = detail::finish_query_plan(inst, std::move(chosen));
  out.evaluation.guarantee = Guarantee{GuaranteeKind::kFptas, eps,
                                       out.evaluation.expected_utility / (1.0 - eps), {}, {}, ""};
  return out;
}

/// Fractional knapsack: fill queries in descending w_i / c_i, splitting the
/// first one that does not fit.  This is optimal for the LP relaxation.
inline FractionalResult fcls_greedy(const ProblemInstance& inst) {
  const double c = detail::cpu_capacity(inst);
  const std::size_t nq = inst.num_queries();
  std::vector<std::size_t> order(nq);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& qa = inst.queries()[a];
    const auto& qb = inst.queries()[b];
    return qa.utility_weight() * qb.cpu_cost_per_match() >
           qb.utility_weight() * qa.cpu_cost_per_match();
  });
  FractionalResult out;
  out.plan.sample_query.assign(nq, 0.0);
  double room = c;
  for (std::size_t i : order) {
    const double need = inst.cpu(i);
    if (need <= room) {
      out.plan.sample_query[i] = 1.0;
      room -= need;
    } else {
      out.plan.sample_query[i] = room > 0.0 ? room / need : 0.0;
      room = 0.0;
    }
  }
  out.plan.sample_event.assign(inst.num_types(), 0.0);
  for (std::size_t i = 0; i < nq; ++i) {
    if (out.plan.sample_query[i] <= 0.0) continue;
    for (auto h : inst.query_types(i)) out.plan.sample_event[h.index()] = 1.0;
  }
  out.evaluation = evaluate_fractional(inst, out.plan, Coupling::kInequality);
  out.evaluation.guarantee =
      Guarantee{GuaranteeKind::kExact, 0.0, out.evaluation.expected_utility, {}, {}, ""};
  return out;
}

/// The fractional CPU problem as a linear program: max sum v_i ȳ_i subject
/// to sum cpu_i ȳ_i <= C, ȳ in [0, 1].
inline LinearProgram fcls_linear_program(const ProblemInstance& inst) {
  const std::size_t nq = inst.num_queries();
  LinearProgram lp;
  lp.sense = Sense::kMaximize;
  std::vector<double> row(nq);
  for (std::size_t i = 0; i < nq; ++i) {
    lp.objective.push_back(inst.value(i));
    row[i] = inst.cpu(i);
  }
  lp.bounds.assign(nq, VariableBounds{0.0, 1.0});
  lp.add_constraint(std::move(row), Relation::kLessEqual, inst.require_cpu_budget());
  return lp;
}

}  // namespace cepshed
