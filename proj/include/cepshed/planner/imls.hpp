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

// Integral memory-bound shedding: choose which event types to keep under
// sum_j a_j x_j <= M, producing every query whose types are all kept.

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "cepshed/error.hpp"
#include "cepshed/lp_solver.hpp"
#include "cepshed/planner/discretize.hpp"
#include "cepshed/planner/instance.hpp"

namespace cepshed {

namespace detail {

inline void check_tau(double tau) {
  if (!(tau > 0.0 && tau < 1.0)) {
    fail(ErrorCode::kInvalidArgument, "tau must lie strictly between 0 and 1");
  }
}

/// LP relaxation in loss form.  Variables: x_0..x_{n-1} (keep type), then
/// yhat_0..yhat_{q-1} (query lost).  Every yhat_i + x_j >= 1 for j in Q_i,
/// memory sum a_j x_j <= M, optionally CPU of the kept queries <= C.
inline LinearProgram loss_relaxation(const ProblemInstance& inst, double memory,
                                     std::optional<double> cpu) {
  const std::size_t n = inst.num_types();
  const std::size_t nq = inst.num_queries();
  LinearProgram lp;
  lp.sense = Sense::kMinimize;
  lp.objective.assign(n + nq, 0.0);
  for (std::size_t i = 0; i < nq; ++i) lp.objective[n + i] = inst.value(i);
  lp.bounds.assign(n + nq, VariableBounds{0.0, 1.0});

  std::vector<double> mem(n + nq, 0.0);
  for (std::size_t j = 0; j < n; ++j) mem[j] = inst.memory_rate(j);
  lp.add_constraint(std::move(mem), Relation::kLessEqual, memory);

  for (std::size_t i = 0; i < nq; ++i) {
    for (auto h : inst.query_types(i)) {
      std::vector<double> row(n + nq, 0.0);
      row[h.index()] = 1.0;
      row[n + i] = 1.0;
      lp.add_constraint(std::move(row), Relation::kGreaterEqual, 1.0);
    }
  }
  if (cpu) {
    // sum cpu_i (1 - yhat_i) <= C
    std::vector<double> row(n + nq, 0.0);
    for (std::size_t i = 0; i < nq; ++i) row[n + i] = -inst.cpu(i);
    lp.add_constraint(std::move(row), Relation::kLessEqual, *cpu - inst.total_cpu());
  }
  return lp;
}

struct Rounded {
  std::vector<bool> accepted;
  double lp_loss = 0.0;
};

inline Rounded round_relaxation(const ProblemInstance& inst, const LinearProgram& lp, double tau) {
  const auto sol = solve_lp(lp);
  if (sol.status != LpStatus::kOptimal) {
    fail(ErrorCode::kLpFailure,
         std::string("loss relaxation is ") + to_string(sol.status) + ", expected optimal");
  }
  Rounded r;
  r.lp_loss = sol.objective_value;
  r.accepted.assign(inst.num_queries(), false);
  for (std::size_t i = 0; i < inst.num_queries(); ++i) {
    r.accepted[i] = sol.values[inst.num_types() + i] <= tau + 1e-12;
  }
  return r;
}

}  // namespace detail

/// LP rounding: solve the relaxation, keep the queries with yhat* <= tau and
/// the union of their types.  Loss is at most the optimal loss / tau and
/// memory at most M / (1 - tau).
inline SolverResult imls_bicriteria(const ProblemInstance& inst, double tau) {
  detail::check_tau(tau);
  const double m = inst.require_memory_budget();
  const auto r = detail::round_relaxation(inst, detail::loss_relaxation(inst, m, std::nullopt), tau);

  SolverResult out;
  out.plan.keep_event = union_of_types(inst, r.accepted);
  out.plan.keep_query = covered_queries(inst, out.plan.keep_event);
  out.evaluation = evaluate_integral(inst, out.plan, Coupling::kEquality);
  out.evaluation.guarantee =
      Guarantee{GuaranteeKind::kBicriteria, tau, r.lp_loss / tau, m / (1.0 - tau), {}, ""};
  return out;
}

/// Density greedy over whole queries: value v_i, weight W_i.  Scans queries in
/// descending v_i / W_i and stops at the first one whose types no longer fit.
/// Achieves at least (1 - f) / p of the optimum; requires f < 1.
inline SolverResult imls_knapsack_greedy(const ProblemInstance& inst) {
  const double m = inst.require_memory_budget();
  for (std::size_t i = 0; i < inst.num_queries(); ++i) {
    if (inst.footprint(i) >= m) {
      fail(ErrorCode::kQueryLargerThanBudget,
           "query '" + inst.queries()[i].id() + "' needs memory " +
               std::to_string(inst.footprint(i)) + ", budget is " + std::to_string(m) +
               " (f >= 1); drop oversized queries first");
    }
  }
  std::vector<std::size_t> order(inst.num_queries());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return inst.value(a) * inst.footprint(b) > inst.value(b) * inst.footprint(a);
  });

  std::vector<bool> keep(inst.num_types(), false);
  double used = 0.0;
  for (std::size_t i : order) {
    double extra = 0.0;
    for (auto h : inst.query_types(i)) {
      if (!keep[h.index()]) extra += inst.memory_rate(h.index());
    }
    if (!detail::within(used + extra, m)) break;
    used += extra;
    for (auto h : inst.query_types(i)) keep[h.index()] = true;
  }

  SolverResult out;
  out.plan.keep_event = keep;
  out.plan.keep_query = covered_queries(inst, keep);
  out.evaluation = evaluate_integral(inst, out.plan, Coupling::kEquality);
  const double rho =
      inst.num_queries() == 0 ? 1.0 : static_cast<double>(inst.p()) / (1.0 - inst.f());
  out.evaluation.guarantee = Guarantee{GuaranteeKind::kRatio, rho,
                                       out.evaluation.expected_utility * rho, {}, {}, "p/(1-f)"};
  return out;
}

struct MultitenantOptions {
  DiscretizationOptions grid;
  std::size_t max_component = 16;
  std::size_t max_cells = 50'000'000;
};

/// Exact IMLS by decomposition.  Types that co-occur in a query are joined
/// into components; each component's type subsets are enumerated into a
/// Pareto list of (memory, value), and the lists are combined by a group
/// knapsack over integer memory units.  Exact with respect to the rounded
/// weights.
inline SolverResult imls_multitenant_dp(const ProblemInstance& inst,
                                        const MultitenantOptions& opt = {}) {
  detail::check_resolution(opt.grid);
  const double m = inst.require_memory_budget();
  const std::size_t n = inst.num_types();

  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::vector<bool> used(n, false);
  for (std::size_t i = 0; i < inst.num_queries(); ++i) {
    const auto& ts = inst.query_types(i);
    for (auto h : ts) used[h.index()] = true;
    for (std::size_t k = 1; k < ts.size(); ++k) {
      const auto a = find(ts[0].index());
      const auto b = find(ts[k].index());
      if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
  }

  struct Component {
    std::vector<std::size_t> types;    // ascending
    std::vector<std::size_t> queries;  // ascending
  };
  std::vector<Component> comps;
  std::vector<std::size_t> comp_of(n, SIZE_MAX);
  for (std::size_t j = 0; j < n; ++j) {
    if (!used[j]) continue;
    const auto root = find(j);
    if (comp_of[root] == SIZE_MAX) {
      comp_of[root] = comps.size();
      comps.emplace_back();
    }
    comps[comp_of[root]].types.push_back(j);
  }
  for (std::size_t i = 0; i < inst.num_queries(); ++i) {
    comps[comp_of[find(inst.query_types(i)[0].index())]].queries.push_back(i);
  }

  const std::int64_t cap = detail::capacity_units(m, opt.grid);
  std::vector<std::int64_t> units(n, 0);
  for (std::size_t j = 0; j < n; ++j) units[j] = detail::weight_units(inst.memory_rate(j), opt.grid);
  if (static_cast<double>(cap + 1) * static_cast<double>(std::max<std::size_t>(comps.size(), 1)) >
      static_cast<double>(opt.max_cells)) {
    fail(ErrorCode::kLatticeTooLarge,
         "memory grid of " + std::to_string(cap + 1) + " cells per component is too large; "
         "use a coarser resolution");
  }

  struct Option {
    std::uint64_t subset;  // bit k = component type k
    std::int64_t memory;
    double value;
  };
  std::vector<std::vector<Option>> options(comps.size());
  for (std::size_t c = 0; c < comps.size(); ++c) {
    const auto& comp = comps[c];
    const std::size_t k = comp.types.size();
    if (k > opt.max_component) {
      fail(ErrorCode::kComponentTooLarge,
           "component of " + std::to_string(k) + " event types exceeds the limit of " +
               std::to_string(opt.max_component));
    }
    std::vector<Option> all;
    for (std::uint64_t s = 0; s < (std::uint64_t{1} << k); ++s) {
      std::int64_t mem = 0;
      for (std::size_t b = 0; b < k; ++b) {
        if ((s >> b) & 1U) mem += units[comp.types[b]];
      }
      if (mem > cap) continue;
      double value = 0.0;
      for (std::size_t i : comp.queries) {
        bool all_in = true;
        for (auto h : inst.query_types(i)) {
          const auto pos = std::lower_bound(comp.types.begin(), comp.types.end(), h.index()) -
                           comp.types.begin();
          all_in = all_in && ((s >> pos) & 1U);
        }
        if (all_in) value += inst.value(i);
      }
      all.push_back({s, mem, value});
    }
    std::stable_sort(all.begin(), all.end(),
                     [](const Option& a, const Option& b) { return a.memory < b.memory; });
    double best = -1.0;
    for (const auto& o : all) {
      if (best < 0.0 || detail::improves(o.value, best)) {
        options[c].push_back(o);
        best = o.value;
      }
    }
  }

  std::vector<double> dp(static_cast<std::size_t>(cap) + 1, 0.0), next;
  std::vector<std::vector<std::uint32_t>> choice(comps.size());
  for (std::size_t c = 0; c < comps.size(); ++c) {
    next.assign(dp.size(), -1.0);
    choice[c].assign(dp.size(), 0);
    for (std::size_t o = 0; o < options[c].size(); ++o) {
      const auto& op = options[c][o];
      for (std::int64_t u = op.memory; u <= cap; ++u) {
        const double v = dp[static_cast<std::size_t>(u - op.memory)] + op.value;
        if (next[u] < 0.0 || detail::improves(v, next[u])) {
          next[u] = v;
          choice[c][u] = static_cast<std::uint32_t>(o);
        }
      }
    }
    dp.swap(next);
  }

  std::vector<bool> keep(n, false);
  std::int64_t u = cap;
  for (std::size_t c = comps.size(); c-- > 0;) {
    const auto& op = options[c][choice[c][u]];
    for (std::size_t b = 0; b < comps[c].types.size(); ++b) {
      if ((op.subset >> b) & 1U) keep[comps[c].types[b]] = true;
    }
    u -= op.memory;
  }

  SolverResult out;
  out.plan.keep_event = keep;
  out.plan.keep_query = covered_queries(inst, keep);
  out.evaluation = evaluate_integral(inst, out.plan, Coupling::kEquality);
  out.evaluation.guarantee =
      Guarantee{GuaranteeKind::kExact, 0.0, out.evaluation.expected_utility, {}, {},
                "exact at resolution " + std::to_string(opt.grid.resolution)};
  return out;
}

}  // namespace cepshed
