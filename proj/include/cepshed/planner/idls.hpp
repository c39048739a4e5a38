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

// Integral shedding under both a memory budget M and a CPU budget C.  A
// query may be switched off even when all its types are kept, so keep_query
// is only bounded by the product of its types' keep bits.

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "cepshed/error.hpp"
#include "cepshed/planner/discretize.hpp"
#include "cepshed/planner/icls.hpp"
#include "cepshed/planner/imls.hpp"
#include "cepshed/planner/instance.hpp"

namespace cepshed {

/// LP rounding with an added CPU row.  Accepts queries with yhat* <= tau.
/// Loss <= optimal loss / tau, memory <= M / (1 - tau), CPU <= C / (1 - tau).
inline SolverResult idls_tricriteria(const ProblemInstance& inst, double tau) {
  detail::check_tau(tau);
  const double m = inst.require_memory_budget();
  const double c = inst.require_cpu_budget();
  const auto r = detail::round_relaxation(inst, detail::loss_relaxation(inst, m, c), tau);

  SolverResult out;
  out.plan.keep_query = r.accepted;
  out.plan.keep_event = union_of_types(inst, r.accepted);
  out.evaluation = evaluate_integral(inst, out.plan, Coupling::kInequality);
  out.evaluation.guarantee = Guarantee{GuaranteeKind::kTricriteria, tau, r.lp_loss / tau,
                                       m / (1.0 - tau), c / (1.0 - tau), ""};
  return out;
}

/// Two-dimensional 0-1 knapsack over queries with weights (W_i, cpu_i) and
/// capacities (M, C), solved exactly on the integer lattice.  Charging every
/// query its full footprint W_i ignores sharing, which costs at most a
/// factor (1 - f) / p against the optimum.
inline SolverResult idls_2d_knapsack(const ProblemInstance& inst,
                                     const KnapsackOptions& opt = {}) {
  detail::check_resolution(opt.grid);
  const double m = inst.require_memory_budget();
  const double c = inst.require_cpu_budget();
  const std::size_t nq = inst.num_queries();
  for (std::size_t i = 0; i < nq; ++i) {
    if (inst.footprint(i) >= m) {
      fail(ErrorCode::kQueryLargerThanBudget,
           "query '" + inst.queries()[i].id() + "' needs memory " +
               std::to_string(inst.footprint(i)) + ", budget is " + std::to_string(m) +
               " (f >= 1)");
    }
  }
  const std::int64_t mcap = detail::capacity_units(m, opt.grid);
  const std::int64_t ccap = detail::capacity_units(c, opt.grid);
  const double cells = static_cast<double>(mcap + 1) * static_cast<double>(ccap + 1);
  if (cells * static_cast<double>(nq + 1) > static_cast<double>(opt.max_cells)) {
    fail(ErrorCode::kLatticeTooLarge,
         "memory x cpu lattice of " + std::to_string(cells) +
             " cells is too large; use a coarser resolution");
  }
  std::vector<std::int64_t> wm(nq), wc(nq);
  for (std::size_t i = 0; i < nq; ++i) {
    wm[i] = detail::weight_units(inst.footprint(i), opt.grid);
    wc[i] = detail::weight_units(inst.cpu(i), opt.grid);
  }
  const auto W = static_cast<std::size_t>(mcap) + 1;
  const auto H = static_cast<std::size_t>(ccap) + 1;
  auto at = [H](std::size_t a, std::size_t b) { return a * H + b; };

  // Filled back to front; take[i] records where query i strictly improves on
  // skipping it, so forward reconstruction prefers skipping on ties.
  std::vector<double> best(W * H, 0.0), next(W * H, 0.0);
  std::vector<std::vector<bool>> take(nq, std::vector<bool>(W * H, false));
  for (std::size_t i = nq; i-- > 0;) {
    const auto di = static_cast<std::size_t>(wm[i]);
    const auto ci = static_cast<std::size_t>(wc[i]);
    for (std::size_t a = 0; a < W; ++a) {
      for (std::size_t b = 0; b < H; ++b) {
        double v = best[at(a, b)];
        if (di <= a && ci <= b) {
          const double with = best[at(a - di, b - ci)] + inst.value(i);
          if (detail::improves(with, v)) {
            v = with;
            take[i][at(a, b)] = true;
          }
        }
        next[at(a, b)] = v;
      }
    }
    best.swap(next);
  }
  std::vector<bool> chosen(nq, false);
  std::size_t a = W - 1, b = H - 1;
  for (std::size_t i = 0; i < nq; ++i) {
    if (!take[i][at(a, b)]) continue;
    chosen[i] = true;
    a -= static_cast<std::size_t>(wm[i]);
    b -= static_cast<std::size_t>(wc[i]);
  }

  SolverResult out;
  out.plan.keep_query = chosen;
  out.plan.keep_event = union_of_types(inst, chosen);
  out.evaluation = evaluate_integral(inst, out.plan, Coupling::kInequality);
  const double rho = nq == 0 ? 1.0 : static_cast<double>(inst.p()) / (1.0 - inst.f());
  out.evaluation.guarantee = Guarantee{GuaranteeKind::kRatio, rho,
                                       out.evaluation.expected_utility * rho, {}, {}, "p/(1-f)"};
  return out;
}

}  // namespace cepshed
