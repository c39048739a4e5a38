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

// Exhaustive optimizers used as reference answers in tests and in `verify`.
// They work on real-valued weights with no discretization.

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "cepshed/error.hpp"
#include "cepshed/planner/instance.hpp"

namespace cepshed {

enum class Variant { kImls, kFmls, kIcls, kFcls, kIdls, kFdls };

constexpr const char* to_string(Variant v) {
  switch (v) {
    case Variant::kImls: return "imls";
    case Variant::kFmls: return "fmls";
    case Variant::kIcls: return "icls";
    case Variant::kFcls: return "fcls";
    case Variant::kIdls: return "idls";
    case Variant::kFdls: return "fdls";
  }
  return "?";
}

struct BruteForceOptions {
  std::size_t max_types = 20;
  std::size_t max_queries = 24;
};

namespace detail {

/// Exact 0-1 knapsack by depth-first search in index order, exclusion first,
/// with a fractional upper bound.  Because vectors are visited in
/// lexicographic order and only strict improvements are accepted, the result
/// is the lexicographically smallest optimal selection.
inline std::vector<bool> exact_knapsack(const std::vector<double>& values,
                                        const std::vector<double>& weights, double capacity) {
  const std::size_t n = values.size();
  const double cap = capacity + kBudgetTolerance * std::max(1.0, capacity);
  std::vector<bool> cur(n, false), best(n, false);
  double best_value = 0.0;
  bool have_best = false;

  // Fractional bound on items [from, n) given remaining capacity.
  auto upper = [&](std::size_t from, double room) {
    std::vector<std::size_t> idx;
    double free_value = 0.0;
    for (std::size_t k = from; k < n; ++k) {
      if (weights[k] <= 0.0) {
        free_value += values[k];
      } else {
        idx.push_back(k);
      }
    }
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return values[a] * weights[b] > values[b] * weights[a];
    });
    double ub = free_value;
    for (std::size_t k : idx) {
      if (room <= 0.0) break;
      if (weights[k] <= room) {
        ub += values[k];
        room -= weights[k];
      } else {
        ub += values[k] * room / weights[k];
        room = 0.0;
      }
    }
    return ub;
  };

  auto dfs = [&](auto&& self, std::size_t k, double value, double used) -> void {
    if (k == n) {
      if (!have_best || improves(value, best_value)) {
        best_value = value;
        best = cur;
        have_best = true;
      }
      return;
    }
    if (have_best) {
      const double ub = value + upper(k, cap - used);
      if (!improves(ub * (1.0 + 1e-9) + 1e-15, best_value)) return;
    }
    self(self, k + 1, value, used);
    if (used + weights[k] <= cap) {
      cur[k] = true;
      self(self, k + 1, value + values[k], used + weights[k]);
      cur[k] = false;
    }
  };
  dfs(dfs, 0, 0.0, 0.0);
  return best;
}

inline void check_brute_size(const ProblemInstance& inst, const BruteForceOptions& opt) {
  if (inst.num_types() > opt.max_types) {
    fail(ErrorCode::kInstanceTooLarge, std::to_string(inst.num_types()) +
                                           " event types exceed the brute-force limit of " +
                                           std::to_string(opt.max_types));
  }
  if (inst.num_queries() > opt.max_queries) {
    fail(ErrorCode::kInstanceTooLarge, std::to_string(inst.num_queries()) +
                                           " queries exceed the brute-force limit of " +
                                           std::to_string(opt.max_queries));
  }
}

// Bit (n-1-j) holds type j, so ascending masks are ascending keep vectors.
inline std::vector<bool> mask_to_keep(std::uint64_t mask, std::size_t n) {
  std::vector<bool> keep(n, false);
  for (std::size_t j = 0; j < n; ++j) keep[j] = (mask >> (n - 1 - j)) & 1U;
  return keep;
}

}  // namespace detail

/// Exhaustive optimum of the integral variants.  IMLS and IDLS enumerate all
/// type subsets that fit M; IDLS additionally solves the CPU knapsack over the
/// covered queries exactly.  ICLS searches query subsets directly.  Ties go to
/// the lexicographically smallest keep vector.
inline SolverResult brute_force_integral(const ProblemInstance& inst, Variant variant,
                                         const BruteForceOptions& opt = {}) {
  detail::check_brute_size(inst, opt);
  const std::size_t n = inst.num_types();
  const std::size_t nq = inst.num_queries();
  SolverResult out;

  if (variant == Variant::kIcls) {
    const double cap = inst.require_cpu_budget();
    std::vector<double> values, weights;
    for (std::size_t i = 0; i < nq; ++i) {
      values.push_back(inst.value(i));
      weights.push_back(inst.cpu(i));
    }
    out.plan.keep_query = detail::exact_knapsack(values, weights, cap);
    out.plan.keep_event = union_of_types(inst, out.plan.keep_query);
    out.evaluation = evaluate_integral(inst, out.plan, Coupling::kInequality);
    out.evaluation.guarantee = Guarantee{GuaranteeKind::kExact, 0.0,
                                         out.evaluation.expected_utility, {}, {}, "brute force"};
    return out;
  }
  if (variant != Variant::kImls && variant != Variant::kIdls) {
    fail(ErrorCode::kUnsupported,
         std::string("no brute-force oracle for variant ") + to_string(variant));
  }

  const double mem_cap = inst.require_memory_budget();
  const bool dual = variant == Variant::kIdls;
  const double cpu_cap = dual ? inst.require_cpu_budget() : 0.0;
  const double mem_limit = mem_cap + detail::kBudgetTolerance * std::max(1.0, mem_cap);

  double best_value = -1.0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    double mem = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if ((mask >> (n - 1 - j)) & 1U) mem += inst.memory_rate(j);
    }
    if (mem > mem_limit) continue;
    const auto keep = detail::mask_to_keep(mask, n);
    auto covered = covered_queries(inst, keep);
    double value = 0.0;
    if (dual) {
      std::vector<std::size_t> ids;
      std::vector<double> values, weights;
      for (std::size_t i = 0; i < nq; ++i) {
        if (!covered[i]) continue;
        ids.push_back(i);
        values.push_back(inst.value(i));
        weights.push_back(inst.cpu(i));
      }
      const auto pick = detail::exact_knapsack(values, weights, cpu_cap);
      covered.assign(nq, false);
      for (std::size_t k = 0; k < ids.size(); ++k) {
        if (pick[k]) {
          covered[ids[k]] = true;
          value += values[k];
        }
      }
    } else {
      for (std::size_t i = 0; i < nq; ++i) {
        if (covered[i]) value += inst.value(i);
      }
    }
    if (best_value < 0.0 || detail::improves(value, best_value)) {
      best_value = value;
      out.plan.keep_event = keep;
      out.plan.keep_query = covered;
    }
  }
  out.evaluation =
      evaluate_integral(inst, out.plan, dual ? Coupling::kInequality : Coupling::kEquality);
  out.evaluation.guarantee = Guarantee{GuaranteeKind::kExact, 0.0,
                                       out.evaluation.expected_utility, {}, {}, "brute force"};
  return out;
}

}  // namespace cepshed
