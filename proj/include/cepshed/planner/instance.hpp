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

// Shedding problem instances, plans and their evaluation.
//
// Notation used throughout the planner headers:
//   a_j   = lambda_j * m_j        memory rate of event type j
//   v_i   = n_i * w_i             utility rate of query i
//   cpu_i = n_i * c_i             CPU rate of query i
//   W_i   = sum of a_j over the distinct types of query i
//   p     = max number of queries sharing one type
//   f     = max_i W_i / M
//   d     = max query length

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cepshed/error.hpp"
#include "cepshed/event_model.hpp"

namespace cepshed {

enum class Coupling { kEquality, kInequality };

class ProblemInstance {
 public:
  ProblemInstance(Alphabet alphabet, std::vector<Query> queries,
                  std::optional<double> memory_budget, std::optional<double> cpu_budget)
      : alphabet_(std::move(alphabet)),
        queries_(std::move(queries)),
        memory_budget_(memory_budget),
        cpu_budget_(cpu_budget) {
    auto check_budget = [](const std::optional<double>& b, const char* what) {
      if (b && (!(*b >= 0.0) || !std::isfinite(*b))) {
        fail(ErrorCode::kNonPositiveBudget, std::string(what) + " budget must be >= 0 and finite");
      }
    };
    check_budget(memory_budget_, "memory");
    check_budget(cpu_budget_, "cpu");

    for (const auto& t : alphabet_.types()) memory_rate_.push_back(t.arrival_rate * t.memory_cost);
    std::vector<std::size_t> sharing(alphabet_.size(), 0);
    for (std::size_t i = 0; i < queries_.size(); ++i) {
      const auto& q = queries_[i];
      check_query_types(alphabet_, q);
      if (!q.expected_matches()) {
        fail(ErrorCode::kMissingMatchRate, "query '" + q.id() + "' has no expected match rate");
      }
      for (std::size_t k = 0; k < i; ++k) {
        if (queries_[k].id() == q.id()) {
          fail(ErrorCode::kDuplicateName, "duplicate query '" + q.id() + "'");
        }
      }
      const double n = *q.expected_matches();
      value_.push_back(n * q.utility_weight());
      cpu_.push_back(n * q.cpu_cost_per_match());
      auto types = q.distinct_types();
      double w = 0.0;
      for (auto h : types) {
        w += memory_rate_[h.index()];
        ++sharing[h.index()];
      }
      footprint_.push_back(w);
      types_.push_back(std::move(types));
      d_ = std::max(d_, q.length());
    }
    p_ = queries_.empty() ? 0 : *std::max_element(sharing.begin(), sharing.end());
    if (memory_budget_ && *memory_budget_ > 0.0) {
      double worst = 0.0;
      for (double w : footprint_) worst = std::max(worst, w);
      f_ = worst / *memory_budget_;
    } else if (memory_budget_ && !footprint_.empty()) {
      f_ = std::numeric_limits<double>::infinity();
    }
  }

  const Alphabet& alphabet() const { return alphabet_; }
  const std::vector<Query>& queries() const { return queries_; }
  std::size_t num_types() const { return alphabet_.size(); }
  std::size_t num_queries() const { return queries_.size(); }

  const std::optional<double>& memory_budget() const { return memory_budget_; }
  const std::optional<double>& cpu_budget() const { return cpu_budget_; }

  double require_memory_budget() const {
    if (!memory_budget_) fail(ErrorCode::kMissingBudget, "a memory budget is required");
    return *memory_budget_;
  }
  double require_cpu_budget() const {
    if (!cpu_budget_) fail(ErrorCode::kMissingBudget, "a cpu budget is required");
    return *cpu_budget_;
  }

  double memory_rate(std::size_t j) const { return memory_rate_[j]; }  // a_j
  double value(std::size_t i) const { return value_[i]; }              // v_i
  double cpu(std::size_t i) const { return cpu_[i]; }                  // cpu_i
  double footprint(std::size_t i) const { return footprint_[i]; }      // W_i
  const std::vector<TypeHandle>& query_types(std::size_t i) const { return types_[i]; }

  double total_value() const {
    double s = 0.0;
    for (double v : value_) s += v;
    return s;
  }
  double total_memory_rate() const {
    double s = 0.0;
    for (double a : memory_rate_) s += a;
    return s;
  }
  double total_cpu() const {
    double s = 0.0;
    for (double c : cpu_) s += c;
    return s;
  }

  std::size_t p() const { return p_; }
  std::size_t d() const { return d_; }
  /// Largest query footprint relative to M; +inf when M = 0, 0 without queries
  /// or without a memory budget.
  double f() const { return f_; }

  ProblemInstance with_budgets(std::optional<double> memory, std::optional<double> cpu) const {
    return ProblemInstance(alphabet_, queries_, memory, cpu);
  }

  /// Same instance with every utility rate multiplied by alpha.
  ProblemInstance scaled_utilities(double alpha) const {
    std::vector<Query> qs;
    for (const auto& q : queries_) qs.push_back(q.with_utility_weight(q.utility_weight() * alpha));
    return ProblemInstance(alphabet_, std::move(qs), memory_budget_, cpu_budget_);
  }

 private:
  Alphabet alphabet_;
  std::vector<Query> queries_;
  std::optional<double> memory_budget_;
  std::optional<double> cpu_budget_;
  std::vector<double> memory_rate_;
  std::vector<double> value_;
  std::vector<double> cpu_;
  std::vector<double> footprint_;
  std::vector<std::vector<TypeHandle>> types_;
  std::size_t p_ = 0;
  std::size_t d_ = 0;
  double f_ = 0.0;
};

struct IntegralPlan {
  std::vector<bool> keep_event;  // x_j, indexed by type handle
  std::vector<bool> keep_query;  // y_i, indexed by query position

  friend bool operator==(const IntegralPlan&, const IntegralPlan&) = default;
};

struct FractionalPlan {
  std::vector<double> sample_event;  // x̄_j in [0, 1]
  std::vector<double> sample_query;  // ȳ_i in [0, 1]

  friend bool operator==(const FractionalPlan&, const FractionalPlan&) = default;
};

enum class GuaranteeKind { kExact, kBicriteria, kTricriteria, kRatio, kFptas, kGridRelative };

constexpr const char* to_string(GuaranteeKind k) {
  switch (k) {
    case GuaranteeKind::kExact: return "exact";
    case GuaranteeKind::kBicriteria: return "bicriteria";
    case GuaranteeKind::kTricriteria: return "tricriteria";
    case GuaranteeKind::kRatio: return "ratio";
    case GuaranteeKind::kFptas: return "fptas";
    case GuaranteeKind::kGridRelative: return "grid_relative";
  }
  return "?";
}

/// What a solver promises about its own output.
///
///   kExact         bound = the optimum (the achieved utility)
///   kBicriteria,
///   kTricriteria   parameter = tau; bound = certified upper bound on the
///                  utility loss (LP loss / tau); memory_limit / cpu_limit are
///                  the relaxed budgets M/(1-tau), C/(1-tau)
///   kRatio         parameter = rho; bound = achieved * rho >= OPT
///   kFptas         parameter = eps; bound = achieved / (1 - eps) >= OPT
///   kGridRelative  parameter = k; bound = factor with achieved >= factor * OPT
///                  (0 when no factor is known); note says which case applies
struct Guarantee {
  GuaranteeKind kind = GuaranteeKind::kExact;
  double parameter = 0.0;
  double bound = 0.0;
  std::optional<double> memory_limit;
  std::optional<double> cpu_limit;
  std::string note;

  friend bool operator==(const Guarantee&, const Guarantee&) = default;
};

struct PlanEvaluation {
  double expected_utility = 0.0;  // per unit time
  double memory_use = 0.0;
  double cpu_use = 0.0;
  bool feasible_memory = true;
  bool feasible_cpu = true;
  std::optional<Guarantee> guarantee;

  double loss(const ProblemInstance& inst) const {
    return std::max(0.0, inst.total_value() - expected_utility);
  }

  friend bool operator==(const PlanEvaluation&, const PlanEvaluation&) = default;
};

namespace detail {

constexpr double kBudgetTolerance = 1e-9;

inline bool within(double use, const std::optional<double>& budget) {
  if (!budget) return true;
  return use <= *budget + kBudgetTolerance * std::max(1.0, *budget);
}

inline void check_dimensions(const ProblemInstance& inst, std::size_t events,
                             std::size_t queries) {
  if (events != inst.num_types() || queries != inst.num_queries()) {
    fail(ErrorCode::kDimensionMismatch,
         "plan covers " + std::to_string(events) + " types / " + std::to_string(queries) +
             " queries, instance has " + std::to_string(inst.num_types()) + " / " +
             std::to_string(inst.num_queries()));
  }
}

/// True if `value` beats `best` by more than rounding noise (scale-free).
inline bool improves(double value, double best) {
  return value > best + 1e-12 * std::abs(best);
}

}  // namespace detail

/// Under kEquality a query is produced exactly when all its types are kept;
/// keep_query is then derived, and only an explicit keep of a query with a
/// dropped type is an error.  Under kInequality keep_query is taken as given
/// and must not exceed the product of its types' keep bits.
inline PlanEvaluation evaluate_integral(const ProblemInstance& inst, const IntegralPlan& plan,
                                        Coupling coupling) {
  detail::check_dimensions(inst, plan.keep_event.size(), plan.keep_query.size());
  PlanEvaluation ev;
  for (std::size_t j = 0; j < inst.num_types(); ++j) {
    if (plan.keep_event[j]) ev.memory_use += inst.memory_rate(j);
  }
  for (std::size_t i = 0; i < inst.num_queries(); ++i) {
    bool all_kept = true;
    for (auto h : inst.query_types(i)) all_kept = all_kept && plan.keep_event[h.index()];
    if (plan.keep_query[i] && !all_kept) {
      fail(ErrorCode::kCouplingViolation, "query '" + inst.queries()[i].id() +
                                              "' is kept but one of its event types is dropped");
    }
    const bool produced = coupling == Coupling::kEquality ? all_kept : bool(plan.keep_query[i]);
    if (produced) {
      ev.expected_utility += inst.value(i);
      ev.cpu_use += inst.cpu(i);
    }
  }
  ev.feasible_memory = detail::within(ev.memory_use, inst.memory_budget());
  ev.feasible_cpu = detail::within(ev.cpu_use, inst.cpu_budget());
  return ev;
}

/// Product of the sampling rates over the pattern positions of query i
/// (a type repeated in the pattern contributes once per occurrence).
inline double survival_probability(const ProblemInstance& inst, const FractionalPlan& plan,
                                   std::size_t i) {
  double prod = 1.0;
  for (auto h : inst.queries()[i].pattern()) prod *= plan.sample_event[h.index()];
  return prod;
}

inline PlanEvaluation evaluate_fractional(const ProblemInstance& inst, const FractionalPlan& plan,
                                          Coupling coupling) {
  detail::check_dimensions(inst, plan.sample_event.size(), plan.sample_query.size());
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  for (double x : plan.sample_event) {
    if (!in_unit(x)) fail(ErrorCode::kInvalidArgument, "sampling rate outside [0, 1]");
  }
  for (double y : plan.sample_query) {
    if (!in_unit(y)) fail(ErrorCode::kInvalidArgument, "sampling rate outside [0, 1]");
  }
  PlanEvaluation ev;
  for (std::size_t j = 0; j < inst.num_types(); ++j) {
    ev.memory_use += inst.memory_rate(j) * plan.sample_event[j];
  }
  for (std::size_t i = 0; i < inst.num_queries(); ++i) {
    const double prod = survival_probability(inst, plan, i);
    double y = prod;
    if (coupling == Coupling::kInequality) {
      y = plan.sample_query[i];
      if (y > prod + 1e-12) {
        fail(ErrorCode::kCouplingViolation,
             "query '" + inst.queries()[i].id() + "' samples above its event survival product");
      }
    }
    ev.expected_utility += inst.value(i) * y;
    ev.cpu_use += inst.cpu(i) * y;
  }
  ev.feasible_memory = detail::within(ev.memory_use, inst.memory_budget());
  ev.feasible_cpu = detail::within(ev.cpu_use, inst.cpu_budget());
  return ev;
}

/// Keep exactly the types used by the selected queries.
inline std::vector<bool> union_of_types(const ProblemInstance& inst,
                                        const std::vector<bool>& keep_query) {
  std::vector<bool> keep(inst.num_types(), false);
  for (std::size_t i = 0; i < inst.num_queries(); ++i) {
    if (!keep_query[i]) continue;
    for (auto h : inst.query_types(i)) keep[h.index()] = true;
  }
  return keep;
}

/// Queries whose types are all kept.
inline std::vector<bool> covered_queries(const ProblemInstance& inst,
                                         const std::vector<bool>& keep_event) {
  std::vector<bool> out(inst.num_queries(), false);
  for (std::size_t i = 0; i < inst.num_queries(); ++i) {
    bool all = true;
    for (auto h : inst.query_types(i)) all = all && keep_event[h.index()];
    out[i] = all;
  }
  return out;
}

struct SolverResult {
  IntegralPlan plan;
  PlanEvaluation evaluation;
};

struct FractionalResult {
  FractionalPlan plan;
  PlanEvaluation evaluation;
};

}  // namespace cepshed
