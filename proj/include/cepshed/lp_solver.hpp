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

// Dense two-phase primal simplex.  The programs solved here are LP
// relaxations with |Sigma| + |Q| variables, so a full tableau is plenty.
// Pivoting uses Dantzig's rule and falls back to Bland's rule after a run of
// degenerate pivots.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "cepshed/error.hpp"

namespace cepshed {

enum class Sense { kMinimize, kMaximize };
enum class Relation { kLessEqual, kEqual, kGreaterEqual };

struct LinearConstraint {
  std::vector<double> coefficients;
  Relation relation = Relation::kLessEqual;
  double rhs = 0.0;
};

struct VariableBounds {
  double lower = 0.0;
  double upper = std::numeric_limits<double>::infinity();
};

struct LinearProgram {
  Sense sense = Sense::kMinimize;
  std::vector<double> objective;
  std::vector<LinearConstraint> constraints;
  std::vector<VariableBounds> bounds;  // empty means [0, +inf) for every variable

  std::size_t num_variables() const { return objective.size(); }

  void add_constraint(std::vector<double> coefficients, Relation relation, double rhs) {
    constraints.push_back(LinearConstraint{std::move(coefficients), relation, rhs});
  }
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

constexpr const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::kOptimal: return "optimal";
    case LpStatus::kInfeasible: return "infeasible";
    case LpStatus::kUnbounded: return "unbounded";
  }
  return "?";
}

struct LpSolution {
  LpStatus status = LpStatus::kInfeasible;
  std::vector<double> values;
  double objective_value = 0.0;
};

struct LpTolerances {
  static constexpr double kFeasibility = 1e-9;
  static constexpr double kPivot = 1e-12;
  static constexpr double kOptimality = 1e-9;
};

namespace detail {

class SimplexTableau {
 public:
  // rows: coefficient rows (size ncols) with rhs >= 0; basis: initial basic column per row.
  SimplexTableau(std::vector<std::vector<double>> rows, std::vector<double> rhs,
                 std::vector<std::size_t> basis, std::size_t ncols)
      : a_(std::move(rows)), b_(std::move(rhs)), basis_(std::move(basis)), ncols_(ncols),
        allowed_(ncols, true) {}

  std::size_t rows() const { return a_.size(); }
  const std::vector<std::size_t>& basis() const { return basis_; }
  double rhs(std::size_t i) const { return b_[i]; }

  void forbid(std::size_t col) { allowed_[col] = false; }

  /// Minimizes cost . z from the current basic feasible solution.  Returns
  /// false when the objective is unbounded below.
  bool minimize(const std::vector<double>& cost) {
    std::vector<double> reduced = cost;
    for (std::size_t i = 0; i < rows(); ++i) {
      const double cb = cost[basis_[i]];
      if (cb == 0.0) continue;
      for (std::size_t j = 0; j < ncols_; ++j) reduced[j] -= cb * a_[i][j];
    }
    const std::size_t max_iterations = 200 * (ncols_ + rows()) + 1000;
    bool bland = false;
    std::size_t degenerate_run = 0;
    for (std::size_t it = 0; it < max_iterations; ++it) {
      std::size_t enter = ncols_;
      double best = -LpTolerances::kOptimality;
      for (std::size_t j = 0; j < ncols_; ++j) {
        if (!allowed_[j] || reduced[j] >= -LpTolerances::kOptimality) continue;
        if (bland) {
          enter = j;
          break;
        }
        if (reduced[j] < best) {
          best = reduced[j];
          enter = j;
        }
      }
      if (enter == ncols_) return true;

      std::size_t leave = rows();
      double best_ratio = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < rows(); ++i) {
        const double piv = a_[i][enter];
        if (piv <= LpTolerances::kPivot) continue;
        const double ratio = b_[i] / piv;
        if (ratio < best_ratio - 1e-12 ||
            (ratio <= best_ratio + 1e-12 && leave < rows() && basis_[i] < basis_[leave])) {
          best_ratio = std::min(best_ratio, ratio);
          leave = i;
        }
      }
      if (leave == rows()) return false;

      if (best_ratio <= 1e-12) {
        if (++degenerate_run > 32) bland = true;
      } else {
        degenerate_run = 0;
      }
      pivot(leave, enter, reduced);
    }
    fail(ErrorCode::kNumericalInstability, "simplex iteration limit reached");
  }

  void pivot(std::size_t row, std::size_t col, std::vector<double>& reduced) {
    const double p = a_[row][col];
    if (std::abs(p) < LpTolerances::kPivot) {
      fail(ErrorCode::kNumericalInstability, "pivot magnitude below threshold");
    }
    auto& prow = a_[row];
    for (std::size_t j = 0; j < ncols_; ++j) prow[j] /= p;
    b_[row] /= p;
    prow[col] = 1.0;
    for (std::size_t i = 0; i < rows(); ++i) {
      if (i == row) continue;
      const double factor = a_[i][col];
      if (factor == 0.0) continue;
      for (std::size_t j = 0; j < ncols_; ++j) a_[i][j] -= factor * prow[j];
      a_[i][col] = 0.0;
      b_[i] -= factor * b_[row];
      if (b_[i] < 0.0 && b_[i] > -1e-11) b_[i] = 0.0;
    }
    const double rf = reduced[col];
    if (rf != 0.0) {
      for (std::size_t j = 0; j < ncols_; ++j) reduced[j] -= rf * prow[j];
      reduced[col] = 0.0;
    }
    basis_[row] = col;
  }

  void pivot(std::size_t row, std::size_t col) {
    std::vector<double> scratch(ncols_, 0.0);
    pivot(row, col, scratch);
  }

  double coefficient(std::size_t i, std::size_t j) const { return a_[i][j]; }

  void drop_row(std::size_t i) {
    a_.erase(a_.begin() + static_cast<std::ptrdiff_t>(i));
    b_.erase(b_.begin() + static_cast<std::ptrdiff_t>(i));
    basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(i));
  }

 private:
  std::vector<std::vector<double>> a_;
  std::vector<double> b_;
  std::vector<std::size_t> basis_;
  std::size_t ncols_;
  std::vector<bool> allowed_;
};

}  // namespace detail

inline LpSolution solve_lp(const LinearProgram& lp) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const std::size_t n = lp.num_variables();
  if (!lp.bounds.empty() && lp.bounds.size() != n) {
    fail(ErrorCode::kDimensionMismatch, "bounds vector size differs from objective size");
  }
  for (double c : lp.objective) {
    if (!std::isfinite(c)) fail(ErrorCode::kDimensionMismatch, "non-finite objective coefficient");
  }
  for (std::size_t r = 0; r < lp.constraints.size(); ++r) {
    const auto& con = lp.constraints[r];
    if (con.coefficients.size() != n) {
      fail(ErrorCode::kDimensionMismatch, "constraint " + std::to_string(r) + " has " +
                                              std::to_string(con.coefficients.size()) +
                                              " coefficients, expected " + std::to_string(n));
    }
    if (!std::isfinite(con.rhs) ||
        !std::all_of(con.coefficients.begin(), con.coefficients.end(),
                     [](double v) { return std::isfinite(v); })) {
      fail(ErrorCode::kDimensionMismatch, "constraint " + std::to_string(r) + " is not finite");
    }
  }
  auto bound = [&](std::size_t k) { return lp.bounds.empty() ? VariableBounds{} : lp.bounds[k]; };

  // x_k = offset_k + sign_k * u_col  (and - u_col2 for free variables)
  struct Mapping {
    std::size_t col;
    double sign;
    double offset;
    std::size_t neg_col;  // only for free variables
    bool free;
  };
  std::vector<Mapping> map(n);
  std::size_t ncols_struct = 0;
  struct Row {
    std::vector<std::pair<std::size_t, double>> terms;
    Relation rel;
    double rhs;
  };
  std::vector<Row> rows_in;
  for (std::size_t k = 0; k < n; ++k) {
    const auto b = bound(k);
    if (std::isnan(b.lower) || std::isnan(b.upper) || b.lower > b.upper ||
        b.lower == kInf || b.upper == -kInf) {
      fail(ErrorCode::kInvalidArgument, "invalid bounds for variable " + std::to_string(k));
    }
    if (std::isfinite(b.lower)) {
      map[k] = {ncols_struct++, 1.0, b.lower, 0, false};
      if (std::isfinite(b.upper)) {
        rows_in.push_back({{{map[k].col, 1.0}}, Relation::kLessEqual, b.upper - b.lower});
      }
    } else if (std::isfinite(b.upper)) {
      map[k] = {ncols_struct++, -1.0, b.upper, 0, false};
    } else {
      const std::size_t pos = ncols_struct++;
      const std::size_t neg = ncols_struct++;
      map[k] = {pos, 1.0, 0.0, neg, true};
    }
  }
  for (const auto& con : lp.constraints) {
    Row row{{}, con.relation, con.rhs};
    for (std::size_t k = 0; k < n; ++k) {
      const double a = con.coefficients[k];
      if (a == 0.0) continue;
      row.rhs -= a * map[k].offset;
      row.terms.emplace_back(map[k].col, a * map[k].sign);
      if (map[k].free) row.terms.emplace_back(map[k].neg_col, -a);
    }
    rows_in.push_back(std::move(row));
  }

  // Normalize rhs >= 0 and lay out slack / surplus / artificial columns.
  const std::size_t m = rows_in.size();
  for (auto& row : rows_in) {
    if (row.rhs < 0.0) {
      row.rhs = -row.rhs;
      for (auto& t : row.terms) t.second = -t.second;
      if (row.rel == Relation::kLessEqual) {
        row.rel = Relation::kGreaterEqual;
      } else if (row.rel == Relation::kGreaterEqual) {
        row.rel = Relation::kLessEqual;
      }
    }
  }
  std::size_t ncols = ncols_struct;
  std::vector<std::size_t> slack_col(m, SIZE_MAX), art_col(m, SIZE_MAX);
  for (std::size_t i = 0; i < m; ++i) {
    if (rows_in[i].rel != Relation::kEqual) slack_col[i] = ncols++;
  }
  const std::size_t first_artificial = ncols;
  for (std::size_t i = 0; i < m; ++i) {
    if (rows_in[i].rel != Relation::kLessEqual) art_col[i] = ncols++;
  }

  std::vector<std::vector<double>> a(m, std::vector<double>(ncols, 0.0));
  std::vector<double> rhs(m);
  std::vector<std::size_t> basis(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (const auto& [col, v] : rows_in[i].terms) a[i][col] += v;
    rhs[i] = rows_in[i].rhs;
    if (rows_in[i].rel == Relation::kLessEqual) {
      a[i][slack_col[i]] = 1.0;
      basis[i] = slack_col[i];
    } else {
      if (rows_in[i].rel == Relation::kGreaterEqual) a[i][slack_col[i]] = -1.0;
      a[i][art_col[i]] = 1.0;
      basis[i] = art_col[i];
    }
  }

  detail::SimplexTableau tab(std::move(a), std::move(rhs), std::move(basis), ncols);

  if (first_artificial < ncols) {
    std::vector<double> phase1(ncols, 0.0);
    for (std::size_t j = first_artificial; j < ncols; ++j) phase1[j] = 1.0;
    tab.minimize(phase1);
    double infeasibility = 0.0;
    double scale = 1.0;
    for (std::size_t i = 0; i < tab.rows(); ++i) {
      scale = std::max(scale, tab.rhs(i));
      if (tab.basis()[i] >= first_artificial) infeasibility += tab.rhs(i);
    }
    if (infeasibility > LpTolerances::kFeasibility * scale) {
      return LpSolution{LpStatus::kInfeasible, {}, 0.0};
    }
    // Drive remaining (zero-level) artificials out of the basis.
    for (std::size_t i = 0; i < tab.rows();) {
      if (tab.basis()[i] < first_artificial) {
        ++i;
        continue;
      }
      std::size_t col = first_artificial;
      double best = LpTolerances::kPivot * 1e3;
      for (std::size_t j = 0; j < first_artificial; ++j) {
        if (std::abs(tab.coefficient(i, j)) > best) {
          best = std::abs(tab.coefficient(i, j));
          col = j;
        }
      }
      if (col == first_artificial) {
        tab.drop_row(i);  // redundant equality
      } else {
        tab.pivot(i, col);
        ++i;
      }
    }
    for (std::size_t j = first_artificial; j < ncols; ++j) tab.forbid(j);
  }

  std::vector<double> cost(ncols, 0.0);
  const double dir = lp.sense == Sense::kMaximize ? -1.0 : 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    cost[map[k].col] += dir * lp.objective[k] * map[k].sign;
    if (map[k].free) cost[map[k].neg_col] -= dir * lp.objective[k];
  }
  if (!tab.minimize(cost)) return LpSolution{LpStatus::kUnbounded, {}, 0.0};

  std::vector<double> z(ncols, 0.0);
  for (std::size_t i = 0; i < tab.rows(); ++i) z[tab.basis()[i]] = std::max(0.0, tab.rhs(i));

  LpSolution sol;
  sol.status = LpStatus::kOptimal;
  sol.values.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    double v = map[k].offset + map[k].sign * z[map[k].col];
    if (map[k].free) v -= z[map[k].neg_col];
    const auto b = bound(k);
    // snap tiny excursions caused by rounding back onto the box
    if (v < b.lower && v > b.lower - LpTolerances::kFeasibility) v = b.lower;
    if (v > b.upper && v < b.upper + LpTolerances::kFeasibility) v = b.upper;
    sol.values[k] = v;
  }
  for (std::size_t r = 0; r < lp.constraints.size(); ++r) {
    const auto& con = lp.constraints[r];
    double lhs = 0.0;
    for (std::size_t k = 0; k < n; ++k) lhs += con.coefficients[k] * sol.values[k];
    const double tol = LpTolerances::kFeasibility * std::max(1.0, std::abs(con.rhs));
    const bool ok = con.relation == Relation::kLessEqual      ? lhs <= con.rhs + tol
                    : con.relation == Relation::kGreaterEqual ? lhs >= con.rhs - tol
                                                              : std::abs(lhs - con.rhs) <= tol;
    if (!ok) {
      fail(ErrorCode::kNumericalInstability,
           "optimal basis violates constraint " + std::to_string(r) + " beyond tolerance");
    }
  }
  sol.objective_value = 0.0;
  for (std::size_t k = 0; k < n; ++k) sol.objective_value += lp.objective[k] * sol.values[k];
  return sol;
}

}  // namespace cepshed
