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

// Solver-versus-oracle checks over seeded random instances.  Each check
// reports how many instances it ran, how many violated the stated bound and
// the smallest slack seen (negative slack is a violation).

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "cepshed/lp_solver.hpp"
#include "cepshed/planner.hpp"
#include "cepshed/simulator.hpp"

namespace cepshed {

struct RandomInstanceOptions {
  std::size_t min_types = 2;
  std::size_t max_types = 10;
  std::size_t max_queries = 8;
  std::size_t max_length = 4;
  double repeat_probability = 0.1;  // chance a pattern repeats a type
};

/// Integer-grid instance: lambda in {1,2,3}, m in {1,2}, n and w in 1..5,
/// c in {1,2}; M an integer between 30% and 100% of the total memory rate and
/// C an integer between 1 and the total CPU rate.
inline ProblemInstance random_instance(Engine& rng, const RandomInstanceOptions& opt = {}) {
  auto uniform = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };
  const std::size_t n = uniform(opt.min_types, std::max(opt.min_types, opt.max_types));
  Alphabet sigma;
  for (std::size_t j = 0; j < n; ++j) {
    sigma.add({"T" + std::to_string(j), static_cast<double>(uniform(1, 2)),
               static_cast<double>(uniform(1, 3))});
  }
  const std::size_t nq = uniform(1, opt.max_queries);
  std::vector<Query> queries;
  std::bernoulli_distribution repeat(opt.repeat_probability);
  for (std::size_t i = 0; i < nq; ++i) {
    const std::size_t len = uniform(1, std::min(opt.max_length, n));
    std::vector<std::size_t> pool(n);
    for (std::size_t j = 0; j < n; ++j) pool[j] = j;
    std::shuffle(pool.begin(), pool.end(), rng);
    std::vector<TypeHandle> pattern;
    for (std::size_t k = 0; k < len; ++k) {
      pattern.push_back(TypeHandle{static_cast<std::uint32_t>(pool[k])});
    }
    if (len >= 2 && repeat(rng)) pattern.back() = pattern.front();
    queries.emplace_back("Q" + std::to_string(i), std::move(pattern),
                         static_cast<double>(uniform(1, 5)), static_cast<double>(uniform(1, 5)),
                         static_cast<double>(uniform(1, 2)),
                         static_cast<double>(uniform(1, 5)));
  }
  double total_a = 0.0, total_cpu = 0.0;
  for (const auto& t : sigma.types()) total_a += t.arrival_rate * t.memory_cost;
  for (const auto& q : queries) total_cpu += *q.expected_matches() * q.cpu_cost_per_match();
  const auto lo = static_cast<std::size_t>(std::ceil(0.3 * total_a));
  const double m = static_cast<double>(uniform(std::max<std::size_t>(lo, 1),
                                               static_cast<std::size_t>(total_a)));
  const double c = static_cast<double>(uniform(1, static_cast<std::size_t>(total_cpu)));
  return ProblemInstance(std::move(sigma), std::move(queries), m, c);
}

/// Instances where every query has exactly `d` distinct types.
inline ProblemInstance random_regular_instance(Engine& rng, std::size_t d, std::size_t max_types,
                                               std::size_t max_queries) {
  auto uniform = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };
  const std::size_t n = uniform(d, std::max(d, max_types));
  Alphabet sigma;
  for (std::size_t j = 0; j < n; ++j) {
    sigma.add({"T" + std::to_string(j), static_cast<double>(uniform(1, 2)),
               static_cast<double>(uniform(1, 3))});
  }
  std::vector<Query> queries;
  const std::size_t nq = uniform(1, max_queries);
  for (std::size_t i = 0; i < nq; ++i) {
    std::vector<std::size_t> pool(n);
    for (std::size_t j = 0; j < n; ++j) pool[j] = j;
    std::shuffle(pool.begin(), pool.end(), rng);
    std::vector<TypeHandle> pattern;
    for (std::size_t k = 0; k < d; ++k) {
      pattern.push_back(TypeHandle{static_cast<std::uint32_t>(pool[k])});
    }
    queries.emplace_back("Q" + std::to_string(i), std::move(pattern), 1.0,
                         static_cast<double>(uniform(1, 5)), 1.0,
                         static_cast<double>(uniform(1, 5)));
  }
  double total_a = 0.0;
  for (const auto& t : sigma.types()) total_a += t.arrival_rate * t.memory_cost;
  const double m = static_cast<double>(uniform(1, static_cast<std::size_t>(total_a)));
  return ProblemInstance(std::move(sigma), std::move(queries), m, std::nullopt);
}

struct CheckResult {
  std::string name;
  std::size_t instances = 0;
  std::size_t violations = 0;
  double worst_slack = std::numeric_limits<double>::infinity();
  double seconds = 0.0;

  bool passed() const { return violations == 0; }

  void record(double slack) {
    ++instances;
    worst_slack = std::min(worst_slack, slack);
    if (slack < 0.0) ++violations;
  }
};

struct VerifyOptions {
  std::size_t instances = 200;
  std::uint64_t seed = 1;
  RandomInstanceOptions random;
  std::vector<double> taus{0.25, 0.5, 0.75};
  std::vector<double> epsilons{0.1, 0.01};
  std::size_t grid_instances = 40;
  std::size_t grid_max_types = 6;
  std::vector<std::size_t> grid_ks{2, 4, 8};
  std::size_t grid_bound_k = 8;
  double resolution = 1.0;  // integer-grid instances need no finer grid
};

namespace detail {

// Absolute slack with a relative tolerance folded in, so that rounding noise
// at the 1e-9 level does not count as a violation.
inline double slack(double limit, double actual) {
  return limit - actual + 1e-9 * std::max(1.0, std::abs(limit));
}

template <class F>
CheckResult timed(std::string name, F&& body) {
  CheckResult r;
  r.name = std::move(name);
  const auto start = std::chrono::steady_clock::now();
  body(r);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

inline std::vector<ProblemInstance> instance_suite(const VerifyOptions& opt) {
  auto rng = make_engine(opt.seed, 10, 0);
  std::vector<ProblemInstance> out;
  for (std::size_t t = 0; t < opt.instances; ++t) out.push_back(random_instance(rng, opt.random));
  return out;
}

/// Raises M so that every query fits on its own (f < 1).
inline ProblemInstance with_small_f(const ProblemInstance& inst) {
  double worst = 0.0;
  for (std::size_t i = 0; i < inst.num_queries(); ++i) worst = std::max(worst, inst.footprint(i));
  const double m = std::max(*inst.memory_budget(), std::floor(worst) + 1.0);
  return inst.with_budgets(m, inst.cpu_budget());
}

}  // namespace detail

inline CheckResult check_bicriteria(const std::vector<ProblemInstance>& suite,
                                    const std::vector<double>& taus) {
  return detail::timed("imls_bicriteria loss<=loss*/tau, mem<=M/(1-tau)", [&](CheckResult& r) {
    for (const auto& inst : suite) {
      const double opt_loss = brute_force_integral(inst, Variant::kImls).evaluation.loss(inst);
      const double m = *inst.memory_budget();
      for (double tau : taus) {
        const auto got = imls_bicriteria(inst, tau).evaluation;
        r.record(std::min(detail::slack(opt_loss / tau, got.loss(inst)),
                          detail::slack(m / (1.0 - tau), got.memory_use)));
      }
    }
  });
}

inline CheckResult check_tricriteria(const std::vector<ProblemInstance>& suite,
                                     const std::vector<double>& taus) {
  return detail::timed("idls_tricriteria loss, mem, cpu bounds", [&](CheckResult& r) {
    for (const auto& inst : suite) {
      const double opt_loss = brute_force_integral(inst, Variant::kIdls).evaluation.loss(inst);
      const double m = *inst.memory_budget();
      const double c = *inst.cpu_budget();
      for (double tau : taus) {
        const auto got = idls_tricriteria(inst, tau).evaluation;
        r.record(std::min({detail::slack(opt_loss / tau, got.loss(inst)),
                           detail::slack(m / (1.0 - tau), got.memory_use),
                           detail::slack(c / (1.0 - tau), got.cpu_use)}));
      }
    }
  });
}

inline CheckResult check_greedy_ratio(const std::vector<ProblemInstance>& suite) {
  return detail::timed("imls_knapsack_greedy >= (1-f)/p * OPT", [&](CheckResult& r) {
    for (const auto& base : suite) {
      const auto inst = detail::with_small_f(base);
      const double opt = brute_force_integral(inst, Variant::kImls).evaluation.expected_utility;
      const auto got = imls_knapsack_greedy(inst).evaluation;
      const double ratio = (1.0 - inst.f()) / static_cast<double>(inst.p());
      r.record(std::min(detail::slack(got.expected_utility, ratio * opt),
                        detail::slack(*inst.memory_budget(), got.memory_use)));
    }
  });
}

inline CheckResult check_2d_knapsack_ratio(const std::vector<ProblemInstance>& suite,
                                           double resolution) {
  return detail::timed("idls_2d_knapsack >= (1-f)/p * OPT", [&](CheckResult& r) {
    KnapsackOptions ko;
    ko.grid.resolution = resolution;
    for (const auto& base : suite) {
      const auto inst = detail::with_small_f(base);
      const double opt = brute_force_integral(inst, Variant::kIdls).evaluation.expected_utility;
      const auto got = idls_2d_knapsack(inst, ko).evaluation;
      const double ratio = (1.0 - inst.f()) / static_cast<double>(inst.p());
      r.record(std::min({detail::slack(got.expected_utility, ratio * opt),
                         detail::slack(*inst.memory_budget(), got.memory_use),
                         detail::slack(*inst.cpu_budget(), got.cpu_use)}));
    }
  });
}

inline CheckResult check_fptas(const std::vector<ProblemInstance>& suite,
                               const std::vector<double>& epsilons) {
  return detail::timed("icls_fptas >= (1-eps) * OPT", [&](CheckResult& r) {
    for (const auto& inst : suite) {
      const double opt = brute_force_integral(inst, Variant::kIcls).evaluation.expected_utility;
      for (double eps : epsilons) {
        const auto got = icls_fptas(inst, eps).evaluation;
        r.record(std::min(detail::slack(got.expected_utility, (1.0 - eps) * opt),
                          detail::slack(*inst.cpu_budget(), got.cpu_use)));
      }
    }
  });
}

inline CheckResult check_multitenant_exact(const std::vector<ProblemInstance>& suite,
                                           double resolution) {
  return detail::timed("imls_multitenant_dp == brute force", [&](CheckResult& r) {
    MultitenantOptions mo;
    mo.grid.resolution = resolution;
    for (const auto& inst : suite) {
      const double opt = brute_force_integral(inst, Variant::kImls).evaluation.expected_utility;
      const auto got = imls_multitenant_dp(inst, mo).evaluation;
      const double gap = std::abs(got.expected_utility - opt);
      r.record(std::min(1e-9 * std::max(1.0, opt) - gap,
                        detail::slack(*inst.memory_budget(), got.memory_use)));
    }
  });
}

inline CheckResult check_icls_exact(const std::vector<ProblemInstance>& suite,
                                    double resolution) {
  return detail::timed("icls_dp == brute force", [&](CheckResult& r) {
    KnapsackOptions ko;
    ko.grid.resolution = resolution;
    for (const auto& inst : suite) {
      const double opt = brute_force_integral(inst, Variant::kIcls).evaluation.expected_utility;
      const auto got = icls_dp(inst, ko).evaluation;
      const double gap = std::abs(got.expected_utility - opt);
      r.record(std::min(1e-9 * std::max(1.0, opt) - gap,
                        detail::slack(*inst.cpu_budget(), got.cpu_use)));
    }
  });
}

inline CheckResult check_fcls_lp(const std::vector<ProblemInstance>& suite) {
  return detail::timed("fcls_greedy == LP optimum (1e-9)", [&](CheckResult& r) {
    for (const auto& inst : suite) {
      const auto lp = solve_lp(fcls_linear_program(inst));
      const auto got = fcls_greedy(inst).evaluation;
      const double gap = lp.status == LpStatus::kOptimal
                             ? std::abs(got.expected_utility - lp.objective_value)
                             : std::numeric_limits<double>::infinity();
      r.record(1e-9 - gap);
    }
  });
}

inline CheckResult check_nonconcavity(const std::vector<ProblemInstance>& suite) {
  return detail::timed("nonconcavity witness curvature > 0", [&](CheckResult& r) {
    for (const auto& inst : suite) {
      const bool multi = std::any_of(inst.queries().begin(), inst.queries().end(),
                                     [](const Query& q) { return q.length() >= 2; });
      if (!multi) continue;
      r.record(nonconcavity_witness(inst).curvature);
    }
  });
}

inline std::vector<ProblemInstance> regular_suite(const VerifyOptions& opt, std::size_t d) {
  auto rng = make_engine(opt.seed, 11, d);
  std::vector<ProblemInstance> out;
  for (std::size_t t = 0; t < opt.grid_instances; ++t) {
    out.push_back(random_regular_instance(rng, d, opt.grid_max_types, 6));
  }
  return out;
}

/// Grid value at k against beta * k!/((k-d)! k^d) times the value on the
/// finer grid 4k, which stands in for the optimum.
inline CheckResult check_grid_bound(const std::vector<ProblemInstance>& suite, std::size_t k) {
  return detail::timed("fmls_grid(k) >= beta*k!/((k-d)!k^d) * fmls_grid(4k)",
                       [&](CheckResult& r) {
                         for (const auto& inst : suite) {
                           const auto coarse = fmls_grid_search(inst, k).evaluation;
                           const auto fine = fmls_grid_search(inst, 4 * k).evaluation;
                           const double factor =
                               coarse.guarantee && coarse.guarantee->kind ==
                                                       GuaranteeKind::kGridRelative
                                   ? coarse.guarantee->bound
                                   : 1.0;
                           r.record(std::min(
                               detail::slack(coarse.expected_utility,
                                             factor * fine.expected_utility),
                               detail::slack(*inst.memory_budget(), coarse.memory_use)));
                         }
                       });
}

inline CheckResult check_grid_nesting(const std::vector<ProblemInstance>& suite,
                                      const std::vector<std::size_t>& ks) {
  return detail::timed("fmls_grid(2k) >= fmls_grid(k)", [&](CheckResult& r) {
    for (const auto& inst : suite) {
      for (std::size_t k : ks) {
        const double a = fmls_grid_search(inst, k).evaluation.expected_utility;
        const double b = fmls_grid_search(inst, 2 * k).evaluation.expected_utility;
        r.record(b - a);
      }
    }
  });
}

inline std::vector<CheckResult> run_verification(const VerifyOptions& opt) {
  const auto suite = detail::instance_suite(opt);
  std::vector<CheckResult> out;
  out.push_back(check_bicriteria(suite, opt.taus));
  out.push_back(check_tricriteria(suite, opt.taus));
  out.push_back(check_greedy_ratio(suite));
  out.push_back(check_2d_knapsack_ratio(suite, opt.resolution));
  out.push_back(check_fptas(suite, opt.epsilons));
  out.push_back(check_multitenant_exact(suite, opt.resolution));
  out.push_back(check_icls_exact(suite, opt.resolution));
  out.push_back(check_fcls_lp(suite));
  out.push_back(check_nonconcavity(suite));
  const auto regular = regular_suite(opt, 2);
  out.push_back(check_grid_bound(regular, opt.grid_bound_k));
  out.push_back(check_grid_nesting(regular, opt.grid_ks));
  return out;
}

}  // namespace cepshed
