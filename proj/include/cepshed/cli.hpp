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

// The cepshed command line: estimate, plan, simulate, verify.  Every command
// writes to caller-supplied streams so it can be driven from tests.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cepshed/error.hpp"
#include "cepshed/estimation.hpp"
#include "cepshed/io.hpp"
#include "cepshed/lp_solver.hpp"
#include "cepshed/matcher.hpp"
#include "cepshed/planner.hpp"
#include "cepshed/simulator.hpp"
#include "cepshed/verify.hpp"

namespace cepshed::cli {

struct EstimateArgs {
  std::string workload;
  std::string out;  // empty: stdout
  double duration = 10000.0;
  std::uint64_t seed = 0;
};

struct PlanArgs {
  std::string workload;
  std::string variant;
  std::string algorithm;  // empty: the variant's default
  double tau = 0.5;
  double eps = 0.1;
  std::size_t k = 8;
  double resolution = 1e-3;
  std::string out;
};

struct SimulateArgs {
  std::string workload;
  std::string plan;
  double duration = 1000.0;
  std::size_t trials = 30;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::string accounting = "tumbling";
  std::string format = "text";
};

struct VerifyArgs {
  std::string workload;  // empty: random suite
  std::size_t random = 200;
  std::size_t max_types = 8;
  std::vector<double> taus{0.25, 0.5, 0.75};
  std::vector<double> epsilons{0.1, 0.01};
  std::vector<std::size_t> ks{2, 4, 8};
  std::uint64_t seed = 1;
};

namespace detail {

inline void write_output(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::kInvalidArgument, "cannot write '" + path + "'");
  f << text;
}

inline Workload load_workload(const std::string& path) {
  return parse_workload(read_file(path), path);
}

inline std::vector<std::string> type_names(const Workload& w) {
  std::vector<std::string> out;
  for (const auto& t : w.alphabet.types()) out.push_back(t.id);
  return out;
}

inline std::vector<std::string> query_names(const Workload& w) {
  std::vector<std::string> out;
  for (const auto& q : w.queries) out.push_back(q.id());
  return out;
}

inline std::string default_algorithm(const std::string& variant) {
  if (variant == "imls") return "dp";
  if (variant == "fmls") return "grid";
  if (variant == "icls") return "dp";
  if (variant == "fcls") return "greedy";
  if (variant == "idls") return "brute";
  return "";
}

inline FractionalResult fcls_from_lp(const ProblemInstance& inst) {
  const auto sol = solve_lp(fcls_linear_program(inst));
  if (sol.status != LpStatus::kOptimal) fail(ErrorCode::kLpFailure, "FCLS linear program failed");
  FractionalResult out;
  out.plan.sample_query.resize(inst.num_queries());
  out.plan.sample_event.assign(inst.num_types(), 0.0);
  for (std::size_t i = 0; i < inst.num_queries(); ++i) {
    out.plan.sample_query[i] = std::clamp(sol.values[i], 0.0, 1.0);
    if (out.plan.sample_query[i] <= 0.0) continue;
    for (auto h : inst.query_types(i)) out.plan.sample_event[h.index()] = 1.0;
  }
  out.evaluation = evaluate_fractional(inst, out.plan, Coupling::kInequality);
  out.evaluation.guarantee =
      Guarantee{GuaranteeKind::kExact, 0.0, out.evaluation.expected_utility, {}, {}, ""};
  return out;
}

/// Query-level budget check: use must not exceed the limit the plan itself
/// claims, or the workload budget when the plan states none.
inline std::optional<std::string> budget_violation(const PlanEvaluation& ev,
                                                   const std::optional<Guarantee>& stated,
                                                   const Workload& w) {
  auto over = [](double use, double limit) {
    return use > limit + 1e-9 * std::max(1.0, std::abs(limit));
  };
  std::optional<double> mem = w.memory_budget, cpu = w.cpu_budget;
  if (stated && stated->memory_limit) mem = stated->memory_limit;
  if (stated && stated->cpu_limit) cpu = stated->cpu_limit;
  if (mem && over(ev.memory_use, *mem)) {
    return "plan uses memory " + format_number(ev.memory_use) + ", limit is " +
           format_number(*mem);
  }
  if (cpu && over(ev.cpu_use, *cpu)) {
    return "plan uses cpu " + format_number(ev.cpu_use) + ", limit is " + format_number(*cpu);
  }
  return std::nullopt;
}

}  // namespace detail

/// Fills in missing expected match rates.  Skip-till-any-match queries use
/// the closed form; other semantics count matches in a simulated stream of
/// `duration` time units, over complete blocks of each query's window.
inline int cmd_estimate(const EstimateArgs& args, std::ostream& out) {
  auto w = detail::load_workload(args.workload);
  if (!(args.duration > 0.0) || !std::isfinite(args.duration)) {
    fail(ErrorCode::kInvalidArgument, "duration must be positive and finite");
  }
  const auto rates = declared_rates(w.alphabet);
  std::optional<EventSequence> stream;
  for (auto& q : w.queries) {
    if (q.expected_matches()) continue;
    if (w.semantics == MatchSemantics::kAnyMatch) {
      q = q.with_expected_matches(expected_matches_analytic(q, rates));
      continue;
    }
    if (!stream) stream = generate_stream(rates, args.duration, args.seed);
    const double covered = std::floor(args.duration / q.window()) * q.window();
    if (!(covered > 0.0)) {
      fail(ErrorCode::kInvalidArgument, "duration is shorter than the window of query '" +
                                            q.id() + "'");
    }
    std::vector<EventInstance> prefix;
    for (const auto& e : *stream) {
      if (e.timestamp < covered) prefix.push_back(e);
    }
    const double n = expected_matches_empirical(w.alphabet, validate_sequence(std::move(prefix)),
                                                covered, q, w.semantics,
                                                WindowAccounting::kTumbling);
    q = q.with_expected_matches(n);
  }
  detail::write_output(args.out, emit_workload(w), out);
  return 0;
}

inline PlanFile make_plan(const Workload& w, const PlanArgs& args) {
  const auto inst = w.instance();
  PlanFile file;
  file.variant = args.variant;
  file.algorithm = args.algorithm.empty() ? detail::default_algorithm(args.variant) : args.algorithm;
  file.type_names = detail::type_names(w);
  file.query_names = detail::query_names(w);
  const auto& alg = file.algorithm;
  auto& params = file.parameters;

  auto take = [&](auto result) {
    file.plan = std::move(result.plan);
    file.evaluation = std::move(result.evaluation);
  };
  auto unknown = [&] {
    fail(ErrorCode::kInvalidArgument,
         "unknown algorithm '" + alg + "' for variant " + args.variant);
  };

  if (args.variant == "fdls" || args.variant == "fdls-eval") {
    fail(ErrorCode::kUnsupported,
         "no synthesizer exists for fractional dual-bound shedding; plans can only be "
         "evaluated, not generated");
  }
  if (args.variant == "imls") {
    if (alg == "brute") {
      take(brute_force_integral(inst, Variant::kImls));
    } else if (alg == "dp") {
      MultitenantOptions mo;
      mo.grid.resolution = args.resolution;
      params.resolution = args.resolution;
      take(imls_multitenant_dp(inst, mo));
    } else if (alg == "bicriteria") {
      params.tau = args.tau;
      take(imls_bicriteria(inst, args.tau));
    } else if (alg == "greedy") {
      take(imls_knapsack_greedy(inst));
    } else {
      unknown();
    }
  } else if (args.variant == "fmls") {
    if (alg != "grid") unknown();
    params.k = args.k;
    take(fmls_grid_search(inst, args.k));
  } else if (args.variant == "icls") {
    KnapsackOptions ko;
    ko.grid.resolution = args.resolution;
    if (alg == "brute") {
      take(brute_force_integral(inst, Variant::kIcls));
    } else if (alg == "dp") {
      params.resolution = args.resolution;
      take(icls_dp(inst, ko));
    } else if (alg == "fptas") {
      params.eps = args.eps;
      take(icls_fptas(inst, args.eps));
    } else {
      unknown();
    }
  } else if (args.variant == "fcls") {
    if (alg == "greedy") {
      take(fcls_greedy(inst));
    } else if (alg == "lp") {
      take(detail::fcls_from_lp(inst));
    } else {
      unknown();
    }
  } else if (args.variant == "idls") {
    if (alg == "brute") {
      take(brute_force_integral(inst, Variant::kIdls));
    } else if (alg == "tricriteria") {
      params.tau = args.tau;
      take(idls_tricriteria(inst, args.tau));
    } else if (alg == "knapsack2d") {
      KnapsackOptions ko;
      ko.grid.resolution = args.resolution;
      params.resolution = args.resolution;
      take(idls_2d_knapsack(inst, ko));
    } else {
      unknown();
    }
  } else {
    fail(ErrorCode::kInvalidArgument, "unknown variant '" + args.variant +
                                          "' (expected imls, fmls, icls, fcls, idls)");
  }
  return file;
}

inline int cmd_plan(const PlanArgs& args, std::ostream& out) {
  const auto w = detail::load_workload(args.workload);
  detail::write_output(args.out, emit_plan(make_plan(w, args)), out);
  return 0;
}

inline Json report_to_json(const SimulationReport& r, const SimulateArgs& args,
                           const PlanFile& plan, const Workload& w) {
  Json j;
  j["tool_version"] = std::string(kToolVersion);
  j["variant"] = plan.variant;
  j["algorithm"] = plan.algorithm;
  j["semantics"] = std::string(to_string(w.semantics));
  j["accounting"] = args.accounting;
  j["duration"] = args.duration;
  j["trials"] = r.trials_run;
  j["seed"] = args.seed;
  j["mean_utility"] = r.mean_utility;
  j["utility_stderr"] = r.utility_stderr;
  j["cpu_per_unit_time"] = r.cpu_per_unit_time;
  j["mean_peak_occupancy"] = r.mean_peak_occupancy;
  j["max_peak_occupancy"] = r.max_peak_occupancy;
  j["mean_average_occupancy"] = r.mean_average_occupancy;
  j["planned_memory"] = r.planned_memory;
  j["planned_cpu"] = r.planned_cpu;
  Json per = Json::array();
  for (const auto& q : r.per_query) {
    per.push_back({{"query", q.query_id}, {"mean_matches", q.mean_matches},
                   {"mean_rate", q.mean_rate}});
  }
  j["per_query"] = std::move(per);
  return j;
}

inline std::string format_report(const Json& j, const std::string& format) {
  auto scalar = [](const Json& v) {
    if (v.is_number_float()) return format_number(v.get<double>());
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
  };
  std::ostringstream ss;
  if (format == "json") {
    ss << j.dump(2) << "\n";
  } else if (format == "csv") {
    ss << "metric,query,value\n";
    for (const auto& [key, v] : j.items()) {
      if (key == "per_query") continue;
      ss << key << ",," << scalar(v) << "\n";
    }
    for (const auto& q : j.at("per_query")) {
      ss << "mean_matches," << q.at("query").get<std::string>() << ","
         << scalar(q.at("mean_matches")) << "\n";
      ss << "mean_rate," << q.at("query").get<std::string>() << "," << scalar(q.at("mean_rate"))
         << "\n";
    }
  } else {
    for (const auto& [key, v] : j.items()) {
      if (key == "per_query") continue;
      ss << std::left << std::setw(24) << key << scalar(v) << "\n";
    }
    for (const auto& q : j.at("per_query")) {
      ss << "query " << q.at("query").get<std::string>()
         << " mean_matches " << scalar(q.at("mean_matches"))
         << " mean_rate " << scalar(q.at("mean_rate")) << "\n";
    }
  }
  return ss.str();
}

/// Runs the plan against simulated streams.  The report goes to `out`; a
/// plan exceeding its own stated budgets is reported and then raised as
/// E_BUDGET_VIOLATION.
inline int cmd_simulate(const SimulateArgs& args, std::ostream& out) {
  const auto w = detail::load_workload(args.workload);
  const auto file = parse_plan(read_file(args.plan), args.plan);
  const auto plan = align_plan(file, w);
  const auto inst = w.instance();

  SimulationConfig cfg;
  cfg.duration = args.duration;
  cfg.trials = args.trials;
  cfg.seed = args.seed;
  cfg.threads = std::max(1u, args.threads);
  cfg.semantics = w.semantics;
  if (args.accounting == "tumbling") {
    cfg.accounting = WindowAccounting::kTumbling;
  } else if (args.accounting == "sliding") {
    cfg.accounting = WindowAccounting::kSliding;
  } else {
    fail(ErrorCode::kInvalidArgument, "accounting must be tumbling or sliding");
  }
  if (args.format != "text" && args.format != "json" && args.format != "csv") {
    fail(ErrorCode::kInvalidArgument, "format must be text, json or csv");
  }

  const auto ev = std::holds_alternative<IntegralPlan>(plan)
                      ? evaluate_integral(inst, std::get<IntegralPlan>(plan), Coupling::kInequality)
                      : evaluate_fractional(inst, std::get<FractionalPlan>(plan),
                                            Coupling::kInequality);
  const auto report = simulate(inst, plan, cfg);
  out << format_report(report_to_json(report, args, file, w), args.format);
  if (auto why = detail::budget_violation(ev, file.evaluation.guarantee, w)) {
    fail(ErrorCode::kBudgetViolation, *why);
  }
  return 0;
}

namespace detail {

inline void print_checks(const std::vector<CheckResult>& checks, std::ostream& out) {
  out << std::left << std::setw(58) << "check" << std::setw(11) << "instances" << std::setw(12)
      << "violations" << std::setw(24) << "worst_margin"
      << "status\n";
  for (const auto& c : checks) {
    const std::string margin = c.instances == 0 ? "-" : format_number(c.worst_slack);
    out << std::left << std::setw(58) << c.name << std::setw(11) << c.instances << std::setw(12)
        << c.violations << std::setw(24) << margin << (c.passed() ? "PASS" : "FAIL") << "\n";
  }
}

inline std::vector<CheckResult> workload_checks(const ProblemInstance& inst,
                                                const VerifyArgs& args, std::ostream& out) {
  std::vector<CheckResult> checks;
  const std::vector<ProblemInstance> suite{inst};
  const bool has_m = inst.memory_budget().has_value();
  const bool has_c = inst.cpu_budget().has_value();
  const bool small_f = inst.num_queries() > 0 && inst.f() < 1.0;
  constexpr double kResolution = 1e-3;
  if (inst.num_queries() == 0) return checks;

  auto optimum = [&](Variant v) {
    const auto r = brute_force_integral(inst, v);
    out << "optimum " << std::left << std::setw(6) << to_string(v)
        << format_number(r.evaluation.expected_utility) << "\n";
  };
  if (has_m) optimum(Variant::kImls);
  if (has_c) optimum(Variant::kIcls);
  if (has_m && has_c) optimum(Variant::kIdls);

  if (has_m) {
    checks.push_back(check_bicriteria(suite, args.taus));
    checks.push_back(check_multitenant_exact(suite, kResolution));
    if (small_f) checks.push_back(check_greedy_ratio(suite));
    const bool multi = std::any_of(inst.queries().begin(), inst.queries().end(),
                                   [](const Query& q) { return q.length() >= 2; });
    if (multi) checks.push_back(check_nonconcavity(suite));
    if (*inst.memory_budget() > 0.0) checks.push_back(check_grid_nesting(suite, args.ks));
  }
  if (has_c) {
    checks.push_back(check_fptas(suite, args.epsilons));
    checks.push_back(check_icls_exact(suite, kResolution));
    checks.push_back(check_fcls_lp(suite));
  }
  if (has_m && has_c) {
    checks.push_back(check_tricriteria(suite, args.taus));
    if (small_f) checks.push_back(check_2d_knapsack_ratio(suite, kResolution));
  }
  return checks;
}

}  // namespace detail

/// Runs solvers against brute-force oracles and prints one row per bound.
/// Returns 0 iff every bound holds.
inline int cmd_verify(const VerifyArgs& args, std::ostream& out) {
  std::vector<CheckResult> checks;
  out << "cepshed verify " << kToolVersion << "\n";
  if (!args.workload.empty()) {
    const auto w = detail::load_workload(args.workload);
    out << "workload " << args.workload << "\n";
    checks = detail::workload_checks(w.instance(), args, out);
  } else {
    VerifyOptions opt;
    opt.instances = args.random;
    opt.seed = args.seed;
    opt.random.max_types = std::max<std::size_t>(args.max_types, opt.random.min_types);
    opt.taus = args.taus;
    opt.epsilons = args.epsilons;
    opt.grid_ks = args.ks;
    opt.grid_bound_k = args.ks.empty() ? 8 : *std::max_element(args.ks.begin(), args.ks.end());
    out << "random " << opt.instances << " instances, max_types " << opt.random.max_types
        << ", seed " << opt.seed << "\n";
    checks = run_verification(opt);
  }
  detail::print_checks(checks, out);
  const bool ok = std::all_of(checks.begin(), checks.end(),
                              [](const CheckResult& c) { return c.passed(); });
  out << "result " << (ok ? "PASS" : "FAIL") << " (" << checks.size() << " checks)\n";
  return ok ? 0 : 2;
}

inline int report_error(const Error& e, std::ostream& err) {
  std::string msg = e.what();
  std::replace(msg.begin(), msg.end(), '\n', ' ');
  err << "error[" << error_code_name(e.code()) << "]: " << msg << "\n";
  return static_cast<int>(error_class(e.code()));
}

/// Parses argv and dispatches.  Returns the process exit code: 0 success,
/// 1 usage or parse error, 2 infeasible or unsupported, 3 numerical failure.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Load shedding planner for complex event processing queries", "cepshed"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  EstimateArgs ea;
  auto* est = app.add_subcommand("estimate", "fill in missing expected match rates");
  est->add_option("workload", ea.workload, "workload JSON file")->required();
  est->add_option("--out", ea.out, "output file (default: stdout)");
  est->add_option("--duration", ea.duration, "simulated time for non-any semantics")
      ->capture_default_str();
  est->add_option("--seed", ea.seed, "random seed")->capture_default_str();

  PlanArgs pa;
  auto* plan = app.add_subcommand("plan", "compute a shedding plan");
  plan->add_option("workload", pa.workload, "workload JSON file")->required();
  plan->add_option("--variant", pa.variant, "imls, fmls, icls, fcls or idls")->required();
  plan->add_option("--algorithm", pa.algorithm, "solver (default depends on variant)");
  plan->add_option("--tau", pa.tau, "rounding threshold")->capture_default_str();
  plan->add_option("--eps", pa.eps, "FPTAS accuracy")->capture_default_str();
  plan->add_option("--k", pa.k, "grid granularity")->capture_default_str();
  plan->add_option("--resolution", pa.resolution, "DP lattice unit")->capture_default_str();
  plan->add_option("--out", pa.out, "output file (default: stdout)");

  SimulateArgs sa;
  auto* sim = app.add_subcommand("simulate", "simulate a plan on Poisson streams");
  sim->add_option("workload", sa.workload, "workload JSON file")->required();
  sim->add_option("--plan", sa.plan, "plan JSON file")->required();
  sim->add_option("--duration", sa.duration, "time units per trial")->capture_default_str();
  sim->add_option("--trials", sa.trials, "number of trials")->capture_default_str();
  sim->add_option("--seed", sa.seed, "random seed")->capture_default_str();
  sim->add_option("--threads", sa.threads, "worker threads (results do not depend on it)")
      ->capture_default_str();
  sim->add_option("--accounting", sa.accounting, "tumbling or sliding")->capture_default_str();
  sim->add_option("--format", sa.format, "text, json or csv")->capture_default_str();

  VerifyArgs va;
  auto* ver = app.add_subcommand("verify", "check solver bounds against brute force");
  ver->add_option("workload", va.workload, "workload JSON file (default: random suite)");
  ver->add_option("--random", va.random, "number of random instances")->capture_default_str();
  ver->add_option("--max-types", va.max_types, "max event types per random instance")
      ->capture_default_str();
  ver->add_option("--tau", va.taus, "rounding thresholds")->delimiter(',');
  ver->add_option("--eps", va.epsilons, "FPTAS accuracies")->delimiter(',');
  ver->add_option("--k", va.ks, "grid granularities")->delimiter(',');
  ver->add_option("--seed", va.seed, "random seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    err << "error[E_USAGE]: " << msg << "\n";
    return 1;
  }

  try {
    if (*est) return cmd_estimate(ea, out);
    if (*plan) return cmd_plan(pa, out);
    if (*sim) return cmd_simulate(sa, out);
    return cmd_verify(va, out);
  } catch (const Error& e) {
    return report_error(e, err);
  } catch (const std::exception& e) {
    err << "error[E_INTERNAL]: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace cepshed::cli
