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

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cepshed/cli.hpp"
#include "test_support.hpp"

namespace cepshed {
namespace {

namespace fs = std::filesystem;

const std::string kDir = CEPSHED_WORKLOAD_DIR;

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "cepshed");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Run r;
  r.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string temp_file(const std::string& name, const std::string& text) {
  const auto path = fs::temp_directory_path() / ("cepshed_cli_test_" + name);
  std::ofstream(path) << text;
  return path.string();
}

TEST(Cli, PlanExample4ByBruteForce) {
  const auto r = run({"plan", kDir + "/example4.json", "--variant", "imls", "--algorithm", "brute"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto plan = parse_plan(r.out);
  const auto& ip = std::get<IntegralPlan>(plan.plan);
  EXPECT_EQ(plan.type_names, (std::vector<std::string>{"A", "B", "C", "D", "E"}));
  EXPECT_EQ(ip.keep_event, testing::bits({1, 0, 1, 0, 1}));
  EXPECT_EQ(plan.evaluation.expected_utility, 6.0);
  EXPECT_EQ(plan.tool_version, kToolVersion);
}

TEST(Cli, PlanFclsIsTheGreedyPlan) {
  const auto r = run({"plan", kDir + "/example5.json", "--variant", "fcls"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto plan = parse_plan(r.out);
  const auto w = parse_workload(read_file(kDir + "/example5.json"));
  const auto want = fcls_greedy(w.instance());
  EXPECT_EQ(std::get<FractionalPlan>(plan.plan), want.plan);
  EXPECT_EQ(plan.evaluation.expected_utility, 10.0);
}

TEST(Cli, PlanRecordsResolvedParameters) {
  const auto r = run({"plan", kDir + "/example6.json", "--variant", "idls", "--algorithm",
                      "tricriteria", "--tau", "0.25"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto plan = parse_plan(r.out);
  EXPECT_EQ(plan.parameters.tau, 0.25);
  ASSERT_TRUE(plan.evaluation.guarantee);
  EXPECT_EQ(plan.evaluation.guarantee->memory_limit, 4.0);
}

TEST(Cli, FdlsHasNoSynthesizer) {
  const auto r = run({"plan", kDir + "/example6.json", "--variant", "fdls", "--algorithm", "x"});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(r.err.rfind("error[E_UNSUPPORTED]: ", 0), 0u);
  EXPECT_TRUE(r.out.empty());
}

TEST(Cli, ErrorsAreSingleMachineReadableLines) {
  const auto missing = run({"plan", kDir + "/example4.json", "--variant", "icls"});
  EXPECT_EQ(missing.code, 1);
  EXPECT_EQ(missing.err.rfind("error[E_MISSING_BUDGET]: ", 0), 0u);

  const auto bad = temp_file("bad.json", "{\"event_types\": [}\n");
  const auto parse = run({"plan", bad, "--variant", "imls"});
  EXPECT_EQ(parse.code, 1);
  EXPECT_EQ(parse.err.rfind("error[E_PARSE]: ", 0), 0u);

  const auto usage = run({"plan", kDir + "/example4.json", "--bogus"});
  EXPECT_EQ(usage.code, 1);
  EXPECT_EQ(usage.err.rfind("error[E_USAGE]: ", 0), 0u);

  for (const auto* r : {&missing, &parse, &usage}) {
    EXPECT_EQ(std::count(r->err.begin(), r->err.end(), '\n'), 1);
  }
}

TEST(Cli, SimulateIsDeterministicAndDropsQ3) {
  const auto plan = temp_file(
      "p4.json",
      run({"plan", kDir + "/example4.json", "--variant", "imls", "--algorithm", "brute"}).out);
  const std::vector<std::string> args{"simulate", kDir + "/example4.json", "--plan", plan,
                                      "--trials", "4", "--duration", "100", "--seed", "3",
                                      "--format", "json"};
  const auto a = run(args);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(run(args).out, a.out);
  auto threaded = args;
  threaded.insert(threaded.end(), {"--threads", "3"});
  EXPECT_EQ(run(threaded).out, a.out);

  const auto report = Json::parse(a.out);
  EXPECT_EQ(report.at("per_query").at(2).at("query"), "Q3");
  EXPECT_EQ(report.at("per_query").at(2).at("mean_matches"), 0.0);
  EXPECT_EQ(report.at("tool_version"), std::string(kToolVersion));

  auto csv = args;
  csv.back() = "csv";
  const auto c = run(csv);
  EXPECT_EQ(c.out.rfind("metric,query,value\n", 0), 0u);
  EXPECT_NE(c.out.find("mean_matches,Q3,0\n"), std::string::npos);
}

TEST(Cli, SimulateFullKeepNearExpectedUtility) {
  const auto w = parse_workload(read_file(kDir + "/ward.json"));
  auto filled = w;
  const auto rates = declared_rates(w.alphabet);
  for (auto& q : filled.queries) q = q.with_expected_matches(expected_matches_analytic(q, rates));
  PlanFile p;
  p.variant = "imls";
  p.algorithm = "manual";
  for (const auto& t : w.alphabet.types()) p.type_names.push_back(t.id);
  for (const auto& q : w.queries) p.query_names.push_back(q.id());
  p.plan = IntegralPlan{std::vector<bool>(p.type_names.size(), true),
                        std::vector<bool>(p.query_names.size(), true)};
  p.evaluation.guarantee = Guarantee{GuaranteeKind::kExact, 0.0, 0.0, 1e9, 1e9, "test"};
  const auto plan = temp_file("full.json", emit_plan(p));
  const auto wl = temp_file("ward_filled.json", emit_workload(filled));
  const auto r = run({"simulate", wl, "--plan", plan, "--trials", "30", "--duration", "500",
                      "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = Json::parse(r.out);
  const double mean = j.at("mean_utility").get<double>();
  const double se = j.at("utility_stderr").get<double>();
  EXPECT_LE(std::abs(mean - filled.instance().total_value()), 3.0 * se);
}

TEST(Cli, SimulateRejectsMismatchedAndOverBudgetPlans) {
  const auto plan4 = temp_file(
      "p4b.json",
      run({"plan", kDir + "/example4.json", "--variant", "imls", "--algorithm", "brute"}).out);
  const auto other = temp_file("other.json", R"({"event_types": [
      {"name": "A", "arrival_rate": 1, "memory_cost": 1}], "queries": [
      {"name": "Q1", "pattern": ["A"], "window": 1, "utility_weight": 1,
       "cpu_cost_per_match": 1, "expected_matches": 1}], "budgets": {"memory": 1}})");
  const auto r = run({"simulate", other, "--plan", plan4, "--trials", "2"});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(r.err.rfind("error[E_INCOMPATIBLE_PLAN]: ", 0), 0u);

  // keep everything under M = 3: the plan states no relaxed limit
  PlanFile p = parse_plan(read_file(plan4));
  p.plan = IntegralPlan{std::vector<bool>(5, true), std::vector<bool>(3, true)};
  p.evaluation.guarantee.reset();
  const auto over = temp_file("over.json", emit_plan(p));
  const auto v = run({"simulate", kDir + "/example4.json", "--plan", over, "--trials", "2",
                      "--duration", "20"});
  EXPECT_EQ(v.code, 2);
  EXPECT_EQ(v.err.rfind("error[E_BUDGET_VIOLATION]: ", 0), 0u);
  EXPECT_FALSE(v.out.empty());
}

TEST(Cli, EstimateFillsMissingRates) {
  const auto wl = temp_file("est.json", R"({"event_types": [
      {"name": "A", "arrival_rate": 1, "memory_cost": 1},
      {"name": "B", "arrival_rate": 1, "memory_cost": 1}], "queries": [
      {"name": "ab", "pattern": ["A", "B"], "window": 2, "utility_weight": 1,
       "cpu_cost_per_match": 1},
      {"name": "kept", "pattern": ["B"], "window": 2, "utility_weight": 1,
       "cpu_cost_per_match": 1, "expected_matches": 0.75}]})");
  const auto r = run({"estimate", wl});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto w = parse_workload(r.out);
  EXPECT_EQ(w.queries[0].expected_matches(), 1.0);
  EXPECT_EQ(w.queries[1].expected_matches(), 0.75);

  // already complete: output is the canonical form of the input
  const auto again = run({"estimate", temp_file("est2.json", r.out)});
  EXPECT_EQ(again.out, r.out);
}

TEST(Cli, EstimateCountsForOtherSemantics) {
  const auto wl = temp_file("est_next.json", R"({"event_types": [
      {"name": "A", "arrival_rate": 1, "memory_cost": 1},
      {"name": "B", "arrival_rate": 1, "memory_cost": 1}], "queries": [
      {"name": "ab", "pattern": ["A", "B"], "window": 2, "utility_weight": 1,
       "cpu_cost_per_match": 1}], "semantics": "next"})");
  const auto r = run({"estimate", wl, "--duration", "20000", "--seed", "4"});
  ASSERT_EQ(r.code, 0) << r.err;
  const double n = *parse_workload(r.out).queries[0].expected_matches();
  EXPECT_GT(n, 0.0);
  EXPECT_LT(n, 1.0);  // next-match keeps a subset of any-match matches
  EXPECT_EQ(run({"estimate", wl, "--duration", "20000", "--seed", "4"}).out, r.out);
}

TEST(Cli, EstimateNamesUndeclaredType) {
  const auto wl = temp_file("ghost.json", R"({"event_types": [], "queries": [
      {"name": "q", "pattern": ["Ghost"], "window": 1, "utility_weight": 1,
       "cpu_cost_per_match": 1}]})");
  const auto r = run({"estimate", wl});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("'Ghost'"), std::string::npos);
}

TEST(Cli, VerifyExampleWorkloads) {
  const auto r4 = run({"verify", kDir + "/example4.json"});
  EXPECT_EQ(r4.code, 0) << r4.out;
  EXPECT_NE(r4.out.find("optimum imls  6\n"), std::string::npos);
  const auto r5 = run({"verify", kDir + "/example5.json"});
  EXPECT_EQ(r5.code, 0) << r5.out;
  EXPECT_NE(r5.out.find("optimum icls  10\n"), std::string::npos);
  const auto r6 = run({"verify", kDir + "/example6.json"});
  EXPECT_EQ(r6.code, 0) << r6.out;
  EXPECT_NE(r6.out.find("optimum idls  6\n"), std::string::npos);
}

TEST(Cli, VerifyEmptyWorkloadPassesVacuously) {
  const auto r = run({"verify", temp_file("empty.json", R"({"event_types": [], "queries": []})")});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("result PASS (0 checks)"), std::string::npos);
}

TEST(Cli, VerifyRandomSuite) {
  const auto r = run({"verify", "--random", "25", "--max-types", "6", "--tau", "0.5",
                      "--eps", "0.1", "--k", "2,4", "--seed", "3"});
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(run({"verify", "--random", "25", "--max-types", "6", "--tau", "0.5", "--eps", "0.1",
                 "--k", "2,4", "--seed", "3"})
                .out,
            r.out);
}

}  // namespace
}  // namespace cepshed
