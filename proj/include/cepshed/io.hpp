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

// JSON workload and plan files.  The schema is strict: unknown fields are
// errors, and every error names the offending field path.

#pragma once

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "cepshed/error.hpp"
#include "cepshed/event_model.hpp"
#include "cepshed/planner/instance.hpp"
#include "cepshed/simulator.hpp"

namespace cepshed {

inline constexpr std::string_view kToolVersion = "0.1.0";

using Json = nlohmann::ordered_json;

/// Shortest decimal text that reads back as the same double.
inline std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace detail {

[[noreturn]] inline void parse_fail(const std::string& path, const std::string& msg) {
  fail(ErrorCode::kParseError, path + ": " + msg);
}

inline Json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
         ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    fail(ErrorCode::kParseError, source + ":" + std::to_string(line) + ":" +
                                     std::to_string(col) + ": invalid JSON (" + e.what() + ")");
  }
}

inline void check_object(const Json& j, const std::string& path,
                         std::initializer_list<std::string_view> required,
                         std::initializer_list<std::string_view> optional = {}) {
  if (!j.is_object()) parse_fail(path, "expected an object");
  for (auto key : required) {
    if (!j.contains(std::string(key))) parse_fail(path, "missing field '" + std::string(key) + "'");
  }
  for (const auto& [key, _] : j.items()) {
    const bool known =
        std::find(required.begin(), required.end(), key) != required.end() ||
        std::find(optional.begin(), optional.end(), key) != optional.end();
    if (!known) parse_fail(path, "unknown field '" + key + "'");
  }
}

inline double number_at(const Json& j, const std::string& key, const std::string& path) {
  const auto& v = j.at(key);
  if (!v.is_number()) parse_fail(path + "." + key, "expected a number");
  return v.get<double>();
}

inline std::string string_at(const Json& j, const std::string& key, const std::string& path) {
  const auto& v = j.at(key);
  if (!v.is_string()) parse_fail(path + "." + key, "expected a string");
  return v.get<std::string>();
}

inline bool bool_at(const Json& j, const std::string& key, const std::string& path) {
  const auto& v = j.at(key);
  if (!v.is_boolean()) parse_fail(path + "." + key, "expected true or false");
  return v.get<bool>();
}

inline const Json& array_at(const Json& j, const std::string& key, const std::string& path) {
  const auto& v = j.at(key);
  if (!v.is_array()) parse_fail(path + "." + key, "expected an array");
  return v;
}

/// Runs `body`, re-raising library validation errors as parse errors at `path`.
template <class F>
auto at_path(const std::string& path, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kParseError) throw;
    parse_fail(path, e.what());
  }
}

}  // namespace detail

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kInvalidArgument, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Workload {
  Alphabet alphabet;
  std::vector<Query> queries;
  std::optional<double> memory_budget;
  std::optional<double> cpu_budget;
  MatchSemantics semantics = MatchSemantics::kAnyMatch;

  ProblemInstance instance() const {
    return ProblemInstance(alphabet, queries, memory_budget, cpu_budget);
  }

  friend bool operator==(const Workload&, const Workload&) = default;
};

inline Workload parse_workload(const std::string& text, const std::string& source = "workload") {
  using namespace detail;
  const Json root = parse_json_text(text, source);
  check_object(root, source, {"event_types", "queries"}, {"budgets", "semantics"});
  Workload w;

  const auto& types = array_at(root, "event_types", source);
  for (std::size_t j = 0; j < types.size(); ++j) {
    const std::string path = source + ".event_types[" + std::to_string(j) + "]";
    check_object(types[j], path, {"name", "arrival_rate", "memory_cost"});
    EventType t{string_at(types[j], "name", path), number_at(types[j], "memory_cost", path),
                number_at(types[j], "arrival_rate", path)};
    at_path(path, [&] { return w.alphabet.add(std::move(t)); });
  }

  const auto& queries = array_at(root, "queries", source);
  std::set<std::string> names;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const std::string path = source + ".queries[" + std::to_string(i) + "]";
    const auto& q = queries[i];
    check_object(q, path, {"name", "pattern", "window", "utility_weight", "cpu_cost_per_match"},
                 {"expected_matches"});
    const std::string name = string_at(q, "name", path);
    if (!names.insert(name).second) parse_fail(path + ".name", "duplicate query '" + name + "'");
    std::vector<TypeHandle> pattern;
    const auto& pat = array_at(q, "pattern", path);
    for (std::size_t k = 0; k < pat.size(); ++k) {
      const std::string ppath = path + ".pattern[" + std::to_string(k) + "]";
      if (!pat[k].is_string()) parse_fail(ppath, "expected an event type name");
      const auto type_name = pat[k].get<std::string>();
      auto h = w.alphabet.find(type_name);
      if (!h) parse_fail(ppath, "undeclared event type '" + type_name + "'");
      pattern.push_back(*h);
    }
    std::optional<double> n;
    if (q.contains("expected_matches")) n = number_at(q, "expected_matches", path);
    w.queries.push_back(at_path(path, [&] {
      return Query(name, pattern, number_at(q, "window", path),
                   number_at(q, "utility_weight", path), number_at(q, "cpu_cost_per_match", path),
                   n);
    }));
  }

  if (root.contains("budgets")) {
    const std::string path = source + ".budgets";
    const auto& b = root.at("budgets");
    check_object(b, path, {}, {"memory", "cpu"});
    auto budget = [&](const char* key) -> std::optional<double> {
      if (!b.contains(key)) return std::nullopt;
      const double v = number_at(b, key, path);
      if (!(v >= 0.0)) parse_fail(path + "." + key, "budget must be >= 0");
      return v;
    };
    w.memory_budget = budget("memory");
    w.cpu_budget = budget("cpu");
  }
  if (root.contains("semantics")) {
    const auto s = string_at(root, "semantics", source);
    auto sem = parse_semantics(s);
    if (!sem) parse_fail(source + ".semantics", "unknown semantics '" + s + "'");
    w.semantics = *sem;
  }
  return w;
}

inline Json workload_to_json(const Workload& w) {
  Json root;
  Json types = Json::array();
  for (const auto& t : w.alphabet.types()) {
    types.push_back({{"name", t.id}, {"arrival_rate", t.arrival_rate},
                     {"memory_cost", t.memory_cost}});
  }
  root["event_types"] = std::move(types);
  Json queries = Json::array();
  for (const auto& q : w.queries) {
    Json pattern = Json::array();
    for (auto h : q.pattern()) pattern.push_back(w.alphabet[h].id);
    Json jq{{"name", q.id()},
            {"pattern", std::move(pattern)},
            {"window", q.window()},
            {"utility_weight", q.utility_weight()},
            {"cpu_cost_per_match", q.cpu_cost_per_match()}};
    if (q.expected_matches()) jq["expected_matches"] = *q.expected_matches();
    queries.push_back(std::move(jq));
  }
  root["queries"] = std::move(queries);
  Json budgets = Json::object();
  if (w.memory_budget) budgets["memory"] = *w.memory_budget;
  if (w.cpu_budget) budgets["cpu"] = *w.cpu_budget;
  root["budgets"] = std::move(budgets);
  root["semantics"] = std::string(to_string(w.semantics));
  return root;
}

inline std::string emit_workload(const Workload& w) { return workload_to_json(w).dump(2) + "\n"; }

struct PlanParameters {
  std::optional<double> tau;
  std::optional<double> eps;
  std::optional<std::size_t> k;
  std::optional<double> resolution;

  friend bool operator==(const PlanParameters&, const PlanParameters&) = default;
};

struct PlanFile {
  std::string tool_version{kToolVersion};
  std::string variant;  // imls, fmls, icls, fcls, idls, fdls-eval
  std::string algorithm;
  PlanParameters parameters;
  std::vector<std::string> type_names;
  std::vector<std::string> query_names;
  AnyPlan plan;
  PlanEvaluation evaluation;

  bool integral() const { return std::holds_alternative<IntegralPlan>(plan); }

  friend bool operator==(const PlanFile&, const PlanFile&) = default;
};

inline Json guarantee_to_json(const Guarantee& g) {
  Json j{{"kind", to_string(g.kind)}, {"parameter", g.parameter}, {"bound", g.bound}};
  if (g.memory_limit) j["memory_limit"] = *g.memory_limit;
  if (g.cpu_limit) j["cpu_limit"] = *g.cpu_limit;
  j["note"] = g.note;
  return j;
}

inline Json plan_to_json(const PlanFile& p) {
  Json root;
  root["tool_version"] = p.tool_version;
  root["variant"] = p.variant;
  root["algorithm"] = p.algorithm;
  Json params = Json::object();
  if (p.parameters.tau) params["tau"] = *p.parameters.tau;
  if (p.parameters.eps) params["eps"] = *p.parameters.eps;
  if (p.parameters.k) params["k"] = *p.parameters.k;
  if (p.parameters.resolution) params["resolution"] = *p.parameters.resolution;
  root["parameters"] = std::move(params);

  auto names_map = [](const std::vector<std::string>& names, auto&& value_of) {
    Json m = Json::object();
    for (std::size_t k = 0; k < names.size(); ++k) m[names[k]] = value_of(k);
    return m;
  };
  if (const auto* ip = std::get_if<IntegralPlan>(&p.plan)) {
    root["keep_event"] =
        names_map(p.type_names, [&](std::size_t k) { return bool(ip->keep_event[k]); });
    root["keep_query"] =
        names_map(p.query_names, [&](std::size_t k) { return bool(ip->keep_query[k]); });
  } else {
    const auto& fp = std::get<FractionalPlan>(p.plan);
    root["sample_event"] = names_map(p.type_names, [&](std::size_t k) { return fp.sample_event[k]; });
    root["sample_query"] = names_map(p.query_names, [&](std::size_t k) { return fp.sample_query[k]; });
  }
  const auto& ev = p.evaluation;
  root["evaluation"] = Json{{"expected_utility", ev.expected_utility},
                            {"memory_use", ev.memory_use},
                            {"cpu_use", ev.cpu_use},
                            {"feasible_memory", ev.feasible_memory},
                            {"feasible_cpu", ev.feasible_cpu}};
  root["guarantee"] = ev.guarantee ? guarantee_to_json(*ev.guarantee) : Json(nullptr);
  return root;
}

inline std::string emit_plan(const PlanFile& p) { return plan_to_json(p).dump(2) + "\n"; }

inline PlanFile parse_plan(const std::string& text, const std::string& source = "plan") {
  using namespace detail;
  const Json root = parse_json_text(text, source);
  if (!root.is_object()) parse_fail(source, "expected an object");
  const bool integral = root.contains("keep_event");
  if (integral) {
    check_object(root, source,
                 {"tool_version", "variant", "algorithm", "parameters", "keep_event",
                  "keep_query", "evaluation", "guarantee"});
  } else {
    check_object(root, source,
                 {"tool_version", "variant", "algorithm", "parameters", "sample_event",
                  "sample_query", "evaluation", "guarantee"});
  }
  PlanFile p;
  p.tool_version = string_at(root, "tool_version", source);
  p.variant = string_at(root, "variant", source);
  static const std::set<std::string> variants{"imls", "fmls", "icls", "fcls", "idls", "fdls-eval"};
  if (!variants.contains(p.variant)) {
    parse_fail(source + ".variant", "unknown variant '" + p.variant + "'");
  }
  p.algorithm = string_at(root, "algorithm", source);

  const std::string ppath = source + ".parameters";
  const auto& params = root.at("parameters");
  check_object(params, ppath, {}, {"tau", "eps", "k", "resolution"});
  if (params.contains("tau")) p.parameters.tau = number_at(params, "tau", ppath);
  if (params.contains("eps")) p.parameters.eps = number_at(params, "eps", ppath);
  if (params.contains("resolution")) {
    p.parameters.resolution = number_at(params, "resolution", ppath);
  }
  if (params.contains("k")) {
    if (!params.at("k").is_number_unsigned()) parse_fail(ppath + ".k", "expected a positive integer");
    p.parameters.k = params.at("k").get<std::size_t>();
  }

  auto read_map = [&](const char* key, auto&& read_value, auto& names, auto& values) {
    const std::string path = source + "." + key;
    const auto& m = root.at(key);
    if (!m.is_object()) parse_fail(path, "expected an object");
    for (const auto& [name, v] : m.items()) {
      names.push_back(name);
      values.push_back(read_value(v, path + "." + name));
    }
  };
  auto read_bool = [](const Json& v, const std::string& path) {
    if (!v.is_boolean()) parse_fail(path, "expected true or false");
    return v.get<bool>();
  };
  auto read_rate = [](const Json& v, const std::string& path) {
    if (!v.is_number()) parse_fail(path, "expected a number");
    const double r = v.get<double>();
    if (!(r >= 0.0 && r <= 1.0)) parse_fail(path, "sampling rate outside [0, 1]");
    return r;
  };
  if (integral) {
    IntegralPlan ip;
    read_map("keep_event", read_bool, p.type_names, ip.keep_event);
    read_map("keep_query", read_bool, p.query_names, ip.keep_query);
    p.plan = std::move(ip);
  } else {
    FractionalPlan fp;
    read_map("sample_event", read_rate, p.type_names, fp.sample_event);
    read_map("sample_query", read_rate, p.query_names, fp.sample_query);
    p.plan = std::move(fp);
  }

  const std::string epath = source + ".evaluation";
  const auto& ev = root.at("evaluation");
  check_object(ev, epath,
               {"expected_utility", "memory_use", "cpu_use", "feasible_memory", "feasible_cpu"});
  p.evaluation.expected_utility = number_at(ev, "expected_utility", epath);
  p.evaluation.memory_use = number_at(ev, "memory_use", epath);
  p.evaluation.cpu_use = number_at(ev, "cpu_use", epath);
  p.evaluation.feasible_memory = bool_at(ev, "feasible_memory", epath);
  p.evaluation.feasible_cpu = bool_at(ev, "feasible_cpu", epath);

  const auto& g = root.at("guarantee");
  if (!g.is_null()) {
    const std::string gpath = source + ".guarantee";
    check_object(g, gpath, {"kind", "parameter", "bound", "note"}, {"memory_limit", "cpu_limit"});
    Guarantee out;
    const auto kind = string_at(g, "kind", gpath);
    bool found = false;
    for (auto k : {GuaranteeKind::kExact, GuaranteeKind::kBicriteria, GuaranteeKind::kTricriteria,
                   GuaranteeKind::kRatio, GuaranteeKind::kFptas, GuaranteeKind::kGridRelative}) {
      if (kind == to_string(k)) {
        out.kind = k;
        found = true;
      }
    }
    if (!found) parse_fail(gpath + ".kind", "unknown guarantee kind '" + kind + "'");
    out.parameter = number_at(g, "parameter", gpath);
    out.bound = number_at(g, "bound", gpath);
    if (g.contains("memory_limit")) out.memory_limit = number_at(g, "memory_limit", gpath);
    if (g.contains("cpu_limit")) out.cpu_limit = number_at(g, "cpu_limit", gpath);
    out.note = string_at(g, "note", gpath);
    p.evaluation.guarantee = std::move(out);
  }
  return p;
}

/// Re-indexes a plan file's decisions onto the workload's type and query
/// order.  The name sets must match exactly.
inline AnyPlan align_plan(const PlanFile& file, const Workload& w) {
  auto order = [](const std::vector<std::string>& have, const std::vector<std::string>& want,
                  const char* what) {
    std::vector<std::size_t> pos;
    if (have.size() != want.size()) {
      fail(ErrorCode::kIncompatiblePlan, std::string("plan lists ") + std::to_string(have.size()) +
                                             " " + what + ", workload has " +
                                             std::to_string(want.size()));
    }
    for (const auto& name : want) {
      const auto it = std::find(have.begin(), have.end(), name);
      if (it == have.end()) {
        fail(ErrorCode::kIncompatiblePlan,
             std::string("plan has no decision for ") + what + " '" + name + "'");
      }
      pos.push_back(static_cast<std::size_t>(it - have.begin()));
    }
    return pos;
  };
  std::vector<std::string> types, queries;
  for (const auto& t : w.alphabet.types()) types.push_back(t.id);
  for (const auto& q : w.queries) queries.push_back(q.id());
  const auto tpos = order(file.type_names, types, "event types");
  const auto qpos = order(file.query_names, queries, "queries");
  if (const auto* ip = std::get_if<IntegralPlan>(&file.plan)) {
    IntegralPlan out;
    for (auto k : tpos) out.keep_event.push_back(ip->keep_event[k]);
    for (auto k : qpos) out.keep_query.push_back(ip->keep_query[k]);
    return out;
  }
  const auto& fp = std::get<FractionalPlan>(file.plan);
  FractionalPlan out;
  for (auto k : tpos) out.sample_event.push_back(fp.sample_event[k]);
  for (auto k : qpos) out.sample_query.push_back(fp.sample_query[k]);
  return out;
}

}  // namespace cepshed
