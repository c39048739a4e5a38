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

// Poisson stream simulation of shedding plans.  Every trial draws from its
// own engine seeded by (seed, trial), so results do not depend on how trials
// are spread over threads.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <queue>
#include <random>
#include <string>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

#include "cepshed/error.hpp"
#include "cepshed/estimation.hpp"
#include "cepshed/event_model.hpp"
#include "cepshed/matcher.hpp"
#include "cepshed/planner/instance.hpp"

namespace cepshed {

using Engine = std::mt19937_64;

inline Engine make_engine(std::uint64_t seed, std::uint64_t stream, std::uint64_t trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(trial),
                    static_cast<std::uint32_t>(trial >> 32)};
  return Engine(seq);
}

/// Independent Poisson processes per type on [0, duration), merged in time
/// order.  Coincident timestamps are pushed apart by one ulp so the result
/// satisfies the strict ordering invariant.
inline EventSequence generate_stream(const RateEstimate& rates, double duration, Engine& rng) {
  if (!(duration > 0.0) || !std::isfinite(duration)) {
    fail(ErrorCode::kInvalidArgument, "duration must be positive and finite");
  }
  std::vector<EventInstance> events;
  for (std::size_t j = 0; j < rates.per_type_rate.size(); ++j) {
    const double lambda = rates.per_type_rate[j];
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
      fail(ErrorCode::kInvalidArgument, "arrival rates must be nonnegative and finite");
    }
    if (lambda == 0.0) continue;
    std::exponential_distribution<double> gap(lambda);
    for (double t = gap(rng); t < duration; t += gap(rng)) {
      events.push_back({TypeHandle{static_cast<std::uint32_t>(j)}, t});
    }
  }
  std::sort(events.begin(), events.end(), [](const EventInstance& a, const EventInstance& b) {
    return a.timestamp < b.timestamp || (a.timestamp == b.timestamp && a.type < b.type);
  });
  for (std::size_t i = 1; i < events.size(); ++i) {
    if (events[i].timestamp <= events[i - 1].timestamp) {
      events[i].timestamp = std::nextafter(events[i - 1].timestamp, duration * 2.0 + 1.0);
    }
  }
  return validate_sequence(std::move(events));
}

inline EventSequence generate_stream(const RateEstimate& rates, double duration,
                                     std::uint64_t seed) {
  auto rng = make_engine(seed, 0, 0);
  return generate_stream(rates, duration, rng);
}

/// Drops every instance of a type whose keep bit is off.
inline EventSequence apply_plan(const EventSequence& stream, const IntegralPlan& plan) {
  std::vector<EventInstance> kept;
  for (const auto& e : stream) {
    if (e.type.index() >= plan.keep_event.size()) {
      fail(ErrorCode::kUnknownEventType,
           "plan has no decision for event type handle " + std::to_string(e.type.value));
    }
    if (plan.keep_event[e.type.index()]) kept.push_back(e);
  }
  return validate_sequence(std::move(kept));
}

/// Keeps each instance of type j independently with probability x̄_j.
inline EventSequence apply_plan(const EventSequence& stream, const FractionalPlan& plan,
                                Engine& rng) {
  std::vector<EventInstance> kept;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const auto& e : stream) {
    if (e.type.index() >= plan.sample_event.size()) {
      fail(ErrorCode::kUnknownEventType,
           "plan has no sampling rate for event type handle " + std::to_string(e.type.value));
    }
    if (u(rng) < plan.sample_event[e.type.index()]) kept.push_back(e);
  }
  return validate_sequence(std::move(kept));
}

inline EventSequence apply_plan(const EventSequence& stream, const FractionalPlan& plan,
                                std::uint64_t seed) {
  auto rng = make_engine(seed, 1, 0);
  return apply_plan(stream, plan, rng);
}

using AnyPlan = std::variant<IntegralPlan, FractionalPlan>;

struct SimulationConfig {
  double duration = 1000.0;
  std::size_t trials = 30;
  std::uint64_t seed = 0;
  MatchSemantics semantics = MatchSemantics::kAnyMatch;
  WindowAccounting accounting = WindowAccounting::kTumbling;
  unsigned threads = 1;  // affects speed only
};

struct QueryStats {
  std::string query_id;
  double mean_matches = 0.0;  // produced matches per trial
  double mean_rate = 0.0;     // produced matches per unit time
};

struct SimulationReport {
  double mean_utility = 0.0;  // per unit time
  double utility_stderr = 0.0;
  std::vector<QueryStats> per_query;
  double cpu_per_unit_time = 0.0;
  double mean_peak_occupancy = 0.0;
  double max_peak_occupancy = 0.0;
  double mean_average_occupancy = 0.0;
  double planned_memory = 0.0;  // sum_j a_j x_j of the plan
  double planned_cpu = 0.0;
  std::size_t trials_run = 0;

  friend bool operator==(const SimulationReport& a, const SimulationReport& b) {
    auto same_q = [](const QueryStats& x, const QueryStats& y) {
      return x.query_id == y.query_id && x.mean_matches == y.mean_matches &&
             x.mean_rate == y.mean_rate;
    };
    return a.mean_utility == b.mean_utility && a.utility_stderr == b.utility_stderr &&
           std::equal(a.per_query.begin(), a.per_query.end(), b.per_query.begin(),
                      b.per_query.end(), same_q) &&
           a.cpu_per_unit_time == b.cpu_per_unit_time &&
           a.mean_peak_occupancy == b.mean_peak_occupancy &&
           a.max_peak_occupancy == b.max_peak_occupancy &&
           a.mean_average_occupancy == b.mean_average_occupancy &&
           a.planned_memory == b.planned_memory && a.planned_cpu == b.planned_cpu &&
           a.trials_run == b.trials_run;
  }
};

namespace detail {

struct TrialResult {
  double utility_rate = 0.0;
  double cpu_rate = 0.0;
  std::vector<double> matches;
  std::vector<double> rates;
  double peak = 0.0;
  double average = 0.0;
};

struct Occupancy {
  double peak = 0.0;
  double average = 0.0;
};

/// Each retained event occupies m_j for `horizon[j]` time units after its
/// arrival.  The peak is reached at some arrival, so a sweep over arrivals
/// with a queue of expiry times suffices.
inline Occupancy occupancy(const Alphabet& alphabet, const EventSequence& stream,
                           const std::vector<double>& horizon, double duration) {
  using Item = std::pair<double, double>;  // expiry, memory
  std::priority_queue<Item, std::vector<Item>, std::greater<>> live;
  double current = 0.0;
  Occupancy occ;
  double area = 0.0;
  for (const auto& e : stream) {
    const double h = horizon[e.type.index()];
    if (h <= 0.0) continue;
    while (!live.empty() && live.top().first < e.timestamp) {
      current -= live.top().second;
      live.pop();
    }
    const double m = alphabet[e.type].memory_cost;
    live.emplace(e.timestamp + h, m);
    current += m;
    occ.peak = std::max(occ.peak, current);
    area += m * std::min(h, duration - e.timestamp);
  }
  occ.average = area / duration;
  return occ;
}

}  // namespace detail

/// Runs `config.trials` independent trials of: draw a Poisson stream with the
/// declared rates, shed it according to the plan, count matches of the
/// produced queries.
///
/// Integral plans gate whole queries by keep_query.  Fractional plans sample
/// events by x̄_j and then keep each match of query i with probability
/// ȳ_i / prod x̄_j, so the expected produced rate is n_i ȳ_i.
///
/// With tumbling accounting each query counts matches inside consecutive
/// blocks of its own window over the complete blocks of the run, and rates
/// divide by the covered time.  With sliding accounting every match in the
/// stream counts and rates divide by the duration.
inline SimulationReport simulate(const ProblemInstance& inst, const AnyPlan& plan,
                                 const SimulationConfig& config) {
  if (!(config.duration > 0.0) || !std::isfinite(config.duration)) {
    fail(ErrorCode::kInvalidArgument, "duration must be positive and finite");
  }
  if (config.trials == 0) fail(ErrorCode::kInvalidArgument, "trials must be at least 1");
  const auto& alphabet = inst.alphabet();
  const std::size_t nq = inst.num_queries();

  const bool integral = std::holds_alternative<IntegralPlan>(plan);
  std::vector<double> gate(nq, 0.0);
  SimulationReport report;
  if (integral) {
    const auto& p = std::get<IntegralPlan>(plan);
    detail::check_dimensions(inst, p.keep_event.size(), p.keep_query.size());
    const auto ev = evaluate_integral(inst, p, Coupling::kInequality);
    report.planned_memory = ev.memory_use;
    report.planned_cpu = ev.cpu_use;
    for (std::size_t i = 0; i < nq; ++i) gate[i] = p.keep_query[i] ? 1.0 : 0.0;
  } else {
    const auto& p = std::get<FractionalPlan>(plan);
    const auto ev = evaluate_fractional(inst, p, Coupling::kInequality);
    report.planned_memory = ev.memory_use;
    report.planned_cpu = ev.cpu_use;
    for (std::size_t i = 0; i < nq; ++i) {
      const double prod = survival_probability(inst, p, i);
      gate[i] = prod > 0.0 ? std::min(1.0, p.sample_query[i] / prod) : 0.0;
    }
  }

  std::vector<double> counted_time(nq, config.duration);
  if (config.accounting == WindowAccounting::kTumbling) {
    for (std::size_t i = 0; i < nq; ++i) {
      const double window = inst.queries()[i].window();
      const double blocks = std::floor(config.duration / window);
      if (blocks < 1.0) {
        fail(ErrorCode::kInvalidArgument, "duration is shorter than the window of query '" +
                                              inst.queries()[i].id() + "'");
      }
      counted_time[i] = blocks * window;
    }
  }

  std::vector<double> horizon(inst.num_types(), 0.0);
  for (const auto& q : inst.queries()) {
    for (auto h : q.pattern()) horizon[h.index()] = std::max(horizon[h.index()], q.window());
  }
  const auto rates = declared_rates(alphabet);

  auto run_trial = [&](std::size_t t) {
    auto stream_rng = make_engine(config.seed, 0, t);
    auto shed_rng = make_engine(config.seed, 1, t);
    auto gate_rng = make_engine(config.seed, 2, t);
    const auto stream = generate_stream(rates, config.duration, stream_rng);
    const auto shed = integral ? apply_plan(stream, std::get<IntegralPlan>(plan))
                               : apply_plan(stream, std::get<FractionalPlan>(plan), shed_rng);
    detail::TrialResult r;
    r.matches.assign(nq, 0.0);
    r.rates.assign(nq, 0.0);
    for (std::size_t i = 0; i < nq; ++i) {
      if (gate[i] <= 0.0) continue;
      const auto& q = inst.queries()[i];
      StreamingMatchCounter counter(q, config.semantics, config.accounting);
      for (const auto& e : shed) {
        if (e.timestamp >= counted_time[i]) break;
        counter.push(e);
      }
      std::uint64_t produced = counter.count();
      if (gate[i] < 1.0) {
        std::binomial_distribution<std::uint64_t> thin(produced, gate[i]);
        produced = thin(gate_rng);
      }
      r.matches[i] = static_cast<double>(produced);
      r.rates[i] = r.matches[i] / counted_time[i];
      r.utility_rate += q.utility_weight() * r.rates[i];
      r.cpu_rate += q.cpu_cost_per_match() * r.rates[i];
    }
    const auto occ = detail::occupancy(alphabet, shed, horizon, config.duration);
    r.peak = occ.peak;
    r.average = occ.average;
    return r;
  };

  std::vector<detail::TrialResult> results(config.trials);
  const unsigned workers =
      std::max(1u, std::min<unsigned>(config.threads, static_cast<unsigned>(config.trials)));
  if (workers == 1) {
    for (std::size_t t = 0; t < config.trials; ++t) results[t] = run_trial(t);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t t = w; t < config.trials; t += workers) results[t] = run_trial(t);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  // Reduction in trial order keeps the report bit-identical for any thread count.
  const auto n = static_cast<double>(config.trials);
  report.trials_run = config.trials;
  report.per_query.resize(nq);
  for (std::size_t i = 0; i < nq; ++i) report.per_query[i].query_id = inst.queries()[i].id();
  for (const auto& r : results) {
    report.mean_utility += r.utility_rate;
    report.cpu_per_unit_time += r.cpu_rate;
    report.mean_peak_occupancy += r.peak;
    report.max_peak_occupancy = std::max(report.max_peak_occupancy, r.peak);
    report.mean_average_occupancy += r.average;
    for (std::size_t i = 0; i < nq; ++i) {
      report.per_query[i].mean_matches += r.matches[i];
      report.per_query[i].mean_rate += r.rates[i];
    }
  }
  report.mean_utility /= n;
  report.cpu_per_unit_time /= n;
  report.mean_peak_occupancy /= n;
  report.mean_average_occupancy /= n;
  for (auto& qs : report.per_query) {
    qs.mean_matches /= n;
    qs.mean_rate /= n;
  }
  if (config.trials > 1) {
    double ss = 0.0;
    for (const auto& r : results) {
      const double dev = r.utility_rate - report.mean_utility;
      ss += dev * dev;
    }
    report.utility_stderr = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return report;
}

struct AdversarialReport {
  double offline_mean = 0.0;
  double online_mean = 0.0;
  double online_stderr = 0.0;
  double ratio = 0.0;  // online / offline
  std::size_t trials = 0;
};

/// The online-vs-offline construction: 3m types E_i, E'_i, E''_i and 2m unit
/// queries SEQ(E_i, E''_i), SEQ(E'_i, E''_i).  A stream is e_1..e_m, X where
/// e_i is E_i or E'_i by a fair coin and X = E''_k for uniform k.  With room
/// for two events, the offline policy sees X and keeps e_k; the online policy
/// must commit to one e_j before X arrives.  Utilities are counted by the
/// matcher on the retained events.
inline AdversarialReport adversarial_demo(std::size_t m, std::size_t trials, std::uint64_t seed) {
  if (m < 2) fail(ErrorCode::kInvalidArgument, "adversarial demo needs m >= 2");
  if (trials == 0) fail(ErrorCode::kInvalidArgument, "trials must be at least 1");
  Alphabet sigma;
  for (const char* prefix : {"E", "E'", "E''"}) {
    for (std::size_t i = 1; i <= m; ++i) sigma.add({std::string(prefix) + std::to_string(i), 1, 1});
  }
  auto plain = [](std::size_t i) { return TypeHandle{static_cast<std::uint32_t>(i)}; };
  auto primed = [m](std::size_t i) { return TypeHandle{static_cast<std::uint32_t>(m + i)}; };
  auto closer = [m](std::size_t i) { return TypeHandle{static_cast<std::uint32_t>(2 * m + i)}; };
  const double window = static_cast<double>(m) + 1.0;
  std::vector<Query> queries;
  for (std::size_t i = 0; i < m; ++i) {
    queries.emplace_back("Q" + std::to_string(i + 1), std::vector{plain(i), closer(i)}, window, 1.0,
                         1.0);
    queries.emplace_back("Q'" + std::to_string(i + 1), std::vector{primed(i), closer(i)}, window,
                         1.0, 1.0);
  }

  auto rng = make_engine(seed, 3, 0);
  std::bernoulli_distribution coin(0.5);
  std::uniform_int_distribution<std::size_t> pick(0, m - 1);
  std::vector<TypeHandle> prefix(m);
  double offline = 0.0, online = 0.0, online_sq = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    for (std::size_t i = 0; i < m; ++i) prefix[i] = coin(rng) ? plain(i) : primed(i);
    const std::size_t stored = pick(rng);  // online choice, made before X is seen
    const std::size_t k = pick(rng);
    const EventInstance x{closer(k), window};

    auto retained_utility = [&](std::size_t j) {
      const auto seq = validate_sequence(
          {EventInstance{prefix[j], static_cast<double>(j) + 1.0}, x});
      return utility(sigma, seq, queries, MatchSemantics::kAnyMatch).total_utility;
    };
    offline += retained_utility(k);
    const double u = retained_utility(stored);
    online += u;
    online_sq += u * u;
  }
  AdversarialReport r;
  const auto n = static_cast<double>(trials);
  r.trials = trials;
  r.offline_mean = offline / n;
  r.online_mean = online / n;
  if (trials > 1) {
    const double var = (online_sq - n * r.online_mean * r.online_mean) / (n - 1.0);
    r.online_stderr = std::sqrt(std::max(0.0, var) / n);
  }
  r.ratio = r.offline_mean > 0.0 ? r.online_mean / r.offline_mean : 0.0;
  return r;
}

}  // namespace cepshed
