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

#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <vector>

#include "cepshed/error.hpp"
#include "cepshed/event_model.hpp"
#include "cepshed/matcher.hpp"

namespace cepshed {

struct RateEstimate {
  std::vector<double> per_type_rate;  // indexed by TypeHandle, events per unit time
  double observation_span = 1.0;

  double rate(TypeHandle h) const {
    if (h.index() >= per_type_rate.size()) {
      fail(ErrorCode::kUnknownEventType,
           "no rate for event type handle " + std::to_string(h.value));
    }
    return per_type_rate[h.index()];
  }
};

/// Rates as declared on the alphabet itself.
inline RateEstimate declared_rates(const Alphabet& alphabet) {
  RateEstimate r;
  r.observation_span = 1.0;
  for (const auto& t : alphabet.types()) r.per_type_rate.push_back(t.arrival_rate);
  return r;
}

/// lambda_j = (instances of type j in the sample) / span.
inline RateEstimate estimate_rates(const Alphabet& alphabet, const EventSequence& sample,
                                   double span) {
  if (!(span > 0.0) || !std::isfinite(span)) {
    fail(ErrorCode::kNonPositiveSpan, "observation span must be positive");
  }
  if (!sample.empty() && sample[sample.size() - 1].timestamp - sample[0].timestamp > span) {
    fail(ErrorCode::kInvalidArgument, "observation span is shorter than the sample");
  }
  RateEstimate r;
  r.observation_span = span;
  r.per_type_rate.assign(alphabet.size(), 0.0);
  std::vector<std::size_t> counts(alphabet.size(), 0);
  for (const auto& e : sample) {
    if (!alphabet.contains(e.type)) {
      fail(ErrorCode::kUnknownEventType,
           "sample contains event type handle " + std::to_string(e.type.value));
    }
    ++counts[e.type.index()];
  }
  for (std::size_t j = 0; j < counts.size(); ++j) {
    r.per_type_rate[j] = static_cast<double>(counts[j]) / span;
  }
  return r;
}

/// Expected matches per unit time of a skip-till-any-match query under
/// independent Poisson arrivals.
///
/// With l_e = lambda_e * T the expected occurrences of type e in one window,
/// L their sum and m(e) the multiplicity of e in the pattern, the expected
/// number of matches inside one window is
///
///     C(L, |Q|) * prod_e prod_{k<m(e)} (l_e - k) / prod_{r<|Q|} (L - r)
///
/// and the rate is that divided by T.  The binomial is taken in falling
/// factorial form, so it cancels against the denominator to 1/|Q|!; this keeps
/// real-valued and small L well defined.  Negative factors (l_e < m(e) - 1)
/// clamp the result to zero.
inline double expected_matches_analytic(const Query& query, const RateEstimate& rates,
                                        MatchSemantics semantics = MatchSemantics::kAnyMatch) {
  if (semantics != MatchSemantics::kAnyMatch) {
    fail(ErrorCode::kUnsupportedSemantics,
         "analytic match estimate is only defined for skip-till-any-match");
  }
  const double window = query.window();
  std::map<TypeHandle, std::size_t> multiplicity;
  for (auto h : query.pattern()) ++multiplicity[h];

  double numerator = 1.0;
  for (const auto& [type, m] : multiplicity) {
    const double expected = rates.rate(type) * window;
    for (std::size_t k = 0; k < m; ++k) {
      const double factor = expected - static_cast<double>(k);
      if (factor <= 0.0) return 0.0;
      numerator *= factor;
    }
  }
  double factorial = 1.0;
  for (std::size_t r = 2; r <= query.length(); ++r) factorial *= static_cast<double>(r);
  return numerator / factorial / window;
}

/// Matches in the sample per unit of observed time.
inline double expected_matches_empirical(const Alphabet& alphabet, const EventSequence& sample,
                                         double span, const Query& query,
                                         MatchSemantics semantics,
                                         WindowAccounting accounting = WindowAccounting::kSliding) {
  if (!(span > 0.0) || !std::isfinite(span)) {
    fail(ErrorCode::kNonPositiveSpan, "observation span must be positive");
  }
  const auto c = count_matches(alphabet, sample, query, semantics, accounting);
  return static_cast<double>(c) / span;
}

}  // namespace cepshed
