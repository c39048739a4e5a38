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

// Query matching: enumeration of matches (used for validation), a streaming
// counter that never materializes matches, and utility accounting.

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "cepshed/error.hpp"
#include "cepshed/event_model.hpp"

namespace cepshed {

struct QueryMatch {
  std::string query_id;
  std::vector<std::size_t> indices;
  double span = 0.0;

  friend bool operator==(const QueryMatch&, const QueryMatch&) = default;
};

/// How the time axis is cut into windows when counting over a long stream.
///
/// kSliding counts every distinct match in the stream (span <= window).
/// kTumbling partitions the axis into consecutive blocks [kT, (k+1)T) and
/// counts only matches whose events fall into one block; this is the
/// "matches per window, divided by the window" quantity that the analytic
/// match-rate estimator predicts.
enum class WindowAccounting { kSliding, kTumbling };

constexpr std::string_view to_string(WindowAccounting a) {
  return a == WindowAccounting::kSliding ? "sliding" : "tumbling";
}

namespace detail {

inline std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t out = 0;
  if (__builtin_add_overflow(a, b, &out)) {
    fail(ErrorCode::kCountOverflow, "match count exceeds 64-bit counter");
  }
  return out;
}

}  // namespace detail

/// Counts matches of one query over events pushed in increasing time order.
///
/// Partial matches are kept per first event; a partial match is evicted once
/// the stream moves past its window (or its tumbling block), so memory is
/// proportional to window content rather than stream length.
class StreamingMatchCounter {
 public:
  StreamingMatchCounter(const Query& query, MatchSemantics semantics,
                        WindowAccounting accounting = WindowAccounting::kSliding)
      : pattern_(query.pattern().begin(), query.pattern().end()),
        window_(query.window()),
        semantics_(semantics),
        accounting_(accounting) {
    std::uint32_t max_type = 0;
    for (auto h : pattern_) max_type = std::max(max_type, h.value);
    // positions_[type] lists pattern slots 2..n (0-based 1..n-1) of that
    // type in descending order, so one event extends each prefix at most once.
    positions_.resize(static_cast<std::size_t>(max_type) + 1);
    for (std::size_t l = pattern_.size(); l-- > 1;) {
      positions_[pattern_[l].index()].push_back(l);
    }
  }

  void push(const EventInstance& e) {
    evict(e.timestamp);
    const std::size_t n = pattern_.size();
    const bool relevant = e.type.index() < positions_.size();

    switch (semantics_) {
      case MatchSemantics::kAnyMatch:
        if (relevant) {
          for (auto& p : active_) {
            for (std::size_t l : positions_[e.type.index()]) {
              // counts[l] = ways to match slots 0..l with this first event
              if (p.counts[l - 1] == 0) continue;
              p.counts[l] = detail::checked_add(p.counts[l], p.counts[l - 1]);
              if (l == n - 1) total_ = detail::checked_add(total_, p.counts[l - 1]);
            }
          }
        }
        break;
      case MatchSemantics::kNextMatch:
        // The next pick is forced: it is the first later event of the next
        // slot's type.  Partials therefore advance by exactly one slot.
        for (auto& p : active_) {
          if (p.progress < n && pattern_[p.progress] == e.type) {
            ++p.progress;
            if (p.progress == n) total_ = detail::checked_add(total_, 1);
          }
        }
        std::erase_if(active_, [n](const Partial& p) { return p.progress == n; });
        break;
      case MatchSemantics::kContiguity:
        for (auto& p : active_) {
          if (pattern_[p.progress] == e.type) {
            ++p.progress;
            if (p.progress == n) total_ = detail::checked_add(total_, 1);
          } else {
            p.progress = 0;  // broken run
          }
        }
        std::erase_if(active_,
                      [n](const Partial& p) { return p.progress == 0 || p.progress == n; });
        break;
    }

    if (e.type == pattern_[0]) {
      if (n == 1) {
        total_ = detail::checked_add(total_, 1);
      } else {
        Partial p;
        p.start = e.timestamp;
        p.block = block_of(e.timestamp);
        p.progress = 1;
        if (semantics_ == MatchSemantics::kAnyMatch) {
          p.counts.assign(n, 0);
          p.counts[0] = 1;
        }
        active_.push_back(std::move(p));
      }
    }
  }

  std::uint64_t count() const { return total_; }

 private:
  struct Partial {
    double start = 0.0;
    double block = 0.0;
    std::size_t progress = 0;           // next/contiguity: slots matched so far
    std::vector<std::uint64_t> counts;  // any-match: prefix counts
  };

  double block_of(double t) const { return std::floor(t / window_); }

  void evict(double now) {
    if (accounting_ == WindowAccounting::kSliding) {
      while (!active_.empty() && now - active_.front().start > window_) active_.pop_front();
    } else {
      const double b = block_of(now);
      while (!active_.empty() && active_.front().block != b) active_.pop_front();
    }
  }

  std::vector<TypeHandle> pattern_;
  std::vector<std::vector<std::size_t>> positions_;
  double window_;
  MatchSemantics semantics_;
  WindowAccounting accounting_;
  std::deque<Partial> active_;
  std::uint64_t total_ = 0;
};

inline std::uint64_t count_matches(const Alphabet& alphabet, const EventSequence& seq,
                                   const Query& query, MatchSemantics semantics,
                                   WindowAccounting accounting = WindowAccounting::kSliding) {
  check_query_types(alphabet, query);
  StreamingMatchCounter counter(query, semantics, accounting);
  for (const auto& e : seq) counter.push(e);
  return counter.count();
}

/// All matches of `query` in `seq`, in lexicographic order of index tuples.
/// Exponential in the worst case; meant for validation on short sequences.
inline std::vector<QueryMatch> enumerate_matches(const Alphabet& alphabet,
                                                 const EventSequence& seq, const Query& query,
                                                 MatchSemantics semantics) {
  check_query_types(alphabet, query);
  std::vector<QueryMatch> out;
  const auto pattern = query.pattern();
  const std::size_t n = pattern.size();
  std::vector<std::size_t> picked;
  picked.reserve(n);

  auto extend = [&](auto&& self) -> void {
    const std::size_t l = picked.size();
    if (l == n) {
      const double span = seq[picked.back()].timestamp - seq[picked.front()].timestamp;
      out.push_back(QueryMatch{query.id(), picked, span});
      return;
    }
    const std::size_t from = l == 0 ? 0 : picked.back() + 1;
    for (std::size_t i = from; i < seq.size(); ++i) {
      if (l > 0) {
        if (seq[i].timestamp - seq[picked.front()].timestamp > query.window()) break;
        if (semantics == MatchSemantics::kContiguity && i != from) break;
      }
      if (seq[i].type != pattern[l]) continue;
      picked.push_back(i);
      if (l == 0 || semantics != MatchSemantics::kNextMatch ||
          subsequence_relation(seq, std::span(picked).last(2)).type_contiguous) {
        self(self);
      }
      picked.pop_back();
    }
  };
  extend(extend);
  return out;
}

struct UtilityReport {
  std::map<std::string, std::uint64_t> per_query_counts;
  std::map<std::string, double> per_query_utility;
  double total_utility = 0.0;
};

/// Utility of a sequence: weight times distinct-match count per query, summed.
inline UtilityReport utility(const Alphabet& alphabet, const EventSequence& seq,
                             std::span<const Query> queries, MatchSemantics semantics) {
  UtilityReport report;
  for (const auto& q : queries) {
    const auto c = count_matches(alphabet, seq, q, semantics);
    const double u = q.utility_weight() * static_cast<double>(c);
    report.per_query_counts[q.id()] = c;
    report.per_query_utility[q.id()] = u;
    report.total_utility += u;
  }
  return report;
}

}  // namespace cepshed
