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

// Core data model: event types and their registry, timestamped event
// sequences, sequence queries and the subsequence relations that the
// join semantics are built on.

#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cepshed/error.hpp"

namespace cepshed {

/// Dense handle of an event type inside its Alphabet.
struct TypeHandle {
  std::uint32_t value = 0;

  constexpr std::size_t index() const { return value; }
  friend constexpr auto operator<=>(TypeHandle, TypeHandle) = default;
};

struct EventType {
  std::string id;
  double memory_cost = 1.0;   // memory units per stored instance
  double arrival_rate = 1.0;  // instances per unit time
};

/// The set of event types.  Types are addressed by dense handles assigned in
/// insertion order.
class Alphabet {
 public:
  Alphabet() = default;
  Alphabet(std::initializer_list<EventType> types) {
    for (const auto& t : types) add(t);
  }

  TypeHandle add(EventType type) {
    if (type.id.empty()) fail(ErrorCode::kInvalidArgument, "event type id must be non-empty");
    if (!(type.memory_cost > 0.0) || !std::isfinite(type.memory_cost)) {
      fail(ErrorCode::kInvalidArgument,
           "event type '" + type.id + "': memory_cost must be positive and finite");
    }
    if (!(type.arrival_rate > 0.0) || !std::isfinite(type.arrival_rate)) {
      fail(ErrorCode::kInvalidArgument,
           "event type '" + type.id + "': arrival_rate must be positive and finite");
    }
    if (by_name_.contains(type.id)) {
      fail(ErrorCode::kDuplicateName, "duplicate event type '" + type.id + "'");
    }
    TypeHandle h{static_cast<std::uint32_t>(types_.size())};
    by_name_.emplace(type.id, h);
    types_.push_back(std::move(type));
    return h;
  }

  std::size_t size() const { return types_.size(); }
  bool empty() const { return types_.empty(); }
  bool contains(TypeHandle h) const { return h.index() < types_.size(); }

  const EventType& operator[](TypeHandle h) const { return types_[h.index()]; }
  const EventType& at(TypeHandle h) const {
    if (!contains(h)) {
      fail(ErrorCode::kUnknownEventType,
           "event type handle " + std::to_string(h.value) + " is not in the alphabet");
    }
    return types_[h.index()];
  }

  std::optional<TypeHandle> find(std::string_view name) const {
    auto it = by_name_.find(std::string(name));
    if (it == by_name_.end()) return std::nullopt;
    return it->second;
  }

  TypeHandle handle(std::string_view name) const {
    if (auto h = find(name)) return *h;
    fail(ErrorCode::kUnknownEventType, "unknown event type '" + std::string(name) + "'");
  }

  std::vector<TypeHandle> handles(std::initializer_list<std::string_view> names) const {
    std::vector<TypeHandle> out;
    out.reserve(names.size());
    for (auto n : names) out.push_back(handle(n));
    return out;
  }

  std::span<const EventType> types() const { return types_; }

  friend bool operator==(const Alphabet& a, const Alphabet& b) {
    if (a.types_.size() != b.types_.size()) return false;
    for (std::size_t i = 0; i < a.types_.size(); ++i) {
      const auto& x = a.types_[i];
      const auto& y = b.types_[i];
      if (x.id != y.id || x.memory_cost != y.memory_cost || x.arrival_rate != y.arrival_rate) {
        return false;
      }
    }
    return true;
  }

 private:
  std::vector<EventType> types_;
  std::map<std::string, TypeHandle, std::less<>> by_name_;
};

struct EventInstance {
  TypeHandle type;
  double timestamp = 0.0;

  friend bool operator==(const EventInstance&, const EventInstance&) = default;
};

/// A temporally ordered event sequence with unique timestamps.  Only
/// obtainable through validate_sequence, so every instance satisfies the
/// strict ordering invariant.
class EventSequence {
 public:
  EventSequence() = default;

  std::size_t size() const { return events_.size(); }
  bool empty() const { return events_.empty(); }
  const EventInstance& operator[](std::size_t i) const { return events_[i]; }
  std::span<const EventInstance> events() const { return events_; }
  auto begin() const { return events_.begin(); }
  auto end() const { return events_.end(); }

  friend bool operator==(const EventSequence&, const EventSequence&) = default;

 private:
  friend EventSequence validate_sequence(std::vector<EventInstance> events);
  explicit EventSequence(std::vector<EventInstance> events) : events_(std::move(events)) {}

  std::vector<EventInstance> events_;
};

inline EventSequence validate_sequence(std::vector<EventInstance> events) {
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (!std::isfinite(events[i].timestamp)) {
      fail(ErrorCode::kInvalidArgument,
           "event " + std::to_string(i) + " has a non-finite timestamp");
    }
    if (i == 0) continue;
    const double prev = events[i - 1].timestamp;
    const double cur = events[i].timestamp;
    if (cur == prev) {
      fail(ErrorCode::kDuplicateTimestamp,
           "events " + std::to_string(i - 1) + " and " + std::to_string(i) +
               " share timestamp " + std::to_string(cur));
    }
    if (cur < prev) {
      fail(ErrorCode::kNonMonotoneTimestamps,
           "event " + std::to_string(i) + " at t=" + std::to_string(cur) +
               " precedes its predecessor at t=" + std::to_string(prev));
    }
  }
  return EventSequence(std::move(events));
}

inline EventSequence validate_sequence(const EventSequence& seq) {
  return validate_sequence(std::vector<EventInstance>(seq.begin(), seq.end()));
}

enum class MatchSemantics { kAnyMatch, kNextMatch, kContiguity };

constexpr std::string_view to_string(MatchSemantics s) {
  switch (s) {
    case MatchSemantics::kAnyMatch: return "any";
    case MatchSemantics::kNextMatch: return "next";
    case MatchSemantics::kContiguity: return "contiguity";
  }
  return "any";
}

inline std::optional<MatchSemantics> parse_semantics(std::string_view s) {
  if (s == "any" || s == "skip-till-any-match") return MatchSemantics::kAnyMatch;
  if (s == "next" || s == "skip-till-next-match") return MatchSemantics::kNextMatch;
  if (s == "contiguity") return MatchSemantics::kContiguity;
  return std::nullopt;
}

/// A sequence query SEQ(q_1, ..., q_n) over a sliding time window.
class Query {
 public:
  Query(std::string id, std::vector<TypeHandle> pattern, double window, double utility_weight,
        double cpu_cost_per_match, std::optional<double> expected_matches = std::nullopt)
      : id_(std::move(id)),
        pattern_(std::move(pattern)),
        window_(window),
        utility_weight_(utility_weight),
        cpu_cost_(cpu_cost_per_match),
        expected_matches_(expected_matches) {
    auto positive = [&](double v, const char* what) {
      if (!(v > 0.0) || !std::isfinite(v)) {
        fail(ErrorCode::kInvalidArgument,
             "query '" + id_ + "': " + what + " must be positive and finite");
      }
    };
    if (pattern_.empty()) fail(ErrorCode::kInvalidArgument, "query '" + id_ + "': empty pattern");
    positive(window_, "window");
    positive(utility_weight_, "utility_weight");
    positive(cpu_cost_, "cpu_cost_per_match");
    if (expected_matches_ && (!(*expected_matches_ >= 0.0) || !std::isfinite(*expected_matches_))) {
      fail(ErrorCode::kInvalidArgument,
           "query '" + id_ + "': expected_matches must be nonnegative and finite");
    }
  }

  const std::string& id() const { return id_; }
  std::span<const TypeHandle> pattern() const { return pattern_; }
  std::size_t length() const { return pattern_.size(); }
  double window() const { return window_; }
  double utility_weight() const { return utility_weight_; }
  double cpu_cost_per_match() const { return cpu_cost_; }
  const std::optional<double>& expected_matches() const { return expected_matches_; }

  Query with_expected_matches(double n) const {
    Query q = *this;
    if (!(n >= 0.0) || !std::isfinite(n)) {
      fail(ErrorCode::kInvalidArgument, "query '" + id_ + "': expected_matches must be >= 0");
    }
    q.expected_matches_ = n;
    return q;
  }

  Query with_utility_weight(double w) const {
    return Query(id_, pattern_, window_, w, cpu_cost_, expected_matches_);
  }

  /// Distinct event types of the pattern in ascending handle order.
  std::vector<TypeHandle> distinct_types() const {
    std::vector<TypeHandle> out(pattern_.begin(), pattern_.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  bool has_repeated_types() const { return distinct_types().size() != pattern_.size(); }

  friend bool operator==(const Query&, const Query&) = default;

 private:
  std::string id_;
  std::vector<TypeHandle> pattern_;
  double window_;
  double utility_weight_;
  double cpu_cost_;
  std::optional<double> expected_matches_;
};

inline void check_query_types(const Alphabet& alphabet, const Query& q) {
  for (auto h : q.pattern()) {
    if (!alphabet.contains(h)) {
      fail(ErrorCode::kUnknownEventType, "query '" + q.id() + "' references event type handle " +
                                             std::to_string(h.value) + " outside the alphabet");
    }
  }
}

struct SubsequenceFlags {
  bool contiguous = true;
  bool type_contiguous = true;

  friend bool operator==(const SubsequenceFlags&, const SubsequenceFlags&) = default;
};

/// Classifies the subsequence of `seq` picked by `indices`.  Every strictly
/// increasing index list is a plain subsequence; this reports whether it is
/// additionally contiguous (consecutive positions) and type-contiguous (no
/// skipped event of the next picked event's type between two picks).
inline SubsequenceFlags subsequence_relation(const EventSequence& seq,
                                             std::span<const std::size_t> indices) {
  for (std::size_t j = 0; j < indices.size(); ++j) {
    if (indices[j] >= seq.size()) {
      fail(ErrorCode::kIndexOutOfBounds, "index " + std::to_string(indices[j]) +
                                             " outside sequence of length " +
                                             std::to_string(seq.size()));
    }
    if (j > 0 && indices[j] <= indices[j - 1]) {
      fail(ErrorCode::kInvalidArgument, "subsequence indices must be strictly increasing");
    }
  }
  SubsequenceFlags flags;
  for (std::size_t j = 1; j < indices.size(); ++j) {
    const std::size_t lo = indices[j - 1];
    const std::size_t hi = indices[j];
    if (hi != lo + 1) flags.contiguous = false;
    const TypeHandle wanted = seq[hi].type;
    for (std::size_t k = lo + 1; k < hi; ++k) {
      if (seq[k].type == wanted) {
        flags.type_contiguous = false;
        break;
      }
    }
  }
  return flags;
}

}  // namespace cepshed
