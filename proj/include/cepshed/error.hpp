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

#include <stdexcept>
#include <string>
#include <string_view>

namespace cepshed {

/// Every failure raised by the library carries one of these codes.  The CLI
/// maps them onto exit codes and prints them as a machine-parsable prefix.
enum class ErrorCode {
  kInvalidArgument,
  kDuplicateName,
  kDuplicateTimestamp,
  kNonMonotoneTimestamps,
  kIndexOutOfBounds,
  kUnknownEventType,
  kCountOverflow,
  kNonPositiveSpan,
  kUnsupportedSemantics,
  kDimensionMismatch,
  kNumericalInstability,
  kCouplingViolation,
  kInstanceTooLarge,
  kLpFailure,
  kQueryLargerThanBudget,
  kComponentTooLarge,
  kNonIntegralBudget,
  kGridTooLarge,
  kNonPositiveBudget,
  kLatticeTooLarge,
  kAllQueriesLinear,
  kMissingBudget,
  kMissingMatchRate,
  kParseError,
  kIncompatiblePlan,
  kUnsupported,
  kBudgetViolation,
};

/// Coarse classification used for process exit codes.
enum class ErrorClass {
  kUsage = 1,       // bad input, bad flags, parse failures
  kInfeasible = 2,  // unsupported requests and infeasibility-class outcomes
  kNumerical = 3,   // internal numerical failure
};

constexpr std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "E_INVALID_ARGUMENT";
    case ErrorCode::kDuplicateName: return "E_DUPLICATE_NAME";
    case ErrorCode::kDuplicateTimestamp: return "E_DUPLICATE_TIMESTAMP";
    case ErrorCode::kNonMonotoneTimestamps: return "E_NON_MONOTONE_TIMESTAMPS";
    case ErrorCode::kIndexOutOfBounds: return "E_INDEX_OUT_OF_BOUNDS";
    case ErrorCode::kUnknownEventType: return "E_UNKNOWN_EVENT_TYPE";
    case ErrorCode::kCountOverflow: return "E_COUNT_OVERFLOW";
    case ErrorCode::kNonPositiveSpan: return "E_NON_POSITIVE_SPAN";
    case ErrorCode::kUnsupportedSemantics: return "E_UNSUPPORTED_SEMANTICS";
    case ErrorCode::kDimensionMismatch: return "E_DIMENSION_MISMATCH";
    case ErrorCode::kNumericalInstability: return "E_NUMERICAL_INSTABILITY";
    case ErrorCode::kCouplingViolation: return "E_COUPLING_VIOLATION";
    case ErrorCode::kInstanceTooLarge: return "E_INSTANCE_TOO_LARGE";
    case ErrorCode::kLpFailure: return "E_LP_FAILURE";
    case ErrorCode::kQueryLargerThanBudget: return "E_QUERY_LARGER_THAN_BUDGET";
    case ErrorCode::kComponentTooLarge: return "E_COMPONENT_TOO_LARGE";
    case ErrorCode::kNonIntegralBudget: return "E_NON_INTEGRAL_BUDGET";
    case ErrorCode::kGridTooLarge: return "E_GRID_TOO_LARGE";
    case ErrorCode::kNonPositiveBudget: return "E_NON_POSITIVE_BUDGET";
    case ErrorCode::kLatticeTooLarge: return "E_LATTICE_TOO_LARGE";
    case ErrorCode::kAllQueriesLinear: return "E_ALL_QUERIES_LINEAR";
    case ErrorCode::kMissingBudget: return "E_MISSING_BUDGET";
    case ErrorCode::kMissingMatchRate: return "E_MISSING_MATCH_RATE";
    case ErrorCode::kParseError: return "E_PARSE";
    case ErrorCode::kIncompatiblePlan: return "E_INCOMPATIBLE_PLAN";
    case ErrorCode::kUnsupported: return "E_UNSUPPORTED";
    case ErrorCode::kBudgetViolation: return "E_BUDGET_VIOLATION";
  }
  return "E_UNKNOWN";
}

constexpr ErrorClass error_class(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNumericalInstability:
    case ErrorCode::kLpFailure:
    case ErrorCode::kCountOverflow:
      return ErrorClass::kNumerical;
    case ErrorCode::kQueryLargerThanBudget:
    case ErrorCode::kComponentTooLarge:
    case ErrorCode::kNonIntegralBudget:
    case ErrorCode::kGridTooLarge:
    case ErrorCode::kLatticeTooLarge:
    case ErrorCode::kInstanceTooLarge:
    case ErrorCode::kAllQueriesLinear:
    case ErrorCode::kUnsupported:
    case ErrorCode::kUnsupportedSemantics:
    case ErrorCode::kIncompatiblePlan:
    case ErrorCode::kCouplingViolation:
    case ErrorCode::kBudgetViolation:
      return ErrorClass::kInfeasible;
    default:
      return ErrorClass::kUsage;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace cepshed
