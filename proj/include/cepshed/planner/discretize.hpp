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

// Integer grids for the pseudo-polynomial dynamic programs.  Item weights are
// rounded up and capacities rounded down, so a plan that fits on the grid
// also fits the real budget.

#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "cepshed/error.hpp"

namespace cepshed {

struct DiscretizationOptions {
  double resolution = 1e-3;
  bool require_exact = false;  // reject weights/budgets that are off the grid
};

namespace detail {

inline void check_resolution(const DiscretizationOptions& opt) {
  if (!(opt.resolution > 0.0) || !std::isfinite(opt.resolution)) {
    fail(ErrorCode::kInvalidArgument, "resolution must be positive and finite");
  }
}

inline void check_on_grid(double value, const DiscretizationOptions& opt, const char* what) {
  if (!opt.require_exact) return;
  const double scaled = value / opt.resolution;
  if (std::abs(scaled - std::round(scaled)) > 1e-9 * std::max(1.0, std::abs(scaled))) {
    fail(ErrorCode::kNonIntegralBudget, std::string(what) + " " + std::to_string(value) +
                                            " is not a multiple of the resolution " +
                                            std::to_string(opt.resolution));
  }
}

inline std::int64_t weight_units(double w, const DiscretizationOptions& opt) {
  check_on_grid(w, opt, "weight");
  return static_cast<std::int64_t>(std::ceil(w / opt.resolution - 1e-9));
}

inline std::int64_t capacity_units(double c, const DiscretizationOptions& opt) {
  check_on_grid(c, opt, "budget");
  return static_cast<std::int64_t>(std::floor(c / opt.resolution + 1e-9));
}

}  // namespace detail
}  // namespace cepshed
