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

#include "cepshed/planner/brute_force.hpp"
#include "cepshed/planner/discretize.hpp"
#include "cepshed/planner/fmls.hpp"
#include "cepshed/planner/icls.hpp"
#include "cepshed/planner/idls.hpp"
#include "cepshed/planner/imls.hpp"
#include "cepshed/planner/instance.hpp"
