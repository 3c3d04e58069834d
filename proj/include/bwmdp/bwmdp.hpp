// Copyright 2026 The bwmdp Authors. All rights reserved.
//
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

#ifndef BWMDP_BWMDP_HPP
#define BWMDP_BWMDP_HPP

#include "bwmdp/approachability.hpp"
#include "bwmdp/checks.hpp"
#include "bwmdp/config.hpp"
#include "bwmdp/envs.hpp"
#include "bwmdp/harness.hpp"
#include "bwmdp/learner.hpp"
#include "bwmdp/mdp.hpp"
#include "bwmdp/mdp_io.hpp"
#include "bwmdp/planner.hpp"

#endif  // BWMDP_BWMDP_HPP
