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

// Plans on a random MDP with Blackwell value iteration, compares against the
// value-iteration oracle, then learns the cliff grid online.

#include <iostream>

#include "bwmdp/bwmdp.hpp"

int main() {
  using namespace bwmdp;

  const MdpModel mdp = random_mdp(5, 3, 0.9, 42);
  const auto oracle = value_iteration(mdp, 1e-10, 100000);
  const auto planned = blackwell_value_iteration(mdp, 20000);
  std::cout << "blackwell VI: |Qbar - Q*| = " << sup_norm_distance(planned.qbar, oracle.qstar)
            << " after " << planned.iterations << " iterations\n";

  const auto spec = GridWorldSpec::cliff_walking();
  GridWorldEnv env(spec);
  const auto run = run_blackwell_q(env, 500, StepSchedules{}, 7);
  double tail = 0.0;
  for (std::size_t e = run.log.episodes.size() - 50; e < run.log.episodes.size(); ++e) {
    tail += run.log.episodes[e].total_return / 50.0;
  }
  std::cout << "blackwell Q-learning on the cliff: mean return over last 50 episodes " << tail
            << "\n"
            << render_greedy_policy(spec, run.state.qtable);
  const auto path = greedy_path_length(spec, run.state.qtable);
  std::cout << "greedy path length: " << (path ? std::to_string(*path) : "goal not reached")
            << "\n";
}
