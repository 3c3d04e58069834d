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

#ifndef BWMDP_PLANNER_HPP
#define BWMDP_PLANNER_HPP

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "bwmdp/approachability.hpp"
#include "bwmdp/mdp.hpp"

namespace bwmdp {

/**
Blackwell value iteration state: one regret-matching learner per state,
fed the expected-SARSA Q rows as payoffs.

`qbar` is the arithmetic mean of Q_0 ... Q_n (Q_0 included), so after n
steps it averages n + 1 tables.
*/
struct PlannerState {
  QTable qtable;
  QTable qbar;
  Policy policy;
  std::vector<RegretAverage> regret;
  std::int64_t iteration = 0;

  /// Q_0 = q0, pi_0 = pi0, empty regret averages.
  static PlannerState initial(QTable q0, Policy pi0) {
    if (q0.num_states() != pi0.num_states() ||
        q0.num_actions() != pi0.num_actions()) {
      throw InputError("initial Q table and policy shapes differ");
    }
    PlannerState st;
    st.qbar = q0;
    st.regret.assign(q0.num_states(), RegretAverage(q0.num_actions()));
    st.qtable = std::move(q0);
    st.policy = std::move(pi0);
    return st;
  }

  /// Q_0 = 0, pi_0 uniform.
  static PlannerState initial(const MdpModel& mdp) {
    return initial(QTable(mdp.num_states(), mdp.num_actions()),
                   Policy::uniform(mdp.num_states(), mdp.num_actions()));
  }
};

/// Advances one synchronous step. The regret update pairs the previous
/// decision pi_{k-1}(s) with the freshly computed payoff row Q_k(s).
inline void blackwell_vi_step(PlannerState& st, const MdpModel& mdp) {
  if (!(mdp.discount() < 1.0)) {
    throw InputError("Blackwell value iteration requires discount < 1");
  }
  QTable next = expected_sarsa_backup(mdp, st.qtable, st.policy);
  for (std::size_t s = 0; s < mdp.num_states(); ++s) {
    st.regret[s].add(regret_vector(st.policy.row(s), next.row(s)));
    st.policy.set_row(s, regret_matching(st.regret[s]));
  }
  ++st.iteration;
  const double inv = 1.0 / static_cast<double>(st.iteration + 1);
  auto bar = st.qbar.flat();
  auto cur = next.flat();
  for (std::size_t i = 0; i < bar.size(); ++i) bar[i] += (cur[i] - bar[i]) * inv;
  st.qtable = std::move(next);
}

struct DistanceSample {
  std::int64_t iteration = 0;
  numvec per_state;
};

struct BlackwellVIResult {
  QTable qbar;
  Policy policy;
  std::vector<DistanceSample> distance_trace;
  std::int64_t iterations = 0;
};

struct BlackwellVIOptions {
  /// Record the per-state distance every `trace_stride` iterations (and at the last).
  std::int64_t trace_stride = 1;
};

inline BlackwellVIResult blackwell_value_iteration(
    const MdpModel& mdp, std::int64_t iters, QTable q0, Policy pi0,
    const BlackwellVIOptions& options = {}) {
  if (iters < 1) throw InputError("iteration count must be at least 1");
  if (options.trace_stride < 1) throw InputError("trace stride must be at least 1");
  if (q0.num_states() != mdp.num_states() ||
      q0.num_actions() != mdp.num_actions()) {
    throw InputError("initial Q table shape does not match the model");
  }
  PlannerState st = PlannerState::initial(std::move(q0), std::move(pi0));
  BlackwellVIResult result;
  result.distance_trace.reserve(
      static_cast<std::size_t>(iters / options.trace_stride + 1));
  for (std::int64_t k = 1; k <= iters; ++k) {
    blackwell_vi_step(st, mdp);
    if (!all_finite(st.qtable.flat())) {
      throw NumericalError("non-finite Q value at iteration " + std::to_string(k));
    }
    if (k % options.trace_stride == 0 || k == iters) {
      DistanceSample sample{k, numvec(mdp.num_states())};
      for (std::size_t s = 0; s < mdp.num_states(); ++s) {
        sample.per_state[s] = approachability_distance(st.regret[s]);
      }
      result.distance_trace.push_back(std::move(sample));
    }
  }
  result.qbar = std::move(st.qbar);
  result.policy = std::move(st.policy);
  result.iterations = st.iteration;
  return result;
}

inline BlackwellVIResult blackwell_value_iteration(
    const MdpModel& mdp, std::int64_t iters,
    const BlackwellVIOptions& options = {}) {
  return blackwell_value_iteration(
      mdp, iters, QTable(mdp.num_states(), mdp.num_actions()),
      Policy::uniform(mdp.num_states(), mdp.num_actions()), options);
}

/// CSV: iteration,state,distance.
inline void write_distance_trace_csv(const std::vector<DistanceSample>& trace,
                                     std::ostream& out) {
  out << "iteration,state,distance\n";
  for (const auto& sample : trace) {
    for (std::size_t s = 0; s < sample.per_state.size(); ++s) {
      out << sample.iteration << "," << s << ","
          << text::format_double(sample.per_state[s]) << "\n";
    }
  }
}

}  // namespace bwmdp

#endif  // BWMDP_PLANNER_HPP
