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

#ifndef BWMDP_LEARNER_HPP
#define BWMDP_LEARNER_HPP

#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "bwmdp/approachability.hpp"
#include "bwmdp/envs.hpp"
#include "bwmdp/errors.hpp"
#include "bwmdp/mdp.hpp"
#include "bwmdp/random.hpp"
#include "bwmdp/text.hpp"

namespace bwmdp {

/**
Polynomial step sizes alpha(k) = (1+k)^-fast, beta(k) = (1+k)^-slow.

Requires 0.5 < fast < slow <= 1: both sequences are square-summable but not
summable, and beta(k)/alpha(k) = (1+k)^(fast-slow) -> 0, so the policy moves
on the slower timescale.
*/
class StepSchedules {
 public:
  StepSchedules() : StepSchedules(0.6, 0.9) {}
  StepSchedules(double fast_exponent, double slow_exponent)
      : fast_(fast_exponent), slow_(slow_exponent) {
    if (!(fast_ > 0.5 && fast_ < slow_ && slow_ <= 1.0)) {
      throw ConfigError("step exponents must satisfy 0.5 < fast < slow <= 1 (got fast=" +
                        text::format_double(fast_) + ", slow=" +
                        text::format_double(slow_) + ")");
    }
  }

  double fast_exponent() const { return fast_; }
  double slow_exponent() const { return slow_; }

  double fast(std::uint64_t k) const { return std::pow(1.0 + static_cast<double>(k), -fast_); }
  double slow(std::uint64_t k) const { return std::pow(1.0 + static_cast<double>(k), -slow_); }

 private:
  double fast_;
  double slow_;
};

/// Visit counts: per (state, action) and per state.
struct AsyncCounters {
  Table<std::uint64_t> state_action;
  std::vector<std::uint64_t> state;

  AsyncCounters() = default;
  AsyncCounters(std::size_t num_states, std::size_t num_actions)
      : state_action(num_states, num_actions, 0), state(num_states, 0) {}
};

struct TransitionRecord {
  std::size_t state = 0;
  std::size_t action = 0;
  double reward = 0.0;
  std::size_t next_state = 0;
  bool terminal = false;
};

struct LearnerState {
  QTable qtable;
  Policy policy;
  AsyncCounters counters;
  StepSchedules schedules;
  RandomStream rng{0};

  static LearnerState create(std::size_t num_states, std::size_t num_actions,
                             StepSchedules schedules, RandomStream rng,
                             double initial_q = 0.0) {
    return {QTable(num_states, num_actions, initial_q),
            Policy::uniform(num_states, num_actions),
            AsyncCounters(num_states, num_actions), schedules, std::move(rng)};
  }
};

// *******************************************************
// Blackwell Q-learning
// *******************************************************

/// Sampling distribution at s: positive part of R(pi(s), Q(s)) normalized,
/// or uniform when no action has positive instantaneous regret.
inline numvec rm_sampling_distribution(const LearnerState& st, std::size_t s) {
  const auto regret = regret_vector(st.policy.row(s), st.qtable.row(s));
  return positive_part_distribution(regret.entries);
}

inline std::size_t select_action_rm(LearnerState& st, std::size_t s) {
  const numvec probs = rm_sampling_distribution(st, s);
  return st.rng.categorical(probs);
}

/**
Applies one observed transition:

    Q(s,a)  += alpha(phi(s,a)) * (r + discount * V(s') - Q(s,a))
    pi(s)   += beta(psi(s)) * (e_a - pi(s))

with V(s') = <pi(s'), Q(s')> taken from the tables before this update, and
V(s') = 0 on terminal transitions. Counters are incremented first.
*/
inline void blackwell_q_update(LearnerState& st, const TransitionRecord& rec,
                               double discount) {
  const double bootstrap =
      rec.terminal ? 0.0 : dot(st.policy.row(rec.next_state), st.qtable.row(rec.next_state));
  const auto phi = ++st.counters.state_action(rec.state, rec.action);
  const auto psi = ++st.counters.state[rec.state];
  double& q = st.qtable(rec.state, rec.action);
  q += st.schedules.fast(phi) * (rec.reward + discount * bootstrap - q);
  st.policy.mix_toward(rec.state, rec.action, st.schedules.slow(psi));
}

// *******************************************************
// Epsilon-greedy temporal-difference baselines
// *******************************************************

enum class TdMethod { QLearning, Sarsa, ExpectedSarsa };

inline std::string_view to_string(TdMethod m) {
  switch (m) {
    case TdMethod::QLearning: return "q-learning";
    case TdMethod::Sarsa: return "sarsa";
    case TdMethod::ExpectedSarsa: return "expected-sarsa";
  }
  return "?";
}

struct TdConfig {
  TdMethod method = TdMethod::QLearning;
  double learning_rate = 0.5;
  double epsilon = 0.1;

  void validate() const {
    if (!(learning_rate > 0.0 && learning_rate <= 1.0)) {
      throw ConfigError("learning_rate must lie in (0, 1]");
    }
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
      throw ConfigError("epsilon must lie in [0, 1]");
    }
  }
};

/// epsilon/|A| everywhere plus 1 - epsilon on the lowest-index argmax.
inline numvec epsilon_greedy_distribution(std::span<const double> qrow, double epsilon) {
  numvec probs(qrow.size(), epsilon / static_cast<double>(qrow.size()));
  probs[argmax(qrow)] += 1.0 - epsilon;
  return probs;
}

inline std::size_t epsilon_greedy_action(const QTable& q, std::size_t s,
                                         double epsilon, RandomStream& rng) {
  if (rng.uniform() < epsilon) return static_cast<std::size_t>(rng.below(q.num_actions()));
  return argmax(q.row(s));
}

namespace detail {

inline void td_update(QTable& q, const TransitionRecord& rec, double discount,
                      double learning_rate, double bootstrap) {
  double& entry = q(rec.state, rec.action);
  const double target = rec.reward + (rec.terminal ? 0.0 : discount * bootstrap);
  entry += learning_rate * (target - entry);
}

}  // namespace detail

inline void q_learning_step(QTable& q, const TransitionRecord& rec, double discount,
                            double learning_rate) {
  const auto next = q.row(rec.next_state);
  detail::td_update(q, rec, discount, learning_rate,
                    rec.terminal ? 0.0 : next[argmax(next)]);
}

/// `next_action` is the action already chosen for rec.next_state.
inline void sarsa_step(QTable& q, const TransitionRecord& rec, std::size_t next_action,
                       double discount, double learning_rate) {
  detail::td_update(q, rec, discount, learning_rate,
                    rec.terminal ? 0.0 : q(rec.next_state, next_action));
}

inline void expected_sarsa_step(QTable& q, const TransitionRecord& rec, double discount,
                                double learning_rate, double epsilon) {
  double bootstrap = 0.0;
  if (!rec.terminal) {
    const auto next = q.row(rec.next_state);
    bootstrap = dot(epsilon_greedy_distribution(next, epsilon), next);
  }
  detail::td_update(q, rec, discount, learning_rate, bootstrap);
}

// *******************************************************
// Episodic runs
// *******************************************************

struct EpisodeStats {
  double total_return = 0.0;
  int steps = 0;
  bool truncated = false;
};

struct EpisodeLog {
  std::vector<EpisodeStats> episodes;
  bool operator==(const EpisodeLog& other) const {
    if (episodes.size() != other.episodes.size()) return false;
    for (std::size_t i = 0; i < episodes.size(); ++i) {
      const auto& a = episodes[i];
      const auto& b = other.episodes[i];
      if (a.total_return != b.total_return || a.steps != b.steps ||
          a.truncated != b.truncated) {
        return false;
      }
    }
    return true;
  }
};

inline void write_episode_csv_header(std::ostream& out) {
  out << "algo,run_id,episode,return,steps\n";
}

inline void write_episode_csv_rows(std::ostream& out, std::string_view algo, int run_id,
                                   const EpisodeLog& log) {
  for (std::size_t e = 0; e < log.episodes.size(); ++e) {
    out << algo << "," << run_id << "," << e << ","
        << text::format_double(log.episodes[e].total_return) << ","
        << log.episodes[e].steps << "\n";
  }
}

inline constexpr int kDefaultMaxEpisodeSteps = 10000;

struct RunOptions {
  /// Episodes longer than this are truncated; the last transition bootstraps.
  int max_steps_per_episode = kDefaultMaxEpisodeSteps;
  /// Initial Q value. When unset, default_initial_q() of the environment.
  std::optional<double> initial_q;
  /// Mixed into the seed so that different algorithms draw different streams.
  std::string stream_label;
};

/**
An upper bound on every action value, used as the default initial Q.
Nonpositive rewards give the bound 0; positive rewards need discount < 1.
*/
inline double optimistic_initial_q(double reward_upper_bound, double discount) {
  if (reward_upper_bound <= 0.0) return 0.0;
  if (!(discount < 1.0)) {
    throw ConfigError("positive rewards with discount 1 have no finite value bound; "
                      "set initial_q explicitly");
  }
  return reward_upper_bound / (1.0 - discount);
}

template <Environment Env>
double resolve_initial_q(const Env& env, const RunOptions& options) {
  return options.initial_q ? *options.initial_q
                           : optimistic_initial_q(env.reward_upper_bound(), env.discount());
}

namespace detail {

template <Environment Env>
StepOutcome checked_step(Env& env, std::size_t action, RandomStream& rng,
                         std::size_t episode, int step) {
  try {
    return env.step(action, rng);
  } catch (const std::exception& e) {
    throw RunError("episode " + std::to_string(episode) + " step " +
                   std::to_string(step) + ": " + e.what());
  }
}

inline void check_run_args(int episodes, const RunOptions& options) {
  if (episodes < 1) throw ConfigError("episodes must be at least 1");
  if (options.max_steps_per_episode < 1) {
    throw ConfigError("max_steps_per_episode must be at least 1");
  }
}

}  // namespace detail

struct BlackwellRun {
  LearnerState state;
  EpisodeLog log;
};

/// Runs Blackwell Q-learning for `episodes` episodes. Counters and step
/// sizes persist across episodes.
template <Environment Env>
BlackwellRun run_blackwell_q(Env& env, int episodes, const StepSchedules& schedules,
                             std::uint64_t seed, const RunOptions& options = {}) {
  detail::check_run_args(episodes, options);
  const RandomStream root(seed, options.stream_label.empty() ? "blackwell-q"
                                                             : options.stream_label);
  RandomStream env_rng = root.split("env");
  BlackwellRun run{LearnerState::create(env.num_states(), env.num_actions(), schedules,
                                        root.split("agent"), resolve_initial_q(env, options)),
                   {}};
  run.log.episodes.reserve(static_cast<std::size_t>(episodes));
  const double discount = env.discount();
  for (int e = 0; e < episodes; ++e) {
    EpisodeStats stats;
    std::size_t s = env.reset(env_rng);
    while (true) {
      const std::size_t a = select_action_rm(run.state, s);
      const StepOutcome out = detail::checked_step(env, a, env_rng, e, stats.steps);
      ++stats.steps;
      stats.total_return += out.reward;
      blackwell_q_update(run.state, {s, a, out.reward, out.next_state, out.terminal}, discount);
      if (out.terminal) break;
      if (stats.steps >= options.max_steps_per_episode) {
        stats.truncated = true;
        break;
      }
      s = out.next_state;
    }
    run.log.episodes.push_back(stats);
  }
  return run;
}

struct TdRun {
  QTable qtable;
  EpisodeLog log;
};

template <Environment Env>
TdRun run_td_learner(Env& env, const TdConfig& config, int episodes,
                     std::uint64_t seed, const RunOptions& options = {}) {
  config.validate();
  detail::check_run_args(episodes, options);
  const RandomStream root(seed, options.stream_label.empty()
                                    ? std::string(to_string(config.method))
                                    : options.stream_label);
  RandomStream env_rng = root.split("env");
  RandomStream agent_rng = root.split("agent");
  TdRun run{QTable(env.num_states(), env.num_actions(), resolve_initial_q(env, options)), {}};
  run.log.episodes.reserve(static_cast<std::size_t>(episodes));
  const double discount = env.discount();
  QTable& q = run.qtable;
  for (int e = 0; e < episodes; ++e) {
    EpisodeStats stats;
    std::size_t s = env.reset(env_rng);
    std::size_t a = epsilon_greedy_action(q, s, config.epsilon, agent_rng);
    while (true) {
      const StepOutcome out = detail::checked_step(env, a, env_rng, e, stats.steps);
      ++stats.steps;
      stats.total_return += out.reward;
      const TransitionRecord rec{s, a, out.reward, out.next_state, out.terminal};
      std::size_t next_action = 0;
      switch (config.method) {
        case TdMethod::QLearning:
          q_learning_step(q, rec, discount, config.learning_rate);
          if (!out.terminal) next_action = epsilon_greedy_action(q, out.next_state, config.epsilon, agent_rng);
          break;
        case TdMethod::Sarsa:
          if (!out.terminal) next_action = epsilon_greedy_action(q, out.next_state, config.epsilon, agent_rng);
          sarsa_step(q, rec, next_action, discount, config.learning_rate);
          break;
        case TdMethod::ExpectedSarsa:
          expected_sarsa_step(q, rec, discount, config.learning_rate, config.epsilon);
          if (!out.terminal) next_action = epsilon_greedy_action(q, out.next_state, config.epsilon, agent_rng);
          break;
      }
      if (out.terminal) break;
      if (stats.steps >= options.max_steps_per_episode) {
        stats.truncated = true;
        break;
      }
      s = out.next_state;
      a = next_action;
    }
    run.log.episodes.push_back(stats);
  }
  return run;
}

}  // namespace bwmdp

#endif  // BWMDP_LEARNER_HPP
