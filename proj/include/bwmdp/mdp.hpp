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

#ifndef BWMDP_MDP_HPP
#define BWMDP_MDP_HPP

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bwmdp/errors.hpp"
#include "bwmdp/table.hpp"

namespace bwmdp {

/// Tolerance for row sums of transition tables and policies.
inline constexpr double kProbabilityTolerance = 1e-12;

using StateIndex = std::size_t;
using ActionIndex = std::size_t;

// *******************************************************
// Model
// *******************************************************

/**
Finite MDP with a dense transition tensor indexed [s][a][s'] and a reward
table indexed [s][a].

The discount may be 1 for episodic models; every planning routine that needs
a contraction checks for discount < 1 itself.
*/
class MdpModel {
 public:
  MdpModel() = default;

  /// Validates every invariant; throws InputError naming the offending index.
  MdpModel(std::size_t num_states, std::size_t num_actions, double discount,
           numvec rewards, numvec transitions)
      : num_states_(num_states),
        num_actions_(num_actions),
        discount_(discount),
        rewards_(std::move(rewards)),
        transitions_(std::move(transitions)) {
    validate();
  }

  std::size_t num_states() const { return num_states_; }
  std::size_t num_actions() const { return num_actions_; }
  double discount() const { return discount_; }

  double reward(StateIndex s, ActionIndex a) const {
    return rewards_[s * num_actions_ + a];
  }
  double transition(StateIndex s, ActionIndex a, StateIndex next) const {
    return transitions_[(s * num_actions_ + a) * num_states_ + next];
  }
  std::span<const double> next_distribution(StateIndex s, ActionIndex a) const {
    return {transitions_.data() + (s * num_actions_ + a) * num_states_,
            num_states_};
  }

  std::span<const double> rewards() const { return rewards_; }
  std::span<const double> transitions() const { return transitions_; }

  double max_reward() const;
  double max_abs_reward() const;

  /// Same dynamics and rewards under a different discount.
  MdpModel with_discount(double discount) const {
    return MdpModel(num_states_, num_actions_, discount, rewards_,
                    transitions_);
  }

  bool operator==(const MdpModel&) const = default;

 private:
  void validate() const;

  std::size_t num_states_ = 0;
  std::size_t num_actions_ = 0;
  double discount_ = 0.0;
  numvec rewards_;
  numvec transitions_;
};

inline void MdpModel::validate() const {
  if (num_states_ == 0) throw InputError("num_states must be positive");
  if (num_actions_ == 0) throw InputError("num_actions must be positive");
  if (!(discount_ >= 0.0 && discount_ <= 1.0)) {
    throw InputError("discount must lie in [0, 1], got " +
                     std::to_string(discount_));
  }
  if (rewards_.size() != num_states_ * num_actions_) {
    throw InputError("reward table has " + std::to_string(rewards_.size()) +
                     " entries, expected " +
                     std::to_string(num_states_ * num_actions_));
  }
  if (transitions_.size() != num_states_ * num_actions_ * num_states_) {
    throw InputError("transition tensor has " +
                     std::to_string(transitions_.size()) +
                     " entries, expected " +
                     std::to_string(num_states_ * num_actions_ * num_states_));
  }
  for (std::size_t s = 0; s < num_states_; ++s) {
    for (std::size_t a = 0; a < num_actions_; ++a) {
      const std::string where =
          "[" + std::to_string(s) + "][" + std::to_string(a) + "]";
      if (!std::isfinite(reward(s, a))) {
        throw InputError("reward" + where + " is not finite");
      }
      double total = 0.0;
      for (std::size_t next = 0; next < num_states_; ++next) {
        const double p = transition(s, a, next);
        if (!(p >= 0.0) || !std::isfinite(p)) {
          throw InputError("transition" + where + "[" + std::to_string(next) +
                           "] is not a probability");
        }
        total += p;
      }
      if (std::abs(total - 1.0) > kProbabilityTolerance) {
        throw InputError("transition" + where + " sums to " +
                         std::to_string(total) + ", expected 1");
      }
    }
  }
}

inline double MdpModel::max_reward() const {
  double best = -std::numeric_limits<double>::infinity();
  for (double r : rewards_) best = std::max(best, r);
  return best;
}

inline double MdpModel::max_abs_reward() const {
  double best = 0.0;
  for (double r : rewards_) best = std::max(best, std::abs(r));
  return best;
}

// *******************************************************
// Q tables and policies
// *******************************************************

/// Per-(state, action) values.
class QTable {
 public:
  QTable() = default;
  QTable(std::size_t num_states, std::size_t num_actions, double fill = 0.0)
      : values_(num_states, num_actions, fill) {}
  explicit QTable(Table<double> values) : values_(std::move(values)) {}

  std::size_t num_states() const { return values_.rows(); }
  std::size_t num_actions() const { return values_.cols(); }

  double& operator()(StateIndex s, ActionIndex a) { return values_(s, a); }
  double operator()(StateIndex s, ActionIndex a) const { return values_(s, a); }

  std::span<double> row(StateIndex s) { return values_.row(s); }
  std::span<const double> row(StateIndex s) const { return values_.row(s); }

  std::span<double> flat() { return values_.flat(); }
  std::span<const double> flat() const { return values_.flat(); }

  const Table<double>& table() const { return values_; }

  bool operator==(const QTable&) const = default;

 private:
  Table<double> values_;
};

inline double sup_norm_distance(const QTable& x, const QTable& y) {
  return sup_norm_distance(x.flat(), y.flat());
}

/// Checks that x lies in the probability simplex within `tol`.
inline bool in_simplex(std::span<const double> x, double tol) {
  double total = 0.0;
  for (double v : x) {
    if (!(v >= -tol) || !std::isfinite(v)) return false;
    total += v;
  }
  return std::abs(total - 1.0) <= tol;
}

/// Row-stochastic table pi[s][a].
///
/// Rows are validated when set wholesale. The in-place convex step
/// mix_toward() keeps rows in the simplex by construction.
class Policy {
 public:
  Policy() = default;

  /// Throws InputError if any row leaves the simplex.
  explicit Policy(Table<double> probs) : probs_(std::move(probs)) {
    for (std::size_t s = 0; s < probs_.rows(); ++s) check_row(s, probs_.row(s));
  }

  static Policy uniform(std::size_t num_states, std::size_t num_actions) {
    Policy p;
    p.probs_ = Table<double>(num_states, num_actions,
                             1.0 / static_cast<double>(num_actions));
    return p;
  }

  static Policy deterministic(std::span<const ActionIndex> actions,
                              std::size_t num_actions) {
    Policy p;
    p.probs_ = Table<double>(actions.size(), num_actions, 0.0);
    for (std::size_t s = 0; s < actions.size(); ++s) {
      if (actions[s] >= num_actions) {
        throw InputError("action index out of range in state " +
                         std::to_string(s));
      }
      p.probs_(s, actions[s]) = 1.0;
    }
    return p;
  }

  std::size_t num_states() const { return probs_.rows(); }
  std::size_t num_actions() const { return probs_.cols(); }

  double operator()(StateIndex s, ActionIndex a) const { return probs_(s, a); }
  std::span<const double> row(StateIndex s) const { return probs_.row(s); }
  const Table<double>& table() const { return probs_; }

  void set_row(StateIndex s, std::span<const double> probs) {
    if (probs.size() != num_actions()) {
      throw InputError("policy row has wrong length");
    }
    check_row(s, probs);
    std::copy(probs.begin(), probs.end(), probs_.row(s).begin());
  }

  /// pi(s) <- pi(s) + weight * (e_a - pi(s)), for weight in [0, 1].
  void mix_toward(StateIndex s, ActionIndex a, double weight) {
    auto r = probs_.row(s);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= weight * r[i];
    r[a] += weight;
  }

  bool operator==(const Policy&) const = default;

 private:
  static void check_row(StateIndex s, std::span<const double> probs) {
    if (!in_simplex(probs, kProbabilityTolerance)) {
      throw InputError("policy row " + std::to_string(s) +
                       " is not a probability vector");
    }
  }

  Table<double> probs_;
};

// *******************************************************
// Oracles
// *******************************************************

/// <pi(s), Q(s)>.
inline double state_value(const QTable& q, const Policy& pi, StateIndex s) {
  if (s >= q.num_states() || s >= pi.num_states()) {
    throw std::out_of_range("state index " + std::to_string(s) +
                            " out of range");
  }
  return dot(pi.row(s), q.row(s));
}

inline numvec state_values(const QTable& q, const Policy& pi) {
  numvec v(q.num_states());
  for (std::size_t s = 0; s < v.size(); ++s) v[s] = dot(pi.row(s), q.row(s));
  return v;
}

namespace detail {

inline void check_shapes(const MdpModel& mdp, std::size_t states,
                         std::size_t actions, const char* what) {
  if (states != mdp.num_states() || actions != mdp.num_actions()) {
    throw InputError(std::string(what) + " shape does not match the model");
  }
}

/// r(s,a) + discount * sum_s' P(s'|s,a) v(s').
inline double backup(const MdpModel& mdp, StateIndex s, ActionIndex a,
                     std::span<const double> v) {
  return mdp.reward(s, a) + mdp.discount() * dot(mdp.next_distribution(s, a), v);
}

inline QTable q_from_values(const MdpModel& mdp, std::span<const double> v) {
  QTable q(mdp.num_states(), mdp.num_actions());
  for (std::size_t s = 0; s < mdp.num_states(); ++s) {
    for (std::size_t a = 0; a < mdp.num_actions(); ++a) {
      q(s, a) = backup(mdp, s, a, v);
    }
  }
  return q;
}

}  // namespace detail

struct PolicyEvaluation {
  numvec values;
  QTable qtable;
};

/**
Exact V^pi and Q^pi by a direct dense solve of (I - discount P_pi) V = r_pi.

Requires discount < 1. The solve is LU with partial pivoting.
*/
inline PolicyEvaluation policy_evaluation_exact(const MdpModel& mdp,
                                                const Policy& pi) {
  detail::check_shapes(mdp, pi.num_states(), pi.num_actions(), "policy");
  if (!(mdp.discount() < 1.0)) {
    throw InputError("exact policy evaluation requires discount < 1");
  }
  for (std::size_t s = 0; s < pi.num_states(); ++s) {
    if (!in_simplex(pi.row(s), 1e-9)) {
      throw InputError("policy row " + std::to_string(s) +
                       " is not a probability vector");
    }
  }
  const auto n = static_cast<Eigen::Index>(mdp.num_states());
  Eigen::MatrixXd system = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  for (std::size_t s = 0; s < mdp.num_states(); ++s) {
    for (std::size_t a = 0; a < mdp.num_actions(); ++a) {
      const double w = pi(s, a);
      if (w == 0.0) continue;
      rhs(s) += w * mdp.reward(s, a);
      const auto next = mdp.next_distribution(s, a);
      for (std::size_t t = 0; t < next.size(); ++t) {
        system(s, t) -= mdp.discount() * w * next[t];
      }
    }
  }
  const Eigen::VectorXd solution = system.partialPivLu().solve(rhs);
  numvec v(solution.data(), solution.data() + solution.size());
  if (!all_finite(v)) {
    throw NumericalError("policy evaluation solve produced non-finite values");
  }
  QTable q = detail::q_from_values(mdp, v);
  return {std::move(v), std::move(q)};
}

/// Greedy deterministic policy; ties go to the lowest action index.
inline Policy greedy_policy(const QTable& q) {
  std::vector<ActionIndex> actions(q.num_states());
  for (std::size_t s = 0; s < actions.size(); ++s) actions[s] = argmax(q.row(s));
  return Policy::deterministic(actions, q.num_actions());
}

struct ValueIterationResult {
  QTable qstar;
  Policy greedy;
  /// Sup-norm distance between the last two iterates.
  double gap = 0.0;
  /// discount * gap / (1 - discount): bound on the distance to Q*.
  double error_bound = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Classic Q-value iteration, Q <- r + discount * P max_a' Q.
inline ValueIterationResult value_iteration(const MdpModel& mdp,
                                            double tolerance, int max_iters) {
  if (!(mdp.discount() < 1.0)) {
    throw InputError("value iteration requires discount < 1");
  }
  if (!(tolerance > 0.0)) throw InputError("tolerance must be positive");
  if (max_iters < 1) throw InputError("max_iters must be at least 1");

  const std::size_t ns = mdp.num_states();
  QTable q(ns, mdp.num_actions());
  numvec v(ns, 0.0);
  ValueIterationResult result;
  for (int it = 1; it <= max_iters; ++it) {
    QTable next = detail::q_from_values(mdp, v);
    result.gap = sup_norm_distance(next, q);
    q = std::move(next);
    for (std::size_t s = 0; s < ns; ++s) {
      const auto row = q.row(s);
      v[s] = *std::max_element(row.begin(), row.end());
    }
    result.iterations = it;
    if (result.gap <= tolerance) {
      result.converged = true;
      break;
    }
  }
  result.error_bound =
      mdp.discount() * result.gap / (1.0 - mdp.discount());
  result.greedy = greedy_policy(q);
  result.qstar = std::move(q);
  return result;
}

/**
One synchronous expected-SARSA sweep:

    out(s,a) = r(s,a) + discount * sum_s' P(s'|s,a) <pi(s'), Q(s')>

Every entry is computed from the input table; nothing is updated in place.
*/
inline QTable expected_sarsa_backup(const MdpModel& mdp, const QTable& q,
                                    const Policy& pi) {
  detail::check_shapes(mdp, q.num_states(), q.num_actions(), "Q table");
  detail::check_shapes(mdp, pi.num_states(), pi.num_actions(), "policy");
  const numvec v = state_values(q, pi);
  return detail::q_from_values(mdp, v);
}

/// max |Q(s,a) - (r(s,a) + discount * P max Q)|.
inline double bellman_optimality_residual(const MdpModel& mdp,
                                          const QTable& q) {
  numvec v(mdp.num_states());
  for (std::size_t s = 0; s < v.size(); ++s) {
    const auto row = q.row(s);
    v[s] = *std::max_element(row.begin(), row.end());
  }
  return sup_norm_distance(q, detail::q_from_values(mdp, v));
}

/// max |V(s) - (r_pi(s) + discount * P_pi V(s))|.
inline double bellman_evaluation_residual(const MdpModel& mdp,
                                          const Policy& pi,
                                          std::span<const double> v) {
  double worst = 0.0;
  for (std::size_t s = 0; s < mdp.num_states(); ++s) {
    double target = 0.0;
    for (std::size_t a = 0; a < mdp.num_actions(); ++a) {
      target += pi(s, a) * detail::backup(mdp, s, a, v);
    }
    worst = std::max(worst, std::abs(v[s] - target));
  }
  return worst;
}

}  // namespace bwmdp

#endif  // BWMDP_MDP_HPP
