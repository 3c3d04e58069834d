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

#ifndef BWMDP_APPROACHABILITY_HPP
#define BWMDP_APPROACHABILITY_HPP

#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "bwmdp/errors.hpp"
#include "bwmdp/mdp.hpp"
#include "bwmdp/table.hpp"
#include "bwmdp/text.hpp"

namespace bwmdp {

/// Simplex membership tolerance for decisions passed to regret_vector().
inline constexpr double kDecisionTolerance = 1e-9;

/// Per-coordinate regret y(i) - <x, y> of a decision x against payoff y.
struct RegretVector {
  numvec entries;
};

/**
Running arithmetic mean of regret vectors. The target set is the
nonpositive orthant; the mean is inside it when no coordinate is positive.
*/
class RegretAverage {
 public:
  RegretAverage() = default;
  explicit RegretAverage(std::size_t dim) : mean_(dim, 0.0) {}

  std::size_t dim() const { return mean_.size(); }
  std::uint64_t count() const { return count_; }
  std::span<const double> mean() const { return mean_; }

  /// Exact incremental mean: mean += (r - mean) / count.
  void add(std::span<const double> regret) {
    if (regret.size() != mean_.size()) {
      throw InputError("regret dimension " + std::to_string(regret.size()) +
                       " does not match average dimension " +
                       std::to_string(mean_.size()));
    }
    ++count_;
    const double inv = 1.0 / static_cast<double>(count_);
    for (std::size_t i = 0; i < mean_.size(); ++i) {
      mean_[i] += (regret[i] - mean_[i]) * inv;
    }
  }
  void add(const RegretVector& regret) { add(regret.entries); }

  /// Builds an average directly from a mean; used by tests and readers.
  static RegretAverage from_mean(numvec mean, std::uint64_t count) {
    RegretAverage avg;
    avg.mean_ = std::move(mean);
    avg.count_ = count;
    return avg;
  }

 private:
  numvec mean_;
  std::uint64_t count_ = 0;
};

inline RegretVector regret_vector(std::span<const double> decision,
                                  std::span<const double> payoff) {
  if (decision.size() != payoff.size()) {
    throw InputError("decision and payoff dimensions differ (" +
                     std::to_string(decision.size()) + " vs " +
                     std::to_string(payoff.size()) + ")");
  }
  if (!in_simplex(decision, kDecisionTolerance)) {
    throw InputError("decision is not a probability vector");
  }
  const double realized = dot(decision, payoff);
  RegretVector out{numvec(payoff.size())};
  for (std::size_t i = 0; i < payoff.size(); ++i) {
    out.entries[i] = payoff[i] - realized;
  }
  return out;
}

/// [v]^+ / ||[v]^+||_1, or the uniform distribution when [v]^+ = 0.
inline numvec positive_part_distribution(std::span<const double> v) {
  numvec out(v.size(), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = v[i] > 0.0 ? v[i] : 0.0;
    total += out[i];
  }
  if (total > 0.0) {
    for (double& p : out) p /= total;
  } else {
    std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(v.size()));
  }
  return out;
}

/// Regret matching: play proportionally to positive average regret.
inline numvec regret_matching(const RegretAverage& avg) {
  return positive_part_distribution(avg.mean());
}

/// Euclidean distance from the mean to the nonpositive orthant, ||[mean]^+||_2.
inline double approachability_distance(std::span<const double> mean) {
  double sq = 0.0;
  for (double v : mean) {
    if (v > 0.0) sq += v * v;
  }
  return std::sqrt(sq);
}

inline double approachability_distance(const RegretAverage& avg) {
  return approachability_distance(avg.mean());
}

// *******************************************************
// Repeated Blackwell game
// *******************************************************

/// What the adversary sees before choosing round `round`'s payoff vector.
struct GameView {
  int round = 0;                       // 1-based
  std::span<const double> decision;    // x_round
  const RegretAverage* average = nullptr;  // average over rounds < round
};

struct RolloutRound {
  int round = 0;
  numvec decision;
  numvec payoff;
  double distance = 0.0;  // after this round's update
};

struct RolloutTrace {
  std::size_t dim = 0;
  std::vector<RolloutRound> rounds;

  double final_distance() const {
    return rounds.empty() ? 0.0 : rounds.back().distance;
  }
};

template <typename F>
concept PayoffOracle = requires(F f, const GameView& view) {
  { f(view) } -> std::convertible_to<numvec>;
};

/**
Plays `horizon` rounds of the regret game: x_1 is uniform and
x_{k+1} = regret_matching(mean of u(x_1,y_1) ... u(x_k,y_k)).

The adversary is called after x_k is fixed and may depend on it. Payoff
vectors must keep dimension `dim` and have entries within [-bound, bound];
violations throw InputError naming the round.
*/
template <PayoffOracle Adversary>
RolloutTrace blackwell_game_rollout(Adversary&& adversary, int horizon,
                                    std::size_t dim, double bound) {
  if (horizon < 1) throw InputError("horizon must be at least 1");
  if (dim == 0) throw InputError("payoff dimension must be positive");
  RolloutTrace trace;
  trace.dim = dim;
  trace.rounds.reserve(static_cast<std::size_t>(horizon));
  RegretAverage avg(dim);
  numvec x(dim, 1.0 / static_cast<double>(dim));
  for (int k = 1; k <= horizon; ++k) {
    numvec y = adversary(GameView{k, x, &avg});
    if (y.size() != dim) {
      throw InputError("adversary payoff dimension changed to " +
                       std::to_string(y.size()) + " at round " +
                       std::to_string(k));
    }
    for (double v : y) {
      if (!(std::abs(v) <= bound)) {
        throw InputError("adversary payoff exceeds bound at round " +
                         std::to_string(k));
      }
    }
    avg.add(regret_vector(x, y));
    trace.rounds.push_back({k, x, std::move(y), approachability_distance(avg)});
    x = regret_matching(avg);
  }
  return trace;
}

/// CSV: round,distance,x0,...,x{m-1}.
inline void write_rollout_csv(const RolloutTrace& trace, std::ostream& out) {
  out << "round,distance";
  for (std::size_t i = 0; i < trace.dim; ++i) out << ",x" << i;
  out << "\n";
  for (const auto& r : trace.rounds) {
    out << r.round << "," << text::format_double(r.distance);
    for (double p : r.decision) out << "," << text::format_double(p);
    out << "\n";
  }
}

// *******************************************************
// Policy-improvement direction
// *******************************************************

/// RM(R(pi(s), Q^pi(s))) - pi(s), with Q^pi evaluated exactly.
inline numvec improvement_direction(const MdpModel& mdp, const Policy& pi,
                                    StateIndex s) {
  const auto eval = policy_evaluation_exact(mdp, pi);
  const auto regret = regret_vector(pi.row(s), eval.qtable.row(s));
  numvec dir = positive_part_distribution(regret.entries);
  for (std::size_t a = 0; a < dir.size(); ++a) dir[a] -= pi(s, a);
  return dir;
}

/**
Central finite-difference derivative of V^pi(s) along the regret-matching
improvement direction at state s. Only row s of the policy is perturbed.

The lower perturbation pi(s) - step*h must stay nonnegative; the step is
halved up to 10 times before giving up.
*/
inline double directional_improvement_check(const MdpModel& mdp,
                                            const Policy& pi, StateIndex s,
                                            double fd_step = 1e-5) {
  if (!(fd_step > 0.0)) throw InputError("fd_step must be positive");
  if (s >= mdp.num_states()) {
    throw std::out_of_range("state index " + std::to_string(s) +
                            " out of range");
  }
  const numvec dir = improvement_direction(mdp, pi, s);
  const std::size_t na = mdp.num_actions();

  auto perturbed = [&](double eps) {
    numvec row(na);
    double total = 0.0;
    for (std::size_t a = 0; a < na; ++a) {
      row[a] = pi(s, a) + eps * dir[a];
      if (row[a] < 0.0) return numvec{};
      total += row[a];
    }
    for (double& p : row) p /= total;
    return row;
  };

  double step = fd_step;
  for (int shrink = 0; shrink <= 10; ++shrink, step *= 0.5) {
    numvec up = perturbed(step);
    numvec down = perturbed(-step);
    if (up.empty() || down.empty()) continue;
    Policy plus = pi;
    Policy minus = pi;
    plus.set_row(s, up);
    minus.set_row(s, down);
    const double v_plus = policy_evaluation_exact(mdp, plus).values[s];
    const double v_minus = policy_evaluation_exact(mdp, minus).values[s];
    return (v_plus - v_minus) / (2.0 * step);
  }
  throw InputError("finite-difference perturbation leaves the simplex at state " +
                   std::to_string(s) + "; policy must be strictly positive");
}

}  // namespace bwmdp

#endif  // BWMDP_APPROACHABILITY_HPP
