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

#ifndef BWMDP_ENVS_HPP
#define BWMDP_ENVS_HPP

#include <algorithm>
#include <compare>
#include <concepts>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bwmdp/errors.hpp"
#include "bwmdp/mdp.hpp"
#include "bwmdp/random.hpp"

namespace bwmdp {

// *******************************************************
// Cliff-walking gridworld
// *******************************************************

struct Cell {
  int row = 0;
  int col = 0;
  auto operator<=>(const Cell&) const = default;
};

enum class Move : int { Up = 0, Down = 1, Left = 2, Right = 3 };
inline constexpr std::size_t kNumMoves = 4;

struct GridWorldSpec {
  int rows = 4;
  int cols = 12;
  Cell start{3, 0};
  Cell goal{3, 11};
  std::vector<Cell> cliff;
  double step_reward = -1.0;
  double cliff_reward = -100.0;

  /// Start bottom-left, goal bottom-right, cliff along the bottom row between.
  static GridWorldSpec cliff_walking(int rows = 4, int cols = 12) {
    GridWorldSpec spec;
    spec.rows = rows;
    spec.cols = cols;
    spec.start = {rows - 1, 0};
    spec.goal = {rows - 1, cols - 1};
    for (int c = 1; c < cols - 1; ++c) spec.cliff.push_back({rows - 1, c});
    spec.validate();
    return spec;
  }

  bool in_bounds(Cell c) const {
    return c.row >= 0 && c.row < rows && c.col >= 0 && c.col < cols;
  }
  bool is_cliff(Cell c) const {
    return std::find(cliff.begin(), cliff.end(), c) != cliff.end();
  }

  std::size_t num_cells() const { return static_cast<std::size_t>(rows * cols); }
  std::size_t cell_index(Cell c) const {
    return static_cast<std::size_t>(c.row * cols + c.col);
  }
  Cell cell_at(std::size_t index) const {
    return {static_cast<int>(index) / cols, static_cast<int>(index) % cols};
  }
  /// Index of the absorbing terminal state appended after the cells.
  std::size_t terminal_index() const { return num_cells(); }

  void validate() const {
    if (rows < 1 || cols < 1) throw InputError("grid dimensions must be positive");
    auto name = [](Cell c) {
      return "(" + std::to_string(c.row) + "," + std::to_string(c.col) + ")";
    };
    if (!in_bounds(start)) throw InputError("start " + name(start) + " out of bounds");
    if (!in_bounds(goal)) throw InputError("goal " + name(goal) + " out of bounds");
    if (start == goal) throw InputError("start and goal coincide");
    for (const Cell& c : cliff) {
      if (!in_bounds(c)) throw InputError("cliff cell " + name(c) + " out of bounds");
    }
    if (is_cliff(start)) throw InputError("start is a cliff cell");
    if (is_cliff(goal)) throw InputError("goal is a cliff cell");
    if (!std::isfinite(step_reward) || !std::isfinite(cliff_reward)) {
      throw InputError("grid rewards must be finite");
    }
  }
};

struct EnvState {
  Cell cell;
  int steps = 0;
  int episode = 0;
};

struct CliffStepResult {
  EnvState next;
  double reward = 0.0;
  bool terminal = false;
};

inline Cell shifted(Cell c, Move m) {
  switch (m) {
    case Move::Up: return {c.row - 1, c.col};
    case Move::Down: return {c.row + 1, c.col};
    case Move::Left: return {c.row, c.col - 1};
    case Move::Right: return {c.row, c.col + 1};
  }
  return c;
}

/**
One move. Walls keep the agent in place at the usual step cost. Entering a
cliff cell costs cliff_reward and sends the agent back to the start without
ending the episode. Entering the goal ends it.
*/
inline CliffStepResult cliff_step(const GridWorldSpec& spec, const EnvState& state,
                                  Move move) {
  if (state.cell == spec.goal) {
    throw UsageError("cliff_step called on a terminal state");
  }
  CliffStepResult out;
  out.next = state;
  out.next.steps += 1;
  Cell target = shifted(state.cell, move);
  if (!spec.in_bounds(target)) target = state.cell;
  if (spec.is_cliff(target)) {
    out.next.cell = spec.start;
    out.reward = spec.cliff_reward;
    return out;
  }
  out.next.cell = target;
  out.reward = spec.step_reward;
  out.terminal = target == spec.goal;
  return out;
}

/// State index used by learners: the cell index, or the terminal index at the goal.
inline std::size_t state_index(const GridWorldSpec& spec, const EnvState& st) {
  return st.cell == spec.goal ? spec.terminal_index() : spec.cell_index(st.cell);
}

/**
Deterministic MDP of the grid with one absorbing zero-reward terminal state
appended. Entering the goal leads to the terminal state. The goal and cliff
cells themselves are unreachable; their actions lead to the terminal state
at zero reward.
*/
inline MdpModel to_mdp(const GridWorldSpec& spec, double discount) {
  spec.validate();
  const std::size_t ns = spec.num_cells() + 1;
  const std::size_t na = kNumMoves;
  numvec rewards(ns * na, 0.0);
  numvec transitions(ns * na * ns, 0.0);
  auto set = [&](std::size_t s, std::size_t a, std::size_t next, double r) {
    rewards[s * na + a] = r;
    transitions[(s * na + a) * ns + next] = 1.0;
  };
  for (std::size_t s = 0; s < ns; ++s) {
    for (std::size_t a = 0; a < na; ++a) {
      if (s == spec.terminal_index()) {
        set(s, a, s, 0.0);
        continue;
      }
      const Cell c = spec.cell_at(s);
      if (c == spec.goal || spec.is_cliff(c)) {
        set(s, a, spec.terminal_index(), 0.0);
        continue;
      }
      const auto res = cliff_step(spec, EnvState{c}, static_cast<Move>(a));
      set(s, a, state_index(spec, res.next), res.reward);
    }
  }
  return MdpModel(ns, na, discount, std::move(rewards), std::move(transitions));
}

/// Steps to reach the goal from the start following argmax Q (lowest index
/// on ties); nullopt if the goal is not reached within `max_steps`.
inline std::optional<int> greedy_path_length(const GridWorldSpec& spec,
                                             const QTable& q, int max_steps = 1000) {
  EnvState st{spec.start};
  for (int step = 1; step <= max_steps; ++step) {
    const auto a = argmax(q.row(state_index(spec, st)));
    const auto res = cliff_step(spec, st, static_cast<Move>(a));
    if (res.terminal) return step;
    st = res.next;
  }
  return std::nullopt;
}

/// ASCII dump of the greedy policy: arrows per cell, C = cliff, G = goal.
inline std::string render_greedy_policy(const GridWorldSpec& spec, const QTable& q) {
  static constexpr char kArrows[] = {'^', 'v', '<', '>'};
  std::string out;
  for (int r = 0; r < spec.rows; ++r) {
    for (int c = 0; c < spec.cols; ++c) {
      const Cell cell{r, c};
      if (cell == spec.goal) {
        out += 'G';
      } else if (spec.is_cliff(cell)) {
        out += 'C';
      } else {
        out += kArrows[argmax(q.row(spec.cell_index(cell)))];
      }
    }
    out += '\n';
  }
  return out;
}

// *******************************************************
// Random MDPs
// *******************************************************

/// Dense random MDP: transition rows are normalized Exp(1) draws (a symmetric
/// Dirichlet with concentration 1), rewards are uniform in [0, 1].
inline MdpModel random_mdp(std::size_t num_states, std::size_t num_actions,
                           double discount, std::uint64_t seed) {
  if (num_states < 1 || num_actions < 1) {
    throw InputError("random_mdp sizes must be at least 1");
  }
  if (!(discount > 0.0 && discount < 1.0)) {
    throw InputError("random_mdp discount must lie in (0, 1)");
  }
  RandomStream rng(seed, "random_mdp");
  numvec transitions(num_states * num_actions * num_states);
  for (std::size_t row = 0; row < num_states * num_actions; ++row) {
    double total = 0.0;
    for (std::size_t t = 0; t < num_states; ++t) {
      const double w = rng.exponential();
      transitions[row * num_states + t] = w;
      total += w;
    }
    for (std::size_t t = 0; t < num_states; ++t) {
      transitions[row * num_states + t] /= total;
    }
  }
  numvec rewards(num_states * num_actions);
  for (double& r : rewards) r = rng.uniform();
  return MdpModel(num_states, num_actions, discount, std::move(rewards),
                  std::move(transitions));
}

// *******************************************************
// Episodic environments for online learners
// *******************************************************

struct StepOutcome {
  std::size_t next_state = 0;
  double reward = 0.0;
  bool terminal = false;
};

template <typename E>
concept Environment = requires(E env, const E cenv, std::size_t a, RandomStream& rng) {
  { cenv.num_states() } -> std::convertible_to<std::size_t>;
  { cenv.num_actions() } -> std::convertible_to<std::size_t>;
  { cenv.discount() } -> std::convertible_to<double>;
  { cenv.reward_upper_bound() } -> std::convertible_to<double>;
  { env.reset(rng) } -> std::convertible_to<std::size_t>;
  { env.step(a, rng) } -> std::same_as<StepOutcome>;
};

class GridWorldEnv {
 public:
  explicit GridWorldEnv(GridWorldSpec spec, double discount = 1.0)
      : spec_(std::move(spec)), discount_(discount) {
    spec_.validate();
    if (!(discount_ >= 0.0 && discount_ <= 1.0)) {
      throw InputError("discount must lie in [0, 1]");
    }
    state_.cell = spec_.start;
  }

  std::size_t num_states() const { return spec_.num_cells() + 1; }
  std::size_t num_actions() const { return kNumMoves; }
  double discount() const { return discount_; }
  double reward_upper_bound() const {
    return std::max(spec_.step_reward, spec_.cliff_reward);
  }
  const GridWorldSpec& spec() const { return spec_; }
  const EnvState& state() const { return state_; }

  std::size_t reset(RandomStream&) {
    const int episode = started_ ? state_.episode + 1 : 0;
    started_ = true;
    state_ = EnvState{spec_.start, 0, episode};
    return spec_.cell_index(spec_.start);
  }

  StepOutcome step(std::size_t action, RandomStream&) {
    if (action >= kNumMoves) throw InputError("grid action out of range");
    const auto res = cliff_step(spec_, state_, static_cast<Move>(action));
    state_ = res.next;
    return {state_index(spec_, state_), res.reward, res.terminal};
  }

 private:
  GridWorldSpec spec_;
  double discount_;
  EnvState state_;
  bool started_ = false;
};

/// Samples transitions from a tabular model. Continuing: never terminal.
/// Optional zero-mean Gaussian reward noise with standard deviation sigma.
class MdpEnv {
 public:
  explicit MdpEnv(MdpModel model, std::size_t start_state = 0,
                  double noise_sigma = 0.0)
      : model_(std::move(model)), start_(start_state), sigma_(noise_sigma) {
    if (start_ >= model_.num_states()) throw InputError("start state out of range");
    if (!(sigma_ >= 0.0)) throw InputError("noise sigma must be nonnegative");
  }

  std::size_t num_states() const { return model_.num_states(); }
  std::size_t num_actions() const { return model_.num_actions(); }
  double discount() const { return model_.discount(); }
  double reward_upper_bound() const { return model_.max_reward(); }
  const MdpModel& model() const { return model_; }

  std::size_t reset(RandomStream&) {
    state_ = start_;
    return state_;
  }

  StepOutcome step(std::size_t action, RandomStream& rng) {
    if (action >= model_.num_actions()) throw InputError("action out of range");
    double reward = model_.reward(state_, action);
    if (sigma_ > 0.0) reward += sigma_ * rng.normal();
    state_ = rng.categorical(model_.next_distribution(state_, action));
    return {state_, reward, false};
  }

 private:
  MdpModel model_;
  std::size_t start_;
  double sigma_;
  std::size_t state_ = 0;
};

static_assert(Environment<GridWorldEnv>);
static_assert(Environment<MdpEnv>);

}  // namespace bwmdp

#endif  // BWMDP_ENVS_HPP
