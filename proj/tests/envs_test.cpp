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

#include <map>
#include <queue>

#include <gtest/gtest.h>

#include "bwmdp/envs.hpp"

namespace bwmdp {
namespace {

/// Breadth-first shortest path from start to goal avoiding cliff cells.
int bfs_path_length(const GridWorldSpec& spec) {
  std::map<Cell, int> dist{{spec.start, 0}};
  std::queue<Cell> frontier;
  frontier.push(spec.start);
  while (!frontier.empty()) {
    const Cell c = frontier.front();
    frontier.pop();
    if (c == spec.goal) return dist[c];
    for (int m = 0; m < 4; ++m) {
      const Cell n = shifted(c, static_cast<Move>(m));
      if (!spec.in_bounds(n) || dist.contains(n)) continue;
      if (spec.is_cliff(n)) continue;
      dist[n] = dist[c] + 1;
      frontier.push(n);
    }
  }
  return -1;
}

TEST(CliffStepTest, SpecExamples) {
  const auto spec = GridWorldSpec::cliff_walking();
  auto res = cliff_step(spec, EnvState{{2, 5}}, Move::Down);
  EXPECT_EQ(res.reward, -100.0);
  EXPECT_EQ(res.next.cell, spec.start);
  EXPECT_FALSE(res.terminal);

  res = cliff_step(spec, EnvState{{1, 5}}, Move::Right);
  EXPECT_EQ(res.reward, -1.0);
  EXPECT_EQ(res.next.cell, (Cell{1, 6}));

  res = cliff_step(spec, EnvState{{0, 0}}, Move::Up);
  EXPECT_EQ(res.reward, -1.0);
  EXPECT_EQ(res.next.cell, (Cell{0, 0}));

  res = cliff_step(spec, EnvState{{2, 11}}, Move::Down);
  EXPECT_TRUE(res.terminal);
  EXPECT_THROW(cliff_step(spec, EnvState{spec.goal}, Move::Up), UsageError);
}

TEST(GridSpecTest, Validation) {
  GridWorldSpec spec = GridWorldSpec::cliff_walking();
  spec.goal = {9, 9};
  EXPECT_THROW(spec.validate(), InputError);
  spec = GridWorldSpec::cliff_walking();
  spec.cliff.push_back(spec.start);
  EXPECT_THROW(spec.validate(), InputError);
}

TEST(ToMdpTest, RowsSumToOneAndTerminalAbsorbs) {
  const auto spec = GridWorldSpec::cliff_walking();
  const auto mdp = to_mdp(spec, 0.999);
  EXPECT_EQ(mdp.num_states(), 49u);
  for (std::size_t s = 0; s < mdp.num_states(); ++s) {
    for (std::size_t a = 0; a < 4; ++a) {
      double total = 0.0;
      for (double p : mdp.next_distribution(s, a)) total += p;
      EXPECT_NEAR(total, 1.0, 1e-12);
    }
  }
  const auto t = spec.terminal_index();
  EXPECT_EQ(mdp.transition(t, 0, t), 1.0);
  EXPECT_EQ(mdp.reward(t, 2), 0.0);
}

TEST(ToMdpTest, OptimalPathMatchesBfs) {
  const auto spec = GridWorldSpec::cliff_walking();
  const auto res = value_iteration(to_mdp(spec, 0.999), 1e-12, 1000000);
  const auto path = greedy_path_length(spec, res.qstar);
  ASSERT_TRUE(path.has_value());
  EXPECT_EQ(*path, 13);
  EXPECT_EQ(*path, bfs_path_length(spec));
}

TEST(ToMdpTest, OneStepGrid) {
  GridWorldSpec spec;
  spec.rows = 1;
  spec.cols = 2;
  spec.start = {0, 0};
  spec.goal = {0, 1};
  const auto res = value_iteration(to_mdp(spec, 0.999999), 1e-12, 100000);
  EXPECT_NEAR(res.qstar(0, static_cast<int>(Move::Right)), -1.0, 1e-9);
  const auto row = res.qstar.row(0);
  EXPECT_NEAR(*std::max_element(row.begin(), row.end()), -1.0, 1e-9);
}

TEST(RandomMdpTest, DeterministicAndNormalized) {
  const auto a = random_mdp(5, 3, 0.9, 123);
  EXPECT_EQ(a, random_mdp(5, 3, 0.9, 123));
  EXPECT_NE(a, random_mdp(5, 3, 0.9, 124));
  for (std::size_t s = 0; s < 5; ++s) {
    for (std::size_t act = 0; act < 3; ++act) {
      double total = 0.0;
      for (double p : a.next_distribution(s, act)) {
        EXPECT_GT(p, 0.0);
        total += p;
      }
      EXPECT_NEAR(total, 1.0, 1e-12);
      EXPECT_GE(a.reward(s, act), 0.0);
      EXPECT_LE(a.reward(s, act), 1.0);
    }
  }
}

TEST(RandomMdpTest, SingleStateSelfLoops) {
  const auto m = random_mdp(1, 4, 0.9, 7);
  for (std::size_t a = 0; a < 4; ++a) EXPECT_EQ(m.transition(0, a, 0), 1.0);
  EXPECT_THROW(random_mdp(0, 2, 0.9, 1), InputError);
  EXPECT_THROW(random_mdp(2, 2, 1.0, 1), InputError);
}

TEST(GridWorldEnvTest, EpisodeFlow) {
  GridWorldEnv env(GridWorldSpec::cliff_walking());
  RandomStream rng(1);
  EXPECT_EQ(env.reset(rng), 36u);
  EXPECT_EQ(env.state().episode, 0);
  auto out = env.step(static_cast<std::size_t>(Move::Right), rng);
  EXPECT_EQ(out.reward, -100.0);
  EXPECT_EQ(out.next_state, 36u);
  EXPECT_FALSE(out.terminal);
  env.reset(rng);
  EXPECT_EQ(env.state().episode, 1);
  EXPECT_THROW(env.step(4, rng), InputError);
}

TEST(MdpEnvTest, NoiseIsZeroMean) {
  MdpEnv env(MdpModel(1, 1, 0.9, {0.5}, {1.0}), 0, 0.1);
  RandomStream rng(2);
  env.reset(rng);
  double total = 0.0;
  for (int i = 0; i < 20000; ++i) total += env.step(0, rng).reward;
  EXPECT_NEAR(total / 20000, 0.5, 0.005);
  EXPECT_THROW(MdpEnv(MdpModel(1, 1, 0.9, {0.5}, {1.0}), 1), InputError);
}

}  // namespace
}  // namespace bwmdp
