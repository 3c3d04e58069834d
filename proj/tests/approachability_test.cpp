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

#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "bwmdp/approachability.hpp"
#include "bwmdp/checks.hpp"
#include "bwmdp/envs.hpp"
#include "test_helpers.hpp"

namespace bwmdp {
namespace {

numvec rm_of(numvec mean) { return regret_matching(RegretAverage::from_mean(std::move(mean), 1)); }

void expect_vec_near(std::span<const double> got, std::initializer_list<double> want,
                     double tol = 1e-12) {
  ASSERT_EQ(got.size(), want.size());
  std::size_t i = 0;
  for (double w : want) EXPECT_NEAR(got[i++], w, tol) << "index " << i - 1;
}

TEST(RegretVectorTest, SpecExamples) {
  const numvec x3(3, 1.0 / 3.0);
  expect_vec_near(regret_vector(x3, numvec{1, 2, 3}).entries, {-1, 0, 1});
  expect_vec_near(regret_vector(numvec{1, 0}, numvec{2, 5}).entries, {0, 3});
  expect_vec_near(regret_vector(numvec{0.5, 0.5}, numvec{4, 4}).entries, {0, 0});
}

TEST(RegretVectorTest, ValidatesInputs) {
  EXPECT_THROW(regret_vector(numvec{1, 0}, numvec{1, 2, 3}), InputError);
  EXPECT_THROW(regret_vector(numvec{0.7, 0.7}, numvec{1, 2}), InputError);
}

TEST(RegretMatchingTest, SpecExamples) {
  expect_vec_near(rm_of({2, -1, 3}), {0.4, 0, 0.6});
  expect_vec_near(rm_of({-1, -2}), {0.5, 0.5});
  expect_vec_near(rm_of({0, 0, 5}), {0, 0, 1});
}

TEST(RegretAverageTest, IncrementalMeanIsExact) {
  RegretAverage avg(2);
  avg.add(numvec{1, -1});
  avg.add(numvec{3, 5});
  avg.add(numvec{-1, 2});
  EXPECT_EQ(avg.count(), 3u);
  expect_vec_near(avg.mean(), {1, 2});
  EXPECT_THROW(avg.add(numvec{1}), InputError);
}

TEST(DistanceTest, SpecExamples) {
  EXPECT_EQ(approachability_distance(numvec{-1, -2}), 0.0);
  EXPECT_DOUBLE_EQ(approachability_distance(numvec{3, 4}), 5.0);
  EXPECT_DOUBLE_EQ(approachability_distance(numvec{-1, 2}), 2.0);
}

TEST(RegretMatchingTest, BlackwellIdentityProperty) {
  const auto r = check_rm_blackwell_identity(2024);
  EXPECT_TRUE(r.passed) << r.detail;
}

TEST(RegretMatchingTest, SimplexProperty) {
  const auto r = check_rm_simplex(2024);
  EXPECT_TRUE(r.passed) << r.detail;
}

TEST(RolloutTest, ConstantAdversaryConcentrates) {
  const auto trace = blackwell_game_rollout([](const GameView&) { return numvec{1, 0}; },
                                            10000, 2, 1.0);
  ASSERT_EQ(trace.rounds.size(), 10000u);
  EXPECT_GE(trace.rounds.back().decision[0], 0.99);
  EXPECT_LE(trace.final_distance(), 0.01);
}

TEST(RolloutTest, AlternatingAdversaryDecays) {
  const auto trace = blackwell_game_rollout(
      [](const GameView& v) { return v.round % 2 ? numvec{1, 0} : numvec{0, 1}; }, 10000, 2,
      1.0);
  EXPECT_LE(trace.final_distance(), trace.rounds[99].distance);
}

TEST(RolloutTest, SingleActionHasZeroDistance) {
  RandomStream rng(3);
  const auto trace = blackwell_game_rollout(
      [&](const GameView&) { return numvec{rng.uniform(-1, 1)}; }, 200, 1, 1.0);
  for (const auto& r : trace.rounds) EXPECT_EQ(r.distance, 0.0);
}

TEST(RolloutTest, FirstDecisionIsUniform) {
  const auto trace = blackwell_game_rollout([](const GameView&) { return numvec{0, 0, 1}; },
                                            1, 3, 1.0);
  expect_vec_near(trace.rounds[0].decision, {1.0 / 3, 1.0 / 3, 1.0 / 3});
}

TEST(RolloutTest, DimensionDriftNamesTheRound) {
  try {
    blackwell_game_rollout(
        [](const GameView& v) { return v.round < 7 ? numvec{0, 1} : numvec{0, 1, 2}; }, 10, 2,
        5.0);
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("round 7"), std::string::npos) << e.what();
  }
  EXPECT_THROW(blackwell_game_rollout([](const GameView&) { return numvec{2, 0}; }, 3, 2, 1.0),
               InputError);
}

TEST(RolloutTest, CsvLayout) {
  const auto trace = blackwell_game_rollout([](const GameView&) { return numvec{1, 0}; }, 2, 2,
                                            1.0);
  std::ostringstream out;
  write_rollout_csv(trace, out);
  std::istringstream lines(out.str());
  std::string header;
  std::getline(lines, header);
  EXPECT_EQ(header, "round,distance,x0,x1");
  std::string first;
  std::getline(lines, first);
  EXPECT_EQ(first, "1,0.5,0.5,0.5");
}

TEST(DirectionalCheckTest, ImprovingDirectionIsPositive) {
  const auto mdp = testing::single_state_mdp({1, 2}, 0.5);
  EXPECT_GT(directional_improvement_check(mdp, Policy::uniform(1, 2), 0), 0.0);
}

TEST(DirectionalCheckTest, ConstantRewardsGiveZero) {
  const auto base = random_mdp(3, 3, 0.9, 8);
  const MdpModel mdp(3, 3, 0.9, numvec(9, 0.7),
                     numvec(base.transitions().begin(), base.transitions().end()));
  RandomStream rng(4);
  const auto pi = gen::interior_policy(3, 3, rng);
  EXPECT_NEAR(directional_improvement_check(mdp, pi, 1), 0.0, 1e-6);
}

TEST(DirectionalCheckTest, ZeroRegretAtStateGivesZero) {
  // Both actions at state 0 are identical, so every row there is greedy and
  // has zero regret. The fallback direction (uniform - pi) changes nothing.
  const MdpModel mdp(2, 2, 0.9, {1, 1, 0, 2}, {0, 1, 0, 1, 0.5, 0.5, 1, 0});
  const Policy pi(Table<double>(2, 2, std::vector<double>{0.3, 0.7, 0.1, 0.9}));
  const auto eval = policy_evaluation_exact(mdp, pi);
  EXPECT_DOUBLE_EQ(eval.qtable(0, 0), eval.qtable(0, 1));
  const numvec dir = improvement_direction(mdp, pi, 0);
  EXPECT_NEAR(dir[0], 0.2, 1e-12);
  EXPECT_NEAR(dir[1], -0.2, 1e-12);
  double scale = 0.0;
  for (double v : eval.qtable.flat()) scale = std::max(scale, std::abs(v));
  EXPECT_LE(std::abs(directional_improvement_check(mdp, pi, 0)), 1e-6 * scale);
}

TEST(DirectionalCheckTest, PurePolicyCannotBePerturbed) {
  const MdpModel mdp(2, 2, 0.9, {1, 1, 0, 2}, {0, 1, 0, 1, 0.5, 0.5, 1, 0});
  const std::size_t acts[] = {0, 1};
  EXPECT_THROW(directional_improvement_check(mdp, Policy::deterministic(acts, 2), 0),
               InputError);
}

TEST(DirectionalCheckTest, MatchesExactDirectionalDerivative) {
  // Single state: V(pi) = <pi, r> / (1 - discount), so the derivative along
  // a mass-preserving direction d is <d, r> / (1 - discount).
  const auto mdp = testing::single_state_mdp({1, 2, 0}, 0.5);
  const Policy pi(Table<double>(1, 3, std::vector<double>{0.2, 0.3, 0.5}));
  const numvec d = improvement_direction(mdp, pi, 0);
  const double expected = (d[0] * 1 + d[1] * 2) / 0.5;
  EXPECT_NEAR(directional_improvement_check(mdp, pi, 0), expected, 1e-6);
}

TEST(DirectionalCheckTest, Property) {
  const auto r = check_directional_improvement(99);
  EXPECT_TRUE(r.passed) << r.detail;
}

TEST(DirectionalCheckTest, StateOutOfRange) {
  EXPECT_THROW(directional_improvement_check(testing::single_state_mdp({1}, 0.5),
                                             Policy::uniform(1, 1), 1),
               std::out_of_range);
}

}  // namespace
}  // namespace bwmdp
