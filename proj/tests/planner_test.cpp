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

#include <algorithm>
#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "bwmdp/envs.hpp"
#include "bwmdp/planner.hpp"
#include "test_helpers.hpp"

namespace bwmdp {
namespace {

using testing::single_state_mdp;

TEST(BlackwellVIStepTest, FirstStepByHand) {
  const auto mdp = single_state_mdp({1, 2}, 0.5);
  auto st = PlannerState::initial(mdp);
  blackwell_vi_step(st, mdp);
  EXPECT_EQ(st.iteration, 1);
  EXPECT_DOUBLE_EQ(st.qtable(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(st.qtable(0, 1), 2.0);
  EXPECT_DOUBLE_EQ(st.regret[0].mean()[0], -0.5);
  EXPECT_DOUBLE_EQ(st.regret[0].mean()[1], 0.5);
  EXPECT_EQ(st.policy(0, 0), 0.0);
  EXPECT_EQ(st.policy(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(st.qbar(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(st.qbar(0, 1), 1.0);
}

TEST(BlackwellVIStepTest, ZeroRewardsStayPut) {
  const auto base = random_mdp(3, 2, 0.9, 2);
  const MdpModel mdp(3, 2, 0.9, numvec(6, 0.0),
                     numvec(base.transitions().begin(), base.transitions().end()));
  auto st = PlannerState::initial(mdp);
  for (int k = 0; k < 50; ++k) {
    blackwell_vi_step(st, mdp);
    for (double v : st.qtable.flat()) ASSERT_EQ(v, 0.0);
    ASSERT_EQ(st.policy, Policy::uniform(3, 2));
  }
}

TEST(BlackwellVITest, SingleStateConvergesToQStar) {
  const auto res = blackwell_value_iteration(single_state_mdp({1, 2}, 0.5), 100000,
                                             BlackwellVIOptions{1000});
  EXPECT_NEAR(res.qbar(0, 0), 3.0, 0.05);
  EXPECT_NEAR(res.qbar(0, 1), 4.0, 0.05);
  EXPECT_EQ(res.iterations, 100000);
}

TEST(BlackwellVITest, OneIterationAveragesQ0AndQ1) {
  const auto res = blackwell_value_iteration(single_state_mdp({1, 2}, 0.5), 1);
  EXPECT_DOUBLE_EQ(res.qbar(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(res.qbar(0, 1), 1.0);
  ASSERT_EQ(res.distance_trace.size(), 1u);
  EXPECT_DOUBLE_EQ(res.distance_trace[0].per_state[0], 0.5);
}

TEST(BlackwellVITest, IncrementalAverageMatchesStoredHistory) {
  const auto mdp = random_mdp(4, 3, 0.9, 31);
  auto st = PlannerState::initial(mdp);
  QTable sum = st.qtable;
  for (int k = 1; k <= 1000; ++k) {
    blackwell_vi_step(st, mdp);
    for (std::size_t i = 0; i < sum.flat().size(); ++i) sum.flat()[i] += st.qtable.flat()[i];
  }
  for (std::size_t i = 0; i < sum.flat().size(); ++i) {
    EXPECT_NEAR(st.qbar.flat()[i], sum.flat()[i] / 1001.0, 1e-9);
  }
}

TEST(BlackwellVITest, RandomMdpCloseToOracle) {
  const auto mdp = random_mdp(5, 3, 0.9, 77);
  const auto oracle = value_iteration(mdp, 1e-10, 100000);
  const auto res = blackwell_value_iteration(mdp, 200000, BlackwellVIOptions{10000});
  double scale = 0.0;
  for (double v : oracle.qstar.flat()) scale = std::max(scale, std::abs(v));
  EXPECT_LE(sup_norm_distance(res.qbar, oracle.qstar), 0.05 * (1.0 + scale));
}

TEST(BlackwellVITest, GreedyAgreesWhereGapsAreClear) {
  RandomStream rng(8);
  int clear = 0, agree = 0;
  for (int i = 0; i < 20; ++i) {
    const auto mdp = random_mdp(1 + rng.below(5), 2 + rng.below(2), 0.9, rng.next_u64());
    const auto oracle = value_iteration(mdp, 1e-10, 100000);
    const auto res = blackwell_value_iteration(mdp, 200000, BlackwellVIOptions{200000});
    for (std::size_t s = 0; s < mdp.num_states(); ++s) {
      numvec row(oracle.qstar.row(s).begin(), oracle.qstar.row(s).end());
      std::sort(row.rbegin(), row.rend());
      if (row[0] - row[1] <= 0.01) continue;
      ++clear;
      if (argmax(res.qbar.row(s)) == argmax(oracle.qstar.row(s))) ++agree;
    }
  }
  ASSERT_GT(clear, 0);
  EXPECT_GE(agree, 0.95 * clear) << agree << " of " << clear;
}

TEST(BlackwellVITest, DistanceDecaysOverTrailingWindows) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto mdp = random_mdp(1 + seed % 5, 1 + seed % 3, 0.9, 500 + seed);
    const auto res = blackwell_value_iteration(mdp, 2000);
    const std::size_t n = res.distance_trace.size();
    for (std::size_t s = 0; s < mdp.num_states(); ++s) {
      double early = 0.0, late = 0.0;
      for (std::size_t i = 0; i < n / 2; ++i) early += res.distance_trace[i].per_state[s];
      for (std::size_t i = n / 2; i < n; ++i) late += res.distance_trace[i].per_state[s];
      EXPECT_LE(late / static_cast<double>(n - n / 2), early / static_cast<double>(n / 2))
          << "seed " << seed << " state " << s;
    }
  }
}

TEST(BlackwellVITest, DistanceWithinRateEnvelope) {
  const auto mdp = random_mdp(4, 3, 0.9, 13);
  const std::int64_t n = 20000;
  const auto res = blackwell_value_iteration(mdp, n, BlackwellVIOptions{n});
  const double c = 10.0 * mdp.max_abs_reward() / (1.0 - 0.9);
  for (double d : res.distance_trace.back().per_state) {
    EXPECT_LE(d, c / std::sqrt(static_cast<double>(n)));
  }
}

TEST(BlackwellVITest, TraceStrideAndCsv) {
  const auto res =
      blackwell_value_iteration(single_state_mdp({1, 2}, 0.5), 25, BlackwellVIOptions{10});
  ASSERT_EQ(res.distance_trace.size(), 3u);
  EXPECT_EQ(res.distance_trace[0].iteration, 10);
  EXPECT_EQ(res.distance_trace[2].iteration, 25);
  std::ostringstream out;
  write_distance_trace_csv(res.distance_trace, out);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "iteration,state,distance");
}

TEST(BlackwellVITest, RejectsBadInputs) {
  const auto mdp = single_state_mdp({1, 2}, 0.5);
  EXPECT_THROW(blackwell_value_iteration(mdp, 0), InputError);
  EXPECT_THROW(blackwell_value_iteration(mdp.with_discount(1.0), 5), InputError);
  EXPECT_THROW(blackwell_value_iteration(mdp, 5, QTable(2, 2), Policy::uniform(2, 2)),
               InputError);
}

TEST(BlackwellVITest, NonFiniteInitialTableAborts) {
  const auto mdp = single_state_mdp({1, 2}, 0.5);
  QTable q0(1, 2);
  q0(0, 0) = INFINITY;
  try {
    blackwell_value_iteration(mdp, 10, q0, Policy::uniform(1, 2));
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("iteration 1"), std::string::npos) << e.what();
  }
}

}  // namespace
}  // namespace bwmdp
