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

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include <gtest/gtest.h>

#include "bwmdp/text.hpp"

namespace {

namespace fs = std::filesystem;

int run_cli(const std::string& args) {
  const std::string cmd = std::string(BWMDP_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("bwmdp_cli_test_" + name);
  fs::remove_all(dir);
  return dir;
}

const std::string kSamples = BWMDP_SAMPLES_DIR;

TEST(CliTest, UsageErrorsExitTwo) {
  EXPECT_EQ(run_cli("bogus"), 2);
  EXPECT_EQ(run_cli(""), 2);
  EXPECT_EQ(run_cli("learn --episodes -3"), 2);
  EXPECT_EQ(run_cli("--help"), 0);
}

TEST(CliTest, RuntimeErrorsExitOne) {
  EXPECT_EQ(run_cli("compare --config /nonexistent.cfg"), 2);
  const auto dir = scratch("bad");
  fs::create_directories(dir);
  bwmdp::text::write_file((dir / "bad.cfg").string(), "[algo dqn]\n");
  EXPECT_EQ(run_cli("compare --config " + (dir / "bad.cfg").string()), 1);
  fs::remove_all(dir);
}

TEST(CliTest, PlanWritesOutputs) {
  const auto dir = scratch("plan");
  ASSERT_EQ(run_cli("plan --mdp " + kSamples + "/two_state.mdp --algo blackwell-vi --iters 1000 --out " +
                    dir.string()),
            0);
  for (const char* f : {"qbar.csv", "policy.csv", "distance.csv", "plan.txt"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
  ASSERT_EQ(run_cli("plan --env " + kSamples + "/cliff.cfg --algo vi --out " + dir.string()), 0);
  EXPECT_TRUE(fs::exists(dir / "qstar.csv"));
  fs::remove_all(dir);
}

TEST(CliTest, LearnIsByteDeterministic) {
  const auto dir = scratch("learn");
  fs::create_directories(dir);
  const std::string args = "learn --algo sarsa --episodes 30 --runs 2 --seed 4 --out ";
  ASSERT_EQ(run_cli(args + (dir / "a.csv").string()), 0);
  ASSERT_EQ(run_cli(args + (dir / "b.csv").string()), 0);
  const auto a = bwmdp::text::read_file((dir / "a.csv").string());
  EXPECT_EQ(a, bwmdp::text::read_file((dir / "b.csv").string()));
  EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 1 + 2 * 30);
  fs::remove_all(dir);
}

TEST(CliTest, CompareHonorsOutputDirEnv) {
  const auto dir = scratch("compare");
  const std::string env = "BWMDP_OUTPUT_DIR=" + dir.string() + " ";
  const std::string cmd = env + BWMDP_CLI_PATH + " compare --config " + kSamples +
                          "/cliff.cfg --episodes 20 --runs 2 >/dev/null 2>&1";
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  EXPECT_TRUE(fs::exists(dir / "summary.json"));
  EXPECT_TRUE(fs::exists(dir / "plot.csv"));
  fs::remove_all(dir);
}

TEST(CliTest, CheckPasses) { EXPECT_EQ(run_cli("check --seed 3"), 0); }

}  // namespace
