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

// bwmdp: plan / learn / compare / check.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "bwmdp/bwmdp.hpp"

namespace fs = std::filesystem;
using namespace bwmdp;

namespace {

constexpr int kExitUsage = 2;

// Discount used when planning on the episodic grid, which needs discount < 1.
constexpr double kGridPlanningDiscount = 0.999;

/// --out, else $BWMDP_OUTPUT_DIR, else the fallback.
std::string output_dir(const std::string& flag, const std::string& fallback) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv(kOutputDirEnvVar); env && *env) return env;
  return fallback;
}

void write_qtable_csv(const QTable& q, const std::string& path) {
  std::ostringstream out;
  out << "state,action,value\n";
  for (std::size_t s = 0; s < q.num_states(); ++s) {
    for (std::size_t a = 0; a < q.num_actions(); ++a) {
      out << s << "," << a << "," << text::format_double(q(s, a)) << "\n";
    }
  }
  text::write_file(path, out.str());
}

void write_policy_csv(const Policy& pi, const std::string& path) {
  std::ostringstream out;
  out << "state,action,probability\n";
  for (std::size_t s = 0; s < pi.num_states(); ++s) {
    for (std::size_t a = 0; a < pi.num_actions(); ++a) {
      out << s << "," << a << "," << text::format_double(pi(s, a)) << "\n";
    }
  }
  text::write_file(path, out.str());
}

// -- plan -------------------------------------------------------------------

struct PlanArgs {
  std::string mdp_file;
  std::string env_file;
  std::string algo = "blackwell-vi";
  std::int64_t iters = 100000;
  double tolerance = 1e-10;
  std::int64_t trace_stride = 1;
  std::string out;
};

int run_plan(const PlanArgs& args) {
  MdpModel mdp;
  std::ostringstream meta;
  if (!args.mdp_file.empty()) {
    mdp = load_mdp(args.mdp_file);
    meta << "source " << args.mdp_file << "\n";
  } else {
    const EnvConfig env = load_env_config(args.env_file);
    if (env.kind == EnvKind::Mdp) {
      mdp = *env.model;
      meta << "source " << env.mdp_file << "\n";
    } else {
      mdp = to_mdp(env.grid, kGridPlanningDiscount);
      meta << "source grid " << args.env_file << "\n";
      meta << "discount_substitution " << text::format_double(env.discount) << " -> "
           << text::format_double(kGridPlanningDiscount) << "\n";
      std::cout << "note: grid discount " << env.discount << " replaced by "
                << kGridPlanningDiscount << " for planning\n";
    }
  }
  const fs::path dir = output_dir(args.out, "results/plan");
  fs::create_directories(dir);
  meta << "algo " << args.algo << "\n";
  meta << "discount " << text::format_double(mdp.discount()) << "\n";

  if (args.algo == "blackwell-vi") {
    const auto res = blackwell_value_iteration(mdp, args.iters, {args.trace_stride});
    write_qtable_csv(res.qbar, (dir / "qbar.csv").string());
    write_policy_csv(res.policy, (dir / "policy.csv").string());
    std::ostringstream trace;
    write_distance_trace_csv(res.distance_trace, trace);
    text::write_file((dir / "distance.csv").string(), trace.str());
    double worst = 0.0;
    for (double d : res.distance_trace.back().per_state) worst = std::max(worst, d);
    meta << "iterations " << res.iterations << "\n";
    meta << "final_max_distance " << text::format_double(worst) << "\n";
    std::cout << "blackwell-vi: " << res.iterations << " iterations, max final distance "
              << worst << "\n";
  } else if (args.algo == "vi") {
    const auto res = value_iteration(mdp, args.tolerance, static_cast<int>(args.iters));
    write_qtable_csv(res.qstar, (dir / "qstar.csv").string());
    write_policy_csv(res.greedy, (dir / "policy.csv").string());
    meta << "iterations " << res.iterations << "\n";
    meta << "converged " << (res.converged ? "true" : "false") << "\n";
    meta << "gap " << text::format_double(res.gap) << "\n";
    meta << "error_bound " << text::format_double(res.error_bound) << "\n";
    std::cout << "vi: " << res.iterations << " iterations, gap " << res.gap
              << ", error bound " << res.error_bound
              << (res.converged ? "" : " (NOT converged)") << "\n";
  } else {
    throw ConfigError("unknown planning algorithm '" + args.algo +
                      "' (expected blackwell-vi or vi)");
  }
  text::write_file((dir / "plan.txt").string(), meta.str());
  std::cout << "wrote " << dir.string() << "\n";
  return 0;
}

// -- learn ------------------------------------------------------------------

struct LearnArgs {
  std::string env_file;
  std::string algo = "blackwell-q";
  std::optional<double> epsilon;
  std::optional<double> learning_rate;
  std::optional<double> fast_exponent;
  std::optional<double> slow_exponent;
  std::optional<double> initial_q;
  int episodes = 500;
  int runs = 1;
  std::uint64_t seed = 1;
  int max_steps = kDefaultMaxEpisodeSteps;
  std::string out;
  bool show_policy = false;
};

int run_learn(const LearnArgs& args) {
  ExperimentConfig cfg;
  if (!args.env_file.empty()) cfg.env = load_env_config(args.env_file);
  AlgorithmSpec algo;
  algo.kind = parse_algorithm_kind(args.algo);
  algo.name = args.algo;
  if (args.epsilon) algo.epsilon = *args.epsilon;
  if (args.learning_rate) algo.learning_rate = *args.learning_rate;
  if (args.fast_exponent) algo.fast_exponent = *args.fast_exponent;
  if (args.slow_exponent) algo.slow_exponent = *args.slow_exponent;
  algo.initial_q = args.initial_q;
  cfg.algorithms = {algo};
  cfg.episodes = args.episodes;
  cfg.runs = args.runs;
  cfg.base_seed = args.seed;
  cfg.max_steps_per_episode = args.max_steps;
  cfg.threads = 1;
  const ExperimentResult result = run_experiment(cfg);

  std::ostringstream csv;
  write_episodes_csv(cfg, result.records, csv);
  if (args.out.empty()) {
    std::cout << csv.str();
  } else {
    const fs::path path(args.out);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    text::write_file(path.string(), csv.str());
    const auto& summary = result.summary.algorithms.front();
    std::cerr << algo.name << ": final-window mean return " << summary.final_mean << " (W="
              << result.summary.final_window << ")\n";
  }
  if (args.show_policy && cfg.env.kind == EnvKind::Cliff) {
    std::cerr << render_greedy_policy(cfg.env.grid, result.records.front().qtable);
  }
  return 0;
}

// -- compare ----------------------------------------------------------------

struct CompareArgs {
  std::string config;
  std::optional<int> episodes;
  std::optional<int> runs;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<int> window;
  std::string out;
};

int run_compare(const CompareArgs& args) {
  ExperimentConfig cfg = load_experiment_config(args.config);
  if (args.episodes) cfg.episodes = *args.episodes;
  if (args.runs) cfg.runs = *args.runs;
  if (args.seed) cfg.base_seed = *args.seed;
  if (args.threads) cfg.threads = *args.threads;
  if (args.window) cfg.smoothing_window = *args.window;
  cfg.output_dir = output_dir(args.out, cfg.output_dir);
  cfg.validate();

  const ExperimentResult result = run_experiment(cfg);
  const OutputPaths paths = write_experiment_outputs(cfg, result, cfg.output_dir);
  std::cout << "episodes " << cfg.episodes << ", runs " << cfg.runs << ", final window "
            << result.summary.final_window << ", " << result.summary.wall_seconds << " s\n";
  for (const auto& a : result.summary.algorithms) {
    std::cout << "  " << a.name << ": final mean return " << a.final_mean << " (std "
              << a.final_std << ")\n";
  }
  std::cout << "wrote " << paths.episodes_csv << ", " << paths.summary_json << ", "
            << paths.raw_curves_csv << ", " << paths.plot_csv << "\n";
  return 0;
}

// -- check ------------------------------------------------------------------

int run_check(std::uint64_t seed) {
  bool ok = true;
  for (const auto& r : run_property_checks(seed)) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << "\n";
    ok = ok && r.passed;
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Blackwell-approachability planning and learning for tabular MDPs"};
  app.require_subcommand(1);

  PlanArgs plan;
  auto* plan_cmd = app.add_subcommand("plan", "Plan on a known MDP (Blackwell VI or classic VI)");
  auto* mdp_opt = plan_cmd->add_option("--mdp", plan.mdp_file, "MDP text file")->check(CLI::ExistingFile);
  auto* env_opt = plan_cmd->add_option("--env", plan.env_file, "Config file with an [env] section")
                      ->check(CLI::ExistingFile);
  mdp_opt->excludes(env_opt);
  plan_cmd->add_option("--algo", plan.algo, "blackwell-vi or vi")
      ->check(CLI::IsMember({"blackwell-vi", "vi"}));
  plan_cmd->add_option("--iters", plan.iters, "Iterations (max iterations for vi)")
      ->check(CLI::PositiveNumber);
  plan_cmd->add_option("--tol", plan.tolerance, "Stopping tolerance for vi")->check(CLI::PositiveNumber);
  plan_cmd->add_option("--trace-stride", plan.trace_stride, "Record distances every N iterations")
      ->check(CLI::PositiveNumber);
  plan_cmd->add_option("--out", plan.out, "Output directory");

  LearnArgs learn;
  auto* learn_cmd = app.add_subcommand("learn", "Run an online learner and write its episode CSV");
  learn_cmd->add_option("--env", learn.env_file, "Config file with an [env] section (default: cliff grid)")
      ->check(CLI::ExistingFile);
  learn_cmd->add_option("--algo", learn.algo, "blackwell-q, q-learning, sarsa or expected-sarsa")
      ->check(CLI::IsMember({"blackwell-q", "q-learning", "sarsa", "expected-sarsa"}));
  learn_cmd->add_option("--epsilon", learn.epsilon, "Exploration rate (baselines)");
  learn_cmd->add_option("--lr", learn.learning_rate, "Learning rate (baselines)");
  learn_cmd->add_option("--fast-exp", learn.fast_exponent, "Q step exponent (blackwell-q)");
  learn_cmd->add_option("--slow-exp", learn.slow_exponent, "Policy step exponent (blackwell-q)");
  learn_cmd->add_option("--initial-q", learn.initial_q, "Initial Q value");
  learn_cmd->add_option("--episodes", learn.episodes, "Episodes per run")->check(CLI::PositiveNumber);
  learn_cmd->add_option("--runs", learn.runs, "Independent runs")->check(CLI::PositiveNumber);
  learn_cmd->add_option("--seed", learn.seed, "Base seed; run r uses seed + r");
  learn_cmd->add_option("--max-steps", learn.max_steps, "Episode truncation cap")->check(CLI::PositiveNumber);
  learn_cmd->add_option("--out", learn.out, "CSV output path (default: stdout)");
  learn_cmd->add_flag("--show-policy", learn.show_policy, "Print the greedy grid policy of run 0");

  CompareArgs compare;
  auto* compare_cmd = app.add_subcommand("compare", "Run a full experiment config");
  compare_cmd->add_option("--config", compare.config, "Experiment config file")
      ->required()
      ->check(CLI::ExistingFile);
  compare_cmd->add_option("--episodes", compare.episodes, "Override episodes")->check(CLI::PositiveNumber);
  compare_cmd->add_option("--runs", compare.runs, "Override runs")->check(CLI::PositiveNumber);
  compare_cmd->add_option("--seed", compare.seed, "Override base seed");
  compare_cmd->add_option("--threads", compare.threads, "Worker threads (0 = all cores)");
  compare_cmd->add_option("--window", compare.window, "Smoothing window for plot.csv")
      ->check(CLI::PositiveNumber);
  compare_cmd->add_option("--out", compare.out, "Output directory");

  std::uint64_t check_seed = 1;
  auto* check_cmd = app.add_subcommand("check", "Run the randomized property suites");
  check_cmd->add_option("--seed", check_seed, "Seed for the random instances");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  if (plan_cmd->parsed() && plan.mdp_file.empty() && plan.env_file.empty()) {
    std::cerr << "error: plan needs --mdp or --env\n\n" << plan_cmd->help();
    return kExitUsage;
  }

  try {
    if (plan_cmd->parsed()) return run_plan(plan);
    if (learn_cmd->parsed()) return run_learn(learn);
    if (compare_cmd->parsed()) return run_compare(compare);
    if (check_cmd->parsed()) return run_check(check_seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitUsage;
}
