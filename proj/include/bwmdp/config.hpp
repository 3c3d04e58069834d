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

#ifndef BWMDP_CONFIG_HPP
#define BWMDP_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "bwmdp/envs.hpp"
#include "bwmdp/errors.hpp"
#include "bwmdp/learner.hpp"
#include "bwmdp/mdp_io.hpp"
#include "bwmdp/text.hpp"

namespace bwmdp {

// *******************************************************
// Key-value sections
// *******************************************************

/*
    # comment
    [experiment]
    episodes = 500

    [algo expected-sarsa-0.1]
    type = expected-sarsa
    epsilon = 0.1

Section headers are "[name]" or "[name label]". Keys are unique per section.
*/

struct ConfigSection {
  std::string name;
  std::string label;
  std::map<std::string, std::string> values;
  int line = 0;
};

inline std::vector<ConfigSection> parse_sections(std::istream& in) {
  std::vector<ConfigSection> sections;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
    const auto line = text::trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("line " + std::to_string(line_no) + ": malformed section header");
      }
      const auto inner = text::trim(line.substr(1, line.size() - 2));
      ConfigSection sec;
      sec.line = line_no;
      const auto space = inner.find_first_of(" \t");
      sec.name = std::string(inner.substr(0, space));
      if (space != std::string_view::npos) sec.label = std::string(text::trim(inner.substr(space)));
      if (sec.name.empty()) {
        throw ConfigError("line " + std::to_string(line_no) + ": empty section name");
      }
      sections.push_back(std::move(sec));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    if (sections.empty()) {
      throw ConfigError("line " + std::to_string(line_no) + ": key outside of a section");
    }
    const std::string key(text::trim(line.substr(0, eq)));
    const std::string value(text::trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    if (!sections.back().values.emplace(key, value).second) {
      throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
  }
  return sections;
}

namespace detail {

/// Typed accessors that remember which keys were read, so leftovers can be
/// reported as unknown.
class SectionReader {
 public:
  explicit SectionReader(const ConfigSection& sec) : sec_(sec) {}

  std::optional<std::string> str(const std::string& key) {
    used_.insert(key);
    auto it = sec_.values.find(key);
    if (it == sec_.values.end()) return std::nullopt;
    return it->second;
  }
  std::optional<double> real(const std::string& key) {
    auto v = str(key);
    if (!v) return std::nullopt;
    auto parsed = text::parse_double(*v);
    if (!parsed) fail(key, "expected a number");
    return parsed;
  }
  std::optional<std::int64_t> integer(const std::string& key) {
    auto v = str(key);
    if (!v) return std::nullopt;
    auto parsed = text::parse_int(*v);
    if (!parsed) fail(key, "expected an integer");
    return parsed;
  }
  std::optional<Cell> cell(const std::string& key) {
    auto v = str(key);
    if (!v) return std::nullopt;
    auto parsed = parse_cell(*v);
    if (!parsed) fail(key, "expected row,col");
    return parsed;
  }
  std::optional<std::vector<Cell>> cells(const std::string& key) {
    auto v = str(key);
    if (!v) return std::nullopt;
    std::vector<Cell> out;
    std::istringstream words(*v);
    std::string word;
    while (words >> word) {
      auto c = parse_cell(word);
      if (!c) fail(key, "expected a list of row,col pairs");
      out.push_back(*c);
    }
    return out;
  }

  void finish() const {
    for (const auto& [key, value] : sec_.values) {
      if (!used_.contains(key)) {
        throw ConfigError("section [" + where() + "]: unknown key '" + key + "'");
      }
    }
  }

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    throw ConfigError("section [" + where() + "] key '" + key + "': " + msg);
  }

 private:
  std::string where() const {
    return sec_.label.empty() ? sec_.name : sec_.name + " " + sec_.label;
  }
  static std::optional<Cell> parse_cell(const std::string& s) {
    const auto comma = s.find(',');
    if (comma == std::string::npos) return std::nullopt;
    auto r = text::parse_int(text::trim(std::string_view(s).substr(0, comma)));
    auto c = text::parse_int(text::trim(std::string_view(s).substr(comma + 1)));
    if (!r || !c) return std::nullopt;
    return Cell{static_cast<int>(*r), static_cast<int>(*c)};
  }

  const ConfigSection& sec_;
  std::set<std::string> used_;
};

}  // namespace detail

// *******************************************************
// Experiment configuration
// *******************************************************

enum class EnvKind { Cliff, Mdp };

struct EnvConfig {
  EnvKind kind = EnvKind::Cliff;
  GridWorldSpec grid = GridWorldSpec::cliff_walking();
  /// Discount used by the learners on the grid (episodic: 1).
  double discount = 1.0;
  std::string mdp_file;
  std::optional<MdpModel> model;
  std::size_t start_state = 0;
  double noise_sigma = 0.0;
};

enum class AlgorithmKind { BlackwellQ, QLearning, Sarsa, ExpectedSarsa };

inline std::string_view to_string(AlgorithmKind k) {
  switch (k) {
    case AlgorithmKind::BlackwellQ: return "blackwell-q";
    case AlgorithmKind::QLearning: return "q-learning";
    case AlgorithmKind::Sarsa: return "sarsa";
    case AlgorithmKind::ExpectedSarsa: return "expected-sarsa";
  }
  return "?";
}

inline AlgorithmKind parse_algorithm_kind(const std::string& name) {
  for (auto k : {AlgorithmKind::BlackwellQ, AlgorithmKind::QLearning, AlgorithmKind::Sarsa,
                 AlgorithmKind::ExpectedSarsa}) {
    if (name == to_string(k)) return k;
  }
  throw ConfigError("unknown algorithm '" + name +
                    "' (expected blackwell-q, q-learning, sarsa or expected-sarsa)");
}

struct AlgorithmSpec {
  std::string name;
  AlgorithmKind kind = AlgorithmKind::BlackwellQ;
  double learning_rate = 0.5;
  double epsilon = 0.1;
  double fast_exponent = 0.6;
  double slow_exponent = 0.9;
  std::optional<double> initial_q;

  TdConfig td_config() const {
    TdMethod m = TdMethod::QLearning;
    if (kind == AlgorithmKind::Sarsa) m = TdMethod::Sarsa;
    if (kind == AlgorithmKind::ExpectedSarsa) m = TdMethod::ExpectedSarsa;
    return {m, learning_rate, epsilon};
  }
  StepSchedules schedules() const { return {fast_exponent, slow_exponent}; }

  void validate() const {
    if (name.empty()) throw ConfigError("algorithm name must not be empty");
    if (name.find_first_of(",\n\"") != std::string::npos) {
      throw ConfigError("algorithm name '" + name + "' contains a reserved character");
    }
    if (kind == AlgorithmKind::BlackwellQ) {
      (void)schedules();
    } else {
      td_config().validate();
    }
  }
};

struct ExperimentConfig {
  EnvConfig env;
  std::vector<AlgorithmSpec> algorithms;
  int episodes = 500;
  int runs = 20;
  std::uint64_t base_seed = 1;
  int max_steps_per_episode = kDefaultMaxEpisodeSteps;
  int smoothing_window = 10;
  std::string output_dir = "results";
  /// 0 picks the hardware concurrency.
  int threads = 0;

  void validate() const {
    if (episodes < 1) throw ConfigError("episodes must be at least 1");
    if (runs < 1) throw ConfigError("runs must be at least 1");
    if (max_steps_per_episode < 1) throw ConfigError("max_steps must be at least 1");
    if (smoothing_window < 1) throw ConfigError("smoothing_window must be at least 1");
    if (threads < 0) throw ConfigError("threads must be nonnegative");
    if (algorithms.empty()) throw ConfigError("no algorithms configured");
    std::set<std::string> names;
    for (const auto& a : algorithms) {
      a.validate();
      if (!names.insert(a.name).second) {
        throw ConfigError("duplicate algorithm name '" + a.name + "'");
      }
    }
    if (env.kind == EnvKind::Cliff) env.grid.validate();
    if (env.kind == EnvKind::Mdp && !env.model) throw ConfigError("mdp environment has no model");
  }
};

/// The four-method comparison on the cliff grid, at a given scale.
inline ExperimentConfig cliff_comparison_config(int episodes, int runs, std::uint64_t base_seed = 1) {
  ExperimentConfig cfg;
  cfg.episodes = episodes;
  cfg.runs = runs;
  cfg.base_seed = base_seed;
  auto spec = [](std::string name, AlgorithmKind kind, double epsilon) {
    AlgorithmSpec a;
    a.name = std::move(name);
    a.kind = kind;
    a.epsilon = epsilon;
    return a;
  };
  const auto bq = spec("blackwell-q", AlgorithmKind::BlackwellQ, 0.1);
  const auto ql = spec("q-learning", AlgorithmKind::QLearning, 0.1);
  const auto sarsa = spec("sarsa", AlgorithmKind::Sarsa, 0.1);
  const auto es1 = spec("expected-sarsa-0.1", AlgorithmKind::ExpectedSarsa, 0.1);
  const auto es5 = spec("expected-sarsa-0.5", AlgorithmKind::ExpectedSarsa, 0.5);
  cfg.algorithms = {bq, ql, sarsa, es1, es5};
  return cfg;
}

namespace detail {

inline EnvConfig read_env_section(const ConfigSection& sec,
                                  const std::filesystem::path& base_dir) {
  SectionReader r(sec);
  EnvConfig env;
  const std::string type = r.str("type").value_or("cliff");
  if (type == "cliff") {
    GridWorldSpec g;
    g.rows = static_cast<int>(r.integer("rows").value_or(4));
    g.cols = static_cast<int>(r.integer("cols").value_or(12));
    g.start = r.cell("start").value_or(Cell{g.rows - 1, 0});
    g.goal = r.cell("goal").value_or(Cell{g.rows - 1, g.cols - 1});
    if (auto cliff = r.cells("cliff")) {
      g.cliff = *cliff;
    } else if (g.start.row == g.goal.row) {
      // Default: every cell strictly between start and goal on their row.
      const int lo = std::min(g.start.col, g.goal.col);
      const int hi = std::max(g.start.col, g.goal.col);
      for (int c = lo + 1; c < hi; ++c) g.cliff.push_back({g.start.row, c});
    }
    g.step_reward = r.real("step_reward").value_or(-1.0);
    g.cliff_reward = r.real("cliff_reward").value_or(-100.0);
    env.discount = r.real("discount").value_or(1.0);
    try {
      g.validate();
    } catch (const InputError& e) {
      throw ConfigError(std::string("[env]: ") + e.what());
    }
    if (!(env.discount >= 0.0 && env.discount <= 1.0)) {
      r.fail("discount", "must lie in [0, 1]");
    }
    env.grid = std::move(g);
  } else if (type == "mdp") {
    env.kind = EnvKind::Mdp;
    auto file = r.str("file");
    if (!file) r.fail("file", "required for type = mdp");
    std::filesystem::path p(*file);
    if (p.is_relative()) p = base_dir / p;
    env.mdp_file = p.string();
    env.model = load_mdp(env.mdp_file);
    env.start_state = static_cast<std::size_t>(r.integer("start_state").value_or(0));
    env.noise_sigma = r.real("noise_sigma").value_or(0.0);
    if (env.start_state >= env.model->num_states()) r.fail("start_state", "out of range");
    if (!(env.noise_sigma >= 0.0)) r.fail("noise_sigma", "must be nonnegative");
    env.discount = env.model->discount();
  } else {
    r.fail("type", "expected cliff or mdp");
  }
  r.finish();
  return env;
}

inline AlgorithmSpec read_algo_section(const ConfigSection& sec) {
  SectionReader r(sec);
  AlgorithmSpec a;
  a.name = sec.label;
  const auto type = r.str("type");
  a.kind = parse_algorithm_kind(type.value_or(sec.label));
  if (a.name.empty()) a.name = std::string(to_string(a.kind));
  a.learning_rate = r.real("learning_rate").value_or(a.learning_rate);
  a.epsilon = r.real("epsilon").value_or(a.epsilon);
  a.fast_exponent = r.real("fast_exponent").value_or(a.fast_exponent);
  a.slow_exponent = r.real("slow_exponent").value_or(a.slow_exponent);
  a.initial_q = r.real("initial_q");
  r.finish();
  try {
    a.validate();
  } catch (const ConfigError& e) {
    throw ConfigError("[algo " + a.name + "]: " + e.what());
  }
  return a;
}

}  // namespace detail

/// Parses an experiment file. Relative MDP paths resolve against `base_dir`.
inline ExperimentConfig parse_experiment_config(std::istream& in,
                                                const std::filesystem::path& base_dir = ".") {
  ExperimentConfig cfg;
  bool have_env = false;
  for (const auto& sec : parse_sections(in)) {
    if (sec.name == "experiment") {
      detail::SectionReader r(sec);
      cfg.episodes = static_cast<int>(r.integer("episodes").value_or(cfg.episodes));
      cfg.runs = static_cast<int>(r.integer("runs").value_or(cfg.runs));
      cfg.base_seed = static_cast<std::uint64_t>(r.integer("base_seed").value_or(1));
      cfg.max_steps_per_episode =
          static_cast<int>(r.integer("max_steps").value_or(cfg.max_steps_per_episode));
      cfg.smoothing_window =
          static_cast<int>(r.integer("smoothing_window").value_or(cfg.smoothing_window));
      cfg.output_dir = r.str("output_dir").value_or(cfg.output_dir);
      cfg.threads = static_cast<int>(r.integer("threads").value_or(cfg.threads));
      r.finish();
    } else if (sec.name == "env") {
      if (have_env) throw ConfigError("line " + std::to_string(sec.line) + ": duplicate [env]");
      cfg.env = detail::read_env_section(sec, base_dir);
      have_env = true;
    } else if (sec.name == "algo") {
      cfg.algorithms.push_back(detail::read_algo_section(sec));
    } else {
      throw ConfigError("line " + std::to_string(sec.line) + ": unknown section [" +
                        sec.name + "]");
    }
  }
  cfg.validate();
  return cfg;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
  std::istringstream in(text::read_file(path));
  try {
    return parse_experiment_config(in, std::filesystem::path(path).parent_path());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

/// Loads only the [env] section of a config file (other sections are ignored).
inline EnvConfig load_env_config(const std::string& path) {
  std::istringstream in(text::read_file(path));
  for (const auto& sec : parse_sections(in)) {
    if (sec.name == "env") {
      return detail::read_env_section(sec, std::filesystem::path(path).parent_path());
    }
  }
  throw ConfigError(path + ": no [env] section");
}

}  // namespace bwmdp

#endif  // BWMDP_CONFIG_HPP
