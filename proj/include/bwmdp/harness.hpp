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

#ifndef BWMDP_HARNESS_HPP
#define BWMDP_HARNESS_HPP

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <exception>
#include <filesystem>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "bwmdp/config.hpp"
#include "bwmdp/envs.hpp"
#include "bwmdp/learner.hpp"
#include "bwmdp/text.hpp"

namespace bwmdp {

/// Overrides the configured output directory when set.
inline constexpr const char* kOutputDirEnvVar = "BWMDP_OUTPUT_DIR";

struct RunRecord {
  std::string algo;
  int run_id = 0;
  EpisodeLog log;
  QTable qtable;
};

struct AlgorithmSummary {
  std::string name;
  std::string type;
  numvec mean_return;
  numvec mean_steps;
  /// Mean return over the final window, averaged over runs.
  double final_mean = 0.0;
  /// Sample standard deviation across runs of each run's final-window mean.
  double final_std = 0.0;

  bool operator==(const AlgorithmSummary&) const = default;
};

struct RunSummary {
  int episodes = 0;
  int runs = 0;
  std::uint64_t base_seed = 0;
  int final_window = 0;
  std::vector<AlgorithmSummary> algorithms;
  double wall_seconds = 0.0;
  std::string started_at;

  const AlgorithmSummary& algorithm(const std::string& name) const {
    for (const auto& a : algorithms) {
      if (a.name == name) return a;
    }
    throw InputError("no algorithm named '" + name + "' in summary");
  }

  bool operator==(const RunSummary&) const = default;
};

struct ExperimentResult {
  RunSummary summary;
  std::vector<RunRecord> records;
};

/// max(50, episodes / 10), capped at the episode count.
inline int final_window_size(int episodes) {
  return std::min(episodes, std::max(50, episodes / 10));
}

inline std::uint64_t run_seed(std::uint64_t base_seed, int run_id) {
  return base_seed + static_cast<std::uint64_t>(run_id);
}

/// Runs one (algorithm, run_id) pair with seed base_seed + run_id. The
/// algorithm name is mixed into the stream so algorithms draw independently.
inline RunRecord run_single(const ExperimentConfig& cfg, const AlgorithmSpec& algo,
                            int run_id) {
  RunOptions options;
  options.max_steps_per_episode = cfg.max_steps_per_episode;
  options.initial_q = algo.initial_q;
  options.stream_label = algo.name;
  const std::uint64_t seed = run_seed(cfg.base_seed, run_id);

  auto run_on = [&](auto& env) {
    RunRecord rec{algo.name, run_id, {}, {}};
    if (algo.kind == AlgorithmKind::BlackwellQ) {
      auto run = run_blackwell_q(env, cfg.episodes, algo.schedules(), seed, options);
      rec.log = std::move(run.log);
      rec.qtable = std::move(run.state.qtable);
    } else {
      auto run = run_td_learner(env, algo.td_config(), cfg.episodes, seed, options);
      rec.log = std::move(run.log);
      rec.qtable = std::move(run.qtable);
    }
    return rec;
  };

  try {
    if (cfg.env.kind == EnvKind::Cliff) {
      GridWorldEnv env(cfg.env.grid, cfg.env.discount);
      return run_on(env);
    }
    MdpEnv env(*cfg.env.model, cfg.env.start_state, cfg.env.noise_sigma);
    return run_on(env);
  } catch (const std::exception& e) {
    throw RunError("algo " + algo.name + " run " + std::to_string(run_id) + ": " + e.what());
  }
}

/**
Aggregates per-run logs into mean curves. Records are first ordered by
(algorithm position in the config, run_id), so the result does not depend on
the order in which runs finished.
*/
inline RunSummary summarize(const ExperimentConfig& cfg, std::vector<const RunRecord*> records) {
  auto algo_pos = [&](const std::string& name) {
    for (std::size_t i = 0; i < cfg.algorithms.size(); ++i) {
      if (cfg.algorithms[i].name == name) return i;
    }
    throw InputError("record for unknown algorithm '" + name + "'");
  };
  std::sort(records.begin(), records.end(), [&](const RunRecord* a, const RunRecord* b) {
    const auto pa = algo_pos(a->algo), pb = algo_pos(b->algo);
    return pa != pb ? pa < pb : a->run_id < b->run_id;
  });

  RunSummary summary;
  summary.episodes = cfg.episodes;
  summary.runs = cfg.runs;
  summary.base_seed = cfg.base_seed;
  summary.final_window = final_window_size(cfg.episodes);
  const auto ep = static_cast<std::size_t>(cfg.episodes);
  const auto w = static_cast<std::size_t>(summary.final_window);

  for (const auto& algo : cfg.algorithms) {
    AlgorithmSummary out;
    out.name = algo.name;
    out.type = std::string(to_string(algo.kind));
    out.mean_return.assign(ep, 0.0);
    out.mean_steps.assign(ep, 0.0);
    numvec run_finals;
    for (const RunRecord* rec : records) {
      if (rec->algo != algo.name) continue;
      if (rec->log.episodes.size() != ep) {
        throw InputError("run " + std::to_string(rec->run_id) + " of " + algo.name +
                         " has the wrong number of episodes");
      }
      double final_sum = 0.0;
      for (std::size_t e = 0; e < ep; ++e) {
        out.mean_return[e] += rec->log.episodes[e].total_return;
        out.mean_steps[e] += rec->log.episodes[e].steps;
        if (e >= ep - w) final_sum += rec->log.episodes[e].total_return;
      }
      run_finals.push_back(final_sum / static_cast<double>(w));
    }
    if (run_finals.size() != static_cast<std::size_t>(cfg.runs)) {
      throw InputError("expected " + std::to_string(cfg.runs) + " runs of " + algo.name +
                       ", found " + std::to_string(run_finals.size()));
    }
    const double n = static_cast<double>(run_finals.size());
    for (std::size_t e = 0; e < ep; ++e) {
      out.mean_return[e] /= n;
      out.mean_steps[e] /= n;
    }
    double total = 0.0;
    for (double f : run_finals) total += f;
    out.final_mean = total / n;
    double sq = 0.0;
    for (double f : run_finals) sq += (f - out.final_mean) * (f - out.final_mean);
    out.final_std = run_finals.size() > 1 ? std::sqrt(sq / (n - 1.0)) : 0.0;
    summary.algorithms.push_back(std::move(out));
  }
  return summary;
}

inline RunSummary summarize(const ExperimentConfig& cfg, const std::vector<RunRecord>& records) {
  std::vector<const RunRecord*> ptrs;
  ptrs.reserve(records.size());
  for (const auto& r : records) ptrs.push_back(&r);
  return summarize(cfg, std::move(ptrs));
}

namespace detail {

inline std::string utc_timestamp(std::chrono::system_clock::time_point t) {
  const std::time_t tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace detail

/// Executes every (algorithm, run_id) pair. Runs share nothing; each result
/// lands in a slot fixed by its key. Any failure aborts with its context.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto started = std::chrono::system_clock::now();
  const auto t0 = std::chrono::steady_clock::now();

  const std::size_t runs = static_cast<std::size_t>(cfg.runs);
  const std::size_t jobs = cfg.algorithms.size() * runs;
  std::vector<RunRecord> records(jobs);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto worker = [&] {
    for (std::size_t job = next++; job < jobs && !failed; job = next++) {
      try {
        records[job] = run_single(cfg, cfg.algorithms[job / runs], static_cast<int>(job % runs));
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!failed.exchange(true)) first_error = std::current_exception();
      }
    }
  };

  std::size_t threads = cfg.threads > 0 ? static_cast<std::size_t>(cfg.threads)
                                        : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, jobs);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  if (first_error) std::rethrow_exception(first_error);

  ExperimentResult result;
  result.summary = summarize(cfg, records);
  result.summary.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  result.summary.started_at = detail::utc_timestamp(started);
  result.records = std::move(records);
  return result;
}

// *******************************************************
// Persistence
// *******************************************************

/// CSV rows ordered by (algorithm position, run_id, episode).
inline void write_episodes_csv(const ExperimentConfig& cfg, const std::vector<RunRecord>& records,
                               std::ostream& out) {
  write_episode_csv_header(out);
  for (const auto& algo : cfg.algorithms) {
    std::vector<const RunRecord*> mine;
    for (const auto& r : records) {
      if (r.algo == algo.name) mine.push_back(&r);
    }
    std::sort(mine.begin(), mine.end(),
              [](const RunRecord* a, const RunRecord* b) { return a->run_id < b->run_id; });
    for (const RunRecord* r : mine) write_episode_csv_rows(out, r->algo, r->run_id, r->log);
  }
}

inline nlohmann::json summary_to_json(const RunSummary& s) {
  nlohmann::json j;
  j["episodes"] = s.episodes;
  j["runs"] = s.runs;
  j["base_seed"] = s.base_seed;
  j["final_window"] = s.final_window;
  j["algorithms"] = nlohmann::json::array();
  for (const auto& a : s.algorithms) {
    j["algorithms"].push_back({{"name", a.name},
                               {"type", a.type},
                               {"final_mean", a.final_mean},
                               {"final_std", a.final_std},
                               {"mean_return", a.mean_return},
                               {"mean_steps", a.mean_steps}});
  }
  j["metadata"] = {{"wall_seconds", s.wall_seconds}, {"started_at", s.started_at}};
  return j;
}

inline RunSummary summary_from_json(const nlohmann::json& j) {
  try {
    RunSummary s;
    s.episodes = j.at("episodes").get<int>();
    s.runs = j.at("runs").get<int>();
    s.base_seed = j.at("base_seed").get<std::uint64_t>();
    s.final_window = j.at("final_window").get<int>();
    for (const auto& a : j.at("algorithms")) {
      AlgorithmSummary out;
      out.name = a.at("name").get<std::string>();
      out.type = a.at("type").get<std::string>();
      out.final_mean = a.at("final_mean").get<double>();
      out.final_std = a.at("final_std").get<double>();
      out.mean_return = a.at("mean_return").get<numvec>();
      out.mean_steps = a.at("mean_steps").get<numvec>();
      s.algorithms.push_back(std::move(out));
    }
    s.wall_seconds = j.at("metadata").at("wall_seconds").get<double>();
    s.started_at = j.at("metadata").at("started_at").get<std::string>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed summary: ") + e.what());
  }
}

inline void save_summary(const RunSummary& s, const std::string& path) {
  text::write_file(path, summary_to_json(s).dump(2) + "\n");
}

inline RunSummary load_summary(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text::read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
  return summary_from_json(j);
}

// *******************************************************
// Plot data
// *******************************************************

/// Trailing moving average; the first window-1 entries average what is available.
inline numvec moving_average(std::span<const double> values, int window) {
  if (window < 1) throw InputError("smoothing window must be at least 1");
  numvec out(values.size());
  double acc = 0.0;
  const auto w = static_cast<std::size_t>(window);
  for (std::size_t i = 0; i < values.size(); ++i) {
    acc += values[i];
    if (i >= w) acc -= values[i - w];
    out[i] = acc / static_cast<double>(std::min(i + 1, w));
  }
  return out;
}

struct PlotData {
  std::vector<std::string> columns;
  std::vector<numvec> curves;  // one per column, all of length episodes
};

inline PlotData emit_plot_data(const RunSummary& summary, int smoothing_window) {
  if (smoothing_window < 1) throw InputError("smoothing window must be at least 1");
  if (smoothing_window > summary.episodes) {
    throw InputError("smoothing window " + std::to_string(smoothing_window) +
                     " exceeds episode count " + std::to_string(summary.episodes));
  }
  PlotData plot;
  for (const auto& a : summary.algorithms) {
    plot.columns.push_back(a.name);
    plot.curves.push_back(moving_average(a.mean_return, smoothing_window));
  }
  return plot;
}

/// CSV: episode,<one column per algorithm>.
inline void write_plot_csv(const PlotData& plot, std::ostream& out) {
  out << "episode";
  for (const auto& c : plot.columns) out << "," << c;
  out << "\n";
  const std::size_t n = plot.curves.empty() ? 0 : plot.curves.front().size();
  for (std::size_t e = 0; e < n; ++e) {
    out << e;
    for (const auto& curve : plot.curves) out << "," << text::format_double(curve[e]);
    out << "\n";
  }
}

struct OutputPaths {
  std::string episodes_csv;
  std::string summary_json;
  std::string raw_curves_csv;
  std::string plot_csv;
};

inline OutputPaths output_paths(const std::filesystem::path& dir) {
  return {(dir / "episodes.csv").string(), (dir / "summary.json").string(),
          (dir / "curves_raw.csv").string(), (dir / "plot.csv").string()};
}

/// Writes episodes.csv, summary.json, curves_raw.csv and plot.csv into `dir`.
inline OutputPaths write_experiment_outputs(const ExperimentConfig& cfg,
                                            const ExperimentResult& result,
                                            const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw InputError("cannot create output directory " + dir.string() + ": " + ec.message());
  const OutputPaths paths = output_paths(dir);

  std::ostringstream episodes;
  write_episodes_csv(cfg, result.records, episodes);
  text::write_file(paths.episodes_csv, episodes.str());

  save_summary(result.summary, paths.summary_json);

  std::ostringstream raw;
  write_plot_csv(emit_plot_data(result.summary, 1), raw);
  text::write_file(paths.raw_curves_csv, raw.str());

  std::ostringstream smoothed;
  write_plot_csv(emit_plot_data(result.summary,
                                std::min(cfg.smoothing_window, result.summary.episodes)),
                 smoothed);
  text::write_file(paths.plot_csv, smoothed.str());
  return paths;
}

}  // namespace bwmdp

#endif  // BWMDP_HARNESS_HPP
