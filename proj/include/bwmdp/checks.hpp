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

// Randomized property suites behind `bwmdp check`. Single-threaded, seeded.

#ifndef BWMDP_CHECKS_HPP
#define BWMDP_CHECKS_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "bwmdp/approachability.hpp"
#include "bwmdp/envs.hpp"
#include "bwmdp/mdp.hpp"
#include "bwmdp/random.hpp"

namespace bwmdp {

namespace gen {

/// Rows drawn from a symmetric Dirichlet(1): strictly positive almost surely.
inline Policy interior_policy(std::size_t ns, std::size_t na, RandomStream& rng) {
  Table<double> probs(ns, na);
  for (std::size_t s = 0; s < ns; ++s) {
    double total = 0.0;
    for (auto& p : probs.row(s)) total += (p = rng.exponential());
    for (auto& p : probs.row(s)) p /= total;
  }
  return Policy(std::move(probs));
}

inline QTable uniform_qtable(std::size_t ns, std::size_t na, double lo, double hi,
                             RandomStream& rng) {
  QTable q(ns, na);
  for (double& v : q.flat()) v = rng.uniform(lo, hi);
  return q;
}

inline numvec uniform_vector(std::size_t n, double lo, double hi, RandomStream& rng) {
  numvec v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

/// |S| in [1, max_states], |A| in [min_actions, max_actions], discount from `discounts`.
inline MdpModel small_mdp(RandomStream& rng, std::size_t max_states, std::size_t max_actions,
                          std::span<const double> discounts, std::size_t min_actions = 1) {
  const auto ns = 1 + rng.below(max_states);
  const auto na = min_actions + rng.below(max_actions - min_actions + 1);
  const double g = discounts[rng.below(discounts.size())];
  return random_mdp(ns, na, g, rng.next_u64());
}

}  // namespace gen

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// <y - <x,y> 1, [mean]^+> = 0 for x = regret_matching(mean), [mean]^+ != 0.
inline CheckResult check_rm_blackwell_identity(std::uint64_t seed, int trials = 1000) {
  RandomStream rng(seed, "check/rm-identity");
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const std::size_t m = 1 + rng.below(8);
    numvec mean = gen::uniform_vector(m, -1.0, 1.0, rng);
    mean[rng.below(m)] = rng.uniform(0.01, 1.0);  // keep [mean]^+ nonzero
    const numvec y = gen::uniform_vector(m, -10.0, 10.0, rng);
    const auto avg = RegretAverage::from_mean(mean, 1);
    const numvec x = regret_matching(avg);
    const double xy = dot(x, y);
    double inner = 0.0;
    for (std::size_t i = 0; i < m; ++i) inner += (y[i] - xy) * std::max(mean[i], 0.0);
    worst = std::max(worst, std::abs(inner));
  }
  std::ostringstream d;
  d << "max |<u(x,y), [mean]^+>| = " << worst << " over " << trials << " pairs (tol 1e-9)";
  return {"rm-blackwell-identity", worst <= 1e-9, d.str()};
}

inline CheckResult check_rm_simplex(std::uint64_t seed, int trials = 1000) {
  RandomStream rng(seed, "check/rm-simplex");
  int bad = 0;
  for (int t = 0; t < trials; ++t) {
    const std::size_t m = 1 + rng.below(8);
    // Every fourth trial is entirely nonpositive, exercising the fallback.
    const double hi = t % 4 == 0 ? 0.0 : 1.0;
    const auto avg = RegretAverage::from_mean(gen::uniform_vector(m, -1.0, hi, rng), 1);
    if (!in_simplex(regret_matching(avg), 1e-12)) ++bad;
  }
  return {"rm-simplex", bad == 0,
          std::to_string(bad) + " of " + std::to_string(trials) + " outputs left the simplex"};
}

/// ||B(Q1) - B(Q2)||_inf <= discount ||Q1 - Q2||_inf for a fixed policy.
inline CheckResult check_backup_contraction(std::uint64_t seed, int trials = 100) {
  RandomStream rng(seed, "check/contraction");
  const double discounts[] = {0.5, 0.9, 0.99};
  double worst_excess = -1.0;
  for (int t = 0; t < trials; ++t) {
    const MdpModel mdp = gen::small_mdp(rng, 6, 4, discounts);
    const Policy pi = gen::interior_policy(mdp.num_states(), mdp.num_actions(), rng);
    const QTable q1 = gen::uniform_qtable(mdp.num_states(), mdp.num_actions(), -10, 10, rng);
    const QTable q2 = gen::uniform_qtable(mdp.num_states(), mdp.num_actions(), -10, 10, rng);
    const double lhs = sup_norm_distance(expected_sarsa_backup(mdp, q1, pi),
                                         expected_sarsa_backup(mdp, q2, pi));
    const double rhs = mdp.discount() * sup_norm_distance(q1, q2);
    worst_excess = std::max(worst_excess, lhs - rhs);
  }
  std::ostringstream d;
  d << "max(lhs - discount*rhs) = " << worst_excess << " over " << trials << " pairs (tol 1e-12)";
  return {"backup-contraction", worst_excess <= 1e-12, d.str()};
}

inline CheckResult check_exact_evaluation_residual(std::uint64_t seed, int trials = 100) {
  RandomStream rng(seed, "check/evaluation");
  const double discounts[] = {0.5, 0.9, 0.99};
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const MdpModel mdp = gen::small_mdp(rng, 6, 4, discounts);
    const Policy pi = gen::interior_policy(mdp.num_states(), mdp.num_actions(), rng);
    const auto eval = policy_evaluation_exact(mdp, pi);
    worst = std::max(worst, bellman_evaluation_residual(mdp, pi, eval.values));
  }
  std::ostringstream d;
  d << "max Bellman residual = " << worst << " over " << trials << " MDPs (tol 1e-9)";
  return {"exact-evaluation-residual", worst <= 1e-9, d.str()};
}

/// Finite-difference derivative along the RM direction is nonnegative up to
/// 1e-5 * max|Q^pi|.
inline CheckResult check_directional_improvement(std::uint64_t seed, int trials = 100) {
  RandomStream rng(seed, "check/directional");
  const double discounts[] = {0.5, 0.9, 0.99};
  double worst = std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    const MdpModel mdp = gen::small_mdp(rng, 6, 4, discounts, 2);
    const Policy pi = gen::interior_policy(mdp.num_states(), mdp.num_actions(), rng);
    const auto s = static_cast<StateIndex>(rng.below(mdp.num_states()));
    const auto eval = policy_evaluation_exact(mdp, pi);
    double scale = 0.0;
    for (double v : eval.qtable.flat()) scale = std::max(scale, std::abs(v));
    const double deriv = directional_improvement_check(mdp, pi, s);
    worst = std::min(worst, scale > 0.0 ? deriv / scale : deriv);
  }
  std::ostringstream d;
  d << "min derivative / max|Q| = " << worst << " over " << trials << " triples (tol -1e-5)";
  return {"directional-improvement", worst >= -1e-5, d.str()};
}

inline std::vector<CheckResult> run_property_checks(std::uint64_t seed) {
  return {check_rm_blackwell_identity(seed), check_rm_simplex(seed),
          check_backup_contraction(seed), check_exact_evaluation_residual(seed),
          check_directional_improvement(seed)};
}

}  // namespace bwmdp

#endif  // BWMDP_CHECKS_HPP
