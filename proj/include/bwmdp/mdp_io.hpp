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

#ifndef BWMDP_MDP_IO_HPP
#define BWMDP_MDP_IO_HPP

#include <istream>
#include <map>
#include <sstream>
#include <string>

#include "bwmdp/mdp.hpp"
#include "bwmdp/text.hpp"

namespace bwmdp {

/*
MDP text format. Keywords may appear in any order; '#' starts a comment.

    num_states  <int>
    num_actions <int>
    discount    <real>
    reward      <|S|*|A| reals, row-major [s][a]>
    transition  <|S|*|A|*|S| reals, row-major [s][a][s']>

num_states and num_actions must precede the arrays.
*/

inline MdpModel read_mdp(std::istream& in) {
  const auto tokens = text::tokenize(in);
  std::size_t pos = 0;
  std::optional<std::int64_t> ns, na;
  std::optional<double> discount;
  std::optional<numvec> rewards, transitions;

  auto next = [&](const std::string& context) -> const std::string& {
    if (pos >= tokens.size()) {
      throw InputError("unexpected end of input while reading " + context);
    }
    return tokens[pos++];
  };
  auto read_count = [&](const std::string& key) {
    const auto& tok = next(key);
    auto v = text::parse_int(tok);
    if (!v || *v <= 0) throw InputError(key + " must be a positive integer, got '" + tok + "'");
    return *v;
  };
  auto read_array = [&](const std::string& key, std::size_t count) {
    numvec values(count);
    for (std::size_t i = 0; i < count; ++i) {
      const auto& tok = next(key + "[" + std::to_string(i) + "]");
      auto v = text::parse_double(tok);
      if (!v) {
        throw InputError(key + "[" + std::to_string(i) + "]: not a number: '" + tok + "'");
      }
      values[i] = *v;
    }
    return values;
  };

  while (pos < tokens.size()) {
    const std::string key = tokens[pos++];
    if (key == "num_states") {
      ns = read_count(key);
    } else if (key == "num_actions") {
      na = read_count(key);
    } else if (key == "discount") {
      const auto& tok = next(key);
      discount = text::parse_double(tok);
      if (!discount) throw InputError("discount: not a number: '" + tok + "'");
    } else if (key == "reward" || key == "transition") {
      if (!ns || !na) {
        throw InputError(key + " appears before num_states/num_actions");
      }
      const auto s = static_cast<std::size_t>(*ns);
      const auto a = static_cast<std::size_t>(*na);
      if (key == "reward") {
        rewards = read_array(key, s * a);
      } else {
        transitions = read_array(key, s * a * s);
      }
    } else {
      throw InputError("unknown field '" + key + "'");
    }
  }
  if (!ns) throw InputError("missing num_states");
  if (!na) throw InputError("missing num_actions");
  if (!discount) throw InputError("missing discount");
  if (!rewards) throw InputError("missing reward");
  if (!transitions) throw InputError("missing transition");
  return MdpModel(static_cast<std::size_t>(*ns), static_cast<std::size_t>(*na),
                  *discount, std::move(*rewards), std::move(*transitions));
}

inline MdpModel load_mdp(const std::string& path) {
  std::istringstream in(text::read_file(path));
  try {
    return read_mdp(in);
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

inline std::string format_mdp(const MdpModel& mdp) {
  std::ostringstream out;
  out << "num_states " << mdp.num_states() << "\n";
  out << "num_actions " << mdp.num_actions() << "\n";
  out << "discount " << text::format_double(mdp.discount()) << "\n";
  out << "reward\n";
  for (std::size_t s = 0; s < mdp.num_states(); ++s) {
    for (std::size_t a = 0; a < mdp.num_actions(); ++a) {
      out << (a ? " " : "") << text::format_double(mdp.reward(s, a));
    }
    out << "\n";
  }
  out << "transition\n";
  for (std::size_t s = 0; s < mdp.num_states(); ++s) {
    for (std::size_t a = 0; a < mdp.num_actions(); ++a) {
      const auto row = mdp.next_distribution(s, a);
      for (std::size_t t = 0; t < row.size(); ++t) {
        out << (t ? " " : "") << text::format_double(row[t]);
      }
      out << "\n";
    }
  }
  return out.str();
}

inline void save_mdp(const MdpModel& mdp, const std::string& path) {
  text::write_file(path, format_mdp(mdp));
}

}  // namespace bwmdp

#endif  // BWMDP_MDP_IO_HPP
