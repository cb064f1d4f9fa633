// Copyright 2026 The aixi-lab Authors.
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


// Random instance generators shared by the test binaries.

#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "aixi/environments.hpp"
#include "aixi/mixture.hpp"

namespace aixi::testing {

inline double random_unit(Rng& rng) { return uniform01(rng); }

inline std::vector<double> random_row(Rng& rng, std::size_t n) {
  std::vector<double> row(n);
  double total = 0;
  for (auto& v : row) total += v = 0.05 + random_unit(rng);
  for (auto& v : row) v /= total;
  return row;
}

// Row over n outcomes with entries k/den, den fixed; zeros allowed.
inline std::vector<Rational> random_rational_row(Rng& rng, std::size_t n, std::int64_t den = 4) {
  std::vector<std::int64_t> counts(n, 0);
  for (std::int64_t k = 0; k < den; ++k) counts[rng() % n] += 1;
  std::vector<Rational> row;
  for (auto c : counts) row.push_back(Rational(c, den));
  return row;
}

template <Scalar P>
std::vector<P> row_of(Rng& rng, std::size_t n) {
  if constexpr (ScalarTraits<P>::is_exact) {
    return random_rational_row(rng, n);
  } else {
    return random_row(rng, n);
  }
}

// Fully history-dependent chronological environment of the given depth.
template <Scalar P>
EnvPtr<P> random_table(Rng& rng, std::size_t observations, std::size_t actions,
                       std::size_t depth) {
  return ChronologicalTable<P>::from_function(
      observations, actions, depth, [&](const HistoryView&) { return row_of<P>(rng, observations); });
}

template <Scalar P>
std::shared_ptr<const MdpEnvironment<P>> random_mdp(Rng& rng, std::size_t states,
                                                    std::size_t actions) {
  std::vector<std::vector<std::vector<P>>> t(states);
  for (auto& by_action : t) {
    for (std::size_t a = 0; a < actions; ++a) by_action.push_back(row_of<P>(rng, states));
  }
  return make_mdp<P>(std::move(t), row_of<P>(rng, states));
}

inline std::vector<Percept> random_percepts(Rng& rng, std::size_t n, std::size_t observations) {
  std::vector<Percept> xs;
  for (std::size_t i = 0; i < n; ++i) xs.push_back({rng() % observations, std::nullopt});
  return xs;
}

inline std::vector<Action> random_actions(Rng& rng, std::size_t n, std::size_t actions) {
  std::vector<Action> ys;
  for (std::size_t i = 0; i < n; ++i) ys.push_back({rng() % actions});
  return ys;
}

// Calls fn(xs, ys) for every binary percept/action sequence of length n.
template <class Fn>
void for_each_binary_history(std::size_t n, Fn&& fn) {
  const std::uint64_t count = std::uint64_t{1} << (2 * n);
  for (std::uint64_t code = 0; code < count; ++code) {
    std::vector<Percept> xs;
    std::vector<Action> ys;
    for (std::size_t i = 0; i < n; ++i) {
      ys.push_back({(code >> (2 * i)) & 1});
      xs.push_back({(code >> (2 * i + 1)) & 1, std::nullopt});
    }
    fn(xs, ys);
  }
}

}  // namespace aixi::testing
