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

// Planner verification suites: oracle agreement, Bellman cross-check, greedy
// reduction and loss absorption. Each suite returns one row per case.

#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "aixi/environment.hpp"
#include "aixi/environments.hpp"
#include "aixi/harness/report.hpp"
#include "aixi/mixture.hpp"
#include "aixi/planner.hpp"

namespace aixi::harness {

struct SuiteResult {
  std::string name;
  std::size_t cases = 0;
  std::size_t failures = 0;
  std::size_t not_applicable = 0;
  double seconds = 0;
  Table table;

  bool passed() const { return failures == 0; }
};

namespace detail {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// Binary environment with mu(1 | x_{<t} y_{1:t}) = theta[x_{t-1}][y_t],
// reading x_0 as 0. Tabulated for `depth` cycles.
template <Scalar P>
EnvPtr<P> markov_binary(const std::vector<std::vector<P>>& theta, std::size_t depth) {
  return ChronologicalTable<P>::from_function(2, 2, depth, [theta](const HistoryView& h) {
    const std::size_t prev = h.percepts.empty() ? 0 : h.percepts.back().observation;
    const P& p = theta[prev][h.actions.back().index];
    return std::vector<P>{P(1) - p, p};
  });
}

template <Scalar P>
std::string describe_theta(const std::vector<std::vector<P>>& theta) {
  std::string s;
  for (const auto& row : theta) {
    for (const auto& v : row) s += (s.empty() ? "" : " ") + format_scalar(v);
  }
  return s;
}

}  // namespace detail

// The grid {0, 1/4, 1/2, 3/4, 1}.
template <Scalar P>
std::vector<P> quarter_grid() {
  return {ratio<P>(0, 1), ratio<P>(1, 4), ratio<P>(1, 2), ratio<P>(3, 4), ratio<P>(1, 1)};
}

// expectimax_value against brute_force_value on every binary instance in
// the family:
//  * mu(1 | .) = theta[x_{t-1}][y_t] with theta drawn from `grid`^4, under a
//    0-1 loss and an asymmetric loss, n = 1..max_n;
//  * embedded-loss bandits with both arm probabilities from `grid`.
// Exact in rational mode; the same instances in floating point must agree to
// 1e-12. `random_float` extra random history-dependent instances are checked
// in floating point.
inline SuiteResult planner_oracle_suite(std::size_t max_n, std::size_t random_float,
                                        std::uint64_t seed) {
  aixi::detail::guard_oracle_size(2, 2, max_n);
  SuiteResult r;
  r.name = "planner-oracle";
  r.table.columns = {"family", "instance", "loss", "n", "expectimax", "brute_force", "mode",
                     "match"};
  detail::Stopwatch clock;
  const auto grid = quarter_grid<Rational>();
  const std::vector<std::pair<std::string, LossSpec<Rational>>> losses = {
      {"zero-one", LossSpec<Rational>::zero_one(2)},
      {"asymmetric", LossSpec<Rational>::matrix({{Rational(0), Rational(1)},
                                                  {Rational(1, 4), Rational(0)}})},
  };
  auto record = [&](const std::string& family, const std::string& id, const std::string& loss,
                    std::size_t n, const std::string& a, const std::string& b,
                    const std::string& mode, bool ok) {
    ++r.cases;
    if (!ok) ++r.failures;
    r.table.add({family, id, loss, fmt(n), a, b, mode, ok ? "1" : "0"});
  };
  auto to_double_matrix = [](const LossSpec<Rational>& l) {
    typename LossSpec<double>::Matrix m;
    for (const auto& row : l.values()) {
      std::vector<double> d;
      for (const auto& v : row) d.push_back(to_double(v));
      m.push_back(d);
    }
    return LossSpec<double>::matrix(std::move(m));
  };

  for (std::size_t code = 0; code < 625; ++code) {
    std::vector<std::vector<Rational>> theta(2, std::vector<Rational>(2));
    std::vector<std::vector<double>> theta_d(2, std::vector<double>(2));
    for (std::size_t k = 0, rem = code; k < 4; ++k, rem /= 5) {
      theta[k / 2][k % 2] = grid[rem % 5];
      theta_d[k / 2][k % 2] = to_double(grid[rem % 5]);
    }
    const auto env = detail::markov_binary<Rational>(theta, max_n);
    const auto env_d = detail::markov_binary<double>(theta_d, max_n);
    const HistoryTape h(env->action_alphabet(), env->percept_space());
    for (const auto& [loss_name, loss] : losses) {
      for (std::size_t n = 1; n <= max_n; ++n) {
        const auto cfg = PlannerConfig<Rational>::fixed(n, loss);
        const Rational a = expectimax_value(*env, h, cfg, 1);
        const Rational b = brute_force_value(*env, h, cfg, 1);
        record("markov", detail::describe_theta(theta), loss_name, n, format_scalar(a),
               format_scalar(b), "exact", a == b);
        const auto cfg_d = PlannerConfig<double>::fixed(n, to_double_matrix(loss));
        const double ad = expectimax_value(*env_d, h, cfg_d, 1);
        const double bd = brute_force_value(*env_d, h, cfg_d, 1);
        record("markov", detail::describe_theta(theta), loss_name, n, fmt(ad), fmt(bd),
               "float", std::abs(ad - bd) <= 1e-12 && std::abs(ad - to_double(a)) <= 1e-12);
      }
    }
  }
  for (const auto& p0 : grid) {
    for (const auto& p1 : grid) {
      const auto env = make_bandit<Rational>({p0, p1});
      const HistoryTape h(env->action_alphabet(), env->percept_space());
      for (std::size_t n = 1; n <= max_n; ++n) {
        const auto cfg = PlannerConfig<Rational>::fixed(n);
        const Rational a = expectimax_value(*env, h, cfg, 1);
        const Rational b = brute_force_value(*env, h, cfg, 1);
        record("bandit", format_scalar(p0) + " " + format_scalar(p1), "embedded", n,
               format_scalar(a), format_scalar(b), "exact", a == b);
      }
    }
  }
  Rng rng(seed);
  for (std::size_t i = 0; i < random_float; ++i) {
    const std::size_t n = 1 + i % max_n;
    const auto env = ChronologicalTable<double>::from_function(
        2, 2, n, [&](const HistoryView&) {
          const double p = uniform01(rng);
          return std::vector<double>{1 - p, p};
        });
    const auto loss = LossSpec<double>::matrix(
        {{uniform01(rng), uniform01(rng)}, {uniform01(rng), uniform01(rng)}});
    const HistoryTape h(env->action_alphabet(), env->percept_space());
    const auto cfg = PlannerConfig<double>::fixed(n, loss);
    const double a = expectimax_value(*env, h, cfg, 1);
    const double b = brute_force_value(*env, h, cfg, 1);
    record("random-table", std::to_string(i), "random", n, fmt(a), fmt(b), "float",
           std::abs(a - b) <= 1e-12);
  }
  r.seconds = clock.seconds();
  return r;
}

// value_iteration_mdp root against expectimax on the history-based
// formulation of the same MDP.
inline SuiteResult mdp_crosscheck_suite(std::size_t instances, std::size_t max_states,
                                        std::size_t max_n, std::uint64_t seed,
                                        double tolerance = 1e-9) {
  SuiteResult r;
  r.name = "mdp-crosscheck";
  r.table.columns = {"instance", "states", "n", "value_iteration", "expectimax", "abs_diff",
                     "match"};
  detail::Stopwatch clock;
  Rng rng(seed);
  auto random_row = [&](std::size_t k) {
    std::vector<double> row(k);
    double total = 0;
    for (auto& v : row) total += (v = uniform01(rng) + 1e-3);
    for (auto& v : row) v /= total;
    return row;
  };
  for (std::size_t i = 0; i < instances; ++i) {
    const std::size_t states = 1 + rng() % max_states;
    const std::size_t n = 1 + rng() % max_n;
    std::vector<std::vector<std::vector<double>>> t(states);
    for (auto& by_action : t) {
      for (std::size_t a = 0; a < 2; ++a) by_action.push_back(random_row(states));
    }
    const auto mdp = make_mdp<double>(std::move(t), random_row(states));
    typename LossSpec<double>::Matrix m(states, std::vector<double>(2));
    for (auto& row : m) {
      for (auto& v : row) v = uniform01(rng);
    }
    const auto loss = LossSpec<double>::matrix(m);
    const double vi = value_iteration_mdp(*mdp, loss, n).root();
    const HistoryTape h(mdp->action_alphabet(), mdp->percept_space());
    const double em = expectimax_value(*mdp, h, PlannerConfig<double>::fixed(n, loss), 1);
    const bool ok = std::abs(vi - em) <= tolerance;
    ++r.cases;
    if (!ok) ++r.failures;
    r.table.add({fmt(i), fmt(states), fmt(n), fmt(vi), fmt(em), fmt(std::abs(vi - em)),
                 ok ? "1" : "0"});
  }
  r.seconds = clock.seconds();
  return r;
}

// greedy_reduction_check, exact arithmetic, over action-independent binary
// environments: Bernoulli sources, first-order Markov sources and two-member
// Bernoulli mixtures, all parameters from the quarter grid. An action-
// dependent bandit is included and must be reported as not applicable.
inline SuiteResult greedy_check_suite(std::size_t n) {
  SuiteResult r;
  r.name = "greedy-check";
  r.table.columns = {"environment", "loss", "histories", "result"};
  detail::Stopwatch clock;
  const auto grid = quarter_grid<Rational>();
  const std::vector<std::pair<std::string, LossSpec<Rational>>> losses = {
      {"zero-one", LossSpec<Rational>::zero_one(2)},
      {"asymmetric", LossSpec<Rational>::matrix({{Rational(0), Rational(1)},
                                                  {Rational(1, 4), Rational(0)}})},
      {"shifted", LossSpec<Rational>::matrix({{Rational(1, 4), Rational(3, 4)},
                                               {Rational(1), Rational(1, 2)}})},
  };
  std::vector<std::pair<std::string, EnvPtr<Rational>>> envs;
  for (const auto& p : grid) envs.emplace_back("bernoulli " + format_scalar(p), make_bernoulli<Rational>(p));
  for (const auto& a : grid) {
    for (const auto& b : grid) {
      envs.emplace_back("markov " + format_scalar(a) + " " + format_scalar(b),
                        detail::markov_binary<Rational>({{a, a}, {b, b}}, n));
    }
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t j = i + 1; j < grid.size(); ++j) {
      envs.emplace_back("mixture " + format_scalar(grid[i]) + " " + format_scalar(grid[j]),
                        MixtureModel<Rational>::make(make_bernoulli_grid<Rational>(
                            {grid[i], grid[j]}, WeightScheme::uniform)));
    }
  }
  for (const auto& [name, env] : envs) {
    for (const auto& [loss_name, loss] : losses) {
      std::size_t checked = 0;
      const bool holds =
          greedy_reduction_check(*env, loss, PlannerConfig<Rational>::fixed(n), &checked);
      ++r.cases;
      if (!holds) ++r.failures;
      r.table.add({name, loss_name, fmt(checked), holds ? "holds" : "differs"});
    }
  }
  const auto bandit = make_bandit<Rational>({Rational(1, 4), Rational(3, 4)},
                                            BanditPercepts::observation_only);
  try {
    greedy_reduction_check(*bandit, LossSpec<Rational>::zero_one(2),
                           PlannerConfig<Rational>::fixed(n));
    ++r.cases;
    ++r.failures;
    r.table.add({"bandit 1/4 3/4", "zero-one", "0", "unexpectedly-applicable"});
  } catch (const NotApplicable&) {
    ++r.not_applicable;
    r.table.add({"bandit 1/4 3/4", "zero-one", "0", "not-applicable"});
  }
  r.seconds = clock.seconds();
  return r;
}

// Loss matrix charging the observed loss bit: l[x'][y] = x'.
inline LossSpec<double> observed_bit_loss(std::size_t arms) {
  return LossSpec<double>::matrix(
      {std::vector<double>(arms, 0.0), std::vector<double>(arms, 1.0)});
}

struct AbsorptionRun {
  std::vector<Action> explicit_actions;
  std::vector<Action> embedded_actions;
  std::vector<std::size_t> observations;
  double explicit_loss = 0;
  double embedded_loss = 0;
};

// One seeded AIxi run through both loss pipelines. The explicit pipeline
// plans on observation-only bandits with observed_bit_loss; the embedded one
// plans on the same class wrapped by absorb_loss and reads losses from
// percepts. Both draw percepts from the (wrapped) truth with the same seed.
inline AbsorptionRun absorption_run(const std::vector<double>& arms,
                                    const std::vector<std::vector<double>>& members,
                                    std::size_t cycles, std::size_t window, std::uint64_t seed) {
  const auto loss = observed_bit_loss(arms.size());
  const auto truth_plain = make_bandit<double>(arms, BanditPercepts::observation_only);
  const auto truth_wrapped = absorb_loss<double>(truth_plain, loss);
  std::vector<EnvPtr<double>> plain_members;
  for (const auto& m : members) {
    plain_members.push_back(make_bandit<double>(m, BanditPercepts::observation_only));
  }
  const auto cls = std::make_shared<const ModelClass<double>>(
      ModelClass<double>::with_scheme(plain_members, WeightScheme::uniform));
  AbsorptionRun run;

  auto simulate = [&](const EnvPtr<double>& truth, EnvPtr<double> model,
                      const PlannerConfig<double>& cfg, std::vector<Action>& actions,
                      double& total) {
    Rng rng(seed);
    HistoryTape h(model->action_alphabet(), model->percept_space());
    Accumulator<double> acc;
    for (std::size_t t = 1; t <= cycles; ++t) {
      const PlanResult<double> plan = select_action(*model, h, cfg, t);
      const HistoryTape with_action = h.append_action(plan.action);
      const Percept x = sample_percept(*truth, with_action, rng);
      acc.add(loss.at(x.observation, plan.action.index));
      actions.push_back(plan.action);
      model = model->conditioned(with_action.view(), x);
      h = with_action.append_percept(x);
      if (&actions == &run.explicit_actions) run.observations.push_back(x.observation);
    }
    total = acc.value();
  };

  const EnvPtr<double> mixture = std::make_shared<const MixtureModel<double>>(cls);
  simulate(truth_plain, mixture, PlannerConfig<double>::receding(cycles, window, loss),
           run.explicit_actions, run.explicit_loss);
  simulate(truth_wrapped, absorb_loss<double>(mixture, loss),
           PlannerConfig<double>::receding(cycles, window), run.embedded_actions,
           run.embedded_loss);
  return run;
}

inline SuiteResult loss_absorption_suite(const std::vector<std::uint64_t>& seeds,
                                         const std::vector<double>& arms,
                                         const std::vector<std::vector<double>>& members,
                                         std::size_t cycles, std::size_t window) {
  SuiteResult r;
  r.name = "loss-absorption";
  r.table.columns = {"seed", "explicit_actions", "embedded_actions", "explicit_loss",
                     "embedded_loss", "match"};
  detail::Stopwatch clock;
  const auto runs = map_seeds(seeds, [&](std::uint64_t seed) {
    return absorption_run(arms, members, cycles, window, seed);
  });
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const auto& run = runs[i];
    auto join = [](const std::vector<Action>& a) {
      std::string s;
      for (const auto& y : a) s += std::to_string(y.index);
      return s;
    };
    const bool ok = run.explicit_actions == run.embedded_actions &&
                    run.explicit_loss == run.embedded_loss;
    ++r.cases;
    if (!ok) ++r.failures;
    r.table.add({fmt(static_cast<std::size_t>(seeds[i])), join(run.explicit_actions),
                 join(run.embedded_actions), fmt(run.explicit_loss), fmt(run.embedded_loss),
                 ok ? "1" : "0"});
  }
  r.seconds = clock.seconds();
  return r;
}

}  // namespace aixi::harness
