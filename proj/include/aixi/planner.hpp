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

#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <functional>
#include <future>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "aixi/core_types.hpp"
#include "aixi/environment.hpp"
#include "aixi/environments.hpp"
#include "aixi/errors.hpp"
#include "aixi/predictor.hpp"
#include "aixi/scalar.hpp"

namespace aixi {

enum class HorizonMode { fixed_lifetime, receding };

template <Scalar P>
struct PlannerConfig {
  HorizonMode mode = HorizonMode::fixed_lifetime;
  // Total number of interaction cycles n.
  std::size_t lifetime = 1;
  // Lookahead m in receding mode.
  std::size_t window = 1;
  // Explicit per-cycle loss; when absent the loss is read from the
  // percept's loss level (x_t = x'_t l_t).
  std::optional<LossSpec<P>> loss;
  // Evaluate root actions on separate threads. Results are joined in action
  // order, so values and tie-breaking do not change.
  bool parallel_root = false;
  // Cache subtree values for environments with a finite Markov order and
  // per-cycle losses. Off by default and in every oracle test.
  bool memoize = false;

  static PlannerConfig fixed(std::size_t n, std::optional<LossSpec<P>> loss = std::nullopt) {
    PlannerConfig cfg;
    cfg.lifetime = n;
    cfg.loss = std::move(loss);
    return cfg;
  }
  static PlannerConfig receding(std::size_t n, std::size_t m,
                                std::optional<LossSpec<P>> loss = std::nullopt) {
    PlannerConfig cfg;
    cfg.mode = HorizonMode::receding;
    cfg.lifetime = n;
    cfg.window = m;
    cfg.loss = std::move(loss);
    return cfg;
  }

  void validate() const {
    if (lifetime == 0) throw RangeError("lifetime n must be at least 1");
    if (mode == HorizonMode::receding && window == 0) {
      throw RangeError("receding window m must be at least 1");
    }
  }

  // Number of cycles the search looks ahead from cycle t.
  std::size_t depth_at(std::size_t t) const {
    if (t > lifetime + 1) {
      throw RangeError("cycle " + std::to_string(t) + " beyond lifetime " +
                       std::to_string(lifetime));
    }
    const std::size_t remaining = lifetime + 1 - t;
    return mode == HorizonMode::fixed_lifetime ? remaining : std::min(window, remaining);
  }
};

template <Scalar P>
struct PlanResult {
  Action action;
  P value{0};
  std::vector<P> root_values;
  std::uint64_t nodes = 0;
  double wall_ms = 0;
};

namespace detail {

// Loss of the last cycle of a complete branch history.
template <Scalar P>
P cycle_loss(const Environment<P>& env, const PlannerConfig<P>& cfg,
             const HistoryView& complete) {
  if (cfg.loss) return (*cfg.loss)(complete);
  const auto& grid = env.percept_space().loss_grid();
  if (!grid) throw NotApplicable("no explicit loss and percepts carry no loss level");
  return grid->template value<P>(*complete.percepts.back().loss_level);
}

// Environments that keep posterior state must be re-conditioned on every
// branch; stateless ones are shared across the tree.
template <Scalar P>
EnvPtr<P> advance(const EnvPtr<P>& env, const HistoryView& h, const Percept& x) {
  return env->stateful() ? env->conditioned(h, x) : env;
}

template <Scalar P>
std::optional<std::size_t> markov_order(const Environment<P>& env) {
  if (env.stateful()) return std::nullopt;
  if (dynamic_cast<const BernoulliSource<P>*>(&env)) return 0;
  if (dynamic_cast<const BernoulliBandit<P>*>(&env)) return 0;
  if (dynamic_cast<const MdpEnvironment<P>*>(&env)) return 1;
  return std::nullopt;
}

// Alternating min over actions / expectation over percepts on a branch
// history kept in `xs`/`ys`.
template <Scalar P>
class Expectimax {
 public:
  Expectimax(const PlannerConfig<P>& cfg, std::vector<Percept> xs, std::vector<Action> ys,
             std::optional<std::size_t> order)
      : cfg_(cfg), xs_(std::move(xs)), ys_(std::move(ys)), order_(order) {}

  std::uint64_t nodes() const { return nodes_; }

  P value(const EnvPtr<P>& env, std::size_t depth) {
    if (depth == 0) return P(0);
    using Key = std::pair<std::vector<std::size_t>, std::size_t>;
    Key key;
    if (order_) {
      const std::size_t k = std::min(*order_, xs_.size());
      for (std::size_t i = xs_.size() - k; i < xs_.size(); ++i) {
        key.first.push_back(env->percept_space().index(xs_[i]));
      }
      key.first.push_back(xs_.size() == 0 ? 1 : 0);
      key.second = depth;
      if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    }
    ++nodes_;
    const std::size_t ny = env->action_alphabet().size();
    P best = action_value(env, Action{0}, depth);
    for (std::size_t y = 1; y < ny; ++y) {
      P q = action_value(env, Action{y}, depth);
      if (q < best) best = std::move(q);
    }
    if (order_) memo_.emplace(std::move(key), best);
    return best;
  }

  // Expected loss of taking `y` now and acting optimally afterwards.
  P action_value(const EnvPtr<P>& env, Action y, std::size_t depth) {
    ys_.push_back(y);
    const std::vector<P> row = env->conditional_row(HistoryView{xs_, ys_});
    Accumulator<P> immediate;
    Accumulator<P> continuation;
    for (std::size_t xi = 0; xi < row.size(); ++xi) {
      if (row[xi] == P(0)) continue;
      const Percept x = env->percept_space().percept(xi);
      const EnvPtr<P> next = advance<P>(env, HistoryView{xs_, ys_}, x);
      xs_.push_back(x);
      const P loss = cycle_loss(*env, cfg_, HistoryView{xs_, ys_});
      immediate.add(row[xi] * loss);
      if (depth > 1) continuation.add(row[xi] * value(next, depth - 1));
      xs_.pop_back();
    }
    ys_.pop_back();
    return immediate.value() + continuation.value();
  }

 private:
  const PlannerConfig<P>& cfg_;
  std::vector<Percept> xs_;
  std::vector<Action> ys_;
  std::optional<std::size_t> order_;
  std::map<std::pair<std::vector<std::size_t>, std::size_t>, P> memo_;
  std::uint64_t nodes_ = 0;
};

// Checks that `h` is a tape of t-1 completed cycles reachable under `model`
// and returns the model conditioned on it.
template <Scalar P>
EnvPtr<P> prepare_root(const Environment<P>& model, const HistoryTape& h,
                       const PlannerConfig<P>& cfg, std::size_t t) {
  cfg.validate();
  if (h.has_pending_action() || h.length() + 1 != t) {
    throw ShapeError("history must hold exactly t-1 completed cycles");
  }
  if (cfg.loss && cfg.loss->is_matrix() &&
      (cfg.loss->observations() != model.percept_space().observations().size() ||
       cfg.loss->actions() != model.action_alphabet().size())) {
    throw ShapeError("loss matrix shape does not match the model alphabets");
  }
  std::vector<Action> ys(h.actions().begin(), h.actions().end());
  ys.push_back(Action{0});
  try {
    return ensure_reachable(model, HistoryView{h.percepts(), ys});
  } catch (const ClassExhausted& e) {
    throw UnreachableHistory(e.what());
  }
}

}  // namespace detail

// Minimal expected sum of losses over the cycles the configuration looks
// ahead from cycle t (t..n in fixed-lifetime mode); 0 when none remain.
template <Scalar P>
P expectimax_value(const Environment<P>& model, const HistoryTape& h,
                   const PlannerConfig<P>& cfg, std::size_t t) {
  const std::size_t depth = cfg.depth_at(t);
  const EnvPtr<P> root = detail::prepare_root(model, h, cfg, t);
  if (depth == 0) return P(0);
  const auto order = cfg.memoize && (!cfg.loss || cfg.loss->is_matrix())
                          ? detail::markov_order(*root)
                          : std::nullopt;
  detail::Expectimax<P> search(
      cfg, std::vector<Percept>(h.percepts().begin(), h.percepts().end()),
      std::vector<Action>(h.actions().begin(), h.actions().end()), order);
  return search.value(root, depth);
}

// AImu / AIxi decision for cycle t: argmin over root actions of immediate
// expected loss plus optimal continuation. Passing a MixtureModel gives AIxi
// with branch posteriors; passing the true environment gives AImu.
template <Scalar P>
PlanResult<P> select_action(const Environment<P>& model, const HistoryTape& h,
                            const PlannerConfig<P>& cfg, std::size_t t) {
  const auto start = std::chrono::steady_clock::now();
  const std::size_t depth = cfg.depth_at(t);
  const EnvPtr<P> root = detail::prepare_root(model, h, cfg, t);
  if (depth == 0) throw RangeError("no cycles left to plan for");
  const auto order = cfg.memoize && (!cfg.loss || cfg.loss->is_matrix())
                         ? detail::markov_order(*root)
                         : std::nullopt;
  const std::vector<Percept> xs(h.percepts().begin(), h.percepts().end());
  const std::vector<Action> ys(h.actions().begin(), h.actions().end());
  const std::size_t ny = model.action_alphabet().size();

  PlanResult<P> result;
  result.root_values.resize(ny);
  auto evaluate = [&](std::size_t y) {
    detail::Expectimax<P> search(cfg, xs, ys, order);
    P q = search.action_value(root, Action{y}, depth);
    return std::make_pair(std::move(q), search.nodes() + 1);
  };
  if (cfg.parallel_root && ny > 1) {
    std::vector<std::future<std::pair<P, std::uint64_t>>> jobs;
    for (std::size_t y = 0; y < ny; ++y) {
      jobs.push_back(std::async(std::launch::async, evaluate, y));
    }
    for (std::size_t y = 0; y < ny; ++y) {
      auto [q, nodes] = jobs[y].get();
      result.root_values[y] = std::move(q);
      result.nodes += nodes;
    }
  } else {
    for (std::size_t y = 0; y < ny; ++y) {
      auto [q, nodes] = evaluate(y);
      result.root_values[y] = std::move(q);
      result.nodes += nodes;
    }
  }
  result.action = Action{argmin_first<P>(result.root_values)};
  result.value = result.root_values[result.action.index];
  result.wall_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - start)
                       .count();
  return result;
}

// A deterministic policy over the remaining cycles as an explicit tree:
// the action to take here and one subtree per reachable percept.
struct PolicyTree {
  Action action;
  std::vector<std::shared_ptr<const PolicyTree>> next;  // by percept index
};

namespace detail {

inline constexpr std::uint64_t kOracleLeafLimit = 1'000'000;
inline constexpr std::uint64_t kOraclePolicyLimit = 10'000'000;

inline std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) {
    return std::numeric_limits<std::uint64_t>::max();
  }
  return a * b;
}

inline void guard_oracle_size(std::size_t nx, std::size_t ny, std::size_t depth) {
  std::uint64_t leaves = 1;
  std::uint64_t policies = 1;
  for (std::size_t d = 0; d < depth; ++d) {
    leaves = saturating_mul(leaves, nx * ny);
    std::uint64_t p = ny;
    for (std::size_t k = 0; k < nx; ++k) p = saturating_mul(p, policies);
    policies = p;
  }
  if (leaves > kOracleLeafLimit || policies > kOraclePolicyLimit) {
    throw InstanceTooLarge("oracle over " + std::to_string(depth) +
                           " cycles exceeds enumeration limits");
  }
}

template <Scalar P>
class PolicyEnumerator {
 public:
  explicit PolicyEnumerator(std::vector<Percept> xs, std::vector<Action> ys)
      : xs_(std::move(xs)), ys_(std::move(ys)) {}

  // Every deterministic policy for the next `depth` cycles, branching only on
  // percepts that are reachable under the action taken.
  std::vector<std::shared_ptr<const PolicyTree>> all(const EnvPtr<P>& env,
                                                     std::size_t depth) {
    std::vector<std::shared_ptr<const PolicyTree>> out;
    if (depth == 0) {
      out.push_back(nullptr);
      return out;
    }
    const std::size_t nx = env->percept_space().size();
    for (std::size_t y = 0; y < env->action_alphabet().size(); ++y) {
      ys_.push_back(Action{y});
      const std::vector<P> row = env->conditional_row(HistoryView{xs_, ys_});
      std::vector<std::size_t> reachable;
      std::vector<std::vector<std::shared_ptr<const PolicyTree>>> subtrees;
      for (std::size_t xi = 0; xi < nx; ++xi) {
        if (row[xi] == P(0)) continue;
        const Percept x = env->percept_space().percept(xi);
        const EnvPtr<P> next = advance<P>(env, HistoryView{xs_, ys_}, x);
        xs_.push_back(x);
        reachable.push_back(xi);
        subtrees.push_back(all(next, depth - 1));
        xs_.pop_back();
      }
      ys_.pop_back();
      // Cartesian product of the per-percept subpolicies.
      std::vector<std::size_t> pick(reachable.size(), 0);
      while (true) {
        auto node = std::make_shared<PolicyTree>();
        node->action = Action{y};
        node->next.assign(nx, nullptr);
        for (std::size_t k = 0; k < reachable.size(); ++k) {
          node->next[reachable[k]] = subtrees[k][pick[k]];
        }
        out.push_back(std::move(node));
        std::size_t k = 0;
        for (; k < pick.size(); ++k) {
          if (++pick[k] < subtrees[k].size()) break;
          pick[k] = 0;
        }
        if (k == pick.size()) break;
      }
    }
    return out;
  }

 private:
  std::vector<Percept> xs_;
  std::vector<Action> ys_;
};

// sum over percept paths of mu(path | actions) * (l_t + ... + l_{t+depth-1})
// where actions come from `choose` on the branch history.
template <Scalar P>
class PathSum {
 public:
  using Chooser = std::function<Action(const HistoryView& complete, const void* node)>;

  PathSum(const PlannerConfig<P>& cfg, std::vector<Percept> xs, std::vector<Action> ys)
      : cfg_(cfg), xs_(std::move(xs)), ys_(std::move(ys)) {}

  P policy_tree(const EnvPtr<P>& env, const PolicyTree* node, std::size_t depth) {
    Accumulator<P> total;
    walk_tree(env, node, depth, P(1), P(0), total);
    return total.value();
  }

  P policy_fn(const EnvPtr<P>& env, const std::function<Action(const HistoryView&)>& choose,
              std::size_t depth) {
    Accumulator<P> total;
    walk_fn(env, choose, depth, P(1), P(0), total);
    return total.value();
  }

 private:
  void walk_tree(const EnvPtr<P>& env, const PolicyTree* node, std::size_t depth,
                 const P& path_prob, const P& path_loss, Accumulator<P>& total) {
    if (depth == 0) {
      total.add(path_prob * path_loss);
      return;
    }
    ys_.push_back(node->action);
    const std::vector<P> row = env->conditional_row(HistoryView{xs_, ys_});
    for (std::size_t xi = 0; xi < row.size(); ++xi) {
      if (row[xi] == P(0)) continue;
      const Percept x = env->percept_space().percept(xi);
      const EnvPtr<P> next = advance<P>(env, HistoryView{xs_, ys_}, x);
      xs_.push_back(x);
      const P loss = cycle_loss(*env, cfg_, HistoryView{xs_, ys_});
      walk_tree(next, node->next[xi].get(), depth - 1, path_prob * row[xi],
                path_loss + loss, total);
      xs_.pop_back();
    }
    ys_.pop_back();
  }

  void walk_fn(const EnvPtr<P>& env, const std::function<Action(const HistoryView&)>& choose,
               std::size_t depth, const P& path_prob, const P& path_loss,
               Accumulator<P>& total) {
    if (depth == 0) {
      total.add(path_prob * path_loss);
      return;
    }
    const Action y = choose(HistoryView{xs_, ys_});
    ys_.push_back(y);
    const std::vector<P> row = env->conditional_row(HistoryView{xs_, ys_});
    for (std::size_t xi = 0; xi < row.size(); ++xi) {
      if (row[xi] == P(0)) continue;
      const Percept x = env->percept_space().percept(xi);
      const EnvPtr<P> next = advance<P>(env, HistoryView{xs_, ys_}, x);
      xs_.push_back(x);
      const P loss = cycle_loss(*env, cfg_, HistoryView{xs_, ys_});
      walk_fn(next, choose, depth - 1, path_prob * row[xi], path_loss + loss, total);
      xs_.pop_back();
    }
    ys_.pop_back();
  }

  const PlannerConfig<P>& cfg_;
  std::vector<Percept> xs_;
  std::vector<Action> ys_;
};

}  // namespace detail

// Every deterministic policy for the cycles ahead of t, enumerated
// explicitly. Subject to the same size guard as brute_force_value.
template <Scalar P>
std::vector<std::shared_ptr<const PolicyTree>> enumerate_policies(
    const Environment<P>& model, const HistoryTape& h, const PlannerConfig<P>& cfg,
    std::size_t t) {
  const std::size_t depth = cfg.depth_at(t);
  const EnvPtr<P> root = detail::prepare_root(model, h, cfg, t);
  detail::guard_oracle_size(model.percept_space().size(), model.action_alphabet().size(),
                            depth);
  detail::PolicyEnumerator<P> enumerator(
      std::vector<Percept>(h.percepts().begin(), h.percepts().end()),
      std::vector<Action>(h.actions().begin(), h.actions().end()));
  return enumerator.all(root, depth);
}

// Expected total loss of an explicit policy tree from cycle t, summed over
// complete percept paths weighted by their joint probability.
template <Scalar P>
P policy_tree_value(const Environment<P>& model, const HistoryTape& h,
                    const PlannerConfig<P>& cfg, std::size_t t, const PolicyTree* policy) {
  const std::size_t depth = cfg.depth_at(t);
  const EnvPtr<P> root = detail::prepare_root(model, h, cfg, t);
  detail::PathSum<P> sum(cfg, std::vector<Percept>(h.percepts().begin(), h.percepts().end()),
                         std::vector<Action>(h.actions().begin(), h.actions().end()));
  return sum.policy_tree(root, policy, depth);
}

// Expected total loss of the policy `choose` (called on each complete branch
// history) from cycle t.
template <Scalar P>
P policy_value(const Environment<P>& model, const HistoryTape& h, const PlannerConfig<P>& cfg,
               std::size_t t, const std::function<Action(const HistoryView&)>& choose) {
  const std::size_t depth = cfg.depth_at(t);
  const EnvPtr<P> root = detail::prepare_root(model, h, cfg, t);
  detail::PathSum<P> sum(cfg, std::vector<Percept>(h.percepts().begin(), h.percepts().end()),
                         std::vector<Action>(h.actions().begin(), h.actions().end()));
  return sum.policy_fn(root, choose, depth);
}

// Oracle for expectimax_value: the minimum expected loss over every
// explicitly enumerated deterministic policy.
template <Scalar P>
P brute_force_value(const Environment<P>& model, const HistoryTape& h,
                    const PlannerConfig<P>& cfg, std::size_t t) {
  if (cfg.depth_at(t) == 0) {
    detail::prepare_root(model, h, cfg, t);
    return P(0);
  }
  const auto policies = enumerate_policies(model, h, cfg, t);
  std::optional<P> best;
  for (const auto& policy : policies) {
    P v = policy_tree_value(model, h, cfg, t, policy.get());
    if (!best || v < *best) best = std::move(v);
  }
  return *best;
}

// Finite-horizon Bellman backups for an MDP with loss l(s', y) charged on
// the state entered. value(t, s) is V_t(s) for 2 <= t <= n+1 (s = x_{t-1});
// root() is V_1, taken over the initial-state distribution.
template <Scalar P>
class ValueTable {
 public:
  ValueTable(std::size_t horizon, std::size_t states)
      : horizon_(horizon), values_(horizon + 1, std::vector<P>(states, P(0))) {}

  std::size_t horizon() const { return horizon_; }
  const P& root() const { return root_; }
  const P& value(std::size_t t, std::size_t s) const {
    if (t < 2 || t > horizon_ + 1) throw IndexError("value table cycle out of range");
    return values_.at(t - 1).at(s);
  }

 private:
  template <Scalar Q>
  friend ValueTable<Q> value_iteration_mdp(const MdpEnvironment<Q>&, const LossSpec<Q>&,
                                           std::size_t);
  std::size_t horizon_;
  std::vector<std::vector<P>> values_;  // values_[t-1][s]; values_[0] unused
  P root_{0};
};

template <Scalar P>
ValueTable<P> value_iteration_mdp(const MdpEnvironment<P>& mdp, const LossSpec<P>& loss,
                                  std::size_t n) {
  const std::size_t ns = mdp.states();
  const std::size_t na = mdp.actions();
  if (!loss.is_matrix() || loss.observations() != ns || loss.actions() != na) {
    throw ShapeError("value iteration needs a |S| x |A| loss matrix");
  }
  ValueTable<P> table(n, ns);
  if (n == 0) return table;
  // Q-value of entering the next state from distribution `row` under y.
  auto backup = [&](const std::vector<P>& row, std::size_t y,
                    const std::vector<P>* next_values) {
    Accumulator<P> acc;
    for (std::size_t s2 = 0; s2 < ns; ++s2) {
      if (row[s2] == P(0)) continue;
      P target = loss.at(s2, y);
      if (next_values) target += (*next_values)[s2];
      acc.add(row[s2] * target);
    }
    return acc.value();
  };
  auto best_over_actions = [&](auto&& row_for, const std::vector<P>* next_values) {
    P best = backup(row_for(0), 0, next_values);
    for (std::size_t y = 1; y < na; ++y) {
      P q = backup(row_for(y), y, next_values);
      if (q < best) best = std::move(q);
    }
    return best;
  };
  for (std::size_t t = n; t >= 2; --t) {
    const std::vector<P>* next = t == n ? nullptr : &table.values_[t];
    for (std::size_t s = 0; s < ns; ++s) {
      std::vector<std::vector<P>> rows(na);
      for (std::size_t y = 0; y < na; ++y) {
        for (std::size_t s2 = 0; s2 < ns; ++s2) rows[y].push_back(mdp.transition(s, y, s2));
      }
      table.values_[t - 1][s] =
          best_over_actions([&](std::size_t y) { return rows[y]; }, next);
    }
  }
  const std::vector<P>* next = n == 1 ? nullptr : &table.values_[1];
  table.root_ = best_over_actions([&](std::size_t) { return mdp.initial(); }, next);
  return table;
}

// Checks that the expectimax choice equals the one-step Bayes choice on every
// reachable history of fewer than n cycles. Requires an action-independent
// model and a matrix loss; otherwise NotApplicable.
template <Scalar P>
bool greedy_reduction_check(const Environment<P>& model, const LossSpec<P>& loss,
                            const PlannerConfig<P>& cfg,
                            std::size_t* histories_checked = nullptr) {
  if (!model.action_independent()) {
    throw NotApplicable("greedy reduction needs an action-independent environment");
  }
  if (!loss.is_matrix()) {
    throw NotApplicable("greedy reduction needs a per-cycle matrix loss");
  }
  cfg.validate();
  PlannerConfig<P> plan_cfg = cfg;
  plan_cfg.loss = loss;
  const std::size_t nx = model.percept_space().size();
  const std::size_t ny = model.action_alphabet().size();
  std::size_t checked = 0;
  bool holds = true;
  std::function<void(const HistoryTape&, const EnvPtr<P>&)> sweep =
      [&](const HistoryTape& h, const EnvPtr<P>& env) {
        const std::size_t t = h.length() + 1;
        if (t > cfg.lifetime) return;
        std::vector<Action> ys(h.actions().begin(), h.actions().end());
        ys.push_back(Action{0});
        const HistoryView probe{h.percepts(), ys};
        const std::vector<P> row = env->conditional_row(probe);
        const Action greedy{argmin_first<P>(expected_losses<P>(row, loss))};
        const PlanResult<P> planned = select_action(model, h, plan_cfg, t);
        ++checked;
        if (planned.action != greedy) holds = false;
        for (std::size_t y = 0; y < ny; ++y) {
          ys.back() = Action{y};
          const HistoryView hy{h.percepts(), ys};
          for (std::size_t xi = 0; xi < nx; ++xi) {
            if (row[xi] == P(0)) continue;
            const Percept x = model.percept_space().percept(xi);
            sweep(h.append_cycle(Action{y}, x), detail::advance<P>(env, hy, x));
          }
        }
      };
  const HistoryTape empty(model.action_alphabet(), model.percept_space());
  sweep(empty, model.shared_from_this());
  if (histories_checked) *histories_checked = checked;
  return holds;
}

}  // namespace aixi
