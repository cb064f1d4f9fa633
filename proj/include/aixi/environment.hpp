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

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "aixi/core_types.hpp"
#include "aixi/errors.hpp"
#include "aixi/scalar.hpp"

namespace aixi {

// A chronological environment mu(x_t | x_{<t} y_{1:t}).
//
// Implementations expose the full conditional row over the flattened percept
// space for a conditioning view (t actions, t-1 percepts). Rows must be
// proper distributions; semi-measures are rejected by validate_row().
//
// Environments whose percept space does not embed a loss read only the
// `observation` component of past percepts, so the same history can be fed
// to a wrapped environment and to the environment it wraps.
//
// Stateful environments (mixtures) carry a posterior tied to the prefix they
// have absorbed. conditioned() returns the environment updated by one more
// cycle; stateless environments return themselves.
template <Scalar P>
class Environment : public std::enable_shared_from_this<Environment<P>> {
 public:
  using Ptr = std::shared_ptr<const Environment<P>>;

  virtual ~Environment() = default;

  const Alphabet& action_alphabet() const { return actions_; }
  const PerceptSpace& percept_space() const { return percepts_; }

  virtual std::vector<P> conditional_row(const HistoryView& h) const = 0;

  virtual bool action_independent() const { return false; }
  virtual bool stateful() const { return false; }
  // Number of leading cycles a stateful environment has already absorbed.
  // Conditioning views passed to it must extend that prefix.
  virtual std::size_t absorbed_cycles() const { return 0; }

  virtual Ptr conditioned(const HistoryView& /*h*/, const Percept& /*x*/) const {
    return this->shared_from_this();
  }

  // Canonical self-delimiting serialization (ends in ';'). Its length is the
  // description length used by prefix-code priors.
  virtual std::string describe() const = 0;

 protected:
  Environment(Alphabet actions, PerceptSpace percepts)
      : actions_(std::move(actions)), percepts_(std::move(percepts)) {}

 private:
  Alphabet actions_;
  PerceptSpace percepts_;
};

template <Scalar P>
using EnvPtr = typename Environment<P>::Ptr;

// Throws ModelInvalid unless `row` is a proper distribution.
template <Scalar P>
void validate_row(std::span<const P> row) {
  Accumulator<P> total;
  for (const P& p : row) {
    if (p < P(0) || p > P(1)) {
      throw ModelInvalid("conditional probability outside [0,1]");
    }
    total.add(p);
  }
  if (!nearly_equal<P>(total.value(), P(1), ScalarTraits<P>::row_tolerance)) {
    throw ModelInvalid("conditional row sums to " +
                       std::to_string(to_double(total.value())) +
                       " instead of 1");
  }
}

template <Scalar P>
void check_view(const Environment<P>& env, const HistoryView& h) {
  if (!h.awaiting_percept()) {
    throw ShapeError("conditioning view needs t actions and t-1 percepts");
  }
  for (const Action& y : h.actions) {
    if (!env.action_alphabet().contains(y.index)) {
      throw AlphabetMismatch("action outside environment alphabet");
    }
  }
  for (const Percept& x : h.percepts) {
    if (!env.percept_space().contains(x)) {
      throw AlphabetMismatch("percept outside environment percept space");
    }
  }
}

// Walks the cycles of `h` not yet absorbed by `env` and returns the
// environment conditioned on all of them. Throws UnreachableHistory when some
// percept on the way has probability 0.
template <Scalar P>
EnvPtr<P> ensure_reachable(const Environment<P>& env, const HistoryView& h) {
  check_view(env, h);
  EnvPtr<P> current = env.shared_from_this();
  if (h.percepts.size() < env.absorbed_cycles()) {
    throw ShapeError("history is shorter than the absorbed prefix");
  }
  for (std::size_t k = env.absorbed_cycles() + 1; k < h.cycle(); ++k) {
    const HistoryView prefix = h.conditioning_prefix(k);
    const std::vector<P> row = current->conditional_row(prefix);
    const Percept& seen = h.percepts[k - 1];
    if (row[env.percept_space().index(seen)] == P(0)) {
      throw UnreachableHistory("percept at cycle " + std::to_string(k) +
                               " has probability 0");
    }
    if (current->stateful()) current = current->conditioned(prefix, seen);
  }
  return current;
}

// mu(x | x_{<t} y_{1:t}) with the whole prefix checked for reachability.
template <Scalar P>
P conditional(const Environment<P>& env, const HistoryView& h, const Percept& x) {
  const std::size_t xi = env.percept_space().index(x);
  return ensure_reachable(env, h)->conditional_row(h)[xi];
}

// mu(x_{1:n} | y_{1:n}) as the chain product of conditionals.
template <Scalar P>
P joint(const Environment<P>& env, std::span<const Percept> percepts,
        std::span<const Action> actions) {
  if (percepts.size() != actions.size()) {
    throw ShapeError("percept and action sequences differ in length");
  }
  if (percepts.empty()) return P(1);
  const HistoryView full{percepts, actions};
  check_view(env, full.conditioning_prefix(percepts.size()));
  P product(1);
  EnvPtr<P> current = env.shared_from_this();
  for (std::size_t k = 1; k <= percepts.size(); ++k) {
    const HistoryView prefix = full.conditioning_prefix(k);
    const P p = current->conditional_row(prefix)[env.percept_space().index(
        percepts[k - 1])];
    product *= p;
    if (product == P(0)) return product;
    if (current->stateful()) current = current->conditioned(prefix, percepts[k - 1]);
  }
  return product;
}

// log mu(x_{1:n} | y_{1:n}); -inf for impossible sequences. Does not
// underflow for long sequences the way joint() does.
template <Scalar P>
double log_joint(const Environment<P>& env, std::span<const Percept> percepts,
                 std::span<const Action> actions) {
  if (percepts.size() != actions.size()) {
    throw ShapeError("percept and action sequences differ in length");
  }
  const HistoryView full{percepts, actions};
  double total = 0;
  EnvPtr<P> current = env.shared_from_this();
  for (std::size_t k = 1; k <= percepts.size(); ++k) {
    const HistoryView prefix = full.conditioning_prefix(k);
    const double p = to_double(current->conditional_row(
        prefix)[env.percept_space().index(percepts[k - 1])]);
    if (p == 0.0) return -std::numeric_limits<double>::infinity();
    total += std::log(p);
    if (current->stateful()) current = current->conditioned(prefix, percepts[k - 1]);
  }
  return total;
}

using Rng = std::mt19937_64;

// Uniform double in [0,1) from the top 53 bits; identical on every platform.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Index drawn from `row` by inverse CDF. Zero-probability entries are never
// returned.
template <Scalar P>
std::size_t sample_index(std::span<const P> row, Rng& rng) {
  const double u = uniform01(rng);
  double cumulative = 0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < row.size(); ++i) {
    const double p = to_double(row[i]);
    if (p <= 0) continue;
    last_positive = i;
    cumulative += p;
    if (u < cumulative) return i;
  }
  return last_positive;
}

// Draws x_t given a history whose current cycle already has its action.
template <Scalar P>
Percept sample_percept(const Environment<P>& env, const HistoryView& h, Rng& rng) {
  check_view(env, h);
  const std::vector<P> row = env.conditional_row(h);
  validate_row<P>(row);
  return env.percept_space().percept(sample_index<P>(row, rng));
}

template <Scalar P>
Percept sample_percept(const Environment<P>& env, const HistoryTape& h, Rng& rng) {
  if (!h.has_pending_action()) {
    throw ShapeError("sample_percept needs the current action on the tape");
  }
  return sample_percept(env, h.view(), rng);
}

// Per-cycle loss l^t(x_{1:t} y_{1:t}) in [0,1]. The matrix form l[x'][y]
// depends only on the current observation and action.
template <Scalar P>
class LossSpec {
 public:
  using Matrix = std::vector<std::vector<P>>;
  using Law = std::function<P(const HistoryView& complete)>;

  static LossSpec matrix(Matrix by_observation_action) {
    if (by_observation_action.empty() || by_observation_action.front().empty()) {
      throw ShapeError("loss matrix must be non-empty");
    }
    const std::size_t actions = by_observation_action.front().size();
    for (const auto& row : by_observation_action) {
      if (row.size() != actions) throw ShapeError("ragged loss matrix");
      for (const P& v : row) {
        if (v < P(0) || v > P(1)) throw RangeError("loss outside [0,1]");
      }
    }
    LossSpec spec;
    spec.matrix_ = std::move(by_observation_action);
    return spec;
  }

  // 0-1 loss on an alphabet of the given size: loss 1 unless y == x'.
  static LossSpec zero_one(std::size_t size) {
    Matrix m(size, std::vector<P>(size, P(1)));
    for (std::size_t i = 0; i < size; ++i) m[i][i] = P(0);
    return matrix(std::move(m));
  }

  static LossSpec general(Law law) {
    LossSpec spec;
    spec.law_ = std::move(law);
    return spec;
  }

  bool is_matrix() const { return !matrix_.empty(); }
  const Matrix& values() const { return matrix_; }
  std::size_t observations() const { return matrix_.size(); }
  std::size_t actions() const { return matrix_.empty() ? 0 : matrix_.front().size(); }

  const P& at(std::size_t observation, std::size_t action) const {
    if (observation >= matrix_.size() || action >= actions()) {
      throw IndexError("loss matrix index out of range");
    }
    return matrix_[observation][action];
  }

  // Loss of the last cycle of a complete view.
  P operator()(const HistoryView& complete) const {
    if (complete.actions.empty() ||
        complete.actions.size() != complete.percepts.size()) {
      throw ShapeError("loss needs a complete, non-empty history");
    }
    if (is_matrix()) {
      return at(complete.percepts.back().observation,
                complete.actions.back().index);
    }
    P v = law_(complete);
    if (v < P(0) || v > P(1)) throw RangeError("loss outside [0,1]");
    return v;
  }

 private:
  LossSpec() = default;
  Matrix matrix_;
  Law law_;
};

// Environment over the extended percepts x_t = x'_t l_t. The wrapped law
// puts mass mu(x'_t | .) on the single loss level consistent with
// l^t(x_{1:t} y_{1:t}) and zero on every other level.
template <Scalar P>
class AbsorbedLossEnvironment final : public Environment<P> {
 public:
  AbsorbedLossEnvironment(EnvPtr<P> inner, LossSpec<P> loss, LossGrid grid)
      : Environment<P>(inner->action_alphabet(),
                       PerceptSpace(inner->percept_space().observations().size(),
                                    grid)),
        inner_(std::move(inner)),
        loss_(std::move(loss)),
        grid_(grid) {
    if (inner_->percept_space().embeds_loss()) {
      throw ShapeError("environment already embeds a loss in its percepts");
    }
  }

  std::vector<P> conditional_row(const HistoryView& h) const override {
    std::vector<Percept> percepts = strip(h.percepts);
    const std::vector<P> base = inner_->conditional_row(HistoryView{percepts, h.actions});
    const std::size_t levels = grid_.levels();
    std::vector<P> row(base.size() * levels, P(0));
    percepts.push_back({});
    for (std::size_t o = 0; o < base.size(); ++o) {
      if (base[o] == P(0)) continue;
      percepts.back() = Percept{o, std::nullopt};
      const P value = loss_(HistoryView{percepts, h.actions});
      const auto level = grid_.level_of<P>(value);
      if (!level) {
        throw DiscretizationError("loss " + std::to_string(to_double(value)) +
                                  " not on a grid with " +
                                  std::to_string(levels) + " levels");
      }
      row[o * levels + *level] = base[o];
    }
    return row;
  }

  bool stateful() const override { return inner_->stateful(); }
  std::size_t absorbed_cycles() const override { return inner_->absorbed_cycles(); }

  EnvPtr<P> conditioned(const HistoryView& h, const Percept& x) const override {
    if (!inner_->stateful()) return this->shared_from_this();
    const std::vector<Percept> percepts = strip(h.percepts);
    return std::make_shared<AbsorbedLossEnvironment>(
        inner_->conditioned(HistoryView{percepts, h.actions}, Percept{x.observation, std::nullopt}),
        loss_, grid_);
  }

  std::string describe() const override {
    return "L" + std::to_string(grid_.levels()) + inner_->describe();
  }

  const EnvPtr<P>& inner() const { return inner_; }

 private:
  static std::vector<Percept> strip(std::span<const Percept> xs) {
    std::vector<Percept> out;
    out.reserve(xs.size() + 1);
    for (const auto& x : xs) out.push_back(Percept{x.observation, std::nullopt});
    return out;
  }

  EnvPtr<P> inner_;
  LossSpec<P> loss_;
  LossGrid grid_;
};

template <Scalar P>
EnvPtr<P> absorb_loss(EnvPtr<P> env, LossSpec<P> loss, LossGrid grid = LossGrid(2)) {
  return std::make_shared<AbsorbedLossEnvironment<P>>(std::move(env),
                                                      std::move(loss), grid);
}

// Exhaustive normalization check over every reachable history of at most
// `depth` cycles. Throws ModelInvalid on the first bad row.
template <Scalar P>
void validate_environment(const Environment<P>& env, std::size_t depth) {
  std::vector<Percept> percepts;
  std::vector<Action> actions;
  const std::size_t nx = env.percept_space().size();
  const std::size_t ny = env.action_alphabet().size();
  std::function<void(EnvPtr<P>)> walk = [&](EnvPtr<P> current) {
    if (actions.size() == depth) return;
    for (std::size_t y = 0; y < ny; ++y) {
      actions.push_back({y});
      const std::vector<P> row = current->conditional_row(HistoryView{percepts, actions});
      if (row.size() != nx) throw ModelInvalid("row size differs from percept space");
      validate_row<P>(row);
      for (std::size_t xi = 0; xi < nx; ++xi) {
        if (row[xi] == P(0)) continue;
        const Percept x = env.percept_space().percept(xi);
        EnvPtr<P> next = current->stateful()
                             ? current->conditioned(HistoryView{percepts, actions}, x)
                             : current;
        percepts.push_back(x);
        walk(next);
        percepts.pop_back();
      }
      actions.pop_back();
    }
  };
  walk(env.shared_from_this());
}

}  // namespace aixi
