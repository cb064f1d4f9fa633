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

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "aixi/core_types.hpp"
#include "aixi/environment.hpp"
#include "aixi/errors.hpp"
#include "aixi/mixture.hpp"
#include "aixi/scalar.hpp"

namespace aixi {

// sum_x loss[x][y] * row[x] for every action y.
template <Scalar P>
std::vector<P> expected_losses(std::span<const P> row, const LossSpec<P>& loss) {
  std::vector<P> out(loss.actions());
  for (std::size_t y = 0; y < out.size(); ++y) {
    Accumulator<P> acc;
    for (std::size_t x = 0; x < row.size(); ++x) {
      if (row[x] != P(0)) acc.add(loss.at(x, y) * row[x]);
    }
    out[y] = acc.value();
  }
  return out;
}

// First index of the minimum; ties go to the smallest index.
template <Scalar P>
std::size_t argmin_first(std::span<const P> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] < values[best]) best = i;
  }
  return best;
}

// The Bayes predictor Lambda_rho: each cycle picks the action minimizing the
// rho-expected loss under a matrix loss. rho may be a single environment or
// a mixture; in the latter case the caller advances it with each percept.
template <Scalar P>
class PredictorPolicy {
 public:
  PredictorPolicy(EnvPtr<P> rho, LossSpec<P> loss)
      : rho_(std::move(rho)), loss_(std::move(loss)) {
    if (!loss_.is_matrix()) throw NotApplicable("predictor needs a matrix loss");
    if (loss_.observations() != rho_->percept_space().size()) {
      throw ShapeError("loss matrix rows must match the percept alphabet");
    }
    probe_action_invariance();
  }

  const EnvPtr<P>& rho() const { return rho_; }
  const LossSpec<P>& loss() const { return loss_; }

  PredictorPolicy with_rho(EnvPtr<P> rho) const {
    PredictorPolicy next = *this;
    next.rho_ = std::move(rho);
    return next;
  }

  // rho-expected loss of each action given the percepts seen so far.
  std::vector<P> action_losses(std::span<const Percept> percepts) const {
    const std::vector<Action> actions(percepts.size() + 1, Action{0});
    const HistoryView h{percepts, actions};
    EnvPtr<P> current;
    try {
      current = ensure_reachable(*rho_, h);
    } catch (const ClassExhausted& e) {
      throw UnreachableHistory(e.what());
    }
    const std::vector<P> row = current->conditional_row(h);
    return expected_losses<P>(row, loss_);
  }

 private:
  // rho must ignore actions; checked on every action tuple over short
  // percept histories drawn from the start of the alphabet.
  void probe_action_invariance() const {
    if (rho_->stateful() && rho_->action_independent()) return;
    const std::size_t nx = rho_->percept_space().size();
    const std::size_t ny = rho_->action_alphabet().size();
    constexpr std::size_t kDepth = 3;
    std::vector<Percept> xs;
    std::vector<Action> ys;
    for (std::size_t t = 1; t <= kDepth; ++t) {
      std::size_t percept_histories = 1;
      std::size_t action_tuples = 1;
      for (std::size_t k = 1; k < t; ++k) percept_histories *= nx;
      for (std::size_t k = 0; k < t; ++k) action_tuples *= ny;
      if (percept_histories * action_tuples > 4096) break;
      for (std::size_t ph = 0; ph < percept_histories; ++ph) {
        xs.assign(t - 1, Percept{});
        for (std::size_t k = 0, rem = ph; k + 1 < t; ++k, rem /= nx) {
          xs[k] = rho_->percept_space().percept(rem % nx);
        }
        ys.assign(t, Action{0});
        std::vector<P> reference;
        try {
          reference = ensure_reachable(*rho_, {xs, ys})->conditional_row({xs, ys});
        } catch (const Error&) {
          continue;
        }
        for (std::size_t at = 1; at < action_tuples; ++at) {
          for (std::size_t k = 0, rem = at; k < t; ++k, rem /= ny) {
            ys[k] = Action{rem % ny};
          }
          const auto row = ensure_reachable(*rho_, {xs, ys})->conditional_row({xs, ys});
          if (row != reference) {
            throw NotApplicable("predictor distribution depends on actions");
          }
        }
      }
    }
  }

  EnvPtr<P> rho_;
  LossSpec<P> loss_;
};

// argmin_y sum_x loss[x][y] rho(x | x_{<t}); ties to the smallest index.
template <Scalar P>
Action bayes_action(const PredictorPolicy<P>& policy, std::span<const Percept> percepts) {
  const std::vector<P> losses = policy.action_losses(percepts);
  return Action{argmin_first<P>(losses)};
}

template <Scalar P>
Action bayes_action(const PredictorPolicy<P>& policy, const HistoryView& h) {
  return bayes_action(policy, h.percepts);
}

// gamma = (l01 - l00) / (l01 - l00 + l10 - l11) for a 2x2 loss l[x][y].
template <Scalar P>
P threshold_gamma(const LossSpec<P>& loss) {
  if (!loss.is_matrix() || loss.observations() != 2 || loss.actions() != 2) {
    throw ShapeError("threshold needs a 2x2 loss matrix");
  }
  const P wrong_one = loss.at(0, 1) - loss.at(0, 0);
  const P wrong_zero = loss.at(1, 0) - loss.at(1, 1);
  if (!(wrong_one > P(0)) || !(wrong_zero > P(0))) {
    throw DegenerateLoss("errors must cost more than correct predictions");
  }
  return wrong_one / (wrong_one + wrong_zero);
}

// Binary fast path: y = 1 iff rho(1 | .) > gamma; equality predicts 0.
template <Scalar P>
Action threshold_action(const P& prob_one, const P& gamma) {
  return Action{prob_one > gamma ? 1u : 0u};
}

// Per-cycle record of a prediction run. `posterior` is filled when the
// predictor is a mixture (after the cycle's update).
struct LedgerEntry {
  Action action;
  Percept percept;
  double loss = 0;
  double cumulative = 0;
  std::vector<double> posterior;
};

class LossLedger {
 public:
  void record(Action y, const Percept& x, double loss,
              std::vector<double> posterior = {}) {
    if (loss < 0 || loss > 1) throw RangeError("incurred loss outside [0,1]");
    total_.add(loss);
    entries_.push_back({y, x, loss, total_.value(), std::move(posterior)});
  }

  std::size_t cycles() const { return entries_.size(); }
  double total() const { return total_.value(); }
  const std::vector<LedgerEntry>& entries() const { return entries_; }

  // Cumulative loss after `n` cycles (n = 0 gives 0).
  double cumulative_at(std::size_t n) const {
    if (n > entries_.size()) throw IndexError("ledger shorter than checkpoint");
    return n == 0 ? 0.0 : entries_[n - 1].cumulative;
  }

 private:
  std::vector<LedgerEntry> entries_;
  Accumulator<double> total_;
};

// Simulates n cycles: the policy predicts y_t, the truth emits x_t, the
// ledger records loss[x_t][y_t]. A mixture predictor is advanced by Bayes
// each cycle. The truth owns the only random stream.
template <Scalar P>
LossLedger run_prediction(const EnvPtr<P>& truth, PredictorPolicy<P> policy,
                          std::size_t n, std::uint64_t seed) {
  if (n == 0) throw RangeError("prediction horizon must be at least 1");
  if (!truth->action_independent()) {
    throw NotApplicable("prediction needs an action-free truth");
  }
  Rng rng(seed);
  LossLedger ledger;
  std::vector<Percept> xs;
  std::vector<Action> ys;
  // rho ignores actions, so it is queried on a placeholder action sequence.
  std::vector<Action> placeholder;
  EnvPtr<P> world = truth;
  EnvPtr<P> rho = policy.rho();
  for (std::size_t t = 1; t <= n; ++t) {
    placeholder.push_back(Action{0});
    const HistoryView rho_view{xs, placeholder};
    const std::vector<P> belief = rho->conditional_row(rho_view);
    const Action y{argmin_first<P>(expected_losses<P>(belief, policy.loss()))};
    ys.push_back(y);
    const HistoryView h{xs, ys};
    const Percept x = world->percept_space().percept(
        sample_index<P>(world->conditional_row(h), rng));
    const double loss = to_double(policy.loss().at(x.observation, y.index));
    std::vector<double> posterior;
    if (belief[rho->percept_space().index(x)] == P(0) && t < n) {
      throw UnreachableHistory("predictor assigns probability 0 to percept at cycle " +
                               std::to_string(t));
    }
    if (rho->stateful()) {
      try {
        rho = rho->conditioned(rho_view, x);
      } catch (const ClassExhausted& e) {
        throw UnreachableHistory(e.what());
      }
    }
    if (const auto* mixture = dynamic_cast<const MixtureModel<P>*>(rho.get())) {
      posterior = mixture->posterior();
    }
    if (world->stateful()) world = world->conditioned(h, x);
    xs.push_back(x);
    ledger.record(y, x, loss, std::move(posterior));
  }
  return ledger;
}

struct RegretReport {
  double difference = 0;
  std::optional<double> ratio;  // absent when the informed loss is 0
};

// (L_xi - L_mu, L_xi / L_mu).
inline RegretReport regret_report(const LossLedger& xi, const LossLedger& mu) {
  if (xi.cycles() != mu.cycles()) throw ShapeError("ledgers cover different cycles");
  RegretReport r;
  r.difference = xi.total() - mu.total();
  if (mu.total() > 0) r.ratio = xi.total() / mu.total();
  return r;
}

}  // namespace aixi
