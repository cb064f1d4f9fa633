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
#include <cmath>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "aixi/core_types.hpp"
#include "aixi/environment.hpp"
#include "aixi/errors.hpp"
#include "aixi/scalar.hpp"

namespace aixi {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(sum(exp(v))) without overflow; -inf for an empty or all -inf input.
inline double log_sum_exp(std::span<const double> v) {
  double top = kNegInf;
  for (double x : v) top = std::max(top, x);
  if (top == kNegInf) return kNegInf;
  double sum = 0;
  for (double x : v) sum += std::exp(x - top);
  return top + std::log(sum);
}

enum class WeightScheme { uniform, prefix_code };

// Prior weights for a class whose members have the given description
// lengths. prefix_code gives w_i proportional to 2^-length_i.
template <Scalar P>
std::vector<P> prior_weights(std::span<const std::size_t> description_lengths,
                             WeightScheme scheme) {
  const std::size_t k = description_lengths.size();
  if (k == 0) throw EmptyClass("model class has no members");
  std::vector<P> w(k);
  if (scheme == WeightScheme::uniform) {
    for (auto& v : w) v = ratio<P>(1, static_cast<std::int64_t>(k));
    return w;
  }
  // Weights relative to the shortest description.
  const std::size_t shortest =
      *std::min_element(description_lengths.begin(), description_lengths.end());
  Accumulator<P> total;
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t shift = description_lengths[i] - shortest;
    if constexpr (ScalarTraits<P>::is_exact) {
      boost::multiprecision::cpp_int den = 1;
      den <<= static_cast<unsigned>(shift);
      w[i] = Rational(1, den);
    } else {
      w[i] = std::ldexp(1.0, -static_cast<int>(shift));
    }
    total.add(w[i]);
  }
  const P sum = total.value();
  for (auto& v : w) v /= sum;
  return w;
}

// The finite class M = {mu_1, ..., mu_k} with prior weights.
template <Scalar P>
class ModelClass {
 public:
  ModelClass(std::vector<EnvPtr<P>> members, std::vector<P> weights)
      : members_(std::move(members)), weights_(std::move(weights)) {
    if (members_.empty()) throw EmptyClass("model class has no members");
    if (weights_.size() != members_.size()) {
      throw ShapeError("one prior weight per member required");
    }
    Accumulator<P> total;
    for (const P& w : weights_) {
      if (!(w > P(0))) throw RangeError("prior weights must be positive");
      total.add(w);
    }
    if (!nearly_equal<P>(total.value(), P(1), 1e-12)) {
      throw NormalizationError("prior weights must sum to 1");
    }
    const auto& first = *members_.front();
    for (const auto& m : members_) {
      if (!(m->action_alphabet() == first.action_alphabet()) ||
          !(m->percept_space() == first.percept_space())) {
        throw AlphabetMismatch("class members must share alphabets");
      }
    }
  }

  static ModelClass with_scheme(std::vector<EnvPtr<P>> members, WeightScheme scheme) {
    std::vector<std::size_t> lengths;
    lengths.reserve(members.size());
    for (const auto& m : members) lengths.push_back(m->describe().size());
    auto w = prior_weights<P>(lengths, scheme);
    return ModelClass(std::move(members), std::move(w));
  }

  std::size_t size() const { return members_.size(); }
  const std::vector<EnvPtr<P>>& members() const { return members_; }
  const EnvPtr<P>& member(std::size_t i) const {
    if (i >= members_.size()) throw IndexError("member index out of range");
    return members_[i];
  }
  const std::vector<P>& weights() const { return weights_; }

  // Index of the member whose canonical serialization matches `env`.
  std::optional<std::size_t> find(const Environment<P>& env) const {
    const std::string key = env.describe();
    for (std::size_t i = 0; i < members_.size(); ++i) {
      if (members_[i]->describe() == key) return i;
    }
    return std::nullopt;
  }

 private:
  std::vector<EnvPtr<P>> members_;
  std::vector<P> weights_;
};

// xi = sum_i w_i mu_i as an environment, carrying the posterior for the
// history it has absorbed so far.
//
// Floating-point mixtures keep normalized log-weights; a member ruled out by
// the data sits at -inf and stays in the class. Exact mixtures keep the
// normalized weights themselves.
template <Scalar P>
class MixtureModel final : public Environment<P> {
 public:
  explicit MixtureModel(std::shared_ptr<const ModelClass<P>> cls)
      : Environment<P>(cls->members().front()->action_alphabet(),
                       cls->members().front()->percept_space()),
        class_(std::move(cls)),
        members_(class_->members()) {
    if constexpr (ScalarTraits<P>::is_exact) {
      weights_ = class_->weights();
    } else {
      log_weights_.reserve(class_->size());
      for (const P& w : class_->weights()) log_weights_.push_back(std::log(w));
    }
  }

  static std::shared_ptr<const MixtureModel> make(ModelClass<P> cls) {
    return std::make_shared<const MixtureModel>(
        std::make_shared<const ModelClass<P>>(std::move(cls)));
  }

  const ModelClass<P>& model_class() const { return *class_; }
  const std::shared_ptr<const ModelClass<P>>& model_class_ptr() const { return class_; }
  std::size_t absorbed() const { return absorbed_; }

  P posterior_weight(std::size_t i) const {
    if (i >= class_->size()) throw IndexError("member index out of range");
    if constexpr (ScalarTraits<P>::is_exact) {
      return weights_[i];
    } else {
      return std::exp(log_weights_[i]);
    }
  }

  std::vector<double> posterior() const {
    std::vector<double> out;
    for (std::size_t i = 0; i < class_->size(); ++i) {
      out.push_back(to_double(posterior_weight(i)));
    }
    return out;
  }

  // Normalized log posterior (floating-point mixtures only).
  const std::vector<double>& log_posterior() const
    requires(!ScalarTraits<P>::is_exact)
  {
    return log_weights_;
  }

  std::vector<P> conditional_row(const HistoryView& h) const override {
    if (h.percepts.size() == absorbed_) return mix(h);
    return advanced_to(h).mix(h);
  }

  bool action_independent() const override {
    return std::all_of(members_.begin(), members_.end(),
                       [](const auto& m) { return m->action_independent(); });
  }
  bool stateful() const override { return true; }
  std::size_t absorbed_cycles() const override { return absorbed_; }

  EnvPtr<P> conditioned(const HistoryView& h, const Percept& x) const override {
    return std::make_shared<const MixtureModel>(posterior_update(h, x));
  }

  // Bayes update by one cycle. `h` is the conditioning view for the cycle
  // (it ends in the action y_t); `x` is the percept that followed.
  MixtureModel posterior_update(const HistoryView& h, const Percept& x) const {
    if (h.percepts.size() != absorbed_) {
      if (h.percepts.size() < absorbed_) {
        throw ShapeError("history is shorter than the absorbed posterior");
      }
      return advanced_to(h).posterior_update(h, x);
    }
    const std::size_t xi = this->percept_space().index(x);
    MixtureModel next = *this;
    const std::size_t k = class_->size();
    if constexpr (ScalarTraits<P>::is_exact) {
      Rational total = 0;
      for (std::size_t i = 0; i < k; ++i) {
        if (next.weights_[i] == 0) continue;
        next.weights_[i] *= members_[i]->conditional_row(h)[xi];
        total += next.weights_[i];
      }
      if (total == 0) {
        throw ClassExhausted("every member assigns probability 0 to the percept");
      }
      for (auto& w : next.weights_) w /= total;
    } else {
      for (std::size_t i = 0; i < k; ++i) {
        if (next.log_weights_[i] == kNegInf) continue;
        const double p = members_[i]->conditional_row(h)[xi];
        next.log_weights_[i] = p > 0 ? next.log_weights_[i] + std::log(p) : kNegInf;
      }
      const double norm = log_sum_exp(next.log_weights_);
      if (norm == kNegInf) {
        throw ClassExhausted("every member assigns probability 0 to the percept");
      }
      for (auto& lw : next.log_weights_) {
        if (lw != kNegInf) lw -= norm;
      }
    }
    for (std::size_t i = 0; i < k; ++i) {
      if (next.members_[i]->stateful()) {
        next.members_[i] = next.members_[i]->conditioned(h, x);
      }
    }
    ++next.absorbed_;
    return next;
  }

  std::string describe() const override {
    std::string s = "X";
    for (const auto& m : class_->members()) s += m->describe();
    return s + ";";
  }

 private:
  bool alive(std::size_t i) const {
    if constexpr (ScalarTraits<P>::is_exact) {
      return weights_[i] != 0;
    } else {
      return log_weights_[i] != kNegInf;
    }
  }

  std::vector<P> mix(const HistoryView& h) const {
    std::vector<Accumulator<P>> acc(this->percept_space().size());
    for (std::size_t i = 0; i < class_->size(); ++i) {
      if (!alive(i)) continue;
      const P w = posterior_weight(i);
      const std::vector<P> row = members_[i]->conditional_row(h);
      for (std::size_t x = 0; x < row.size(); ++x) {
        if (row[x] != P(0)) acc[x].add(w * row[x]);
      }
    }
    std::vector<P> out;
    out.reserve(acc.size());
    for (const auto& a : acc) out.push_back(a.value());
    return out;
  }

  MixtureModel advanced_to(const HistoryView& h) const {
    if (h.percepts.size() < absorbed_) {
      throw ShapeError("history is shorter than the absorbed posterior");
    }
    MixtureModel m = *this;
    while (m.absorbed_ < h.percepts.size()) {
      const std::size_t k = m.absorbed_;
      m = m.posterior_update(h.conditioning_prefix(k + 1), h.percepts[k]);
    }
    return m;
  }

  std::shared_ptr<const ModelClass<P>> class_;
  std::vector<EnvPtr<P>> members_;
  std::vector<P> weights_;
  std::vector<double> log_weights_;
  std::size_t absorbed_ = 0;
};

// xi(x_{1:n} | y_{1:n}) = sum_i w_i mu_i(x_{1:n} | y_{1:n}) under the prior.
template <Scalar P>
P mixture_joint(const MixtureModel<P>& m, std::span<const Percept> percepts,
                std::span<const Action> actions) {
  const auto& cls = m.model_class();
  Accumulator<P> total;
  for (std::size_t i = 0; i < cls.size(); ++i) {
    total.add(cls.weights()[i] * joint(*cls.members()[i], percepts, actions));
  }
  return total.value();
}

// log xi(x_{1:n} | y_{1:n}); stable for long sequences.
template <Scalar P>
double mixture_log_joint(const MixtureModel<P>& m, std::span<const Percept> percepts,
                         std::span<const Action> actions) {
  const auto& cls = m.model_class();
  std::vector<double> terms;
  for (std::size_t i = 0; i < cls.size(); ++i) {
    terms.push_back(std::log(to_double(cls.weights()[i])) +
                    log_joint(*cls.members()[i], percepts, actions));
  }
  return log_sum_exp(terms);
}

// xi(x | x_{<t} y_{1:t}), evaluated from the prior so it equals the ratio of
// mixture joints regardless of what `m` has absorbed.
template <Scalar P>
P mixture_conditional(const MixtureModel<P>& m, const HistoryView& h, const Percept& x) {
  const auto fresh = std::make_shared<const MixtureModel<P>>(m.model_class_ptr());
  try {
    return conditional<P>(*fresh, h, x);
  } catch (const ClassExhausted& e) {
    throw UnreachableHistory(e.what());
  }
}

// One-step update on a real tape: `h` holds the completed cycles so far.
template <Scalar P>
MixtureModel<P> posterior_update(const MixtureModel<P>& m, const HistoryTape& h,
                                 Action y, const Percept& x) {
  const HistoryTape with_action = h.append_action(y);
  return m.posterior_update(with_action.view(), x);
}

// xi(x_{1:n}) >= w_i mu_i(x_{1:n}) up to 1e-15 slack.
template <Scalar P>
bool dominance_check(const MixtureModel<P>& m, std::size_t i,
                     std::span<const Percept> percepts,
                     std::span<const Action> actions) {
  const auto& cls = m.model_class();
  const auto& mu = cls.member(i);
  const P member = cls.weights()[i] * joint(*mu, percepts, actions);
  const P xi = mixture_joint(m, percepts, actions);
  if constexpr (ScalarTraits<P>::is_exact) {
    return xi >= member;
  } else {
    return xi >= member - 1e-15;
  }
}

}  // namespace aixi
