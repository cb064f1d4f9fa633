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

#include <charconv>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "aixi/core_types.hpp"
#include "aixi/environment.hpp"
#include "aixi/mixture.hpp"
#include "aixi/scalar.hpp"

namespace aixi {

// Shortest round-trip text for doubles, "n/d" for rationals.
template <Scalar P>
std::string format_scalar(const P& v) {
  if constexpr (ScalarTraits<P>::is_exact) {
    return v.str();
  } else {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
  }
}

namespace detail {

template <Scalar P>
void check_probability(const P& p, const char* what) {
  if (p < P(0) || p > P(1)) {
    throw RangeError(std::string(what) + " " + format_scalar(p) +
                     " outside [0,1]");
  }
}

template <Scalar P>
void check_normalized(std::span<const P> row, const char* what) {
  Accumulator<P> total;
  for (const P& p : row) {
    check_probability(p, what);
    total.add(p);
  }
  if (!nearly_equal<P>(total.value(), P(1), 1e-12)) {
    throw NormalizationError(std::string(what) + " row sums to " +
                             format_scalar(total.value()));
  }
}

template <Scalar P>
std::string join(std::span<const P> values) {
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) s += ',';
    s += format_scalar(values[i]);
  }
  return s;
}

}  // namespace detail

// i.i.d. binary source: x_t = 1 with probability p, whatever the history.
template <Scalar P>
class BernoulliSource final : public Environment<P> {
 public:
  BernoulliSource(P p, std::size_t actions)
      : Environment<P>(Alphabet(actions), PerceptSpace(2)), p_(std::move(p)) {
    detail::check_probability(p_, "bernoulli parameter");
  }

  const P& p() const { return p_; }

  std::vector<P> conditional_row(const HistoryView&) const override {
    return {P(1) - p_, p_};
  }
  bool action_independent() const override { return true; }
  std::string describe() const override { return "b" + format_scalar(p_) + ";"; }

 private:
  P p_;
};

// The percept layout a bandit emits.
enum class BanditPercepts {
  // Loss bit as observation and as loss level (x_t = x'_t l_t natively).
  embedded_loss,
  // Loss bit as a plain observation; pair with an explicit loss.
  observation_only,
};

// Multi-armed Bernoulli bandit. Pulling arm y yields loss 1 with
// probability loss_probs[y].
template <Scalar P>
class BernoulliBandit final : public Environment<P> {
 public:
  BernoulliBandit(std::vector<P> loss_probs, BanditPercepts layout)
      : Environment<P>(Alphabet(loss_probs.empty() ? 1 : loss_probs.size()),
                       layout == BanditPercepts::embedded_loss
                           ? PerceptSpace(2, LossGrid(2))
                           : PerceptSpace(2)),
        loss_probs_(std::move(loss_probs)),
        layout_(layout) {
    for (const P& p : loss_probs_) detail::check_probability(p, "arm loss probability");
  }

  const std::vector<P>& loss_probs() const { return loss_probs_; }
  BanditPercepts layout() const { return layout_; }

  std::vector<P> conditional_row(const HistoryView& h) const override {
    const P& p = loss_probs_.at(h.actions.back().index);
    if (layout_ == BanditPercepts::embedded_loss) {
      // Flattened (observation, level): only (0,0) and (1,1) are consistent.
      return {P(1) - p, P(0), P(0), p};
    }
    return {P(1) - p, p};
  }

  std::string describe() const override {
    return std::string(layout_ == BanditPercepts::embedded_loss ? "a" : "o") +
           detail::join<P>(loss_probs_) + ";";
  }

 private:
  std::vector<P> loss_probs_;
  BanditPercepts layout_;
};

// Fully observable MDP over the observation alphabet. The first percept is
// drawn from `initial`; afterwards x_t ~ T[x_{t-1}][y_t].
template <Scalar P>
class MdpEnvironment final : public Environment<P> {
 public:
  // transitions[s][a][s'].
  MdpEnvironment(std::vector<std::vector<std::vector<P>>> transitions,
                 std::vector<P> initial)
      : Environment<P>(Alphabet(transitions.empty() || transitions[0].empty()
                                    ? 1
                                    : transitions[0].size()),
                       PerceptSpace(transitions.empty() ? 1 : transitions.size())),
        transitions_(std::move(transitions)),
        initial_(std::move(initial)) {
    const std::size_t states = transitions_.size();
    if (states == 0) throw ShapeError("mdp needs at least one state");
    const std::size_t actions = transitions_[0].size();
    if (actions == 0) throw ShapeError("mdp needs at least one action");
    if (initial_.size() != states) throw ShapeError("initial distribution size");
    detail::check_normalized<P>(initial_, "initial distribution");
    for (const auto& by_action : transitions_) {
      if (by_action.size() != actions) throw ShapeError("ragged transition tensor");
      for (const auto& row : by_action) {
        if (row.size() != states) throw ShapeError("ragged transition tensor");
        detail::check_normalized<P>(row, "transition");
      }
    }
    action_independent_ = true;
    for (const auto& by_action : transitions_) {
      for (const auto& row : by_action) {
        if (row != by_action.front()) action_independent_ = false;
      }
    }
  }

  std::size_t states() const { return transitions_.size(); }
  std::size_t actions() const { return transitions_[0].size(); }
  const P& transition(std::size_t s, std::size_t a, std::size_t next) const {
    return transitions_.at(s).at(a).at(next);
  }
  const std::vector<P>& initial() const { return initial_; }

  std::vector<P> conditional_row(const HistoryView& h) const override {
    if (h.percepts.empty()) return initial_;
    return transitions_.at(h.percepts.back().observation).at(h.actions.back().index);
  }
  bool action_independent() const override { return action_independent_; }

  std::string describe() const override {
    std::string s = "m" + std::to_string(states()) + "," +
                    std::to_string(actions()) + ":" + detail::join<P>(initial_);
    for (const auto& by_action : transitions_) {
      for (const auto& row : by_action) s += ":" + detail::join<P>(row);
    }
    return s + ";";
  }

 private:
  std::vector<std::vector<std::vector<P>>> transitions_;
  std::vector<P> initial_;
  bool action_independent_ = false;
};

// Explicit history-indexed conditional table for the first `depth` cycles.
// The row for the conditioning view (x_{<t}, y_{1:t}) sits in block t at the
// mixed-radix index y_1 x_1 y_2 x_2 ... y_t (radices |Y| and |X|).
template <Scalar P>
class ChronologicalTable final : public Environment<P> {
 public:
  using RowFn = std::function<std::vector<P>(const HistoryView&)>;

  ChronologicalTable(std::size_t observations, std::size_t actions,
                     std::size_t depth, std::vector<P> rows_flat)
      : Environment<P>(Alphabet(actions), PerceptSpace(observations)),
        depth_(depth),
        rows_(std::move(rows_flat)) {
    if (depth_ == 0) throw ShapeError("table depth must be at least 1");
    if (rows_.size() != row_count() * observations) {
      throw ShapeError("table has " + std::to_string(rows_.size()) +
                       " entries, expected " +
                       std::to_string(row_count() * observations));
    }
    for (std::size_t r = 0; r < row_count(); ++r) {
      detail::check_normalized<P>(
          std::span<const P>(rows_).subspan(r * observations, observations),
          "table");
    }
    action_independent_ = compute_action_independence();
  }

  // Tabulates `fn` over every conditioning view of at most `depth` cycles.
  static std::shared_ptr<ChronologicalTable> from_function(std::size_t observations,
                                                           std::size_t actions,
                                                           std::size_t depth,
                                                           const RowFn& fn) {
    std::vector<P> flat;
    std::vector<Percept> xs;
    std::vector<Action> ys;
    std::size_t rows_in_block = actions;
    for (std::size_t t = 1; t <= depth; ++t, rows_in_block *= observations * actions) {
      for (std::size_t r = 0; r < rows_in_block; ++r) {
        const auto digits = decode(r, t, observations, actions);
        xs.clear();
        ys.clear();
        for (std::size_t k = 0; k < digits.size(); ++k) {
          if (k % 2 == 0) {
            ys.push_back({digits[k]});
          } else {
            xs.push_back({digits[k], std::nullopt});
          }
        }
        const auto row = fn(HistoryView{xs, ys});
        if (row.size() != observations) throw ShapeError("row function size");
        flat.insert(flat.end(), row.begin(), row.end());
      }
    }
    return std::make_shared<ChronologicalTable>(observations, actions, depth,
                                                std::move(flat));
  }

  std::size_t depth() const { return depth_; }

  std::vector<P> conditional_row(const HistoryView& h) const override {
    const std::size_t t = h.cycle();
    if (t == 0 || t > depth_) {
      throw IndexError("cycle " + std::to_string(t) + " beyond table depth " +
                       std::to_string(depth_));
    }
    const std::size_t nx = this->percept_space().size();
    const std::size_t r = block_offset(t) + index_in_block(h);
    return std::vector<P>(rows_.begin() + static_cast<std::ptrdiff_t>(r * nx),
                          rows_.begin() + static_cast<std::ptrdiff_t>((r + 1) * nx));
  }
  bool action_independent() const override { return action_independent_; }

  std::string describe() const override {
    return "t" + std::to_string(this->percept_space().size()) + "," +
           std::to_string(this->action_alphabet().size()) + "," +
           std::to_string(depth_) + ":" + detail::join<P>(rows_) + ";";
  }

 private:
  std::size_t block_rows(std::size_t t) const {
    const std::size_t nx = this->percept_space().size();
    const std::size_t ny = this->action_alphabet().size();
    std::size_t n = ny;
    for (std::size_t k = 1; k < t; ++k) n *= nx * ny;
    return n;
  }
  std::size_t block_offset(std::size_t t) const {
    std::size_t off = 0;
    for (std::size_t k = 1; k < t; ++k) off += block_rows(k);
    return off;
  }
  std::size_t row_count() const { return block_offset(depth_ + 1); }

  std::size_t index_in_block(const HistoryView& h) const {
    const std::size_t nx = this->percept_space().size();
    const std::size_t ny = this->action_alphabet().size();
    std::size_t idx = 0;
    for (std::size_t k = 0; k < h.cycle(); ++k) {
      idx = idx * ny + h.actions[k].index;
      if (k < h.percepts.size()) idx = idx * nx + h.percepts[k].observation;
    }
    return idx;
  }

  bool compute_action_independence() const {
    const std::size_t nx = this->percept_space().size();
    const std::size_t ny = this->action_alphabet().size();
    // Every row must equal the row of the same percept history with all
    // actions set to 0.
    bool independent = true;
    for (std::size_t t = 1; t <= depth_ && independent; ++t) {
      for (std::size_t r = 0; r < block_rows(t); ++r) {
        const auto digits = decode(r, t, nx, ny);
        std::size_t zeroed = 0;
        for (std::size_t k = 0; k < digits.size(); ++k) {
          zeroed = (k % 2 == 0) ? zeroed * ny : zeroed * nx + digits[k];
        }
        const std::size_t a = (block_offset(t) + r) * nx;
        const std::size_t b = (block_offset(t) + zeroed) * nx;
        for (std::size_t x = 0; x < nx; ++x) {
          if (rows_[a + x] != rows_[b + x]) {
            independent = false;
            break;
          }
        }
        if (!independent) break;
      }
    }
    return independent;
  }

  // Digits y_1 x_1 ... y_t of row `r` within block t.
  static std::vector<std::size_t> decode(std::size_t r, std::size_t t,
                                         std::size_t nx, std::size_t ny) {
    std::vector<std::size_t> digits(2 * t - 1);
    for (std::size_t k = digits.size(); k-- > 0;) {
      const std::size_t radix = (k % 2 == 0) ? ny : nx;
      digits[k] = r % radix;
      r /= radix;
    }
    return digits;
  }

  std::size_t depth_;
  std::vector<P> rows_;
  bool action_independent_ = false;
};

template <Scalar P>
EnvPtr<P> make_bernoulli(P p, std::size_t actions = 2) {
  return std::make_shared<BernoulliSource<P>>(std::move(p), actions);
}

template <Scalar P>
EnvPtr<P> make_bandit(std::vector<P> loss_probs,
                      BanditPercepts layout = BanditPercepts::embedded_loss) {
  if (loss_probs.empty()) throw ShapeError("bandit needs at least one arm");
  return std::make_shared<BernoulliBandit<P>>(std::move(loss_probs), layout);
}

template <Scalar P>
std::shared_ptr<const MdpEnvironment<P>> make_mdp(
    std::vector<std::vector<std::vector<P>>> transitions, std::vector<P> initial) {
  return std::make_shared<MdpEnvironment<P>>(std::move(transitions),
                                             std::move(initial));
}

enum class GridKind { bernoulli, bandit };

// One member per grid point. Bernoulli points are one-element vectors;
// bandit points list the per-arm loss probabilities.
template <Scalar P>
ModelClass<P> make_grid_class(GridKind kind, const std::vector<std::vector<P>>& grid,
                              WeightScheme scheme, std::size_t actions = 2,
                              BanditPercepts layout = BanditPercepts::embedded_loss) {
  if (grid.empty()) throw EmptyClass("parameter grid is empty");
  std::vector<EnvPtr<P>> members;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (grid[i] == grid[j]) throw ConfigError("grid values must be distinct");
    }
    if (kind == GridKind::bernoulli) {
      if (grid[i].size() != 1) throw ShapeError("bernoulli grid point needs one value");
      members.push_back(make_bernoulli<P>(grid[i][0], actions));
    } else {
      members.push_back(make_bandit<P>(grid[i], layout));
    }
  }
  return ModelClass<P>::with_scheme(std::move(members), scheme);
}

// Convenience for scalar Bernoulli grids.
template <Scalar P>
ModelClass<P> make_bernoulli_grid(const std::vector<P>& values, WeightScheme scheme,
                                  std::size_t actions = 2) {
  std::vector<std::vector<P>> grid;
  for (const P& v : values) grid.push_back({v});
  return make_grid_class<P>(GridKind::bernoulli, grid, scheme, actions);
}

}  // namespace aixi
