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

#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "aixi/errors.hpp"
#include "aixi/scalar.hpp"

namespace aixi {

// A finite, index-based alphabet. Labels are cosmetic; every table in the
// library is indexed by position.
class Alphabet {
 public:
  explicit Alphabet(std::size_t size) : size_(size) {
    if (size == 0) throw RangeError("alphabet must have at least one symbol");
  }
  explicit Alphabet(std::vector<std::string> labels)
      : size_(labels.size()), labels_(std::move(labels)) {
    if (size_ == 0) throw RangeError("alphabet must have at least one symbol");
    for (std::size_t i = 0; i < size_; ++i) {
      for (std::size_t j = i + 1; j < size_; ++j) {
        if (labels_[i] == labels_[j]) {
          throw RangeError("duplicate alphabet label '" + labels_[i] + "'");
        }
      }
    }
  }

  std::size_t size() const { return size_; }
  bool contains(std::size_t index) const { return index < size_; }
  std::string label(std::size_t index) const {
    if (!contains(index)) throw IndexError("symbol index out of alphabet");
    return labels_.empty() ? std::to_string(index) : labels_[index];
  }

  friend bool operator==(const Alphabet& a, const Alphabet& b) {
    return a.size_ == b.size_;
  }

 private:
  std::size_t size_;
  std::vector<std::string> labels_;
};

struct Action {
  std::size_t index = 0;
  friend auto operator<=>(const Action&, const Action&) = default;
};

// One environment output. `loss_level` is present only when the percept
// carries an embedded loss (x_t = x'_t l_t).
struct Percept {
  std::size_t observation = 0;
  std::optional<std::size_t> loss_level;
  friend bool operator==(const Percept&, const Percept&) = default;
};

// Discrete loss alphabet {0, 1/(G-1), ..., 1}.
class LossGrid {
 public:
  explicit LossGrid(std::size_t levels) : levels_(levels) {
    if (levels < 2) throw RangeError("loss grid needs at least two levels");
  }
  std::size_t levels() const { return levels_; }

  template <Scalar P>
  P value(std::size_t level) const {
    if (level >= levels_) throw IndexError("loss level out of grid");
    return ratio<P>(static_cast<std::int64_t>(level),
                    static_cast<std::int64_t>(levels_ - 1));
  }

  // Level whose value equals `loss`; nullopt when the grid cannot represent it.
  template <Scalar P>
  std::optional<std::size_t> level_of(const P& loss) const {
    for (std::size_t l = 0; l < levels_; ++l) {
      if (nearly_equal<P>(value<P>(l), loss, 1e-12)) return l;
    }
    return std::nullopt;
  }

  friend bool operator==(const LossGrid&, const LossGrid&) = default;

 private:
  std::size_t levels_;
};

// The percept alphabet: observations, optionally paired with a loss level.
// Percepts are flattened as observation * levels + loss_level.
class PerceptSpace {
 public:
  explicit PerceptSpace(std::size_t observations) : observations_(observations) {}
  PerceptSpace(std::size_t observations, LossGrid grid)
      : observations_(observations), grid_(grid) {}

  const Alphabet& observations() const { return observations_; }
  const std::optional<LossGrid>& loss_grid() const { return grid_; }
  bool embeds_loss() const { return grid_.has_value(); }

  std::size_t size() const {
    return observations_.size() * (grid_ ? grid_->levels() : 1);
  }

  bool contains(const Percept& x) const {
    if (!observations_.contains(x.observation)) return false;
    if (grid_) return x.loss_level && *x.loss_level < grid_->levels();
    return !x.loss_level;
  }

  std::size_t index(const Percept& x) const {
    if (!contains(x)) throw AlphabetMismatch("percept outside percept space");
    return grid_ ? x.observation * grid_->levels() + *x.loss_level
                 : x.observation;
  }

  Percept percept(std::size_t index) const {
    if (index >= size()) throw IndexError("percept index out of range");
    if (grid_) return {index / grid_->levels(), index % grid_->levels()};
    return {index, std::nullopt};
  }

  friend bool operator==(const PerceptSpace&, const PerceptSpace&) = default;

 private:
  Alphabet observations_;
  std::optional<LossGrid> grid_;
};

// Read-only window onto a history. A conditioning view holds t actions and
// t-1 percepts (the agent has emitted y_t and awaits x_t); a complete view
// holds t of each.
struct HistoryView {
  std::span<const Percept> percepts;
  std::span<const Action> actions;

  std::size_t cycle() const { return actions.size(); }
  bool awaiting_percept() const {
    return actions.size() == percepts.size() + 1;
  }
  // Same history truncated to its first `cycles` actions and `cycles - 1`
  // percepts.
  HistoryView conditioning_prefix(std::size_t cycles) const {
    return {percepts.first(cycles - 1), actions.first(cycles)};
  }
};

// Append-only record y_1 x_1 ... y_t x_t. Values are immutable; the append
// operations return a new tape. A tape may end in a pending action.
class HistoryTape {
 public:
  HistoryTape(Alphabet actions, PerceptSpace percepts)
      : action_alphabet_(std::move(actions)), percept_space_(std::move(percepts)) {}

  const Alphabet& action_alphabet() const { return action_alphabet_; }
  const PerceptSpace& percept_space() const { return percept_space_; }

  // Number of completed cycles.
  std::size_t length() const { return percepts_.size(); }
  bool has_pending_action() const { return actions_.size() > percepts_.size(); }

  [[nodiscard]] HistoryTape append_action(Action y) const {
    if (has_pending_action()) {
      throw ShapeError("cycle already has an action awaiting its percept");
    }
    if (!action_alphabet_.contains(y.index)) {
      throw AlphabetMismatch("action " + std::to_string(y.index) +
                             " outside action alphabet of size " +
                             std::to_string(action_alphabet_.size()));
    }
    HistoryTape next = *this;
    next.actions_.push_back(y);
    return next;
  }

  [[nodiscard]] HistoryTape append_percept(const Percept& x) const {
    if (!has_pending_action()) {
      throw ShapeError("percept must follow the cycle's action");
    }
    if (!percept_space_.contains(x)) {
      throw AlphabetMismatch("percept outside percept space");
    }
    HistoryTape next = *this;
    next.percepts_.push_back(x);
    return next;
  }

  [[nodiscard]] HistoryTape append_cycle(Action y, const Percept& x) const {
    if (!action_alphabet_.contains(y.index)) {
      throw AlphabetMismatch("action " + std::to_string(y.index) +
                             " outside action alphabet of size " +
                             std::to_string(action_alphabet_.size()));
    }
    if (!percept_space_.contains(x)) {
      throw AlphabetMismatch("percept outside percept space");
    }
    if (has_pending_action()) {
      throw ShapeError("cannot append a full cycle after a pending action");
    }
    HistoryTape next = *this;
    next.actions_.push_back(y);
    next.percepts_.push_back(x);
    return next;
  }

  // (x_{<t}, y_{1:t}); requires 1 <= t and y_t present on the tape.
  HistoryView views(std::size_t t) const {
    if (t == 0 || t > actions_.size()) {
      throw IndexError("cycle " + std::to_string(t) + " outside tape with " +
                       std::to_string(actions_.size()) + " actions");
    }
    return {std::span(percepts_).first(t - 1), std::span(actions_).first(t)};
  }

  // Everything on the tape, including a pending action if any.
  HistoryView view() const { return {percepts_, actions_}; }

  std::span<const Action> actions() const { return actions_; }
  std::span<const Percept> percepts() const { return percepts_; }

  std::vector<std::pair<Action, Percept>> cycles() const {
    std::vector<std::pair<Action, Percept>> out;
    out.reserve(percepts_.size());
    for (std::size_t i = 0; i < percepts_.size(); ++i) {
      out.emplace_back(actions_[i], percepts_[i]);
    }
    return out;
  }

  friend bool operator==(const HistoryTape& a, const HistoryTape& b) {
    return a.action_alphabet_ == b.action_alphabet_ &&
           a.percept_space_ == b.percept_space_ && a.actions_ == b.actions_ &&
           a.percepts_ == b.percepts_;
  }

 private:
  Alphabet action_alphabet_;
  PerceptSpace percept_space_;
  std::vector<Action> actions_;
  std::vector<Percept> percepts_;
};

// "y:x" (plain) or "y:x/l" (embedded loss).
inline std::string format_cycle(Action y, const Percept& x) {
  std::string s = std::to_string(y.index) + ":" + std::to_string(x.observation);
  if (x.loss_level) s += "/" + std::to_string(*x.loss_level);
  return s;
}

// Space-separated cycles as written into CSV logs.
inline std::string format_history(const HistoryTape& h) {
  std::string s;
  for (std::size_t i = 0; i < h.length(); ++i) {
    if (i) s += ' ';
    s += format_cycle(h.actions()[i], h.percepts()[i]);
  }
  return s;
}

inline HistoryTape parse_history(const std::string& text, Alphabet actions,
                                 PerceptSpace percepts) {
  HistoryTape h(std::move(actions), std::move(percepts));
  std::istringstream in(text);
  std::string token;
  while (in >> token) {
    const auto colon = token.find(':');
    if (colon == std::string::npos) {
      throw ConfigError("history token '" + token + "' is not y:x");
    }
    try {
      Action y{std::stoul(token.substr(0, colon))};
      std::string rest = token.substr(colon + 1);
      Percept x;
      if (auto slash = rest.find('/'); slash != std::string::npos) {
        x.observation = std::stoul(rest.substr(0, slash));
        x.loss_level = std::stoul(rest.substr(slash + 1));
      } else {
        x.observation = std::stoul(rest);
      }
      h = h.append_cycle(y, x);
    } catch (const std::logic_error&) {
      throw ConfigError("history token '" + token + "' is not y:x");
    }
  }
  return h;
}

}  // namespace aixi
