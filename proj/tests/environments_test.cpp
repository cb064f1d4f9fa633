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


#include "aixi/environments.hpp"

#include <gtest/gtest.h>

#include "test_support.hpp"

namespace aixi {
namespace {

Percept obs(std::size_t o) { return Percept{o, std::nullopt}; }

std::vector<double> row_after(const Environment<double>& env, std::vector<Percept> xs,
                              std::vector<Action> ys) {
  return env.conditional_row(HistoryView{xs, ys});
}

TEST(BernoulliTest, Construction) {
  const auto zero = make_bernoulli(0.0);
  EXPECT_EQ(row_after(*zero, {}, {{0}}), (std::vector<double>{1.0, 0.0}));
  const auto p7 = make_bernoulli(0.7);
  EXPECT_DOUBLE_EQ(row_after(*p7, {obs(0), obs(0)}, {{1}, {0}, {1}})[1], 0.7);
  EXPECT_TRUE(p7->action_independent());
  EXPECT_THROW(make_bernoulli(1.1), RangeError);
  EXPECT_THROW(make_bernoulli(-0.1), RangeError);
  EXPECT_THROW(make_bernoulli(Rational(11, 10)), RangeError);
  EXPECT_EQ(p7->describe(), "b0.7;");
  EXPECT_EQ(make_bernoulli(Rational(7, 10))->describe(), "b7/10;");
}

TEST(BernoulliTest, ActionInvariantOnRandomHistories) {
  Rng rng(41);
  const auto env = make_bernoulli(0.35, 3);
  for (int i = 0; i < 1000; ++i) {
    const std::size_t t = 1 + rng() % 6;
    const auto xs = testing::random_percepts(rng, t - 1, 2);
    auto ys = testing::random_actions(rng, t, 3);
    const auto reference = env->conditional_row(HistoryView{xs, ys});
    for (std::size_t y = 0; y < 3; ++y) {
      ys[rng() % t] = Action{y};
      ASSERT_EQ(env->conditional_row(HistoryView{xs, ys}), reference);
    }
  }
}

TEST(BanditTest, DegenerateArms) {
  const auto env = make_bandit<double>({0.0, 1.0});
  const PerceptSpace& space = env->percept_space();
  const auto arm0 = row_after(*env, {}, {{0}});
  const auto arm1 = row_after(*env, {}, {{1}});
  EXPECT_EQ(arm0[space.index(Percept{0, 0})], 1.0);
  EXPECT_EQ(arm1[space.index(Percept{1, 1})], 1.0);
  EXPECT_FALSE(env->action_independent());
}

TEST(BanditTest, LossBitProbability) {
  const auto env = make_bandit<double>({0.2, 0.8});
  const auto row = row_after(*env, {}, {{1}});
  EXPECT_DOUBLE_EQ(row[env->percept_space().index(Percept{1, 1})], 0.8);
  EXPECT_DOUBLE_EQ(row[env->percept_space().index(Percept{0, 0})], 0.2);
  EXPECT_EQ(row[env->percept_space().index(Percept{1, 0})], 0.0);
  EXPECT_EQ(row[env->percept_space().index(Percept{0, 1})], 0.0);
}

TEST(BanditTest, ObservationOnlyLayout) {
  const auto env = make_bandit<double>({0.2, 0.8}, BanditPercepts::observation_only);
  EXPECT_FALSE(env->percept_space().embeds_loss());
  EXPECT_EQ(row_after(*env, {}, {{0}}), (std::vector<double>{0.8, 0.2}));
  EXPECT_EQ(env->describe(), "o0.2,0.8;");
  EXPECT_EQ(make_bandit<double>({0.2, 0.8})->describe(), "a0.2,0.8;");
}

TEST(BanditTest, Errors) {
  EXPECT_THROW(make_bandit<double>({}), ShapeError);
  EXPECT_THROW(make_bandit<double>({0.5, 1.5}), RangeError);
}

TEST(BanditTest, EmpiricalLossFrequencyPerArm) {
  const std::vector<double> probs = {0.2, 0.65, 0.9};
  const auto env = make_bandit<double>(probs);
  Rng rng(123);
  for (std::size_t arm = 0; arm < probs.size(); ++arm) {
    const std::vector<Action> ys = {{arm}};
    std::size_t losses = 0;
    for (int i = 0; i < 100000; ++i) {
      const Percept x = sample_percept(*env, HistoryView{{}, ys}, rng);
      ASSERT_EQ(x.observation, *x.loss_level);
      losses += *x.loss_level;
    }
    EXPECT_NEAR(static_cast<double>(losses) / 1e5, probs[arm], 0.01);
  }
}

TEST(MdpTest, IdentityTransitionsNeverMove) {
  const auto mdp = make_mdp<double>({{{1, 0}, {1, 0}}, {{0, 1}, {0, 1}}}, {0.5, 0.5});
  for (std::size_t s = 0; s < 2; ++s) {
    for (std::size_t y = 0; y < 2; ++y) {
      EXPECT_EQ(row_after(*mdp, {obs(s)}, {{0}, {y}})[s], 1.0);
    }
  }
  EXPECT_TRUE(mdp->action_independent());
}

TEST(MdpTest, FlipStay) {
  // action 0 = stay, action 1 = flip
  const auto mdp = make_mdp<double>({{{1, 0}, {0, 1}}, {{0, 1}, {1, 0}}}, {1, 0});
  EXPECT_EQ(row_after(*mdp, {obs(0)}, {{0}, {1}})[1], 1.0);
  EXPECT_EQ(row_after(*mdp, {obs(1)}, {{0}, {1}})[0], 1.0);
  EXPECT_EQ(row_after(*mdp, {obs(1)}, {{0}, {0}})[1], 1.0);
  EXPECT_FALSE(mdp->action_independent());
}

TEST(MdpTest, Errors) {
  EXPECT_THROW(make_mdp<double>({{{0.5, 0.4}, {0.5, 0.5}}, {{0.5, 0.5}, {0.5, 0.5}}}, {1, 0}),
               NormalizationError);
  EXPECT_THROW(make_mdp<double>({{{1, 0}}, {{1, 0}}}, {0.45, 0.45}), NormalizationError);
  EXPECT_THROW(make_mdp<double>({{{1, 0}, {1}}, {{1, 0}, {1, 0}}}, {1, 0}), ShapeError);
  EXPECT_THROW(make_mdp<double>({{{1, 0}}, {{1, 0}}}, {1}), ShapeError);
}

TEST(ChronologicalTableTest, LayoutAndErrors) {
  // depth 1, two actions: rows for y1 = 0 and y1 = 1
  const auto t1 = std::make_shared<ChronologicalTable<double>>(2, 2, 1,
                                                               std::vector<double>{0.1, 0.9, 0.6, 0.4});
  EXPECT_EQ(row_after(*t1, {}, {{1}}), (std::vector<double>{0.6, 0.4}));
  EXPECT_FALSE(t1->action_independent());
  EXPECT_THROW(row_after(*t1, {obs(0)}, {{0}, {0}}), IndexError);
  EXPECT_THROW(ChronologicalTable<double>(2, 2, 1, {0.1, 0.9}), ShapeError);
  EXPECT_THROW(ChronologicalTable<double>(2, 2, 1, {0.1, 0.8, 0.6, 0.4}), NormalizationError);
  EXPECT_THROW(ChronologicalTable<double>(2, 2, 0, {}), ShapeError);
}

TEST(ChronologicalTableTest, FromFunctionReproducesRows) {
  const auto rule = [](const HistoryView& h) {
    double ones = 0;
    for (const auto& x : h.percepts) ones += static_cast<double>(x.observation);
    const double p = (ones + 1 + static_cast<double>(h.actions.back().index)) /
                     (static_cast<double>(h.percepts.size()) + 3);
    return std::vector<double>{1 - p, p};
  };
  const auto table = ChronologicalTable<double>::from_function(2, 2, 3, rule);
  testing::for_each_binary_history(3, [&](const auto& xs, const auto& ys) {
    const HistoryView v{std::span(xs).first(2), std::span(ys)};
    EXPECT_EQ(table->conditional_row(v), rule(v));
  });
}

TEST(GridClassTest, Construction) {
  const auto two = make_bernoulli_grid<double>({0.3, 0.7}, WeightScheme::uniform);
  EXPECT_EQ(two.size(), 2u);
  EXPECT_EQ(two.weights(), (std::vector<double>{0.5, 0.5}));

  std::vector<double> grid;
  for (int i = 1; i <= 9; ++i) grid.push_back(i / 10.0);
  const auto nine = make_bernoulli_grid<double>(grid, WeightScheme::uniform);
  EXPECT_EQ(nine.size(), 9u);
  Accumulator<double> total;
  for (double w : nine.weights()) total.add(w);
  EXPECT_NEAR(total.value(), 1.0, 1e-12);
  EXPECT_TRUE(nine.find(*make_bernoulli(0.7)).has_value());
  EXPECT_FALSE(nine.find(*make_bernoulli(0.75)).has_value());

  EXPECT_THROW(make_bernoulli_grid<double>({}, WeightScheme::uniform), EmptyClass);
  EXPECT_THROW(make_bernoulli_grid<double>({0.3, 0.3}, WeightScheme::uniform), ConfigError);
  const auto bandits = make_grid_class<double>(GridKind::bandit, {{0.2, 0.8}, {0.8, 0.2}},
                                              WeightScheme::uniform);
  EXPECT_EQ(bandits.size(), 2u);
}

TEST(ValidationTest, EveryConstructedEnvironmentValidates) {
  Rng rng(9);
  std::vector<EnvPtr<double>> envs = {
      make_bernoulli(0.0), make_bernoulli(0.7), make_bandit<double>({0.2, 0.8}),
      make_bandit<double>({0.0, 1.0}, BanditPercepts::observation_only),
      testing::random_mdp<double>(rng, 3, 2), testing::random_table<double>(rng, 2, 2, 3)};
  for (const auto& env : envs) EXPECT_NO_THROW(validate_environment(*env, 3)) << env->describe();
  EXPECT_NO_THROW(validate_environment(*testing::random_mdp<Rational>(rng, 2, 2), 4));
}

}  // namespace
}  // namespace aixi
