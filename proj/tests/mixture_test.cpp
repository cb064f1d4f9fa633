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


#include "aixi/mixture.hpp"

#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "aixi/environments.hpp"
#include "test_support.hpp"

namespace aixi {
namespace {

Percept obs(std::size_t o) { return Percept{o, std::nullopt}; }

std::vector<Percept> ones(std::size_t n) { return std::vector<Percept>(n, obs(1)); }
std::vector<Action> zeros(std::size_t n) { return std::vector<Action>(n, Action{0}); }

std::shared_ptr<const MixtureModel<double>> half_and_point_nine() {
  return MixtureModel<double>::make(
      make_bernoulli_grid<double>({0.5, 0.9}, WeightScheme::uniform));
}

TEST(PriorWeightsTest, Uniform) {
  const std::vector<std::size_t> two = {3, 9};
  EXPECT_EQ(prior_weights<double>(two, WeightScheme::uniform), (std::vector<double>{0.5, 0.5}));
  const std::vector<std::size_t> four = {1, 2, 3, 4};
  EXPECT_EQ(prior_weights<Rational>(four, WeightScheme::uniform),
            std::vector<Rational>(4, Rational(1, 4)));
}

TEST(PriorWeightsTest, PrefixCode) {
  const std::vector<std::size_t> lengths = {3, 5};
  const auto w = prior_weights<double>(lengths, WeightScheme::prefix_code);
  EXPECT_NEAR(w[0], 0.8, 1e-15);
  EXPECT_NEAR(w[1], 0.2, 1e-15);
  EXPECT_EQ(prior_weights<Rational>(lengths, WeightScheme::prefix_code),
            (std::vector<Rational>{Rational(4, 5), Rational(1, 5)}));
  const std::vector<std::size_t> long_codes = {4000, 4001};
  const auto far = prior_weights<double>(long_codes, WeightScheme::prefix_code);
  EXPECT_NEAR(far[0], 2.0 / 3.0, 1e-15);
}

TEST(PriorWeightsTest, EmptyClass) {
  EXPECT_THROW(prior_weights<double>({}, WeightScheme::uniform), EmptyClass);
  EXPECT_THROW(ModelClass<double>::with_scheme({}, WeightScheme::uniform), EmptyClass);
}

TEST(ModelClassTest, Validation) {
  const std::vector<EnvPtr<double>> members = {make_bernoulli(0.2), make_bernoulli(0.6)};
  EXPECT_THROW(ModelClass<double>(members, {0.5}), ShapeError);
  EXPECT_THROW(ModelClass<double>(members, {1.0, 0.0}), RangeError);
  EXPECT_THROW(ModelClass<double>(members, {0.6, 0.6}), NormalizationError);
  EXPECT_THROW(ModelClass<double>({make_bernoulli(0.2), make_bernoulli(0.6, 3)}, {0.5, 0.5}),
               AlphabetMismatch);
  EXPECT_THROW(ModelClass<double>({make_bernoulli(0.2), make_bandit<double>({0.1, 0.2})},
                                  {0.5, 0.5}),
               AlphabetMismatch);
  const ModelClass<double> ok(members, {0.25, 0.75});
  EXPECT_THROW(ok.member(2), IndexError);
  const auto prefix = ModelClass<double>::with_scheme(
      {make_bernoulli(0.5), make_bernoulli(0.125)}, WeightScheme::prefix_code);
  // "b0.5;" is 5 symbols, "b0.125;" is 7
  EXPECT_NEAR(prefix.weights()[0], 0.8, 1e-15);
}

TEST(MixtureJointTest, Examples) {
  const auto m = half_and_point_nine();
  EXPECT_NEAR(mixture_joint(*m, ones(1), zeros(1)), 0.7, 1e-15);
  EXPECT_NEAR(mixture_joint(*m, ones(2), zeros(2)), 0.53, 1e-15);
  EXPECT_EQ(mixture_joint(*m, {}, {}), 1.0);
  EXPECT_NEAR(mixture_log_joint(*m, ones(2), zeros(2)), std::log(0.53), 1e-14);
  EXPECT_THROW(mixture_joint(*m, ones(2), zeros(1)), ShapeError);

  const auto exact = MixtureModel<Rational>::make(
      make_bernoulli_grid<Rational>({Rational(1, 2), Rational(9, 10)}, WeightScheme::uniform));
  EXPECT_EQ(mixture_joint(*exact, ones(2), zeros(2)), Rational(53, 100));
}

TEST(MixtureJointTest, LogJointSurvivesUnderflow) {
  const auto m = half_and_point_nine();
  const double lj = mixture_log_joint(*m, ones(5000), zeros(5000));
  EXPECT_TRUE(std::isfinite(lj));
  EXPECT_NEAR(lj, std::log(0.5) + 5000 * std::log(0.9), 1e-8);
}

TEST(MixtureConditionalTest, Examples) {
  const auto m = half_and_point_nine();
  const std::vector<Action> y1 = zeros(1);
  const std::vector<Action> y2 = zeros(2);
  const std::vector<Percept> x1 = ones(1);
  EXPECT_NEAR(mixture_conditional(*m, HistoryView{{}, y1}, obs(1)), 0.7, 1e-15);
  EXPECT_NEAR(mixture_conditional(*m, HistoryView{x1, y2}, obs(1)), 0.757142857142857, 1e-12);
  EXPECT_NEAR(mixture_conditional(*m, HistoryView{x1, y2}, obs(1)), 0.53 / 0.7, 1e-15);
}

TEST(MixtureConditionalTest, DeadMemberDropsOut) {
  const auto cls = ModelClass<Rational>::with_scheme(
      {make_bernoulli(Rational(0)), make_bernoulli(Rational(1, 2)), make_bernoulli(Rational(3, 4))},
      WeightScheme::uniform);
  const auto m = MixtureModel<Rational>::make(cls);
  const std::vector<Percept> xs = {obs(1), obs(0)};
  const std::vector<Action> ys = zeros(3);
  // Oracle: explicit ratio of joints with the dead member contributing 0.
  const std::vector<Percept> next = {obs(1), obs(0), obs(1)};
  const Rational expected = mixture_joint(*m, next, ys) /
                            mixture_joint(*m, xs, std::span<const Action>(ys).first(2));
  const Rational by_hand = (Rational(1, 4) * Rational(1, 2) + Rational(3, 16) * Rational(3, 4)) /
                           (Rational(1, 4) + Rational(3, 16));
  EXPECT_EQ(by_hand, Rational(17, 28));
  EXPECT_EQ(expected, by_hand);
  EXPECT_EQ(mixture_conditional(*m, HistoryView{xs, ys}, obs(1)), by_hand);
}

TEST(MixtureConditionalTest, UnreachableHistory) {
  const auto m = MixtureModel<double>::make(
      make_bernoulli_grid<double>({0.0, 1.0}, WeightScheme::uniform));
  const std::vector<Percept> xs = {obs(1), obs(0)};
  EXPECT_THROW(mixture_conditional(*m, HistoryView{xs, zeros(3)}, obs(1)), UnreachableHistory);
}

TEST(PosteriorUpdateTest, OneStepBayes) {
  const auto m = half_and_point_nine();
  const HistoryTape empty(Alphabet(2), PerceptSpace(2));
  const auto next = posterior_update(*m, empty, Action{0}, obs(1));
  EXPECT_NEAR(next.posterior()[0], 0.25 / 0.7, 1e-15);
  EXPECT_NEAR(next.posterior()[1], 0.45 / 0.7, 1e-15);
  EXPECT_NEAR(next.posterior()[0], 0.35714, 1e-5);
  EXPECT_NEAR(next.posterior()[1], 0.64286, 1e-5);
  EXPECT_EQ(m->posterior(), (std::vector<double>{0.5, 0.5}));
}

TEST(PosteriorUpdateTest, IdenticalLikelihoodsLeaveWeightsUnchanged) {
  const auto cls = ModelClass<Rational>(
      {make_bandit<Rational>({Rational(1, 4), Rational(1, 2)}),
       make_bandit<Rational>({Rational(3, 4), Rational(1, 2)})},
      {Rational(1, 3), Rational(2, 3)});
  const auto m = MixtureModel<Rational>::make(cls);
  const HistoryTape empty(Alphabet(2), PerceptSpace(2, LossGrid(2)));
  const auto next = posterior_update(*m, empty, Action{1}, Percept{1, 1});
  EXPECT_EQ(next.posterior_weight(0), Rational(1, 3));
  EXPECT_EQ(next.posterior_weight(1), Rational(2, 3));
}

TEST(PosteriorUpdateTest, ZeroLikelihoodIsPermanent) {
  const auto m = MixtureModel<double>::make(
      make_bernoulli_grid<double>({0.0, 0.5}, WeightScheme::uniform));
  HistoryTape h(Alphabet(2), PerceptSpace(2));
  auto next = posterior_update(*m, h, Action{0}, obs(1));
  EXPECT_EQ(next.posterior()[0], 0.0);
  EXPECT_EQ(next.log_posterior()[0], kNegInf);
  EXPECT_EQ(next.posterior()[1], 1.0);
  h = h.append_cycle(Action{0}, obs(1));
  next = posterior_update(next, h, Action{0}, obs(0));
  EXPECT_EQ(next.posterior()[0], 0.0);
  EXPECT_EQ(next.model_class().size(), 2u);
}

TEST(PosteriorUpdateTest, ClassExhausted) {
  const auto m = MixtureModel<double>::make(
      make_bernoulli_grid<double>({0.0, 1.0}, WeightScheme::uniform));
  const HistoryTape h = HistoryTape(Alphabet(2), PerceptSpace(2)).append_cycle(Action{0}, obs(1));
  const auto after = posterior_update(*m, HistoryTape(Alphabet(2), PerceptSpace(2)), Action{0}, obs(1));
  EXPECT_THROW(posterior_update(after, h, Action{0}, obs(0)), ClassExhausted);
}

TEST(PosteriorUpdateTest, EmptyHistoryPosteriorIsPrior) {
  const auto cls = ModelClass<Rational>(
      {make_bernoulli(Rational(1, 3)), make_bernoulli(Rational(1, 2)), make_bernoulli(Rational(2, 3))},
      {Rational(1, 6), Rational(1, 3), Rational(1, 2)});
  const auto m = MixtureModel<Rational>::make(cls);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(m->posterior_weight(i), cls.weights()[i]);
}

TEST(DominanceTest, Examples) {
  const auto m = half_and_point_nine();
  for (std::size_t i = 0; i < 2; ++i) EXPECT_TRUE(dominance_check(*m, i, ones(4), zeros(4)));
  const auto single = MixtureModel<Rational>::make(
      ModelClass<Rational>({make_bernoulli(Rational(3, 10))}, {Rational(1)}));
  const std::vector<Percept> xs = {obs(1), obs(0), obs(1)};
  EXPECT_TRUE(dominance_check(*single, 0, xs, std::vector<Action>(3)));
  EXPECT_EQ(mixture_joint(*single, xs, std::vector<Action>(3)),
            joint(*single->model_class().member(0), xs, std::vector<Action>(3)));
  EXPECT_THROW(dominance_check(*m, 2, ones(1), zeros(1)), IndexError);
}

TEST(DominanceTest, RandomClassesAndSequences) {
  Rng rng(77);
  for (int trial = 0; trial < 10000; ++trial) {
    const std::size_t k = 1 + rng() % 4;
    const std::size_t n = rng() % 7;
    std::vector<EnvPtr<double>> members;
    for (std::size_t i = 0; i < k; ++i) {
      members.push_back(rng() % 2 ? testing::random_table<double>(rng, 2, 2, std::max<std::size_t>(n, 1))
                                  : make_bernoulli(testing::random_unit(rng)));
    }
    const auto w = testing::random_row(rng, k);
    const auto m = MixtureModel<double>::make(ModelClass<double>(members, w));
    const auto xs = testing::random_percepts(rng, n, 2);
    const auto ys = testing::random_actions(rng, n, 2);
    for (std::size_t i = 0; i < k; ++i) ASSERT_TRUE(dominance_check(*m, i, xs, ys));
  }
}

// Posterior after n incremental updates vs w_i mu_i(x_{1:n}|y_{1:n}) / xi.
TEST(PosteriorUpdateTest, IncrementalMatchesBatchExhaustive) {
  Rng rng(13);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<EnvPtr<double>> members = {
        testing::random_table<double>(rng, 2, 2, 5), testing::random_table<double>(rng, 2, 2, 5),
        make_bernoulli(testing::random_unit(rng)), testing::random_mdp<double>(rng, 2, 2)};
    const ModelClass<double> cls(members, testing::random_row(rng, 4));
    const auto prior = MixtureModel<double>::make(cls);
    for (std::size_t n = 1; n <= 5; ++n) {
      testing::for_each_binary_history(n, [&](const auto& xs, const auto& ys) {
        MixtureModel<double> m = *prior;
        for (std::size_t t = 0; t < n; ++t) {
          const HistoryView v{std::span(xs).first(t), std::span(ys).first(t + 1)};
          m = m.posterior_update(v, xs[t]);
        }
        const double xi = mixture_joint(*prior, xs, ys);
        for (std::size_t i = 0; i < 4; ++i) {
          const double batch = cls.weights()[i] * joint(*cls.member(i), xs, ys) / xi;
          ASSERT_NEAR(m.posterior()[i], batch, 1e-10);
        }
      });
    }
  }
}

TEST(PosteriorUpdateTest, ExactIncrementalMatchesBatch) {
  Rng rng(14);
  const ModelClass<Rational> cls(
      {testing::random_table<Rational>(rng, 2, 2, 4), testing::random_table<Rational>(rng, 2, 2, 4),
       make_bernoulli(Rational(1, 3))},
      {Rational(1, 2), Rational(1, 4), Rational(1, 4)});
  const auto prior = MixtureModel<Rational>::make(cls);
  testing::for_each_binary_history(4, [&](const auto& xs, const auto& ys) {
    const Rational xi = mixture_joint(*prior, xs, ys);
    if (xi == 0) return;
    MixtureModel<Rational> m = *prior;
    for (std::size_t t = 0; t < 4; ++t) {
      m = m.posterior_update(HistoryView{std::span(xs).first(t), std::span(ys).first(t + 1)}, xs[t]);
    }
    for (std::size_t i = 0; i < 3; ++i) {
      ASSERT_EQ(m.posterior_weight(i), cls.weights()[i] * joint(*cls.member(i), xs, ys) / xi);
    }
  });
}

TEST(MixtureModelTest, ConditionalNormalizedAfterUpdates) {
  Rng rng(19);
  for (int trial = 0; trial < 500; ++trial) {
    const ModelClass<double> cls(
        {testing::random_table<double>(rng, 3, 2, 5), testing::random_mdp<double>(rng, 3, 2)},
        {0.3, 0.7});
    EnvPtr<double> m = MixtureModel<double>::make(cls);
    std::vector<Percept> xs;
    std::vector<Action> ys;
    for (std::size_t t = 0; t < 5; ++t) {
      ys.push_back(Action{rng() % 2});
      const auto row = m->conditional_row(HistoryView{xs, ys});
      Accumulator<double> total;
      for (double p : row) total.add(p);
      ASSERT_NEAR(total.value(), 1.0, 1e-10);
      const Percept x = sample_percept(*m, HistoryView{xs, ys}, rng);
      m = m->conditioned(HistoryView{xs, ys}, x);
      xs.push_back(x);
    }
    EXPECT_EQ(m->absorbed_cycles(), 5u);
  }
}

TEST(MixtureModelTest, LazyAdvanceMatchesExplicitUpdates) {
  const auto m = half_and_point_nine();
  const std::vector<Percept> xs = {obs(1), obs(1), obs(0)};
  const std::vector<Action> ys = zeros(4);
  const auto lazy = m->conditional_row(HistoryView{xs, ys});
  EnvPtr<double> stepped = m;
  for (std::size_t t = 0; t < 3; ++t) {
    stepped = stepped->conditioned(HistoryView{std::span(xs).first(t), std::span(ys).first(t + 1)}, xs[t]);
  }
  const auto eager = stepped->conditional_row(HistoryView{xs, ys});
  EXPECT_NEAR(lazy[1], eager[1], 1e-15);
  EXPECT_NEAR(lazy[1], (0.5 * 0.125 * 0.5 + 0.5 * 0.081 * 0.9) / (0.5 * 0.125 + 0.5 * 0.081), 1e-15);
}

TEST(MixtureModelTest, PosteriorConcentratesOnSampledMember) {
  std::vector<double> grid;
  for (int i = 1; i <= 9; ++i) grid.push_back(i / 10.0);
  const auto cls = std::make_shared<const ModelClass<double>>(
      make_bernoulli_grid<double>(grid, WeightScheme::uniform));
  const std::size_t truth = 2;  // p = 0.3
  const std::vector<std::size_t> checkpoints = {10, 100, 1000};
  std::vector<std::vector<double>> at(checkpoints.size());
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    Rng rng(seed);
    MixtureModel<double> m(cls);
    std::vector<Percept> xs;
    std::vector<Action> ys;
    std::size_t next = 0;
    for (std::size_t t = 1; t <= 1000; ++t) {
      ys.push_back(Action{0});
      const HistoryView v{xs, ys};
      const Percept x = sample_percept(*cls->member(truth), v, rng);
      m = m.posterior_update(v, x);
      xs.push_back(x);
      if (t == checkpoints[next]) at[next++].push_back(m.posterior()[truth]);
    }
  }
  std::vector<double> medians;
  for (auto& v : at) {
    std::nth_element(v.begin(), v.begin() + 50, v.end());
    medians.push_back(v[50]);
  }
  EXPECT_LE(medians[0], medians[1]);
  EXPECT_LE(medians[1], medians[2]);
  EXPECT_GT(medians[2], 0.99);
}

TEST(MixtureModelTest, DescribeAndActionIndependence) {
  const auto m = half_and_point_nine();
  EXPECT_EQ(m->describe(), "Xb0.5;b0.9;;");
  EXPECT_TRUE(m->action_independent());
  const auto bandits = MixtureModel<double>::make(make_grid_class<double>(
      GridKind::bandit, {{0.2, 0.8}, {0.8, 0.2}}, WeightScheme::uniform));
  EXPECT_FALSE(bandits->action_independent());
}

TEST(LogSumExpTest, Stable) {
  const std::vector<double> v = {-1000.0, -1000.0};
  EXPECT_NEAR(log_sum_exp(v), -1000.0 + std::log(2.0), 1e-12);
  const std::vector<double> dead = {kNegInf, kNegInf};
  EXPECT_EQ(log_sum_exp(dead), kNegInf);
  const std::vector<double> mixed = {kNegInf, 0.0};
  EXPECT_EQ(log_sum_exp(mixed), 0.0);
}

}  // namespace
}  // namespace aixi
