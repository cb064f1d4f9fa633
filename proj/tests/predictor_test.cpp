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


#include "aixi/predictor.hpp"

#include <gtest/gtest.h>

#include "aixi/environments.hpp"
#include "test_support.hpp"

namespace aixi {
namespace {

Percept obs(std::size_t o) { return Percept{o, std::nullopt}; }

// loss[x][y]
LossSpec<double> asymmetric() { return LossSpec<double>::matrix({{0.0, 1.0}, {0.2, 0.0}}); }

TEST(BayesActionTest, ZeroOneLossFollowsLikelierSymbol) {
  const PredictorPolicy<double> policy(make_bernoulli(0.7), LossSpec<double>::zero_one(2));
  const auto losses = policy.action_losses({});
  EXPECT_NEAR(losses[0], 0.7, 1e-15);
  EXPECT_NEAR(losses[1], 0.3, 1e-15);
  EXPECT_EQ(bayes_action(policy, std::span<const Percept>{}), Action{1});
}

TEST(BayesActionTest, TieGoesToSmallestAction) {
  const PredictorPolicy<double> policy(make_bernoulli(0.5), LossSpec<double>::zero_one(2));
  EXPECT_EQ(bayes_action(policy, std::span<const Percept>{}), Action{0});
}

TEST(BayesActionTest, AsymmetricLoss) {
  const PredictorPolicy<double> policy(make_bernoulli(0.9), asymmetric());
  const auto losses = policy.action_losses({});
  EXPECT_NEAR(losses[0], 0.18, 1e-15);
  EXPECT_NEAR(losses[1], 0.1, 1e-15);
  EXPECT_EQ(bayes_action(policy, std::span<const Percept>{}), Action{1});
}

TEST(BayesActionTest, MixturePlugInAndUnreachableHistory) {
  const auto xi = MixtureModel<double>::make(
      make_bernoulli_grid<double>({0.0, 0.5}, WeightScheme::uniform));
  const PredictorPolicy<double> policy(xi, LossSpec<double>::zero_one(2));
  const std::vector<Percept> seen = {obs(1)};
  EXPECT_EQ(bayes_action(policy, seen), Action{0});  // posterior on 0.5 only: tie
  const std::vector<Percept> zeros = {obs(0), obs(0), obs(0)};
  EXPECT_EQ(bayes_action(policy, zeros), Action{0});
  const PredictorPolicy<double> certain(make_bernoulli(1.0), LossSpec<double>::zero_one(2));
  const std::vector<Percept> impossible = {obs(0)};
  EXPECT_THROW(bayes_action(certain, impossible), UnreachableHistory);
}

TEST(PredictorPolicyTest, Preconditions) {
  EXPECT_THROW(PredictorPolicy<double>(make_bandit<double>({0.2, 0.8},
                                                           BanditPercepts::observation_only),
                                       LossSpec<double>::zero_one(2)),
               NotApplicable);
  EXPECT_THROW(PredictorPolicy<double>(make_bernoulli(0.5), LossSpec<double>::zero_one(3)),
               ShapeError);
  EXPECT_THROW(PredictorPolicy<double>(make_bernoulli(0.5), LossSpec<double>::general(
                                                                [](const HistoryView&) { return 0.0; })),
               NotApplicable);
}

TEST(ThresholdTest, Gamma) {
  EXPECT_DOUBLE_EQ(threshold_gamma(LossSpec<double>::zero_one(2)), 0.5);
  EXPECT_NEAR(threshold_gamma(asymmetric()), 1 / 1.2, 1e-15);
  EXPECT_NEAR(threshold_gamma(asymmetric()), 0.833333, 1e-6);
  const auto exact = LossSpec<Rational>::matrix({{Rational(0), Rational(1)}, {Rational(1, 5), Rational(0)}});
  EXPECT_EQ(threshold_gamma(exact), Rational(5, 6));
}

TEST(ThresholdTest, DegenerateLoss) {
  EXPECT_THROW(threshold_gamma(LossSpec<double>::matrix({{0.1, 0.1}, {0.5, 0.0}})), DegenerateLoss);
  EXPECT_THROW(threshold_gamma(LossSpec<double>::matrix({{0.0, 1.0}, {0.0, 0.3}})), DegenerateLoss);
  EXPECT_THROW(threshold_gamma(LossSpec<double>::zero_one(3)), ShapeError);
}

TEST(ThresholdTest, AgreesWithArgminIncludingTies) {
  Rng rng(404);
  auto draw = [&](std::int64_t den) { return Rational(static_cast<std::int64_t>(rng() % (den + 1)), den); };
  std::size_t at_gamma = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    Rational l00 = draw(8), l01 = draw(8), l10 = draw(8), l11 = draw(8);
    if (!(l01 > l00) || !(l10 > l11)) {
      --trial;
      continue;
    }
    const auto loss = LossSpec<Rational>::matrix({{l00, l01}, {l10, l11}});
    const Rational gamma = threshold_gamma(loss);
    // Hit the threshold exactly every fourth case.
    const Rational p1 = trial % 4 == 0 ? gamma : draw(24);
    at_gamma += p1 == gamma;
    const std::vector<Rational> row = {1 - p1, p1};
    const Action argmin{argmin_first<Rational>(expected_losses<Rational>(row, loss))};
    ASSERT_EQ(argmin, threshold_action(p1, gamma)) << "gamma " << gamma << " p1 " << p1;
  }
  EXPECT_GE(at_gamma, 2500u);
}

TEST(BayesActionTest, ChoiceIsNeverWorseThanAnyAlternative) {
  Rng rng(55);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t nx = 2 + rng() % 2;
    const std::size_t ny = 2 + rng() % 2;
    const auto mu = ChronologicalTable<double>::from_function(
        nx, ny, 3, [&, nx](const HistoryView& h) {
          // Action-free: depends on percepts only.
          Rng local(h.percepts.size() * 31 + (h.percepts.empty() ? 0 : h.percepts.back().observation));
          return testing::random_row(local, nx);
        });
    LossSpec<double>::Matrix m(nx, std::vector<double>(ny));
    for (auto& row : m) for (auto& v : row) v = testing::random_unit(rng);
    const PredictorPolicy<double> policy(mu, LossSpec<double>::matrix(m));
    for (std::size_t n = 0; n < 3; ++n) {
      const auto xs = testing::random_percepts(rng, n, nx);
      const auto losses = policy.action_losses(xs);
      const Action y = bayes_action(policy, xs);
      for (std::size_t alt = 0; alt < ny; ++alt) ASSERT_LE(losses[y.index], losses[alt]);
    }
  }
}

TEST(BayesActionTest, ArgminInvariantUnderAffineLoss) {
  Rng rng(66);
  for (int trial = 0; trial < 2000; ++trial) {
    LossSpec<Rational>::Matrix m(3, std::vector<Rational>(3));
    for (auto& row : m) for (auto& v : row) v = Rational(static_cast<std::int64_t>(rng() % 5), 8);
    const std::vector<Rational> rho = testing::random_rational_row(rng, 3, 6);
    const Rational scale(static_cast<std::int64_t>(1 + rng() % 4), 8);
    const Rational shift(static_cast<std::int64_t>(rng() % 3), 8);
    auto scaled = m;
    for (auto& row : scaled) for (auto& v : row) v = v * scale + shift;
    const auto a = argmin_first<Rational>(expected_losses<Rational>(rho, LossSpec<Rational>::matrix(m)));
    const auto b = argmin_first<Rational>(expected_losses<Rational>(rho, LossSpec<Rational>::matrix(scaled)));
    ASSERT_EQ(a, b);
  }
}

TEST(LossLedgerTest, AdditivityAndBounds) {
  LossLedger ledger;
  Rng rng(3);
  double naive = 0;
  for (int i = 0; i < 1000; ++i) {
    const double l = testing::random_unit(rng);
    naive += l;
    ledger.record(Action{0}, obs(0), l);
  }
  EXPECT_NEAR(ledger.total(), naive, 1e-12);
  EXPECT_GE(ledger.total(), 0.0);
  EXPECT_LE(ledger.total(), static_cast<double>(ledger.cycles()));
  EXPECT_EQ(ledger.cumulative_at(0), 0.0);
  EXPECT_EQ(ledger.cumulative_at(1000), ledger.total());
  EXPECT_THROW(ledger.cumulative_at(1001), IndexError);
  EXPECT_THROW(ledger.record(Action{0}, obs(0), 1.5), RangeError);
}

TEST(RunPredictionTest, DeterministicTruthIsFree) {
  const auto truth = make_bernoulli(1.0);
  const auto ledger = run_prediction<double>(truth, PredictorPolicy<double>(truth, LossSpec<double>::zero_one(2)), 10, 1);
  EXPECT_EQ(ledger.cycles(), 10u);
  EXPECT_EQ(ledger.total(), 0.0);
}

TEST(RunPredictionTest, InformedPredictorLossRate) {
  const auto truth = make_bernoulli(0.7);
  const auto ledger = run_prediction<double>(
      truth, PredictorPolicy<double>(truth, LossSpec<double>::zero_one(2)), 10000, 2026);
  EXPECT_NEAR(ledger.total() / 10000, 0.3, 0.02);
}

TEST(RunPredictionTest, MixtureLosesMoreOnAverage) {
  const auto truth = make_bernoulli(0.7);
  std::vector<double> grid;
  for (int i = 1; i <= 9; ++i) grid.push_back(i / 10.0);
  const auto xi = MixtureModel<double>::make(make_bernoulli_grid<double>(grid, WeightScheme::uniform));
  const auto loss = LossSpec<double>::zero_one(2);
  double gap_early = 0;
  double gap_late = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const auto mu = run_prediction<double>(truth, PredictorPolicy<double>(truth, loss), 400, seed);
    const auto lx = run_prediction<double>(truth, PredictorPolicy<double>(xi, loss), 400, seed);
    for (std::size_t t = 0; t < 400; ++t) {
      ASSERT_EQ(mu.entries()[t].percept, lx.entries()[t].percept);
    }
    EXPECT_EQ(lx.entries().back().posterior.size(), 9u);
    gap_early += lx.cumulative_at(20) - mu.cumulative_at(20);
    gap_late += (lx.total() - lx.cumulative_at(200)) - (mu.total() - mu.cumulative_at(200));
  }
  EXPECT_GT(gap_early, 0.0);
  EXPECT_LT(gap_late, gap_early);
}

TEST(RunPredictionTest, Preconditions) {
  const auto truth = make_bernoulli(0.7);
  const PredictorPolicy<double> policy(truth, LossSpec<double>::zero_one(2));
  EXPECT_THROW(run_prediction<double>(truth, policy, 0, 1), RangeError);
  EXPECT_THROW(run_prediction<double>(make_bandit<double>({0.2, 0.8}, BanditPercepts::observation_only),
                                      policy, 5, 1),
               NotApplicable);
}

TEST(RunPredictionTest, SeedDeterminesLedger) {
  const auto truth = make_bernoulli(0.4);
  const PredictorPolicy<double> policy(truth, LossSpec<double>::zero_one(2));
  const auto a = run_prediction<double>(truth, policy, 300, 8);
  const auto b = run_prediction<double>(truth, policy, 300, 8);
  for (std::size_t t = 0; t < 300; ++t) ASSERT_EQ(a.entries()[t].percept, b.entries()[t].percept);
  EXPECT_EQ(a.total(), b.total());
}

LossLedger constant_ledger(std::size_t cycles, std::size_t losing) {
  LossLedger l;
  for (std::size_t i = 0; i < cycles; ++i) l.record(Action{0}, obs(0), i < losing ? 1.0 : 0.0);
  return l;
}

TEST(RegretReportTest, Cases) {
  const auto same = regret_report(constant_ledger(10, 4), constant_ledger(10, 4));
  EXPECT_EQ(same.difference, 0.0);
  EXPECT_EQ(same.ratio, 1.0);
  const auto r = regret_report(constant_ledger(1000, 330), constant_ledger(1000, 300));
  EXPECT_EQ(r.difference, 30.0);
  EXPECT_NEAR(*r.ratio, 1.1, 1e-15);
  const auto undefined = regret_report(constant_ledger(10, 2), constant_ledger(10, 0));
  EXPECT_EQ(undefined.difference, 2.0);
  EXPECT_FALSE(undefined.ratio.has_value());
  EXPECT_THROW(regret_report(constant_ledger(3, 0), constant_ledger(4, 0)), ShapeError);
}

}  // namespace
}  // namespace aixi
