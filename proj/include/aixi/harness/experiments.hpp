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
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "aixi/environment.hpp"
#include "aixi/environments.hpp"
#include "aixi/harness/config.hpp"
#include "aixi/harness/report.hpp"
#include "aixi/harness/suites.hpp"
#include "aixi/mixture.hpp"
#include "aixi/planner.hpp"
#include "aixi/predictor.hpp"

namespace aixi::harness {

namespace detail {

inline std::vector<std::size_t> read_checkpoints(const ExperimentConfig& cfg,
                                                 std::vector<std::size_t> fallback) {
  std::vector<std::size_t> cps = cfg.experiment.contains("checkpoints")
                                     ? cfg.experiment.at("checkpoints").get<std::vector<std::size_t>>()
                                     : std::move(fallback);
  std::vector<std::size_t> kept;
  for (std::size_t c : cps) {
    if (c >= 1 && c <= cfg.horizon) kept.push_back(c);
  }
  if (kept.empty()) kept.push_back(cfg.horizon);
  return kept;
}

inline std::string seed_stem(const std::string& prefix, std::uint64_t seed) {
  return prefix + "_seed" + std::to_string(seed);
}

inline void finish(ExperimentReport& report, const ExperimentConfig& cfg,
                   const std::string& provenance) {
  report.files.push_back(write_table(cfg.out_dir, "summary", report.summary, cfg.format,
                                     provenance));
  Table verdicts;
  verdicts.columns = {"verdict", "passed", "detail"};
  for (const auto& v : report.verdicts) {
    verdicts.add({v.name, v.passed ? "1" : "0", v.detail});
  }
  if (report.out_of_assumption) {
    verdicts.add({"out-of-assumption", "1", "truth not in model class; no verdict"});
  }
  report.files.push_back(write_table(cfg.out_dir, "verdicts", verdicts, cfg.format, provenance));
}

inline ExperimentReport start(const ExperimentConfig& cfg) {
  ExperimentReport report;
  report.kind = cfg.kind;
  report.config_hash = cfg.hash();
  return report;
}

}  // namespace detail

// Planner settings for a run: the planner section, with lifetime and window
// taken from the experiment's horizon n and window m unless set explicitly.
template <Scalar P>
PlannerConfig<P> resolve_planner(const ExperimentConfig& cfg, std::optional<LossSpec<P>> loss) {
  PlannerConfig<P> planner = build_planner<P>(cfg.planner, std::move(loss));
  const bool has = cfg.planner.is_object();
  if (!has || !cfg.planner.contains("lifetime")) planner.lifetime = cfg.horizon;
  if (cfg.window && (!has || !cfg.planner.contains("window"))) {
    planner.mode = HorizonMode::receding;
    planner.window = *cfg.window;
  }
  planner.validate();
  return planner;
}

// xi -> mu convergence: per seed, sample the truth, log |xi(x_t|.) - mu(x_t|.)|
// for the realized percept and the posterior weight of the true member.
// For binary percepts the logged error equals |xi(1|.) - mu(1|.)|.
inline ExperimentReport run_convergence(const ExperimentConfig& cfg) {
  auto report = detail::start(cfg);
  const std::string provenance = provenance_line(cfg);
  const auto truth = build_environment<double>(cfg.environment);
  const auto cls = std::make_shared<const ModelClass<double>>(
      build_model_class<double>(cfg.model_class));
  const auto truth_index = cls->find(*truth);
  report.out_of_assumption = !truth_index.has_value();
  const auto checkpoints = detail::read_checkpoints(cfg, {10, 100, 1000});

  struct SeedTrace {
    std::vector<double> abs_error;
    std::vector<double> posterior_truth;
  };
  const auto traces = map_seeds(cfg.seeds, [&](std::uint64_t seed) {
    Rng rng(seed);
    EnvPtr<double> xi = std::make_shared<const MixtureModel<double>>(cls);
    EnvPtr<double> world = truth;
    std::vector<Percept> xs;
    std::vector<Action> ys;
    SeedTrace trace;
    Table table;
    table.columns = {"cycle", "percept", "xi_prob", "mu_prob", "abs_error", "posterior_truth"};
    for (std::size_t t = 1; t <= cfg.horizon; ++t) {
      ys.push_back(Action{0});
      const HistoryView h{xs, ys};
      const auto mu_row = world->conditional_row(h);
      const auto xi_row = xi->conditional_row(h);
      const std::size_t xi_index = sample_index<double>(mu_row, rng);
      const Percept x = world->percept_space().percept(xi_index);
      const double err = std::abs(xi_row[xi_index] - mu_row[xi_index]);
      xi = xi->conditioned(h, x);
      if (world->stateful()) world = world->conditioned(h, x);
      xs.push_back(x);
      const auto& mixture = static_cast<const MixtureModel<double>&>(*xi);
      const double post = truth_index ? mixture.posterior()[*truth_index] : std::nan("");
      trace.abs_error.push_back(err);
      trace.posterior_truth.push_back(post);
      table.add({fmt(t), std::to_string(x.observation), fmt(xi_row[xi_index]),
                 fmt(mu_row[xi_index]), fmt(err), fmt(post)});
    }
    write_table(cfg.out_dir, detail::seed_stem("convergence", seed), table, cfg.format,
                provenance);
    return trace;
  });
  for (auto seed : cfg.seeds) {
    report.files.push_back(table_path(cfg.out_dir, detail::seed_stem("convergence", seed), cfg.format));
  }

  report.summary.columns = {"n", "median_abs_error", "mean_abs_error", "median_posterior_truth"};
  std::vector<double> med_err;
  std::vector<double> med_post;
  for (std::size_t n : checkpoints) {
    std::vector<double> errs;
    std::vector<double> posts;
    for (const auto& tr : traces) {
      errs.push_back(tr.abs_error[n - 1]);
      posts.push_back(tr.posterior_truth[n - 1]);
    }
    med_err.push_back(median(errs));
    med_post.push_back(truth_index ? median(posts) : std::nan(""));
    report.summary.add({fmt(n), fmt(med_err.back()), fmt(mean(errs)), fmt(med_post.back())});
  }
  if (!report.out_of_assumption && checkpoints.size() >= 2) {
    const double first = med_err.front();
    const double last = med_err.back();
    report.verdicts.push_back(
        {"error_shrinks", last < first || (first == 0 && last == 0),
         "median |xi-mu| " + fmt(first) + " at n=" + fmt(checkpoints.front()) + " -> " +
             fmt(last) + " at n=" + fmt(checkpoints.back())});
    const double min_post = cfg.experiment.value("min_final_posterior", 0.5);
    report.verdicts.push_back({"truth_dominates", med_post.back() > min_post,
                               "median posterior of truth " + fmt(med_post.back()) +
                                   " vs threshold " + fmt(min_post)});
  }
  detail::finish(report, cfg, provenance);
  return report;
}

// Ledger table with the documented columns; one posterior column per member
// when the predictor is a mixture.
inline Table ledger_table(const LossLedger& ledger) {
  Table table;
  table.columns = {"cycle", "action", "percept", "incurred_loss", "cumulative_loss"};
  const std::size_t members =
      ledger.entries().empty() ? 0 : ledger.entries().front().posterior.size();
  for (std::size_t i = 0; i < members; ++i) table.columns.push_back("w" + std::to_string(i));
  for (std::size_t t = 0; t < ledger.cycles(); ++t) {
    const auto& e = ledger.entries()[t];
    std::vector<std::string> row = {fmt(t + 1), std::to_string(e.action.index),
                                    std::to_string(e.percept.observation), fmt(e.loss),
                                    fmt(e.cumulative)};
    for (double w : e.posterior) row.push_back(fmt(w));
    table.add(std::move(row));
  }
  return table;
}

// Lambda_mu vs Lambda_xi on paired seeds (identical percept streams).
inline ExperimentReport run_regret(const ExperimentConfig& cfg) {
  auto report = detail::start(cfg);
  const std::string provenance = provenance_line(cfg);
  const auto truth = build_environment<double>(cfg.environment);
  const auto cls = std::make_shared<const ModelClass<double>>(
      build_model_class<double>(cfg.model_class));
  const auto loss = build_loss<double>(cfg.loss, truth->percept_space().observations().size());
  if (!loss) throw ConfigError("regret experiment needs a matrix loss");
  report.out_of_assumption = !cls->find(*truth).has_value();
  const auto checkpoints = detail::read_checkpoints(cfg, {10, 100, 1000});

  struct Pair {
    LossLedger mu;
    LossLedger xi;
  };
  const auto pairs = map_seeds(cfg.seeds, [&](std::uint64_t seed) {
    Pair p;
    p.mu = run_prediction<double>(truth, PredictorPolicy<double>(truth, *loss), cfg.horizon, seed);
    p.xi = run_prediction<double>(
        truth,
        PredictorPolicy<double>(std::make_shared<const MixtureModel<double>>(cls), *loss),
        cfg.horizon, seed);
    for (std::size_t t = 0; t < cfg.horizon; ++t) {
      if (!(p.mu.entries()[t].percept == p.xi.entries()[t].percept)) {
        throw Error("paired runs diverged in their percept streams");
      }
    }
    write_table(cfg.out_dir, detail::seed_stem("ledger_mu", seed), ledger_table(p.mu),
                cfg.format, provenance);
    write_table(cfg.out_dir, detail::seed_stem("ledger_xi", seed), ledger_table(p.xi),
                cfg.format, provenance);
    return p;
  });
  for (auto seed : cfg.seeds) {
    report.files.push_back(table_path(cfg.out_dir, detail::seed_stem("ledger_mu", seed), cfg.format));
    report.files.push_back(table_path(cfg.out_dir, detail::seed_stem("ledger_xi", seed), cfg.format));
  }

  report.summary.columns = {"n", "mean_loss_mu", "mean_loss_xi", "mean_difference",
                            "mean_ratio", "ratio_seeds"};
  std::vector<double> ratios;
  for (std::size_t n : checkpoints) {
    std::vector<double> lmu, lxi, diff, ratio_n;
    for (const auto& p : pairs) {
      const double a = p.mu.cumulative_at(n);
      const double b = p.xi.cumulative_at(n);
      lmu.push_back(a);
      lxi.push_back(b);
      diff.push_back(b - a);
      if (a > 0) ratio_n.push_back(b / a);
    }
    ratios.push_back(mean(ratio_n));
    report.summary.add({fmt(n), fmt(mean(lmu)), fmt(mean(lxi)), fmt(mean(diff)),
                        fmt(ratios.back()), fmt(ratio_n.size())});
  }
  if (!report.out_of_assumption && checkpoints.size() >= 2) {
    bool decreasing = true;
    bool all_one = true;
    std::string trail;
    for (std::size_t i = 0; i < ratios.size(); ++i) {
      if (i && !(ratios[i] < ratios[i - 1])) decreasing = false;
      if (ratios[i] != 1.0) all_one = false;
      trail += (i ? " -> " : "") + fmt(ratios[i]);
    }
    report.verdicts.push_back({"ratio_decreasing", decreasing || all_one, "mean ratio " + trail});
    const double ceiling = cfg.experiment.value("max_final_ratio", 1.1);
    report.verdicts.push_back({"final_ratio_ceiling", ratios.back() <= ceiling,
                               "mean ratio " + fmt(ratios.back()) + " vs ceiling " + fmt(ceiling)});
  }
  detail::finish(report, cfg, provenance);
  return report;
}

// AIxi on a bandit with a receding horizon; reports how often it pulls the
// arm with the lowest loss probability.
inline ExperimentReport run_bandit_aixi(const ExperimentConfig& cfg) {
  auto report = detail::start(cfg);
  const std::string provenance = provenance_line(cfg);
  const auto truth = build_environment<double>(cfg.environment);
  const auto* bandit = dynamic_cast<const BernoulliBandit<double>*>(truth.get());
  if (!bandit) throw ConfigError("bandit-aixi needs a bandit environment");
  const auto cls = std::make_shared<const ModelClass<double>>(
      build_model_class<double>(cfg.model_class));
  report.out_of_assumption = !cls->find(*truth).has_value();
  const auto loss = build_loss<double>(cfg.loss, truth->percept_space().observations().size());
  const PlannerConfig<double> planner = resolve_planner<double>(cfg, loss);
  const std::size_t best_arm = argmin_first<double>(bandit->loss_probs());
  const auto checkpoints = detail::read_checkpoints(cfg, {10, 50, 100});

  const auto runs = map_seeds(cfg.seeds, [&](std::uint64_t seed) {
    Rng rng(seed);
    EnvPtr<double> model = std::make_shared<const MixtureModel<double>>(cls);
    HistoryTape h(truth->action_alphabet(), truth->percept_space());
    std::vector<int> optimal;
    Accumulator<double> cumulative;
    Table table;
    table.columns = {"cycle", "action", "percept", "loss", "cumulative_loss", "optimal"};
    for (std::size_t i = 0; i < cls->size(); ++i) table.columns.push_back("w" + std::to_string(i));
    for (std::size_t t = 1; t <= cfg.horizon; ++t) {
      const auto plan = select_action(*model, h, planner, t);
      const HistoryTape with_action = h.append_action(plan.action);
      const Percept x = sample_percept(*truth, with_action, rng);
      const HistoryView complete{with_action.append_percept(x).percepts(), with_action.actions()};
      const double l = planner.loss ? (*planner.loss)(complete)
                                    : to_double(truth->percept_space().loss_grid()->value<double>(
                                          *x.loss_level));
      cumulative.add(l);
      model = model->conditioned(with_action.view(), x);
      h = with_action.append_percept(x);
      optimal.push_back(plan.action.index == best_arm ? 1 : 0);
      std::vector<std::string> row = {fmt(t), std::to_string(plan.action.index),
                                      std::to_string(x.observation), fmt(l),
                                      fmt(cumulative.value()), std::to_string(optimal.back())};
      for (double w : static_cast<const MixtureModel<double>&>(*model).posterior()) {
        row.push_back(fmt(w));
      }
      table.add(std::move(row));
    }
    write_table(cfg.out_dir, detail::seed_stem("bandit", seed), table, cfg.format, provenance);
    return optimal;
  });
  for (auto seed : cfg.seeds) {
    report.files.push_back(table_path(cfg.out_dir, detail::seed_stem("bandit", seed), cfg.format));
  }

  auto fraction = [&](std::size_t from, std::size_t to) {  // cycles [from, to], 1-based
    std::vector<double> per_seed;
    for (const auto& run : runs) {
      double hits = 0;
      for (std::size_t t = from; t <= to; ++t) hits += run[t - 1];
      per_seed.push_back(hits / static_cast<double>(to - from + 1));
    }
    return mean(per_seed);
  };
  report.summary.columns = {"window", "from_cycle", "to_cycle", "mean_optimal_fraction"};
  for (std::size_t n : checkpoints) {
    report.summary.add({"cumulative", fmt(std::size_t{1}), fmt(n), fmt(fraction(1, n))});
  }
  const std::size_t half = cfg.horizon / 2;
  if (half >= 1) {
    const double early = fraction(1, half);
    const double late = fraction(half + 1, cfg.horizon);
    report.summary.add({"first-half", fmt(std::size_t{1}), fmt(half), fmt(early)});
    report.summary.add({"second-half", fmt(half + 1), fmt(cfg.horizon), fmt(late)});
    if (!report.out_of_assumption) {
      report.verdicts.push_back({"exploitation_improves", late > early,
                                 "optimal-arm fraction " + fmt(early) + " -> " + fmt(late)});
    }
  }
  detail::finish(report, cfg, provenance);
  return report;
}

// Planner verification suites. planner-suites runs all four; the single-suite
// kinds run one.
inline ExperimentReport run_planner_suites(const ExperimentConfig& cfg) {
  auto report = detail::start(cfg);
  const std::string provenance = provenance_line(cfg);
  const Json& e = cfg.experiment;
  const bool all = cfg.kind == ExperimentKind::planner_suites;
  std::vector<SuiteResult> results;
  try {
    if (all || cfg.kind == ExperimentKind::planner_oracle) {
      results.push_back(planner_oracle_suite(e.value("oracle_max_n", std::size_t{3}),
                                             e.value("random_instances", std::size_t{200}),
                                             cfg.seeds.front()));
    }
    if (all || cfg.kind == ExperimentKind::mdp_crosscheck) {
      results.push_back(mdp_crosscheck_suite(e.value("mdp_instances", std::size_t{100}),
                                             e.value("mdp_max_states", std::size_t{3}),
                                             e.value("mdp_max_n", std::size_t{5}),
                                             cfg.seeds.front()));
    }
    if (all || cfg.kind == ExperimentKind::greedy_check) {
      results.push_back(greedy_check_suite(e.value("greedy_n", std::size_t{3})));
    }
    if (all || cfg.kind == ExperimentKind::loss_absorption) {
      std::vector<double> arms = {0.2, 0.8};
      if (!cfg.environment.is_null()) arms = read_vector<double>(require(cfg.environment, "loss_probs"));
      std::vector<std::vector<double>> members = {arms, {arms.rbegin(), arms.rend()}};
      if (!cfg.model_class.is_null() && cfg.model_class.contains("grid")) {
        members.clear();
        for (const auto& v : cfg.model_class.at("grid").at("values")) {
          members.push_back(read_vector<double>(v));
        }
      }
      results.push_back(loss_absorption_suite(cfg.seeds, arms, members, cfg.horizon,
                                              cfg.window.value_or(2)));
    }
  } catch (const InstanceTooLarge& err) {
    throw ConfigError(err.what());
  }
  report.summary.columns = {"suite", "cases", "failures", "not_applicable"};
  for (const auto& r : results) {
    report.files.push_back(write_table(cfg.out_dir, r.name, r.table, cfg.format, provenance));
    report.summary.add({r.name, fmt(r.cases), fmt(r.failures), fmt(r.not_applicable)});
    report.verdicts.push_back({r.name, r.passed(),
                               fmt(r.cases - r.failures) + "/" + fmt(r.cases) + " cases agree"});
  }
  detail::finish(report, cfg, provenance);
  return report;
}

inline ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.kind) {
    case ExperimentKind::convergence: return run_convergence(cfg);
    case ExperimentKind::regret: return run_regret(cfg);
    case ExperimentKind::bandit_aixi: return run_bandit_aixi(cfg);
    case ExperimentKind::planner_oracle:
    case ExperimentKind::mdp_crosscheck:
    case ExperimentKind::greedy_check:
    case ExperimentKind::loss_absorption:
    case ExperimentKind::planner_suites: return run_planner_suites(cfg);
  }
  throw ConfigError("unhandled experiment kind");
}

// Plan audit record: one row per root action plus the decision.
template <Scalar P>
Table plan_audit(const PlanResult<P>& plan) {
  Table table;
  table.columns = {"root_action", "value", "chosen", "nodes", "wall_ms"};
  for (std::size_t y = 0; y < plan.root_values.size(); ++y) {
    table.add({std::to_string(y), format_scalar(plan.root_values[y]),
               y == plan.action.index ? "1" : "0", std::to_string(plan.nodes),
               fmt(plan.wall_ms)});
  }
  return table;
}

}  // namespace aixi::harness
