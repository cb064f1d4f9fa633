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

// aixi-lab: batch front end for the experiment harness.

#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "aixi/harness/experiments.hpp"

namespace {

using namespace aixi;
using namespace aixi::harness;

struct Common {
  std::string config;
  std::string seeds;
  std::string out;
  std::string format;
};

void add_common(CLI::App* cmd, Common& c, bool with_outputs) {
  cmd->add_option("--config", c.config, "configuration file")->required()->check(CLI::ExistingFile);
  if (!with_outputs) return;
  cmd->add_option("--seed", c.seeds, "comma-separated seed list, overrides the config");
  cmd->add_option("--out", c.out, "output directory, overrides the config");
  cmd->add_option("--format", c.format, "csv or gnuplot")
      ->check(CLI::IsMember({"csv", "gnuplot"}));
}

ExperimentConfig load(const Common& c) {
  ExperimentConfig cfg = load_config(c.config);
  if (!c.seeds.empty()) cfg.seeds = parse_seed_list(c.seeds);
  if (!c.out.empty()) cfg.out_dir = c.out;
  if (!c.format.empty()) cfg.format = c.format == "csv" ? OutputFormat::csv : OutputFormat::gnuplot;
  return cfg;
}

void print_table(const Table& t) {
  for (std::size_t i = 0; i < t.columns.size(); ++i) std::cout << (i ? "," : "") << t.columns[i];
  std::cout << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) std::cout << (i ? "," : "") << row[i];
    std::cout << '\n';
  }
}

int print_report(const ExperimentReport& report) {
  std::cout << "kind " << kind_name(report.kind) << " config_hash " << report.config_hash
            << " version " << AIXI_LAB_VERSION << '\n';
  print_table(report.summary);
  if (report.out_of_assumption) {
    std::cout << "OUT-OF-ASSUMPTION truth is not a member of the model class; no verdicts\n";
  }
  for (const auto& v : report.verdicts) {
    std::cout << (v.passed ? "PASS " : "FAIL ") << v.name << ": " << v.detail << '\n';
  }
  for (const auto& f : report.files) std::cout << "wrote " << f.string() << '\n';
  return report.passed() ? 0 : 1;
}

template <Scalar P>
void validate_sections(const ExperimentConfig& cfg, std::size_t depth) {
  if (!cfg.environment.is_null()) {
    const auto env = build_environment<P>(cfg.environment);
    validate_environment(*env, depth);
    std::cout << "environment ok: " << env->describe() << '\n';
  }
  if (!cfg.model_class.is_null()) {
    const auto cls = build_model_class<P>(cfg.model_class);
    for (std::size_t i = 0; i < cls.size(); ++i) validate_environment(*cls.member(i), depth);
    std::cout << "model class ok: " << cls.size() << " members\n";
  }
}

int cmd_validate(const Common& c, std::size_t depth) {
  const ExperimentConfig cfg = load(c);
  validate_sections<double>(cfg, depth);
  validate_sections<Rational>(cfg, depth);
  std::cout << "config ok: kind " << kind_name(cfg.kind) << " config_hash " << cfg.hash()
            << " version " << AIXI_LAB_VERSION << '\n';
  return 0;
}

template <Scalar P>
int plan_with(const ExperimentConfig& cfg, const std::string& history, bool use_mu,
              bool write) {
  const auto truth = build_environment<P>(cfg.environment);
  EnvPtr<P> model = truth;
  if (!use_mu && !cfg.model_class.is_null()) {
    model = MixtureModel<P>::make(build_model_class<P>(cfg.model_class));
  }
  const auto loss = build_loss<P>(cfg.loss, model->percept_space().observations().size());
  const PlannerConfig<P> planner = resolve_planner<P>(cfg, loss);
  HistoryTape tape = parse_history(history, model->action_alphabet(), model->percept_space());
  const std::size_t t = tape.cycles().size() + 1;
  const PlanResult<P> plan = select_action(*model, tape, planner, t);
  const Table audit = plan_audit(plan);
  std::cout << "config_hash " << cfg.hash() << " version " << AIXI_LAB_VERSION << '\n';
  std::cout << "model " << model->describe() << "\nhistory \"" << format_history(tape)
            << "\" cycle " << t << " depth " << planner.depth_at(t) << '\n';
  print_table(audit);
  std::cout << "action " << plan.action.index << " value " << format_scalar(plan.value) << '\n';
  if (write) {
    std::cout << "wrote "
              << write_table(cfg.out_dir, "plan", audit, cfg.format, provenance_line(cfg)).string()
              << '\n';
  }
  return 0;
}

int cmd_plan(const Common& c, const std::string& history, bool exact, bool use_mu) {
  const ExperimentConfig cfg = load(c);
  if (cfg.environment.is_null()) throw ConfigError("plan needs an environment section");
  return exact ? plan_with<Rational>(cfg, history, use_mu, !c.out.empty())
               : plan_with<double>(cfg, history, use_mu, !c.out.empty());
}

// Lambda_mu, and Lambda_xi when a model class is configured, on the same
// seeded percept stream. Writes ledgers; there are no verdicts to fail.
int cmd_predict(const Common& c) {
  const ExperimentConfig cfg = load(c);
  const auto truth = build_environment<double>(cfg.environment);
  const auto loss = build_loss<double>(cfg.loss, truth->percept_space().observations().size());
  if (!loss) throw ConfigError("predict needs a matrix loss");
  const bool with_xi = !cfg.model_class.is_null();
  const auto cls = with_xi ? std::make_shared<const ModelClass<double>>(
                                 build_model_class<double>(cfg.model_class))
                           : nullptr;
  const std::string provenance = provenance_line(cfg);
  std::cout << "config_hash " << cfg.hash() << " version " << AIXI_LAB_VERSION << '\n';
  std::cout << "seed,loss_mu" << (with_xi ? ",loss_xi,difference,ratio" : "") << '\n';
  for (auto seed : cfg.seeds) {
    const auto mu =
        run_prediction<double>(truth, PredictorPolicy<double>(truth, *loss), cfg.horizon, seed);
    write_table(cfg.out_dir, "ledger_mu_seed" + std::to_string(seed), ledger_table(mu),
                cfg.format, provenance);
    std::cout << seed << ',' << fmt(mu.total());
    if (with_xi) {
      const auto xi = run_prediction<double>(
          truth, PredictorPolicy<double>(std::make_shared<const MixtureModel<double>>(cls), *loss),
          cfg.horizon, seed);
      write_table(cfg.out_dir, "ledger_xi_seed" + std::to_string(seed), ledger_table(xi),
                  cfg.format, provenance);
      const RegretReport r = regret_report(xi, mu);
      std::cout << ',' << fmt(xi.total()) << ',' << fmt(r.difference) << ','
                << (r.ratio ? fmt(*r.ratio) : std::string("nan"));
    }
    std::cout << '\n';
  }
  std::cout << "wrote ledgers to " << cfg.out_dir.string() << '\n';
  return 0;
}

int cmd_experiment(const Common& c) { return print_report(run_experiment(load(c))); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"aixi-lab: Bayesian mixture prediction and expectimax planning experiments"};
  app.set_version_flag("--version", std::string(AIXI_LAB_VERSION));
  app.require_subcommand(1);

  Common validate_opts, plan_opts, predict_opts, experiment_opts;
  std::size_t validate_depth = 3;
  auto* validate = app.add_subcommand("validate", "check environment and model-class definitions");
  add_common(validate, validate_opts, false);
  validate->add_option("--depth", validate_depth, "history depth for the normalization sweep");

  std::string history;
  bool exact = false;
  bool use_mu = false;
  auto* plan = app.add_subcommand("plan", "one-shot action selection with an audit table");
  add_common(plan, plan_opts, true);
  plan->add_option("--history", history, "completed cycles as space-separated y:x pairs");
  plan->add_flag("--exact", exact, "plan in exact rational arithmetic");
  plan->add_flag("--mu", use_mu, "plan against the environment even if a model class is given");

  auto* predict = app.add_subcommand("predict", "run Bayes predictors and write loss ledgers");
  add_common(predict, predict_opts, true);

  auto* experiment = app.add_subcommand("experiment", "run a configured experiment");
  add_common(experiment, experiment_opts, true);

  CLI11_PARSE(app, argc, argv);
  try {
    if (validate->parsed()) return cmd_validate(validate_opts, validate_depth);
    if (plan->parsed()) return cmd_plan(plan_opts, history, exact, use_mu);
    if (predict->parsed()) return cmd_predict(predict_opts);
    if (experiment->parsed()) return cmd_experiment(experiment_opts);
  } catch (const aixi::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
