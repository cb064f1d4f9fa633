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

// Experiment configuration files. Grammar: docs/config.md.

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "aixi/environment.hpp"
#include "aixi/environments.hpp"
#include "aixi/errors.hpp"
#include "aixi/mixture.hpp"
#include "aixi/planner.hpp"

namespace aixi::harness {

using Json = nlohmann::json;

inline constexpr int kConfigFormatVersion = 1;

enum class ExperimentKind {
  convergence,
  regret,
  planner_oracle,
  mdp_crosscheck,
  greedy_check,
  bandit_aixi,
  loss_absorption,
  planner_suites,
};

inline ExperimentKind parse_kind(const std::string& s) {
  if (s == "convergence") return ExperimentKind::convergence;
  if (s == "regret") return ExperimentKind::regret;
  if (s == "planner-oracle") return ExperimentKind::planner_oracle;
  if (s == "mdp-crosscheck") return ExperimentKind::mdp_crosscheck;
  if (s == "greedy-check") return ExperimentKind::greedy_check;
  if (s == "bandit-aixi") return ExperimentKind::bandit_aixi;
  if (s == "loss-absorption") return ExperimentKind::loss_absorption;
  if (s == "planner-suites") return ExperimentKind::planner_suites;
  throw ConfigError("unknown experiment kind '" + s + "'");
}

inline std::string kind_name(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::convergence: return "convergence";
    case ExperimentKind::regret: return "regret";
    case ExperimentKind::planner_oracle: return "planner-oracle";
    case ExperimentKind::mdp_crosscheck: return "mdp-crosscheck";
    case ExperimentKind::greedy_check: return "greedy-check";
    case ExperimentKind::bandit_aixi: return "bandit-aixi";
    case ExperimentKind::loss_absorption: return "loss-absorption";
    case ExperimentKind::planner_suites: return "planner-suites";
  }
  return "unknown";
}

enum class OutputFormat { csv, gnuplot };

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::convergence;
  Json environment;
  Json model_class;
  Json loss;
  Json planner;
  Json experiment;
  std::size_t horizon = 1;
  std::optional<std::size_t> window;
  std::vector<std::uint64_t> seeds;
  std::filesystem::path out_dir = "out";
  OutputFormat format = OutputFormat::csv;

  // 64-bit FNV-1a over the canonical JSON of the resolved configuration.
  std::string hash() const {
    Json canon = {{"kind", kind_name(kind)}, {"environment", environment},
                  {"model_class", model_class}, {"loss", loss},
                  {"planner", planner}, {"experiment", experiment},
                  {"horizon", horizon}, {"seeds", seeds}};
    if (window) canon["window"] = *window;
    const std::string text = canon.dump();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    std::ostringstream out;
    out << std::hex << h;
    return out.str();
  }
};

// Probabilities may be written as JSON numbers or as strings ("7/10", "0.7").
template <Scalar P>
P read_scalar(const Json& v) {
  if (v.is_string()) return parse_scalar<P>(v.get<std::string>());
  if (v.is_number()) {
    if constexpr (ScalarTraits<P>::is_exact) {
      // Re-read the literal so 0.7 becomes 7/10 rather than a binary fraction.
      return parse_scalar<P>(v.dump());
    } else {
      return v.get<double>();
    }
  }
  throw ConfigError("expected a probability, got " + v.dump());
}

template <Scalar P>
std::vector<P> read_vector(const Json& v) {
  if (!v.is_array()) throw ConfigError("expected an array, got " + v.dump());
  std::vector<P> out;
  for (const auto& e : v) out.push_back(read_scalar<P>(e));
  return out;
}

inline const Json& require(const Json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw ConfigError(std::string("missing field '") + key + "'");
  }
  return obj.at(key);
}

inline std::size_t read_count(const Json& obj, const char* key) {
  const Json& v = require(obj, key);
  if (!v.is_number_unsigned()) {
    throw ConfigError(std::string("field '") + key + "' must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

// Environment definition entry: kind bernoulli | bandit | mdp | custom-table.
template <Scalar P>
EnvPtr<P> build_environment(const Json& def) {
  const std::string kind = require(def, "kind").get<std::string>();
  if (kind == "bernoulli") {
    const std::size_t actions = def.contains("actions") ? read_count(def, "actions") : 2;
    return make_bernoulli<P>(read_scalar<P>(require(def, "p")), actions);
  }
  if (kind == "bandit") {
    const std::string layout = def.value("percepts", std::string("embedded-loss"));
    if (layout != "embedded-loss" && layout != "observation-only") {
      throw ConfigError("bandit percepts must be embedded-loss or observation-only");
    }
    return make_bandit<P>(read_vector<P>(require(def, "loss_probs")),
                          layout == "embedded-loss" ? BanditPercepts::embedded_loss
                                                    : BanditPercepts::observation_only);
  }
  if (kind == "mdp") {
    const std::size_t states = read_count(def, "states");
    const std::size_t actions = read_count(def, "actions");
    const auto flat = read_vector<P>(require(def, "transitions"));
    if (flat.size() != states * actions * states) {
      throw ShapeError("mdp transitions need states*actions*states entries");
    }
    std::vector<std::vector<std::vector<P>>> t(
        states, std::vector<std::vector<P>>(actions, std::vector<P>(states)));
    std::size_t k = 0;
    for (auto& by_action : t) {
      for (auto& row : by_action) {
        for (auto& v : row) v = flat[k++];
      }
    }
    return make_mdp<P>(std::move(t), read_vector<P>(require(def, "initial")));
  }
  if (kind == "custom-table") {
    return std::make_shared<ChronologicalTable<P>>(
        read_count(def, "observations"), read_count(def, "actions"),
        read_count(def, "depth"), read_vector<P>(require(def, "rows")));
  }
  throw ConfigError("unknown environment kind '" + kind + "'");
}

inline WeightScheme read_scheme(const Json& def) {
  const std::string scheme = def.value("weights", std::string("uniform"));
  if (scheme == "uniform") return WeightScheme::uniform;
  if (scheme == "prefix-code") return WeightScheme::prefix_code;
  if (scheme == "explicit") return WeightScheme::uniform;  // replaced below
  throw ConfigError("unknown weight scheme '" + scheme + "'");
}

// Model-class definition: either "members" (environment entries) or "grid"
// ({"kind": "bernoulli"|"bandit", "values": [...]}), plus a weight scheme.
template <Scalar P>
ModelClass<P> build_model_class(const Json& def) {
  std::vector<EnvPtr<P>> members;
  if (def.contains("members")) {
    for (const auto& m : def.at("members")) members.push_back(build_environment<P>(m));
  } else if (def.contains("grid")) {
    const Json& grid = def.at("grid");
    const std::string kind = require(grid, "kind").get<std::string>();
    std::vector<std::vector<P>> points;
    for (const auto& v : require(grid, "values")) {
      points.push_back(v.is_array() ? read_vector<P>(v) : std::vector<P>{read_scalar<P>(v)});
    }
    if (kind == "bernoulli") {
      const std::size_t actions = grid.contains("actions") ? read_count(grid, "actions") : 2;
      return make_grid_class<P>(GridKind::bernoulli, points, read_scheme(def), actions);
    }
    if (kind == "bandit") {
      const std::string layout = grid.value("percepts", std::string("embedded-loss"));
      return make_grid_class<P>(GridKind::bandit, points, read_scheme(def), 2,
                                layout == "observation-only"
                                    ? BanditPercepts::observation_only
                                    : BanditPercepts::embedded_loss);
    }
    throw ConfigError("unknown grid kind '" + kind + "'");
  } else {
    throw ConfigError("model_class needs 'members' or 'grid'");
  }
  if (def.value("weights", std::string("uniform")) == "explicit") {
    return ModelClass<P>(std::move(members),
                         read_vector<P>(require(def, "explicit_weights")));
  }
  return ModelClass<P>::with_scheme(std::move(members), read_scheme(def));
}

// Loss section: {"kind": "zero-one"} | {"kind": "matrix", "values": [[l[x][y]]]}
// | {"kind": "embedded"}. Returns nullopt for embedded losses.
template <Scalar P>
std::optional<LossSpec<P>> build_loss(const Json& def, std::size_t observations) {
  if (def.is_null()) return std::nullopt;
  const std::string kind = require(def, "kind").get<std::string>();
  if (kind == "embedded") return std::nullopt;
  if (kind == "zero-one") return LossSpec<P>::zero_one(observations);
  if (kind == "matrix") {
    typename LossSpec<P>::Matrix m;
    for (const auto& row : require(def, "values")) m.push_back(read_vector<P>(row));
    return LossSpec<P>::matrix(std::move(m));
  }
  throw ConfigError("unknown loss kind '" + kind + "'");
}

// Planner section: {"mode": "fixed"|"receding", "lifetime": n, "window": m}.
template <Scalar P>
PlannerConfig<P> build_planner(const Json& def, std::optional<LossSpec<P>> loss) {
  PlannerConfig<P> cfg;
  cfg.loss = std::move(loss);
  if (def.is_null()) return cfg;
  const std::string mode = def.value("mode", std::string("fixed"));
  if (mode == "fixed") {
    cfg.mode = HorizonMode::fixed_lifetime;
  } else if (mode == "receding") {
    cfg.mode = HorizonMode::receding;
  } else {
    throw ConfigError("planner mode must be fixed or receding");
  }
  if (def.contains("lifetime")) cfg.lifetime = read_count(def, "lifetime");
  if (def.contains("window")) cfg.window = read_count(def, "window");
  cfg.parallel_root = def.value("parallel_root", false);
  cfg.memoize = def.value("memoize", false);
  cfg.validate();
  return cfg;
}

inline std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) throw ConfigError("empty item in seed list '" + text + "'");
    try {
      std::size_t used = 0;
      seeds.push_back(std::stoull(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw ConfigError("bad seed '" + item + "'");
    }
  }
  return seeds;
}

inline std::vector<std::uint64_t> read_seeds(const Json& v) {
  std::vector<std::uint64_t> seeds;
  if (v.is_array()) {
    for (const auto& s : v) seeds.push_back(s.get<std::uint64_t>());
  } else if (v.is_object()) {
    const std::uint64_t first = v.value("first", std::uint64_t{1});
    const std::size_t count = read_count(v, "count");
    for (std::size_t i = 0; i < count; ++i) seeds.push_back(first + i);
  } else if (v.is_string()) {
    seeds = parse_seed_list(v.get<std::string>());
  } else {
    throw ConfigError("seeds must be a list, a {first,count} range or a string");
  }
  return seeds;
}

// Resolves a parsed document into an ExperimentConfig and checks that every
// referenced section is present and well-formed.
inline ExperimentConfig resolve_config(const Json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  if (doc.value("format_version", kConfigFormatVersion) != kConfigFormatVersion) {
    throw ConfigError("unsupported config format_version");
  }
  ExperimentConfig cfg;
  cfg.environment = doc.value("environment", Json());
  cfg.model_class = doc.value("model_class", Json());
  cfg.loss = doc.value("loss", Json());
  cfg.planner = doc.value("planner", Json());
  cfg.experiment = doc.value("experiment", Json::object());
  cfg.kind = parse_kind(cfg.experiment.value("kind", std::string("convergence")));
  cfg.horizon = cfg.experiment.contains("horizon") ? read_count(cfg.experiment, "horizon") : 1;
  if (cfg.horizon == 0) throw ConfigError("horizon n must be at least 1");
  if (cfg.experiment.contains("window")) cfg.window = read_count(cfg.experiment, "window");
  if (cfg.window && *cfg.window == 0) throw ConfigError("window m must be at least 1");
  cfg.seeds = cfg.experiment.contains("seeds") ? read_seeds(cfg.experiment.at("seeds"))
                                               : std::vector<std::uint64_t>{1};
  if (cfg.seeds.empty()) throw ConfigError("at least one seed required");
  cfg.out_dir = cfg.experiment.value("out", std::string("out"));
  const std::string format = cfg.experiment.value("format", std::string("csv"));
  if (format == "csv") {
    cfg.format = OutputFormat::csv;
  } else if (format == "gnuplot") {
    cfg.format = OutputFormat::gnuplot;
  } else {
    throw ConfigError("format must be csv or gnuplot");
  }
  // Trial build of every section.
  if (!cfg.environment.is_null()) {
    auto env = build_environment<double>(cfg.environment);
    build_loss<double>(cfg.loss, env->percept_space().observations().size());
  }
  if (!cfg.model_class.is_null()) build_model_class<double>(cfg.model_class);
  if (!cfg.planner.is_null()) build_planner<double>(cfg.planner, std::nullopt);
  return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  Json doc;
  try {
    doc = Json::parse(in, nullptr, true, true);
  } catch (const Json::exception& e) {
    throw ConfigError("config '" + path.string() + "': " + e.what());
  }
  return resolve_config(doc);
}

}  // namespace aixi::harness
