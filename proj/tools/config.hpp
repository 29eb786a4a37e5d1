#ifndef RGT_TOOLS_CONFIG_HPP
#define RGT_TOOLS_CONFIG_HPP

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rgt/rgt.hpp"

namespace rgt::cli {

using nlohmann::json;

/// Default experiment configuration; files and flags are merged over it.
inline json default_config() {
  return json::parse(R"({
    "solver": {
      "mode": "continuous", "dt": 0.1, "tau": 0.1, "omega": 0.3141592653589793,
      "lambda_margin": 1.0, "phase_gain": 4.0, "max_steps": 200000,
      "tol_cost": 1e-10, "quiet_steps": 10, "dissipation_tol": 1e-3
    },
    "schedule": {
      "kind": "constant", "beta": 1.0, "beta_min": 0.0, "beta_max": 1.0,
      "k": 20.0, "t0": -0.5, "t_switch": 0.3, "start_time": 0.1
    },
    "objective": { "nodes": 5 },
    "dataset": {
      "kind": "disc", "n": 300, "radius": 1.0, "spread": 2.0, "var": 0.5, "seed": 1,
      "path": "", "has_header": false, "label_column": -1, "majority_label": null,
      "standardize": false
    },
    "svm": { "nu": 0.1, "sigma": 1.0, "h": null, "h_start": null, "grid": 0, "grid_margin": 0.5 },
    "run": { "seed": 1, "trials": 10 },
    "output": { "dir": "out", "full_trace": false }
  })");
}

/// Recursively overlays `patch` on `base`, rejecting keys the base does not know.
inline void merge(json& base, const json& patch, const std::string& path = "") {
  if (!patch.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    const std::string p = path.empty() ? it.key() : path + "." + it.key();
    if (!base.contains(it.key())) throw ConfigError(p, "unknown key");
    if (base[it.key()].is_object())
      merge(base[it.key()], it.value(), p);
    else
      base[it.key()] = it.value();
  }
}

inline json load_config(const std::string& path) {
  json cfg = default_config();
  if (path.empty()) return cfg;
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open " + path);
  json file;
  try {
    file = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("--config", e.what());
  }
  merge(cfg, file);
  return cfg;
}

/// Typed lookup of a dotted path, reporting the path on type errors.
template <class T>
T get(const json& cfg, const std::string& path) {
  const json* node = &cfg;
  std::size_t start = 0;
  while (start <= path.size()) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot - start);
    if (!node->is_object() || !node->contains(key)) throw ConfigError(path, "missing");
    node = &(*node)[key];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  try {
    return node->get<T>();
  } catch (const json::exception&) {
    throw ConfigError(path, "wrong type: " + node->dump());
  }
}

inline std::vector<double> get_list(const json& cfg, const std::string& path) {
  const json v = get<json>(cfg, path);
  if (v.is_number()) return {v.get<double>()};
  try {
    return v.get<std::vector<double>>();
  } catch (const json::exception&) {
    throw ConfigError(path, "expected a number or a list of numbers");
  }
}

inline SolverConfig solver_config(const json& cfg) {
  SolverConfig s;
  const auto mode = get<std::string>(cfg, "solver.mode");
  if (mode == "discrete")
    s.mode = Mode::Discrete;
  else if (mode == "continuous")
    s.mode = Mode::Continuous;
  else
    throw ConfigError("solver.mode", "expected discrete or continuous");
  s.dt = get<double>(cfg, "solver.dt");
  s.tau = get_list(cfg, "solver.tau");
  s.omega = get_list(cfg, "solver.omega");
  s.lambda.margin = get<double>(cfg, "solver.lambda_margin");
  s.lambda.phase_gain = get<double>(cfg, "solver.phase_gain");
  s.max_steps = get<std::size_t>(cfg, "solver.max_steps");
  s.tol_cost = get<double>(cfg, "solver.tol_cost");
  s.quiet_steps = get<std::size_t>(cfg, "solver.quiet_steps");
  s.dissipation_tol = get<double>(cfg, "solver.dissipation_tol");
  if (s.omega.empty()) throw ConfigError("solver.omega", "empty list");
  if (s.tau.empty()) throw ConfigError("solver.tau", "empty list");
  return s;
}

inline BetaSchedule schedule(const json& cfg) {
  const auto kind = get<std::string>(cfg, "schedule.kind");
  const double start = get<double>(cfg, "schedule.start_time");
  try {
    if (kind == "constant") return BetaSchedule::constant(get<double>(cfg, "schedule.beta"), start);
    if (kind == "logistic")
      return BetaSchedule::logistic(get<double>(cfg, "schedule.beta_min"), get<double>(cfg, "schedule.beta_max"),
                                    get<double>(cfg, "schedule.k"), get<double>(cfg, "schedule.t0"), start);
    if (kind == "switching")
      return BetaSchedule::switching(get<double>(cfg, "schedule.beta_min"), get<double>(cfg, "schedule.beta_max"),
                                     get<double>(cfg, "schedule.t_switch"), start);
  } catch (const DomainError& e) {
    throw ConfigError("schedule", e.what());
  }
  throw ConfigError("schedule.kind", "expected constant, logistic or switching");
}

inline Dataset dataset(const json& cfg) {
  const auto kind = get<std::string>(cfg, "dataset.kind");
  const auto seed = get<std::uint64_t>(cfg, "dataset.seed");
  Dataset d;
  if (kind == "disc") {
    d = gen_disc(get<std::size_t>(cfg, "dataset.n"), get<double>(cfg, "dataset.radius"), seed);
  } else if (kind == "gmm4") {
    d = gen_four_clusters(get<std::size_t>(cfg, "dataset.n"), get<double>(cfg, "dataset.spread"),
                          get<double>(cfg, "dataset.var"), seed);
  } else if (kind == "delimited" || kind == "sparse") {
    const auto path = get<std::string>(cfg, "dataset.path");
    if (path.empty()) throw ConfigError("dataset.path", "required for file datasets");
    const json lab = get<json>(cfg, "dataset.majority_label");
    std::optional<std::string> label;
    if (lab.is_string()) label = lab.get<std::string>();
    else if (lab.is_number()) label = lab.dump();
    else if (!lab.is_null()) throw ConfigError("dataset.majority_label", "expected a string, number or null");
    if (kind == "delimited")
      d = load_delimited(path, {get<bool>(cfg, "dataset.has_header"), get<int>(cfg, "dataset.label_column"), label});
    else
      d = load_sparse_indexed(path, label);
  } else {
    throw ConfigError("dataset.kind", "expected disc, gmm4, delimited or sparse");
  }
  if (get<bool>(cfg, "dataset.standardize")) d = standardize(std::move(d));
  return d;
}

}  // namespace rgt::cli

#endif  // RGT_TOOLS_CONFIG_HPP
