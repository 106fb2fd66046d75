/*
 * Copyright 2026 The fluxtraj Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "fluxtraj/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "fluxtraj/evaluation.hpp"
#include "fluxtraj/problems.hpp"
#include "fluxtraj/pulse.hpp"
#include "fluxtraj/solver.hpp"

namespace fluxtraj::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

const json& require(const json& node, const std::string& key, const std::string& context) {
  if (!node.contains(key)) {
    throw ConfigError("missing required field `" + context + key + "`");
  }
  return node.at(key);
}

template <typename T>
T get_or(const json& node, const std::string& key, T fallback) {
  if (!node.contains(key)) return fallback;
  try {
    return node.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("field `" + key + "`: " + e.what());
  }
}

GateKind parse_gate_kind(const std::string& name) {
  if (name == "X/2") return GateKind::kXHalf;
  if (name == "Y/2") return GateKind::kYHalf;
  if (name == "Z/2") return GateKind::kZHalf;
  throw ConfigError("gate.kind must be one of X/2, Y/2, Z/2; got `" + name + "`");
}

std::string gate_kind_name(GateKind kind) {
  switch (kind) {
    case GateKind::kXHalf: return "X/2";
    case GateKind::kYHalf: return "Y/2";
    case GateKind::kZHalf: return "Z/2";
    case GateKind::kCustom: return "custom";
  }
  return "custom";
}

RobustnessMode parse_mode(const std::string& name) {
  if (name == "none") return RobustnessMode::kNone;
  if (name == "sampling") return RobustnessMode::kSampling;
  if (name == "unscented") return RobustnessMode::kUnscented;
  if (name == "derivative") return RobustnessMode::kDerivative;
  throw ConfigError("robustness.mode must be none|sampling|unscented|derivative");
}

UncertainTarget parse_target(const std::string& name) {
  if (name == "qubit_frequency") return UncertainTarget::kQubitFrequency;
  if (name == "flux_additive") return UncertainTarget::kFluxAdditive;
  throw ConfigError("robustness.target must be qubit_frequency|flux_additive");
}

struct ResolvedRun {
  json echo;  // the fully resolved configuration
  std::string command;
  fs::path out_dir;
  std::uint64_t seed = 0;

  FluxoniumParams params;
  GateProblemConfig gate_cfg;
  bool has_gate = false;
  SolverOptions solver;

  // evaluation
  Perturbation perturbation = Perturbation::kNone;
  double detuning = 0.0;
  double eval_sigma_a = 2.5e-5;
  int n_states = 1000;
  int gate_count = 1;
  std::uint64_t eval_seed = 0;
  std::string pulse_csv;
  std::string analytic_kind;  // evaluate an analytic reference pulse
  double analytic_amplitude = 0.5;
  std::string eval_t1_csv;

  PinkNoiseSpec noise;
};

json default_weights_json() {
  return json{{"q_state", 1.0},       {"q_flux_int", 0.1},  {"q_flux", 0.1},
              {"q_flux_deriv", 0.01}, {"q_deriv", 1.0},     {"q_d1", 0.0},
              {"r_accel", 0.01},      {"r_sqrt_dt", 0.001}, {"b_sample", 1.0},
              {"c_unscented", 1.0},   {"q_deriv_terminal", 1.0},
              {"b_sample_terminal", 1.0}, {"c_unscented_terminal", 1.0}};
}

ResolvedRun resolve(const json& cfg, const std::string& command, const fs::path& cfg_dir,
                    const std::string& out_override) {
  ResolvedRun run;
  run.command = command;
  if (get_or<int>(cfg, "schema_version", 1) != 1) {
    throw ConfigError("unsupported schema_version (expected 1)");
  }

  json echo;
  echo["schema_version"] = 1;
  echo["command"] = command;

  const json fluxonium = get_or<json>(cfg, "fluxonium", json::object());
  run.params.f_q = get_or<double>(fluxonium, "f_q_GHz", 0.0139);
  run.params.a_max = get_or<double>(fluxonium, "a_max_GHz", 0.5);
  if (!(run.params.f_q > 0.0) || !(run.params.a_max > 0.0)) {
    throw ConfigError("fluxonium.f_q_GHz and fluxonium.a_max_GHz must be positive");
  }
  echo["fluxonium"] = {{"f_q_GHz", run.params.f_q}, {"a_max_GHz", run.params.a_max}};

  const bool needs_gate = command == "optimize" || command == "evaluate" ||
                          command == "sweep" || command == "audit";
  if (needs_gate) {
    const json& gate = require(cfg, "gate", "");
    GateProblemConfig& g = run.gate_cfg;
    g.gate = parse_gate_kind(require(gate, "kind", "gate.").get<std::string>());
    if (command != "evaluate") {
      g.gate_time = require(gate, "gate_time_ns", "gate.").get<double>();
      if (!(g.gate_time > 0.0)) throw ConfigError("gate.gate_time_ns must be positive");
    } else {
      g.gate_time = get_or<double>(gate, "gate_time_ns", 0.0);
    }
    g.dt = get_or<double>(gate, "dt_ns", 0.1);
    const std::string states = get_or<std::string>(gate, "initial_states", "pair");
    if (states == "pair") {
      g.initial_states = InitialStateSet::kPair;
    } else if (states == "operator_basis") {
      g.initial_states = InitialStateSet::kOperatorBasis;
    } else {
      throw ConfigError("gate.initial_states must be pair|operator_basis");
    }

    const json weights = get_or<json>(cfg, "weights", json::object());
    json wecho = default_weights_json();
    for (auto& [key, value] : wecho.items()) {
      value = get_or<double>(weights, key, value.get<double>());
    }
    g.weights.q_state = wecho["q_state"];
    g.weights.q_flux_int = wecho["q_flux_int"];
    g.weights.q_flux = wecho["q_flux"];
    g.weights.q_flux_deriv = wecho["q_flux_deriv"];
    g.weights.q_deriv = wecho["q_deriv"];
    g.weights.q_d1 = wecho["q_d1"];
    g.weights.r_accel = wecho["r_accel"];
    g.weights.r_sqrt_dt = wecho["r_sqrt_dt"];
    g.weights.b_sample = wecho["b_sample"];
    g.weights.c_unscented = wecho["c_unscented"];
    g.weights.q_deriv_terminal = wecho["q_deriv_terminal"];
    g.weights.b_sample_terminal = wecho["b_sample_terminal"];
    g.weights.c_unscented_terminal = wecho["c_unscented_terminal"];

    const json rob = get_or<json>(cfg, "robustness", json::object());
    g.robustness = parse_mode(get_or<std::string>(rob, "mode", "none"));
    g.uncertainty_target = parse_target(get_or<std::string>(rob, "target", "qubit_frequency"));
    g.derivative_order = get_or<int>(rob, "order", 1);
    g.sigma_fq = get_or<double>(rob, "sigma_fq_GHz", -1.0);
    g.sigma_a = get_or<double>(rob, "sigma_a_GHz", 2.5e-5);
    g.unscented.beta = get_or<double>(rob, "beta", 1.0);
    const double p1_scale = get_or<double>(rob, "p1_scale", 1e-8);
    g.unscented.p1 = p1_scale * Mat::Identity(4, 4);
    g.unscented.param_var = get_or<double>(rob, "param_var", 0.0);

    const json depol = get_or<json>(cfg, "depolarization", json::object());
    g.depolarization = get_or<bool>(depol, "enabled", false);
    std::string t1_csv = get_or<std::string>(depol, "t1_csv", "");
    if (g.depolarization) {
      g.weights.q_d1 = get_or<double>(depol, "weight", 1.0);
      if (t1_csv.empty()) {
        g.t1 = std::make_shared<T1Interpolant>(synthetic_t1_curve());
      } else {
        const fs::path path = fs::path(t1_csv).is_absolute() ? fs::path(t1_csv) : cfg_dir / t1_csv;
        try {
          g.t1 = std::make_shared<T1Interpolant>(T1Interpolant::from_csv(path.string()));
        } catch (const std::exception& e) {
          throw ConfigError(std::string("depolarization.t1_csv: ") + e.what());
        }
      }
    }

    const json timeopt = get_or<json>(cfg, "time_optimal", json::object());
    g.time_optimal = get_or<bool>(timeopt, "enabled", false);
    g.dt_min_factor = get_or<double>(timeopt, "dt_min_factor", 0.25);
    g.dt_max_factor = get_or<double>(timeopt, "dt_max_factor", 4.0);

    g.target_tolerance = get_or<double>(cfg, "target_tolerance", 0.0);
    g.init_noise = get_or<double>(cfg, "init_noise", 1e-4);
    run.has_gate = true;

    echo["gate"] = {{"kind", gate_kind_name(g.gate)},
                    {"gate_time_ns", g.gate_time},
                    {"dt_ns", g.dt},
                    {"initial_states", states}};
    echo["weights"] = wecho;
    echo["robustness"] = {{"mode", get_or<std::string>(rob, "mode", "none")},
                          {"target", get_or<std::string>(rob, "target", "qubit_frequency")},
                          {"order", g.derivative_order},
                          {"sigma_fq_GHz", g.sigma_fq},
                          {"sigma_a_GHz", g.sigma_a},
                          {"beta", g.unscented.beta},
                          {"p1_scale", p1_scale},
                          {"param_var", g.unscented.param_var}};
    echo["depolarization"] = {{"enabled", g.depolarization},
                              {"t1_csv", t1_csv},
                              {"weight", g.weights.q_d1}};
    echo["time_optimal"] = {{"enabled", g.time_optimal},
                            {"dt_min_factor", g.dt_min_factor},
                            {"dt_max_factor", g.dt_max_factor}};
    echo["target_tolerance"] = g.target_tolerance;
    echo["init_noise"] = g.init_noise;
  }

  const json solver = get_or<json>(cfg, "solver", json::object());
  run.solver.violation_tolerance = get_or<double>(solver, "violation_tolerance", 1e-8);
  run.solver.intermediate_tolerance = get_or<double>(solver, "intermediate_tolerance", 1e-6);
  run.solver.cost_tolerance = get_or<double>(solver, "cost_tolerance", 1e-10);
  run.solver.gradient_tolerance = get_or<double>(solver, "gradient_tolerance", 1e-9);
  run.solver.max_ilqr_iterations = get_or<int>(solver, "max_ilqr_iterations", 200);
  run.solver.max_alm_iterations = get_or<int>(solver, "max_alm_iterations", 30);
  run.solver.initial_penalty = get_or<double>(solver, "initial_penalty", 1.0);
  run.solver.penalty_scaling = get_or<double>(solver, "penalty_scaling", 10.0);
  run.solver.verbose = get_or<bool>(solver, "verbose", false);
  echo["solver"] = {{"violation_tolerance", run.solver.violation_tolerance},
                    {"intermediate_tolerance", run.solver.intermediate_tolerance},
                    {"cost_tolerance", run.solver.cost_tolerance},
                    {"gradient_tolerance", run.solver.gradient_tolerance},
                    {"max_ilqr_iterations", run.solver.max_ilqr_iterations},
                    {"max_alm_iterations", run.solver.max_alm_iterations},
                    {"initial_penalty", run.solver.initial_penalty},
                    {"penalty_scaling", run.solver.penalty_scaling},
                    {"verbose", run.solver.verbose}};

  const bool stochastic = command == "optimize" || command == "sweep";
  if (stochastic && !cfg.contains("seed")) {
    throw ConfigError("missing required field `seed` (mandatory for stochastic commands)");
  }
  run.seed = get_or<std::uint64_t>(cfg, "seed", 0);
  echo["seed"] = run.seed;

  if (command == "evaluate" || command == "sweep") {
    const json eval = get_or<json>(cfg, "evaluation", json::object());
    const std::string kind = get_or<std::string>(eval, "perturbation", "none");
    if (kind == "none") {
      run.perturbation = Perturbation::kNone;
    } else if (kind == "detuning") {
      run.perturbation = Perturbation::kDetuning;
    } else if (kind == "pink_noise") {
      run.perturbation = Perturbation::kPinkNoise;
    } else if (kind == "depolarization") {
      run.perturbation = Perturbation::kDepolarization;
    } else {
      throw ConfigError("evaluation.perturbation must be none|detuning|pink_noise|depolarization");
    }
    if (eval.contains("detuning_GHz")) {
      run.detuning = eval.at("detuning_GHz").get<double>();
    } else {
      run.detuning = get_or<double>(eval, "detuning_rel", 0.01) * run.params.f_q;
    }
    run.eval_sigma_a = get_or<double>(eval, "sigma_a_GHz", 2.5e-5);
    run.n_states = get_or<int>(eval, "n_states", 1000);
    run.gate_count = get_or<int>(eval, "gate_count", 1);
    if (command == "evaluate" && !eval.contains("seed")) {
      throw ConfigError("missing required field `evaluation.seed` (mandatory for stochastic commands)");
    }
    run.eval_seed = get_or<std::uint64_t>(eval, "seed", 0);
    run.pulse_csv = get_or<std::string>(eval, "pulse_csv", "");
    run.eval_t1_csv = get_or<std::string>(eval, "t1_csv", "");
    if (eval.contains("analytic_pulse")) {
      const json ap = eval.at("analytic_pulse");
      run.analytic_kind = require(ap, "kind", "evaluation.analytic_pulse.").get<std::string>();
      run.analytic_amplitude = get_or<double>(ap, "amplitude_GHz", 0.5);
    }
    echo["evaluation"] = {{"perturbation", kind},
                          {"detuning_GHz", run.detuning},
                          {"sigma_a_GHz", run.eval_sigma_a},
                          {"n_states", run.n_states},
                          {"gate_count", run.gate_count},
                          {"seed", run.eval_seed},
                          {"pulse_csv", run.pulse_csv},
                          {"t1_csv", run.eval_t1_csv}};
    if (!run.analytic_kind.empty()) {
      echo["evaluation"]["analytic_pulse"] = {{"kind", run.analytic_kind},
                                              {"amplitude_GHz", run.analytic_amplitude}};
    }
  }

  if (command == "noise-gen") {
    const json noise = require(cfg, "noise", "");
    run.noise.sigma_a = get_or<double>(noise, "sigma_a_GHz", 2.5e-5);
    run.noise.dt = get_or<double>(noise, "dt_ns", 0.1);
    run.noise.length = require(noise, "length", "noise.").get<int>();
    if (!noise.contains("seed")) {
      throw ConfigError("missing required field `noise.seed` (mandatory for stochastic commands)");
    }
    run.noise.seed = noise.at("seed").get<std::uint64_t>();
    run.noise.filter_order = get_or<int>(noise, "filter_order", 0);
    echo["noise"] = {{"sigma_a_GHz", run.noise.sigma_a},
                     {"dt_ns", run.noise.dt},
                     {"length", run.noise.length},
                     {"seed", run.noise.seed},
                     {"filter_order", run.noise.filter_order}};
  }

  // Output directory: --out > config > runs/<command>, anchored at
  // FLUXTRAJ_OUT_ROOT when relative.
  std::string out = !out_override.empty() ? out_override
                                          : get_or<std::string>(cfg, "output_dir", "runs/" + command);
  fs::path out_path(out);
  if (out_path.is_relative()) {
    if (const char* root = std::getenv("FLUXTRAJ_OUT_ROOT")) {
      out_path = fs::path(root) / out_path;
    }
  }
  run.out_dir = out_path;
  echo["output_dir"] = out_path.string();
  run.echo = std::move(echo);
  return run;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json report_to_json(const ErrorReport& report, const json& echo) {
  json j;
  j["mean_error"] = report.mean_error;
  j["cumulative"] = report.cumulative;
  j["n_states"] = report.n_states;
  j["gate_count"] = report.gate_count;
  j["seed"] = report.seed;
  j["perturbation"] = report.perturbation;
  j["detuning_GHz"] = report.detuning;
  j["sigma_a_GHz"] = report.sigma_a;
  j["state_distribution"] = report.state_distribution;
  j["config_echo"] = echo;
  return j;
}

void write_report(const fs::path& dir, const ErrorReport& report, const json& echo) {
  write_json(dir / "report.json", report_to_json(report, echo));
  std::ostringstream csv;
  csv << "count,cumulative_error\n";
  char buf[64];
  for (std::size_t i = 0; i < report.cumulative.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", i + 1, report.cumulative[i]);
    csv << buf;
  }
  write_text(dir / "report.csv", csv.str());
}

int run_optimize(const ResolvedRun& run) {
  const GateProblem gp = build_gate_problem(run.gate_cfg, run.params);
  const auto t0 = std::chrono::steady_clock::now();
  const Trajectory sol = solve(gp.problem, gp.initial_guess(run.seed), run.solver);
  const double total_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  fs::create_directories(run.out_dir);
  write_json(run.out_dir / "config.json", run.echo);

  const Pulse pulse = pulse_from_trajectory(gp.layout, sol, gp.dt, run.gate_cfg.time_optimal);
  write_pulse_csv((run.out_dir / "pulse.csv").string(), pulse);

  json traj_json;
  traj_json["dt_ns"] = pulse.dt;
  traj_json["states"] = json::array();
  for (const Vec& x : sol.x) {
    traj_json["states"].push_back(std::vector<double>(x.data(), x.data() + x.size()));
  }
  traj_json["controls"] = json::array();
  for (const Vec& u : sol.u) {
    traj_json["controls"].push_back(std::vector<double>(u.data(), u.data() + u.size()));
  }
  write_json(run.out_dir / "trajectory.json", traj_json);

  // Closed-system error from explicit re-integration of the written pulse.
  EvalSpec closed;
  closed.kind = Perturbation::kNone;
  closed.n_states = run.n_states;
  closed.seed = run.eval_seed;
  const double closed_error =
      gate_error(pulse, gp.target, closed, run.params).mean_error;

  json diag;
  diag["cost"] = sol.stats.cost;
  diag["max_violation"] = sol.stats.max_violation;
  diag["projection_violation"] = sol.stats.projection_violation;
  diag["iterations"] = {{"ilqr", sol.stats.ilqr_iterations},
                        {"alm", sol.stats.alm_iterations},
                        {"projection", sol.stats.projection_iterations}};
  diag["seconds"] = {{"alm", sol.stats.alm_seconds},
                     {"projection", sol.stats.projection_seconds},
                     {"total", total_seconds}};
  diag["converged"] = sol.stats.converged;
  diag["failure"] = sol.stats.failure;
  diag["closed_system_error"] = closed_error;
  diag["gate_time_ns"] = pulse.total_time();
  write_json(run.out_dir / "diagnostics.json", diag);

  if (!sol.stats.converged) {
    std::cerr << "optimize: solver failure: " << sol.stats.failure << "\n";
    return kExitSolverFailure;
  }
  std::cout << "optimize: cost " << sol.stats.cost << ", max violation "
            << sol.stats.max_violation << ", wrote " << run.out_dir.string() << "\n";
  return kExitOk;
}

Pulse load_eval_pulse(const ResolvedRun& run) {
  if (!run.analytic_kind.empty()) {
    return analytic_pulse(parse_gate_kind(run.analytic_kind), run.params,
                          run.analytic_amplitude, run.gate_cfg.dt);
  }
  if (run.pulse_csv.empty()) {
    throw EvalError("evaluate needs --pulse <csv> or evaluation.pulse_csv or analytic_pulse");
  }
  return read_pulse_csv(run.pulse_csv);
}

int run_evaluate(const ResolvedRun& run) {
  Pulse pulse;
  try {
    pulse = load_eval_pulse(run);
  } catch (const std::exception& e) {
    std::cerr << "evaluate: " << e.what() << "\n";
    return kExitEvaluationError;
  }
  const GateTarget target = run.gate_cfg.gate == GateKind::kCustom
                                ? GateTarget::custom(run.gate_cfg.custom_matrix)
                                : GateTarget::make(run.gate_cfg.gate);
  EvalSpec spec;
  spec.kind = run.perturbation;
  spec.detuning = run.detuning;
  spec.sigma_a = run.eval_sigma_a;
  spec.n_states = run.n_states;
  spec.seed = run.eval_seed;
  LindbladModel model;
  if (run.perturbation == Perturbation::kDepolarization) {
    model.t1 = run.eval_t1_csv.empty()
                   ? std::make_shared<T1Interpolant>(synthetic_t1_curve())
                   : std::make_shared<T1Interpolant>(T1Interpolant::from_csv(run.eval_t1_csv));
  }
  ErrorReport report;
  try {
    report = cumulative_error(pulse, target, run.gate_count, spec, run.params,
                              model.t1 ? &model : nullptr);
  } catch (const std::exception& e) {
    std::cerr << "evaluate: " << e.what() << "\n";
    return kExitEvaluationError;
  }
  fs::create_directories(run.out_dir);
  write_json(run.out_dir / "config.json", run.echo);
  write_report(run.out_dir, report, run.echo);
  std::cout << "evaluate: mean error " << report.mean_error << " over " << report.n_states
            << " states, wrote " << run.out_dir.string() << "\n";
  return kExitOk;
}

int run_noise_gen(const ResolvedRun& run) {
  const std::vector<double> seq = pink_noise(run.noise);
  fs::create_directories(run.out_dir);
  write_json(run.out_dir / "config.json", run.echo);
  std::ostringstream csv;
  csv << "delta_a_GHz\n";
  char buf[48];
  for (double v : seq) {
    std::snprintf(buf, sizeof(buf), "%.17g\n", v);
    csv << buf;
  }
  write_text(run.out_dir / "noise.csv", csv.str());
  std::cout << "noise-gen: wrote " << seq.size() << " samples to " << run.out_dir.string()
            << "\n";
  return kExitOk;
}

int run_audit(const ResolvedRun& run) {
  const GateProblem gp = build_gate_problem(run.gate_cfg, run.params);
  const std::string listing = gp.audit();
  std::cout << listing;
  fs::create_directories(run.out_dir);
  write_json(run.out_dir / "config.json", run.echo);
  write_text(run.out_dir / "audit.txt", listing);
  return kExitOk;
}

json set_by_path(json cfg, const std::string& dotted, double value) {
  json* node = &cfg;
  std::istringstream path(dotted);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(path, part, '.')) parts.push_back(part);
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) node = &(*node)[parts[i]];
  (*node)[parts.back()] = value;
  return cfg;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  std::string command, cfg_path, out_override, pulse_override, param;
  std::vector<double> values;
  try {
    std::size_t i = 0;
    if (i < args.size()) command = args[i++];
    if (command.empty() || command == "--help" || command == "-h") {
      std::cout << "usage: fluxtraj <optimize|evaluate|sweep|noise-gen|audit> <config.json>"
                   " [--pulse <csv>] [--param <field> --values <v1,v2,...>] [--out <dir>]\n";
      return command.empty() ? kExitConfigError : kExitOk;
    }
    if (i < args.size() && args[i][0] != '-') cfg_path = args[i++];
    for (; i < args.size(); ++i) {
      const std::string& arg = args[i];
      auto next = [&]() -> const std::string& {
        if (i + 1 >= args.size()) throw ConfigError("flag " + arg + " needs a value");
        return args[++i];
      };
      if (arg == "--out") {
        out_override = next();
      } else if (arg == "--pulse") {
        pulse_override = next();
      } else if (arg == "--param") {
        param = next();
      } else if (arg == "--values") {
        std::istringstream list(next());
        std::string item;
        while (std::getline(list, item, ',')) values.push_back(std::stod(item));
      } else {
        throw ConfigError("unknown argument `" + arg + "`");
      }
    }
    if (command != "optimize" && command != "evaluate" && command != "sweep" &&
        command != "noise-gen" && command != "audit") {
      throw ConfigError("unknown command `" + command + "`");
    }
    if (cfg_path.empty()) throw ConfigError("missing config path");
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  }

  json cfg;
  try {
    std::ifstream in(cfg_path);
    if (!in) throw ConfigError("cannot open config file " + cfg_path);
    try {
      cfg = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError("json parse error at byte " + std::to_string(e.byte) + ": " + e.what());
    }
    if (!pulse_override.empty()) cfg["evaluation"]["pulse_csv"] = pulse_override;

    if (command == "sweep") {
      if (param.empty() || values.empty()) {
        throw ConfigError("sweep needs --param and --values");
      }
      const std::string sub = cfg.contains("evaluation") && (!pulse_override.empty() ||
                               cfg["evaluation"].contains("pulse_csv") ||
                               cfg["evaluation"].contains("analytic_pulse"))
                                  ? "evaluate"
                                  : "optimize";
      int status = kExitOk;
      for (double v : values) {
        json sub_cfg = set_by_path(cfg, param, v);
        std::ostringstream key;
        key << param << "=" << v;
        const ResolvedRun run = resolve(sub_cfg, sub,
                                        fs::path(cfg_path).parent_path(), out_override);
        ResolvedRun keyed = run;
        keyed.out_dir = run.out_dir / key.str();
        keyed.echo["output_dir"] = keyed.out_dir.string();
        const int rc = sub == "optimize" ? run_optimize(keyed) : run_evaluate(keyed);
        status = std::max(status, rc);
      }
      return status;
    }

    const ResolvedRun run = resolve(cfg, command, fs::path(cfg_path).parent_path(), out_override);
    if (command == "optimize") return run_optimize(run);
    if (command == "evaluate") return run_evaluate(run);
    if (command == "noise-gen") return run_noise_gen(run);
    return run_audit(run);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const EvalError& e) {
    std::cerr << "evaluation error: " << e.what() << "\n";
    return kExitEvaluationError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return command == "evaluate" ? kExitEvaluationError : kExitConfigError;
  }
}

}  // namespace fluxtraj::cli
