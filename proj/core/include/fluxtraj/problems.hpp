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

#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "fluxtraj/dynamics.hpp"
#include "fluxtraj/problem.hpp"
#include "fluxtraj/unscented.hpp"

namespace fluxtraj {

struct WeightTable {
  double q_state = 1.0;
  double q_flux_int = 1e-1;
  double q_flux = 1e-1;
  double q_flux_deriv = 1e-2;
  double q_deriv = 1.0;      // sensitivity-norm weight (derivative method)
  double q_d1 = 0.0;         // integrated depolarization rate weight
  double r_accel = 1e-2;
  double r_sqrt_dt = 1e-3;   // duration cost, time-optimal mode
  double b_sample = 1.0;     // sample-infidelity weight (sampling method)
  double c_unscented = 1.0;  // sample-deviation weight (unscented method)

  // Extra weight multipliers on the final step. The robustness metrics are
  // terminal quantities; the per-step sums regularize the path while the
  // terminal terms align the objective with the reported error.
  double q_deriv_terminal = 1.0;
  double b_sample_terminal = 1.0;
  double c_unscented_terminal = 1.0;
};

enum class InitialStateSet { kPair, kOperatorBasis };

struct UnscentedConfig {
  double beta = 1.0;
  Mat p1;                 // 4x4 SPD; empty selects (1e-4)^2 I
  double param_var = 0.0; // scalar L_k; 0 selects sigma^2 of the active target
};

struct GateProblemConfig {
  GateKind gate = GateKind::kZHalf;
  CMat custom_matrix;  // used when gate == kCustom

  double gate_time = 17.985611510791366;  // ns; default 1/(4 f_q)
  double dt = 0.1;                        // ns; grid is fitted to divide gate_time
  InitialStateSet initial_states = InitialStateSet::kPair;
  WeightTable weights;

  RobustnessMode robustness = RobustnessMode::kNone;
  UncertainTarget uncertainty_target = UncertainTarget::kQubitFrequency;
  int derivative_order = 1;
  double sigma_fq = -1.0;  // GHz; negative selects 1% of f_q
  double sigma_a = 2.5e-5; // GHz
  UnscentedConfig unscented;

  bool depolarization = false;
  std::shared_ptr<const T1Interpolant> t1;

  bool time_optimal = false;
  double dt_min_factor = 0.25;
  double dt_max_factor = 4.0;

  /// Relaxes the target-state equality to a violation cap when positive;
  /// for problems where the gate and the physics are mutually unsatisfiable.
  double target_tolerance = 0.0;

  double init_noise = 1e-4;  // GHz/ns^2 uniform noise on the initial guess
};

/// A built fluxonium gate problem and the metadata needed to interpret its
/// trajectories.
struct GateProblem {
  TrajectoryProblem problem;
  StateLayout layout;
  FluxoniumParams params;
  GateProblemConfig config;
  double dt = 0.1;  // fitted step
  GateTarget target = GateTarget::make(GateKind::kZHalf);
  std::vector<QuantumState> initial_quantum_states;
  std::vector<QuantumState> target_states;

  int horizon() const { return problem.horizon; }
  /// Transfer states carry target constraints; the robustness carrier does not.
  int transfer_count() const {
    const bool carrier = config.robustness == RobustnessMode::kUnscented ||
                         config.robustness == RobustnessMode::kDerivative;
    return layout.n_states - (carrier ? 1 : 0);
  }
  /// Zero controls plus seeded uniform noise on the flux acceleration.
  Trajectory initial_guess(std::uint64_t seed) const;
  /// One-line-per-item listing of constraints, costs, and dimensions.
  std::string audit() const;
};

/// Assembles the base multi-state transfer problem: initial conditions,
/// target states, zero net flux, per-step normalization, amplitude bound,
/// and the diagonal quadratic running cost, plus any enabled augmentation.
GateProblem build_gate_problem(const GateProblemConfig& cfg, const FluxoniumParams& p);

// One-call augmentations over a base config; each enables its extension and
// rebuilds the problem.
GateProblem add_sampling(GateProblemConfig cfg, const FluxoniumParams& p, double sigma,
                         double b_weight);
GateProblem add_unscented(GateProblemConfig cfg, const FluxoniumParams& p,
                          const UnscentedConfig& ucfg, double c_weight);
GateProblem add_derivative(GateProblemConfig cfg, const FluxoniumParams& p, UncertainTarget target,
                           int order, double weight);
GateProblem add_depolarization(GateProblemConfig cfg, const FluxoniumParams& p,
                               std::shared_ptr<const T1Interpolant> t1, double weight);
GateProblem add_time_optimal(GateProblemConfig cfg, const FluxoniumParams& p, double dt_min_factor,
                             double dt_max_factor);

}  // namespace fluxtraj
