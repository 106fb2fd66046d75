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

#include "fluxtraj/noise.hpp"
#include "fluxtraj/pulse.hpp"
#include "fluxtraj/quantum.hpp"

namespace fluxtraj {

/// Two-level density matrix with the physicality invariants enforced on
/// construction: Hermitian to 1e-12, unit trace to 1e-9, eigenvalues
/// >= -1e-9.
class DensityMatrix {
 public:
  explicit DensityMatrix(CMat rho);
  static DensityMatrix pure(const QuantumState& psi);

  const CMat& data() const { return rho_; }
  double trace() const { return rho_.trace().real(); }
  double population(int level) const { return rho_(level, level).real(); }
  double min_eigenvalue() const;
  /// <psi| rho |psi>, real by Hermiticity.
  double fidelity_with(const QuantumState& psi) const;

 private:
  CMat rho_;
};

/// Depolarization channels sigma+ and sigma- at equal rates 1/(2 T1[a]),
/// with the flux-dependent T1 re-evaluated every step.
struct LindbladModel {
  std::shared_ptr<const T1Interpolant> t1;
};

/// One exact step of the vectorized master equation: builds the generator
/// for the step's constant flux, exponentiates, applies to vec(rho).
DensityMatrix lindblad_step(const DensityMatrix& rho, double flux, double dt,
                            const LindbladModel& model, const FluxoniumParams& p);

enum class Perturbation { kNone, kDetuning, kPinkNoise, kDepolarization };

struct EvalSpec {
  Perturbation kind = Perturbation::kNone;
  double detuning = 0.0;   // GHz, applied as f_q -> f_q +/- detuning
  double sigma_a = 2.5e-5; // GHz, 1/f flux-noise amplitude
  int noise_filter_order = 0;
  int n_states = 1000;
  std::uint64_t seed = 0;
};

struct ErrorReport {
  double mean_error = 0.0;
  std::vector<double> cumulative;  // error after each gate application
  int n_states = 0;
  int gate_count = 1;
  std::uint64_t seed = 0;
  std::string perturbation;
  double detuning = 0.0;
  double sigma_a = 0.0;
  std::string state_distribution = "haar";
};

/// Haar-uniform qubit state from a normalized complex Gaussian pair;
/// deterministic in the seed.
QuantumState random_state(std::uint64_t seed);

/// Mean infidelity of the evolved state against the phase-fixed target over
/// n_states pseudo-random initial states. Detuning averages the two
/// transformations f_q +/- delta; pink noise draws a distinct sequence per
/// state; depolarization evolves the density matrix and scores
/// 1 - <psi_T| rho |psi_T>.
ErrorReport gate_error(const Pulse& pulse, const GateTarget& target, const EvalSpec& spec,
                       const FluxoniumParams& p, const LindbladModel* model = nullptr);

/// Successive applications of the same pulse; the target after k gates is
/// U^k with its phase. Noise sequences run continuously across gates.
ErrorReport cumulative_error(const Pulse& pulse, const GateTarget& target, int gate_count,
                             const EvalSpec& spec, const FluxoniumParams& p,
                             const LindbladModel* model = nullptr);

/// gate_error per detuning value, rows ordered as the input.
std::vector<std::pair<double, double>> detuning_sweep(const Pulse& pulse, const GateTarget& target,
                                                      const std::vector<double>& detunings,
                                                      const EvalSpec& spec,
                                                      const FluxoniumParams& p);

/// Integrated depolarization rate of a pulse: sum dt_k / T1[a_k], the same
/// left-endpoint rule used by the optimizer's accumulator.
double d1_metric(const Pulse& pulse, const T1Interpolant& t1);

}  // namespace fluxtraj
