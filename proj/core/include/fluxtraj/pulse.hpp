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

#include <string>
#include <vector>

#include "fluxtraj/dynamics.hpp"
#include "fluxtraj/problem.hpp"
#include "fluxtraj/quantum.hpp"

namespace fluxtraj {

/// A flux pulse on its stored (possibly non-uniform) time grid. Row k holds
/// the flux over the step [t_k, t_k + dt_k); the final row closes the grid
/// with dt = 0. The flux is piecewise constant over each step, matching the
/// discretization used everywhere in optimization and evaluation.
struct Pulse {
  std::vector<double> t;           // ns
  std::vector<double> flux;        // GHz
  std::vector<double> flux_deriv;  // GHz/ns
  std::vector<double> flux_accel;  // GHz/ns^2 (control starting at row k)
  std::vector<double> dt;          // ns

  int rows() const { return static_cast<int>(t.size()); }
  int steps() const { return rows() - 1; }
  double total_time() const { return t.empty() ? 0.0 : t.back(); }
};

/// Extracts the pulse columns from a solved trajectory.
Pulse pulse_from_trajectory(const StateLayout& layout, const Trajectory& traj, double dt,
                            bool time_optimal);

/// pulse.csv with header t_ns,a_GHz,da_GHz_ns,d2a_GHz_ns2,dt_ns at full
/// round-trip precision.
void write_pulse_csv(const std::string& path, const Pulse& pulse);
Pulse read_pulse_csv(const std::string& path);

/// Closed-form reference gates within the hardware constraints: Z/2 idles at
/// the flux-frustration point for 1/(4 f_q); X/2 and Y/2 sandwich one square
/// flux segment between two idles, solved exactly on SU(2). Segments are
/// subdivided to roughly `dt_hint` so stochastic evaluations resolve the
/// noise; the evolution itself is exact for any subdivision.
Pulse analytic_pulse(GateKind kind, const FluxoniumParams& p, double amplitude = 0.5,
                     double dt_hint = 0.1);

}  // namespace fluxtraj
