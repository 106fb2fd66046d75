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

#include <memory>

#include "fluxtraj/noise.hpp"
#include "fluxtraj/problem.hpp"
#include "fluxtraj/quantum.hpp"

namespace fluxtraj {

enum class RobustnessMode { kNone, kSampling, kUnscented, kDerivative };

/// Which Hamiltonian parameter the robustness machinery perturbs:
/// f_q -> f_q + delta, or a -> a + delta.
enum class UncertainTarget { kQubitFrequency, kFluxAdditive };

/// Memory layout of the flattened augmented state:
///   [ psi^0 .. psi^{n_states-1} | int_a | a | da | (d1)
///     | deriv states (per carrier, per order) | sample states ].
/// Quantum blocks are 4-dimensional real isomorphism vectors (n = 2).
/// Derivative chains attach to the trailing `n_carriers` quantum states.
struct StateLayout {
  int n_states = 2;
  int n_carriers = 0;
  int deriv_orders = 0;
  int n_samples = 0;
  bool has_d1 = false;

  static constexpr int kQuantumDim = 4;

  int state_offset(int i) const { return kQuantumDim * i; }
  int flux_int() const { return kQuantumDim * n_states; }
  int flux() const { return flux_int() + 1; }
  int flux_deriv() const { return flux_int() + 2; }
  int d1() const { return has_d1 ? flux_int() + 3 : -1; }
  int deriv_offset(int carrier, int order) const {
    return flux_int() + 3 + (has_d1 ? 1 : 0) +
           kQuantumDim * (carrier * deriv_orders + order);
  }
  int sample_offset(int j) const {
    return flux_int() + 3 + (has_d1 ? 1 : 0) + kQuantumDim * n_carriers * deriv_orders +
           kQuantumDim * j;
  }
  int dim() const {
    return flux_int() + 3 + (has_d1 ? 1 : 0) +
           kQuantumDim * (n_carriers * deriv_orders + n_samples);
  }
  int control_dim(bool time_optimal) const { return time_optimal ? 2 : 1; }
};

struct DynamicsConfig {
  FluxoniumParams params;
  StateLayout layout;
  double dt = 0.1;            // ns; fixed step unless time_optimal
  bool time_optimal = false;  // control gains sqrt(dt) as second component

  RobustnessMode mode = RobustnessMode::kNone;
  UncertainTarget target = UncertainTarget::kQubitFrequency;
  double sigma = 0.0;  // sampling-method offset (GHz)

  // Unscented transform (single carrier, scalar uncertain parameter).
  double beta = 1.0;
  Mat p1;            // 4x4 SPD initial state covariance
  double param_var = 0.0;

  std::shared_ptr<const T1Interpolant> t1;  // required when layout.has_d1
};

/// The discrete dynamics of the gate problem: exact polynomial flux chain,
/// exact quantum propagation, Lawson-Euler sensitivity propagation,
/// sample-state propagation, and depolarization-rate accumulation.
class AugmentedDynamics final : public DiscreteDynamics {
 public:
  explicit AugmentedDynamics(DynamicsConfig cfg);

  int state_dim() const override { return cfg_.layout.dim(); }
  int control_dim() const override { return cfg_.layout.control_dim(cfg_.time_optimal); }
  Vec step(int k, const Vec& x, const Vec& u) const override;
  void jacobians(int k, const Vec& x, const Vec& u, Mat& a, Mat& b) const override;

  const DynamicsConfig& config() const { return cfg_; }
  /// Step duration for a given control (sqrt_dt^2 in time-optimal mode).
  double step_duration(const Vec& u) const;

 private:
  void unscented_jacobian(const Vec& x, double dt, Mat& a_mat) const;

  DynamicsConfig cfg_;
  Eigen::Matrix4d deriv_source_;  // embed(-i dH/d(lambda)), Lawson-Euler source
};

/// One Lawson-Euler step of the sensitivity |d_psi'> = e^{dtL}(|d_psi> + dt N)
/// with L = -iH and N = -i(dH)|psi>.
QuantumState step_derivative(const QuantumState& dpsi, const QuantumState& psi,
                             const RealIsoMatrix& h, const RealIsoMatrix& dh, double dt);

/// Increment of the integrated depolarization rate: dt / T1(a), with the
/// flux held at its step-start value. Throws on non-positive T1.
double step_d1(double flux, double dt, const T1Interpolant& t1);

}  // namespace fluxtraj
