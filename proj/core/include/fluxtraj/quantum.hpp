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

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace fluxtraj {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Complex n-level state stored in the real isomorphism: the first n
/// entries are Re(psi), the last n entries are Im(psi).
class QuantumState {
 public:
  QuantumState() = default;
  explicit QuantumState(Vec data);

  static QuantumState from_complex(const CVec& psi);

  int levels() const { return static_cast<int>(data_.size()) / 2; }
  const Vec& data() const { return data_; }
  CVec to_complex() const;

  double squared_norm() const { return data_.squaredNorm(); }
  bool is_normalized(double tol = 1e-10) const;
  QuantumState normalized() const;

 private:
  Vec data_;
};

/// Real 2n x 2n embedding [[H_re, -H_im], [H_im, H_re]] of a complex
/// n x n matrix. Matrix products and matrix-vector products commute
/// with the embedding.
class RealIsoMatrix {
 public:
  RealIsoMatrix() = default;
  explicit RealIsoMatrix(Mat data);

  static RealIsoMatrix from_complex(const CMat& m);

  int levels() const { return static_cast<int>(data_.rows()) / 2; }
  const Mat& data() const { return data_; }
  CMat to_complex() const;

  /// Block symmetry of the embedding: top-left == bottom-right and
  /// top-right == -(bottom-left), within tol.
  bool is_block_symmetric(double tol = 1e-12) const;

 private:
  Mat data_;
};

QuantumState embed(const CVec& psi);
RealIsoMatrix embed(const CMat& m);
CVec extract(const QuantumState& psi);
CMat extract(const RealIsoMatrix& m);

QuantumState apply(const RealIsoMatrix& m, const QuantumState& psi);

/// Device description near the flux-frustration point. Frequencies in
/// GHz, times in ns throughout; Hamiltonians carry the 2*pi.
struct FluxoniumParams {
  double f_q = 0.0139;  // qubit frequency, GHz
  double a_max = 0.5;   // flux amplitude bound, GHz
};

/// H = 2*pi*(f_q*sz/2 + a*sx/2) in rad/ns, embedded. `flux` may exceed
/// a_max; bounds are the optimizer's responsibility.
RealIsoMatrix hamiltonian(double flux, const FluxoniumParams& p);

/// Exact step exp(-i H dt) for an embedded Hermitian H. Two-level inputs
/// use the closed-form Pauli decomposition; larger systems fall back to a
/// general matrix exponential.
RealIsoMatrix propagator(const RealIsoMatrix& h, double dt);

/// |<a|b>|^2 evaluated in the isomorphism. Both states must be normalized
/// to 1e-6; throws std::invalid_argument otherwise.
double fidelity(const QuantumState& a, const QuantumState& b);

/// The four states {|0>, |1>, (|0>+i|1>)/sqrt2, (|0>-|1>)/sqrt2} whose
/// outer products span the single-qubit operators.
std::vector<QuantumState> operator_basis();

enum class GateKind { kXHalf, kYHalf, kZHalf, kCustom };

/// Target unitary with a fixed global phase. Target states are defined as
/// U applied to the initial state with U as written; the squared-difference
/// cost downstream is phase sensitive by design.
class GateTarget {
 public:
  static GateTarget make(GateKind kind);
  static GateTarget custom(const CMat& u);

  GateKind kind() const { return kind_; }
  const CMat& matrix() const { return u_; }
  RealIsoMatrix iso() const { return embed(u_); }
  QuantumState apply_to(const QuantumState& initial) const;
  GateTarget power(int count) const;

 private:
  GateTarget(GateKind kind, CMat u) : kind_(kind), u_(std::move(u)) {}
  GateKind kind_ = GateKind::kCustom;
  CMat u_;
};

// Fast fixed-size kernels for the two-level system. These are the hot
// path of the dynamics and evaluation modules.

/// embed(exp(-i H dt)) with H = pi*(f_q*sz + a*sx) rad/ns.
Eigen::Matrix4d two_level_propagator(double f_q, double flux, double dt);

/// embed(-i H), the generator such that d(psi)/dt = G psi.
Eigen::Matrix4d two_level_generator(double f_q, double flux);

/// d/d(flux) of two_level_propagator, exact (block-triangular exponential).
Eigen::Matrix4d two_level_propagator_flux_grad(double f_q, double flux, double dt);

/// General dense matrix exponentials (scaling-and-squaring), used for
/// n > 2 fallbacks and vectorized open-system generators.
Mat expm(const Mat& m);
CMat expm(const CMat& m);

}  // namespace fluxtraj
