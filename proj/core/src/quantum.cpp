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

#include "fluxtraj/quantum.hpp"

#include <cmath>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

namespace fluxtraj {

namespace {

using Complex = std::complex<double>;

// sin(x)/x with the small-argument series.
double sinc(double x) {
  if (std::abs(x) < 1e-8) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

}  // namespace

QuantumState::QuantumState(Vec data) : data_(std::move(data)) {
  if (data_.size() % 2 != 0 || data_.size() == 0) {
    throw std::invalid_argument("QuantumState: data length must be even and nonzero");
  }
}

QuantumState QuantumState::from_complex(const CVec& psi) {
  const int n = static_cast<int>(psi.size());
  Vec v(2 * n);
  v.head(n) = psi.real();
  v.tail(n) = psi.imag();
  return QuantumState(std::move(v));
}

CVec QuantumState::to_complex() const {
  const int n = levels();
  CVec psi(n);
  psi.real() = data_.head(n);
  psi.imag() = data_.tail(n);
  return psi;
}

bool QuantumState::is_normalized(double tol) const {
  return std::abs(squared_norm() - 1.0) <= tol;
}

QuantumState QuantumState::normalized() const {
  const double norm = std::sqrt(squared_norm());
  if (norm == 0.0) throw std::invalid_argument("QuantumState: cannot normalize zero vector");
  return QuantumState(data_ / norm);
}

RealIsoMatrix::RealIsoMatrix(Mat data) : data_(std::move(data)) {
  if (data_.rows() != data_.cols() || data_.rows() % 2 != 0 || data_.rows() == 0) {
    throw std::invalid_argument("RealIsoMatrix: matrix must be square with even dimension");
  }
}

RealIsoMatrix RealIsoMatrix::from_complex(const CMat& m) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("RealIsoMatrix: complex input must be square");
  }
  const int n = static_cast<int>(m.rows());
  Mat r(2 * n, 2 * n);
  r.topLeftCorner(n, n) = m.real();
  r.topRightCorner(n, n) = -m.imag();
  r.bottomLeftCorner(n, n) = m.imag();
  r.bottomRightCorner(n, n) = m.real();
  return RealIsoMatrix(std::move(r));
}

CMat RealIsoMatrix::to_complex() const {
  const int n = levels();
  CMat m(n, n);
  m.real() = data_.topLeftCorner(n, n);
  m.imag() = data_.bottomLeftCorner(n, n);
  return m;
}

bool RealIsoMatrix::is_block_symmetric(double tol) const {
  const int n = levels();
  const double d1 = (data_.topLeftCorner(n, n) - data_.bottomRightCorner(n, n)).cwiseAbs().maxCoeff();
  const double d2 = (data_.topRightCorner(n, n) + data_.bottomLeftCorner(n, n)).cwiseAbs().maxCoeff();
  return d1 <= tol && d2 <= tol;
}

QuantumState embed(const CVec& psi) { return QuantumState::from_complex(psi); }

RealIsoMatrix embed(const CMat& m) { return RealIsoMatrix::from_complex(m); }

CVec extract(const QuantumState& psi) { return psi.to_complex(); }

CMat extract(const RealIsoMatrix& m) { return m.to_complex(); }

QuantumState apply(const RealIsoMatrix& m, const QuantumState& psi) {
  if (m.data().cols() != psi.data().size()) {
    throw std::invalid_argument("apply: dimension mismatch");
  }
  return QuantumState(m.data() * psi.data());
}

RealIsoMatrix hamiltonian(double flux, const FluxoniumParams& p) {
  CMat h(2, 2);
  h << Complex(kPi * p.f_q, 0.0), Complex(kPi * flux, 0.0),
       Complex(kPi * flux, 0.0), Complex(-kPi * p.f_q, 0.0);
  return embed(h);
}

RealIsoMatrix propagator(const RealIsoMatrix& h, double dt) {
  if (!std::isfinite(dt)) throw std::invalid_argument("propagator: dt must be finite");
  const CMat hc = extract(h);
  const int n = static_cast<int>(hc.rows());
  if (n == 2) {
    // Hermitian 2x2: H = c0*I + v.sigma, exp(-iHdt) in closed form.
    const double c0 = 0.5 * (hc(0, 0).real() + hc(1, 1).real());
    const double vx = hc(0, 1).real();
    const double vy = -hc(0, 1).imag();
    const double vz = 0.5 * (hc(0, 0).real() - hc(1, 1).real());
    const double r = std::sqrt(vx * vx + vy * vy + vz * vz);
    const double theta = r * dt;
    const double c = std::cos(theta);
    const double s = sinc(theta) * dt;  // sin(theta)/r, well-defined at r = 0
    const Complex phase = std::exp(Complex(0.0, -c0 * dt));
    CMat u(2, 2);
    u(0, 0) = phase * Complex(c, -s * vz);
    u(0, 1) = phase * Complex(s * vy, -s * vx);
    u(1, 0) = phase * Complex(-s * vy, -s * vx);
    u(1, 1) = phase * Complex(c, s * vz);
    return embed(u);
  }
  return embed(expm(CMat(Complex(0.0, -dt) * hc)));
}

double fidelity(const QuantumState& a, const QuantumState& b) {
  if (a.levels() != b.levels()) throw std::invalid_argument("fidelity: dimension mismatch");
  constexpr double kNormTol = 1e-6;
  if (std::abs(a.squared_norm() - 1.0) > kNormTol || std::abs(b.squared_norm() - 1.0) > kNormTol) {
    throw std::invalid_argument("fidelity: states must be normalized to 1e-6");
  }
  const int n = a.levels();
  const Vec& va = a.data();
  const Vec& vb = b.data();
  const double re = va.dot(vb);
  const double im = va.head(n).dot(vb.tail(n)) - va.tail(n).dot(vb.head(n));
  return re * re + im * im;
}

std::vector<QuantumState> operator_basis() {
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  CVec zero(2), one(2), plus_i(2), minus(2);
  zero << Complex(1, 0), Complex(0, 0);
  one << Complex(0, 0), Complex(1, 0);
  plus_i << Complex(inv_sqrt2, 0), Complex(0, inv_sqrt2);
  minus << Complex(inv_sqrt2, 0), Complex(-inv_sqrt2, 0);
  return {embed(zero), embed(one), embed(plus_i), embed(minus)};
}

GateTarget GateTarget::make(GateKind kind) {
  const double c = std::cos(kPi / 4.0);
  const double s = std::sin(kPi / 4.0);
  CMat u(2, 2);
  switch (kind) {
    case GateKind::kXHalf:
      u << Complex(c, 0), Complex(0, -s), Complex(0, -s), Complex(c, 0);
      break;
    case GateKind::kYHalf:
      u << Complex(c, 0), Complex(-s, 0), Complex(s, 0), Complex(c, 0);
      break;
    case GateKind::kZHalf:
      u << std::exp(Complex(0, -kPi / 4.0)), Complex(0, 0),
           Complex(0, 0), std::exp(Complex(0, kPi / 4.0));
      break;
    case GateKind::kCustom:
      throw std::invalid_argument("GateTarget::make: custom gates need a matrix");
  }
  return GateTarget(kind, std::move(u));
}

GateTarget GateTarget::custom(const CMat& u) {
  if (u.rows() != u.cols()) throw std::invalid_argument("GateTarget: matrix must be square");
  const CMat err = u.adjoint() * u - CMat::Identity(u.rows(), u.cols());
  if (err.cwiseAbs().maxCoeff() > 1e-12) {
    throw std::invalid_argument("GateTarget: matrix is not unitary to 1e-12");
  }
  return GateTarget(GateKind::kCustom, u);
}

QuantumState GateTarget::apply_to(const QuantumState& initial) const {
  return QuantumState::from_complex(u_ * initial.to_complex());
}

GateTarget GateTarget::power(int count) const {
  if (count < 0) throw std::invalid_argument("GateTarget::power: count must be >= 0");
  CMat acc = CMat::Identity(u_.rows(), u_.cols());
  for (int i = 0; i < count; ++i) acc = u_ * acc;
  return GateTarget(count == 1 ? kind_ : GateKind::kCustom, std::move(acc));
}

Eigen::Matrix4d two_level_propagator(double f_q, double flux, double dt) {
  const double wz = kPi * f_q * dt;
  const double wx = kPi * flux * dt;
  const double r = std::sqrt(wz * wz + wx * wx);
  const double c = std::cos(r);
  const double snc = sinc(r);
  const double sz = snc * wz;
  const double sx = snc * wx;
  // embed of [[c - i sz, -i sx], [-i sx, c + i sz]]
  Eigen::Matrix4d u;
  u << c, 0, sz, sx,
       0, c, sx, -sz,
       -sz, -sx, c, 0,
       -sx, sz, 0, c;
  return u;
}

Eigen::Matrix4d two_level_generator(double f_q, double flux) {
  const double wz = kPi * f_q;
  const double wx = kPi * flux;
  // embed of -i(wz sz + wx sx): purely imaginary, Im = -(wz sz + wx sx)
  Eigen::Matrix4d g;
  g << 0, 0, wz, wx,
       0, 0, wx, -wz,
       -wz, -wx, 0, 0,
       -wx, wz, 0, 0;
  return g;
}

Eigen::Matrix4d two_level_propagator_flux_grad(double f_q, double flux, double dt) {
  // Differentiate the closed-form Pauli rotation with respect to the flux.
  const double wz = kPi * f_q * dt;
  const double wx = kPi * flux * dt;
  const double r = std::sqrt(wz * wz + wx * wx);
  const double c = std::cos(r);
  const double snc = sinc(r);
  // q = (cos r - sinc r)/r^2, finite at r = 0.
  double q;
  if (r < 1e-4) {
    const double r2 = r * r;
    q = -1.0 / 3.0 + r2 / 30.0;
  } else {
    q = (c - snc) / (r * r);
  }
  const double sx = snc * wx;
  const double dc = -sx;                 // d cos(r) / d wx
  const double dsz = wz * wx * q;        // d (sinc(r) wz) / d wx
  const double dsx = snc + wx * wx * q;  // d (sinc(r) wx) / d wx
  const double scale = kPi * dt;         // d wx / d flux
  Eigen::Matrix4d g;
  g << dc, 0, dsz, dsx,
       0, dc, dsx, -dsz,
       -dsz, -dsx, dc, 0,
       -dsx, dsz, 0, dc;
  return scale * g;
}

Mat expm(const Mat& m) { return m.exp(); }

CMat expm(const CMat& m) { return m.exp(); }

}  // namespace fluxtraj
