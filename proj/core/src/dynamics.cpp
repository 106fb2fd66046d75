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

#include "fluxtraj/dynamics.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>

#include "fluxtraj/unscented.hpp"

namespace fluxtraj {

namespace {

using Mat4 = Eigen::Matrix4d;
using Vec4 = Eigen::Vector4d;

// Number of sigma points for the embedded unscented step (2n = 4, d = 1).
constexpr int kSigmaCount = 10;
constexpr int kSigmaHalf = 5;
constexpr double kCholJitter = 1e-12;

// Lower-triangular map in the Cholesky differential dL = L Phi(L^-1 dA L^-T).
Mat4 phi_lower(const Mat4& m) {
  Mat4 out = m.template triangularView<Eigen::StrictlyLower>();
  out.diagonal() = 0.5 * m.diagonal();
  return out;
}

}  // namespace

QuantumState step_derivative(const QuantumState& dpsi, const QuantumState& psi,
                             const RealIsoMatrix& h, const RealIsoMatrix& dh, double dt) {
  if (dt <= 0.0) throw std::invalid_argument("step_derivative: dt must be positive");
  const RealIsoMatrix p = propagator(h, dt);
  const int n = psi.levels();
  // N = -i (dH) psi, assembled in the isomorphism.
  const Vec w = dh.data() * psi.data();
  Vec source(2 * n);
  source.head(n) = w.tail(n);
  source.tail(n) = -w.head(n);
  return QuantumState(p.data() * (dpsi.data() + dt * source));
}

double step_d1(double flux, double dt, const T1Interpolant& t1) {
  if (dt < 0.0) throw std::invalid_argument("step_d1: dt must be >= 0");
  const double t1_ns = t1.t1_ns(flux);
  if (!(t1_ns > 0.0)) throw std::runtime_error("step_d1: T1 model returned a non-positive value");
  return dt / t1_ns;
}

AugmentedDynamics::AugmentedDynamics(DynamicsConfig cfg) : cfg_(std::move(cfg)) {
  const StateLayout& l = cfg_.layout;
  if (l.n_states < 1) throw std::invalid_argument("AugmentedDynamics: need at least one state");
  if (l.has_d1 && !cfg_.t1) {
    throw std::invalid_argument("AugmentedDynamics: d1 accumulation requires a T1 interpolant");
  }
  if (cfg_.mode == RobustnessMode::kDerivative) {
    if (l.n_carriers < 1 || l.n_carriers > l.n_states || l.deriv_orders < 1) {
      throw std::invalid_argument("AugmentedDynamics: derivative mode needs carriers and orders");
    }
  }
  if (cfg_.mode == RobustnessMode::kSampling && l.n_samples != 2 * l.n_states) {
    throw std::invalid_argument("AugmentedDynamics: sampling mode appends two samples per state");
  }
  if (cfg_.mode == RobustnessMode::kUnscented) {
    if (l.n_samples != kSigmaCount) {
      throw std::invalid_argument("AugmentedDynamics: unscented mode uses 4n + 2d = 10 samples");
    }
    if (cfg_.param_var <= 0.0 || cfg_.p1.rows() != 4 || cfg_.p1.cols() != 4) {
      throw std::invalid_argument("AugmentedDynamics: unscented mode needs SPD P1 and L");
    }
  }
  // embed(-i dH/d lambda): pi*sz for frequency uncertainty, pi*sx for flux.
  deriv_source_ = cfg_.target == UncertainTarget::kQubitFrequency ? two_level_generator(1.0, 0.0)
                                                                  : two_level_generator(0.0, 1.0);
}

double AugmentedDynamics::step_duration(const Vec& u) const {
  return cfg_.time_optimal ? u(1) * u(1) : cfg_.dt;
}

Vec AugmentedDynamics::step(int /*k*/, const Vec& x, const Vec& u) const {
  if (!x.allFinite() || !u.allFinite()) {
    throw std::runtime_error("AugmentedDynamics::step: non-finite input");
  }
  const StateLayout& l = cfg_.layout;
  const double dt = step_duration(u);
  const double accel = u(0);
  const double a0 = x(l.flux());
  const double da0 = x(l.flux_deriv());

  Vec out = x;
  // Exact polynomial flux chain with accel constant over the step.
  out(l.flux_int()) += a0 * dt + da0 * dt * dt / 2.0 + accel * dt * dt * dt / 6.0;
  out(l.flux()) += da0 * dt + accel * dt * dt / 2.0;
  out(l.flux_deriv()) += accel * dt;

  const Mat4 p = two_level_propagator(cfg_.params.f_q, a0, dt);
  for (int i = 0; i < l.n_states; ++i) {
    out.segment<4>(l.state_offset(i)) = p * x.segment<4>(l.state_offset(i));
  }

  if (l.has_d1) out(l.d1()) += step_d1(a0, dt, *cfg_.t1);

  if (cfg_.mode == RobustnessMode::kDerivative) {
    for (int ci = 0; ci < l.n_carriers; ++ci) {
      const int carrier_state = l.n_states - l.n_carriers + ci;
      for (int order = 0; order < l.deriv_orders; ++order) {
        const Vec4 prev = order == 0 ? Vec4(x.segment<4>(l.state_offset(carrier_state)))
                                     : Vec4(x.segment<4>(l.deriv_offset(ci, order - 1)));
        const Vec4 cur = x.segment<4>(l.deriv_offset(ci, order));
        out.segment<4>(l.deriv_offset(ci, order)) =
            p * (cur + dt * (order + 1) * (deriv_source_ * prev));
      }
    }
  } else if (cfg_.mode == RobustnessMode::kSampling) {
    for (int i = 0; i < l.n_states; ++i) {
      for (int s = 0; s < 2; ++s) {
        const double shift = s == 0 ? cfg_.sigma : -cfg_.sigma;
        const Mat4 ps = cfg_.target == UncertainTarget::kQubitFrequency
                            ? two_level_propagator(cfg_.params.f_q + shift, a0, dt)
                            : two_level_propagator(cfg_.params.f_q, a0 + shift, dt);
        const int j = 2 * i + s;
        out.segment<4>(l.sample_offset(j)) = ps * x.segment<4>(l.sample_offset(j));
      }
    }
  } else if (cfg_.mode == RobustnessMode::kUnscented) {
    // Moments of the stored samples, resample, normalize, propagate.
    Mat samples(4, kSigmaCount);
    for (int j = 0; j < kSigmaCount; ++j) samples.col(j) = x.segment<4>(l.sample_offset(j));
    const SigmaMoments m = unscented_moments(samples, cfg_.beta);
    Eigen::LLT<Mat4> llt(Mat4(m.cov + kCholJitter * Mat4::Identity()));
    if (llt.info() != Eigen::Success) {
      throw std::runtime_error("AugmentedDynamics: sample covariance factorization failed");
    }
    const Mat4 s_factor = llt.matrixL();
    const double lam = cfg_.beta * std::sqrt(cfg_.param_var);
    for (int j = 0; j < kSigmaCount; ++j) {
      const double sign = j < kSigmaHalf ? 1.0 : -1.0;
      const int col = j % kSigmaHalf;
      Vec4 r = m.mean;
      double shift = 0.0;
      if (col < 4) {
        r += sign * cfg_.beta * s_factor.col(col);
      } else {
        shift = sign * lam;
      }
      r /= r.norm();
      const Mat4 pj = cfg_.target == UncertainTarget::kQubitFrequency
                          ? two_level_propagator(cfg_.params.f_q + shift, a0, dt)
                          : two_level_propagator(cfg_.params.f_q, a0 + shift, dt);
      out.segment<4>(l.sample_offset(j)) = pj * r;
    }
  }
  return out;
}

void AugmentedDynamics::jacobians(int /*k*/, const Vec& x, const Vec& u, Mat& a_mat,
                                  Mat& b_mat) const {
  const StateLayout& l = cfg_.layout;
  const int nx = l.dim();
  const int nu = control_dim();
  const double dt = step_duration(u);
  const double accel = u(0);
  const double a0 = x(l.flux());
  const double da0 = x(l.flux_deriv());
  const int fcol = l.flux();

  a_mat = Mat::Zero(nx, nx);
  b_mat = Mat::Zero(nx, nu);

  // Flux chain rows.
  a_mat(l.flux_int(), l.flux_int()) = 1.0;
  a_mat(l.flux_int(), l.flux()) = dt;
  a_mat(l.flux_int(), l.flux_deriv()) = dt * dt / 2.0;
  a_mat(l.flux(), l.flux()) = 1.0;
  a_mat(l.flux(), l.flux_deriv()) = dt;
  a_mat(l.flux_deriv(), l.flux_deriv()) = 1.0;
  b_mat(l.flux_int(), 0) = dt * dt * dt / 6.0;
  b_mat(l.flux(), 0) = dt * dt / 2.0;
  b_mat(l.flux_deriv(), 0) = dt;

  const Mat4 p = two_level_propagator(cfg_.params.f_q, a0, dt);
  const Mat4 dp = two_level_propagator_flux_grad(cfg_.params.f_q, a0, dt);
  for (int i = 0; i < l.n_states; ++i) {
    const int off = l.state_offset(i);
    a_mat.block<4, 4>(off, off) = p;
    a_mat.block<4, 1>(off, fcol) = dp * x.segment<4>(off);
  }

  if (l.has_d1) {
    const double t1_ns = cfg_.t1->t1_ns(a0);
    a_mat(l.d1(), l.d1()) = 1.0;
    a_mat(l.d1(), fcol) = -dt * cfg_.t1->t1_ns_derivative(a0) / (t1_ns * t1_ns);
  }

  if (cfg_.mode == RobustnessMode::kDerivative) {
    for (int ci = 0; ci < l.n_carriers; ++ci) {
      const int carrier_state = l.n_states - l.n_carriers + ci;
      for (int order = 0; order < l.deriv_orders; ++order) {
        const int off = l.deriv_offset(ci, order);
        const int prev_off =
            order == 0 ? l.state_offset(carrier_state) : l.deriv_offset(ci, order - 1);
        const double w = dt * (order + 1);
        const Vec4 prev = x.segment<4>(prev_off);
        const Vec4 cur = x.segment<4>(off);
        a_mat.block<4, 4>(off, off) = p;
        a_mat.block<4, 4>(off, prev_off) += p * (w * deriv_source_);
        a_mat.block<4, 1>(off, fcol) = dp * (cur + w * (deriv_source_ * prev));
      }
    }
  } else if (cfg_.mode == RobustnessMode::kSampling) {
    for (int i = 0; i < l.n_states; ++i) {
      for (int s = 0; s < 2; ++s) {
        const double shift = s == 0 ? cfg_.sigma : -cfg_.sigma;
        const double fq_s = cfg_.target == UncertainTarget::kQubitFrequency
                                ? cfg_.params.f_q + shift
                                : cfg_.params.f_q;
        const double a_s = cfg_.target == UncertainTarget::kFluxAdditive ? a0 + shift : a0;
        const Mat4 ps = two_level_propagator(fq_s, a_s, dt);
        const Mat4 dps = two_level_propagator_flux_grad(fq_s, a_s, dt);
        const int off = l.sample_offset(2 * i + s);
        a_mat.block<4, 4>(off, off) = ps;
        a_mat.block<4, 1>(off, fcol) = dps * x.segment<4>(off);
      }
    }
  } else if (cfg_.mode == RobustnessMode::kUnscented) {
    unscented_jacobian(x, dt, a_mat);
  }

  if (cfg_.time_optimal) {
    // d f / d sqrt_dt = (d f / d dt) * 2 sqrt_dt, assembled per block.
    const double chain = 2.0 * u(1);
    Vec dfdt = Vec::Zero(nx);
    dfdt(l.flux_int()) = a0 + da0 * dt + accel * dt * dt / 2.0;
    dfdt(l.flux()) = da0 + accel * dt;
    dfdt(l.flux_deriv()) = accel;

    const Mat4 g = two_level_generator(cfg_.params.f_q, a0);
    for (int i = 0; i < l.n_states; ++i) {
      const int off = l.state_offset(i);
      dfdt.segment<4>(off) = g * (p * x.segment<4>(off));
    }
    if (l.has_d1) dfdt(l.d1()) = 1.0 / cfg_.t1->t1_ns(a0);
    if (cfg_.mode == RobustnessMode::kDerivative) {
      for (int ci = 0; ci < l.n_carriers; ++ci) {
        const int carrier_state = l.n_states - l.n_carriers + ci;
        for (int order = 0; order < l.deriv_orders; ++order) {
          const int off = l.deriv_offset(ci, order);
          const int prev_off =
              order == 0 ? l.state_offset(carrier_state) : l.deriv_offset(ci, order - 1);
          const Vec4 prev = x.segment<4>(prev_off);
          const Vec4 cur = x.segment<4>(off);
          const Vec4 src = deriv_source_ * prev;
          dfdt.segment<4>(off) = g * (p * (cur + dt * (order + 1) * src)) + p * ((order + 1) * src);
        }
      }
    } else if (cfg_.mode == RobustnessMode::kSampling) {
      for (int i = 0; i < l.n_states; ++i) {
        for (int s = 0; s < 2; ++s) {
          const double shift = s == 0 ? cfg_.sigma : -cfg_.sigma;
          const double fq_s = cfg_.target == UncertainTarget::kQubitFrequency
                                  ? cfg_.params.f_q + shift
                                  : cfg_.params.f_q;
          const double a_s = cfg_.target == UncertainTarget::kFluxAdditive ? a0 + shift : a0;
          const Mat4 gs = two_level_generator(fq_s, a_s);
          const Mat4 ps = two_level_propagator(fq_s, a_s, dt);
          const int off = l.sample_offset(2 * i + s);
          dfdt.segment<4>(off) = gs * (ps * x.segment<4>(off));
        }
      }
    } else if (cfg_.mode == RobustnessMode::kUnscented) {
      // Duration enters the unscented step through the propagation only.
      const Vec stepped = step(0, x, u);
      const double lam = cfg_.beta * std::sqrt(cfg_.param_var);
      for (int j = 0; j < kSigmaCount; ++j) {
        const int col = j % kSigmaHalf;
        double shift = 0.0;
        if (col >= 4) shift = (j < kSigmaHalf ? 1.0 : -1.0) * lam;
        const double fq_s = cfg_.target == UncertainTarget::kQubitFrequency
                                ? cfg_.params.f_q + shift
                                : cfg_.params.f_q;
        const double a_s = cfg_.target == UncertainTarget::kFluxAdditive ? a0 + shift : a0;
        const Mat4 gj = two_level_generator(fq_s, a_s);
        const int off = l.sample_offset(j);
        dfdt.segment<4>(off) = gj * stepped.segment<4>(off);
      }
    }
    b_mat.col(1) = chain * dfdt;
  }
}

void AugmentedDynamics::unscented_jacobian(const Vec& x, double dt, Mat& a_mat) const {
  const StateLayout& l = cfg_.layout;
  const double a0 = x(l.flux());
  const double beta = cfg_.beta;
  const double lam = beta * std::sqrt(cfg_.param_var);

  Mat samples(4, kSigmaCount);
  for (int j = 0; j < kSigmaCount; ++j) samples.col(j) = x.segment<4>(l.sample_offset(j));
  const SigmaMoments m = unscented_moments(samples, beta);
  Eigen::LLT<Mat4> llt(Mat4(m.cov + kCholJitter * Mat4::Identity()));
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("AugmentedDynamics: sample covariance factorization failed");
  }
  const Mat4 s_factor = llt.matrixL();

  // Per-sample propagators (lambda = 0 shared, +/- lambda for param columns)
  // and resampled pre-propagation states.
  std::array<Mat4, kSigmaCount> prop;
  std::array<Mat4, kSigmaCount> dprop;
  std::array<Vec4, kSigmaCount> resampled;   // normalized
  std::array<Vec4, kSigmaCount> raw;         // before normalization
  for (int j = 0; j < kSigmaCount; ++j) {
    const double sign = j < kSigmaHalf ? 1.0 : -1.0;
    const int col = j % kSigmaHalf;
    Vec4 r = m.mean;
    double shift = 0.0;
    if (col < 4) {
      r += sign * beta * s_factor.col(col);
    } else {
      shift = sign * lam;
    }
    raw[j] = r;
    resampled[j] = r / r.norm();
    const double fq_s = cfg_.target == UncertainTarget::kQubitFrequency ? cfg_.params.f_q + shift
                                                                        : cfg_.params.f_q;
    const double a_s = cfg_.target == UncertainTarget::kFluxAdditive ? a0 + shift : a0;
    prop[j] = two_level_propagator(fq_s, a_s, dt);
    dprop[j] = two_level_propagator_flux_grad(fq_s, a_s, dt);
  }

  // Flux column: the resampling does not involve the flux.
  for (int j = 0; j < kSigmaCount; ++j) {
    a_mat.block<4, 1>(l.sample_offset(j), l.flux()) = dprop[j] * resampled[j];
  }

  // Sample-block columns: differentiate mean -> covariance -> Cholesky ->
  // resample -> normalize -> propagate with respect to every input entry.
  const Mat centered = samples.colwise() - m.mean;
  const Mat4 s_inv = s_factor.inverse();
  for (int i = 0; i < kSigmaCount; ++i) {
    for (int comp = 0; comp < 4; ++comp) {
      Vec4 e = Vec4::Zero();
      e(comp) = 1.0;
      const Vec4 dmean = e / kSigmaCount;
      const Vec4 dev = centered.col(i);
      // dP = (1/2 beta^2)(e dev^T + dev e^T); the mean-shift terms cancel.
      const Mat4 dcov = (e * dev.transpose() + dev * e.transpose()) / (2.0 * beta * beta);
      const Mat4 ds = s_factor * phi_lower(s_inv * dcov * s_inv.transpose());
      for (int j = 0; j < kSigmaCount; ++j) {
        const double sign = j < kSigmaHalf ? 1.0 : -1.0;
        const int col = j % kSigmaHalf;
        Vec4 dr = dmean;
        if (col < 4) dr += sign * beta * ds.col(col);
        const double norm = raw[j].norm();
        const Vec4 n = resampled[j];
        const Vec4 dn = (dr - n * n.dot(dr)) / norm;
        a_mat.block<4, 1>(l.sample_offset(j), l.sample_offset(i) + comp) = prop[j] * dn;
      }
    }
  }
}

}  // namespace fluxtraj
