#include <cmath>
#include <memory>

#include "doctest.h"
#include "fluxtraj/dynamics.hpp"
#include "fluxtraj/rng.hpp"
#include "fluxtraj/unscented.hpp"

using namespace fluxtraj;

namespace {

std::shared_ptr<const T1Interpolant> shared_t1() {
  static auto t1 = std::make_shared<T1Interpolant>(synthetic_t1_curve());
  return t1;
}

// Central finite differences of the step, checked entrywise against the
// analytic Jacobians at 1e-5 relative tolerance.
void check_jacobians(const AugmentedDynamics& dyn, const Vec& x, const Vec& u,
                     double tol = 1e-5, double eps = 1e-6) {
  Mat a, b;
  dyn.jacobians(0, x, u, a, b);
  const int nx = dyn.state_dim();
  const int nu = dyn.control_dim();
  for (int j = 0; j < nx; ++j) {
    Vec xp = x, xm = x;
    xp(j) += eps;
    xm(j) -= eps;
    const Vec col = (dyn.step(0, xp, u) - dyn.step(0, xm, u)) / (2.0 * eps);
    for (int i = 0; i < nx; ++i) {
      CHECK(std::abs(col(i) - a(i, j)) <= tol * (1.0 + std::abs(a(i, j))));
    }
  }
  for (int j = 0; j < nu; ++j) {
    Vec up = u, um = u;
    up(j) += eps;
    um(j) -= eps;
    const Vec col = (dyn.step(0, x, up) - dyn.step(0, x, um)) / (2.0 * eps);
    for (int i = 0; i < nx; ++i) {
      CHECK(std::abs(col(i) - b(i, j)) <= tol * (1.0 + std::abs(b(i, j))));
    }
  }
}

Vec healthy_state(const AugmentedDynamics& dyn, std::uint64_t seed) {
  const StateLayout& l = dyn.config().layout;
  NormalSampler normal(seed);
  Vec x = Vec::Zero(l.dim());
  for (int i = 0; i < l.n_states; ++i) {
    Vec s(4);
    for (int c = 0; c < 4; ++c) s(c) = normal();
    x.segment<4>(l.state_offset(i)) = s / s.norm();
  }
  x(l.flux_int()) = 0.02 * normal();
  x(l.flux()) = 0.2 * normal();
  x(l.flux_deriv()) = 0.05 * normal();
  if (l.has_d1) x(l.d1()) = std::abs(normal()) * 1e-4;
  if (dyn.config().mode == RobustnessMode::kDerivative) {
    for (int ci = 0; ci < l.n_carriers; ++ci) {
      for (int order = 0; order < l.deriv_orders; ++order) {
        for (int c = 0; c < 4; ++c) x(l.deriv_offset(ci, order) + c) = 0.3 * normal();
      }
    }
  }
  if (dyn.config().mode == RobustnessMode::kSampling) {
    for (int j = 0; j < l.n_samples; ++j) {
      Vec s(4);
      for (int c = 0; c < 4; ++c) s(c) = normal();
      x.segment<4>(l.sample_offset(j)) = s / s.norm();
    }
  }
  if (dyn.config().mode == RobustnessMode::kUnscented) {
    const Vec carrier = x.segment<4>(l.state_offset(l.n_states - 1));
    const Mat p = 1e-4 * Mat::Identity(4, 4);
    const Mat lp = Mat::Identity(1, 1) * dyn.config().param_var;
    const SigmaPoints pts = unscented_resample(carrier, p, lp, dyn.config().beta);
    for (int j = 0; j < l.n_samples; ++j) {
      x.segment<4>(l.sample_offset(j)) = pts.states.col(j);
    }
  }
  return x;
}

}  // namespace

TEST_SUITE_BEGIN("dynamics");

TEST_CASE("idle step keeps the flux chain at zero and applies the idle propagator") {
  DynamicsConfig cfg;
  cfg.layout.n_states = 2;
  AugmentedDynamics dyn(cfg);
  Vec x = Vec::Zero(cfg.layout.dim());
  x(0) = 1.0;             // |0>
  x(5) = 1.0;             // |1>
  Vec u = Vec::Zero(1);
  const Vec out = dyn.step(0, x, u);
  CHECK(out(cfg.layout.flux_int()) == 0.0);
  CHECK(out(cfg.layout.flux()) == 0.0);
  CHECK(out(cfg.layout.flux_deriv()) == 0.0);
  const Eigen::Matrix4d p = two_level_propagator(cfg.params.f_q, 0.0, cfg.dt);
  CHECK((out.segment<4>(0) - p.col(0)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("one step from zero initial conditions integrates the flux chain exactly") {
  DynamicsConfig cfg;
  AugmentedDynamics dyn(cfg);
  Vec x = Vec::Zero(cfg.layout.dim());
  x(0) = 1.0;
  x(5) = 1.0;
  Vec u(1);
  u << 0.3;
  const double dt = cfg.dt;
  const Vec out = dyn.step(0, x, u);
  CHECK(out(cfg.layout.flux_deriv()) == doctest::Approx(0.3 * dt).epsilon(1e-15));
  CHECK(out(cfg.layout.flux()) == doctest::Approx(0.3 * dt * dt / 2.0).epsilon(1e-15));
  CHECK(out(cfg.layout.flux_int()) == doctest::Approx(0.3 * dt * dt * dt / 6.0).epsilon(1e-15));
}

TEST_CASE("state norms are preserved to 1e-12 per step and 1e-10 over 1e4 steps") {
  DynamicsConfig cfg;
  AugmentedDynamics dyn(cfg);
  Vec x = healthy_state(dyn, 5);
  Vec u(1);
  u << 0.05;
  const Vec once = dyn.step(0, x, u);
  CHECK(std::abs(once.segment<4>(0).squaredNorm() - 1.0) < 1e-12);
  for (int k = 0; k < 10000; ++k) {
    // keep the flux bounded so the sweep stays physical
    u(0) = 0.02 * std::sin(0.01 * k);
    x = dyn.step(k, x, u);
    x(cfg.layout.flux_deriv()) *= 0.999;
  }
  CHECK(std::abs(x.segment<4>(0).squaredNorm() - 1.0) < 1e-10);
  CHECK(std::abs(x.segment<4>(4).squaredNorm() - 1.0) < 1e-10);
}

TEST_CASE("two half steps equal one full step for the quantum block at constant flux") {
  DynamicsConfig half_cfg;
  half_cfg.dt = 0.05;
  DynamicsConfig full_cfg;
  full_cfg.dt = 0.1;
  AugmentedDynamics half(half_cfg), full(full_cfg);
  Vec x = healthy_state(full, 6);
  x(full_cfg.layout.flux_deriv()) = 0.0;  // flux constant across the halves
  Vec u = Vec::Zero(1);
  const Vec via_half = half.step(0, half.step(0, x, u), u);
  const Vec direct = full.step(0, x, u);
  CHECK((via_half.segment<4>(0) - direct.segment<4>(0)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((via_half.segment<4>(4) - direct.segment<4>(4)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("time-optimal stepping with sqrt_dt = sqrt(s) matches fixed dt = s bit for bit") {
  DynamicsConfig fixed_cfg;
  fixed_cfg.dt = 0.25;
  DynamicsConfig opt_cfg = fixed_cfg;
  opt_cfg.time_optimal = true;
  AugmentedDynamics fixed(fixed_cfg), timeopt(opt_cfg);
  const Vec x = healthy_state(fixed, 7);
  Vec u_fixed(1), u_opt(2);
  u_fixed << 0.17;
  u_opt << 0.17, 0.5;  // sqrt(0.25) is exact
  const Vec a = fixed.step(0, x, u_fixed);
  const Vec b = timeopt.step(0, x, u_opt);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("d1 accumulates dt/T1 and is monotone") {
  DynamicsConfig cfg;
  cfg.layout.has_d1 = true;
  cfg.t1 = shared_t1();
  AugmentedDynamics dyn(cfg);
  Vec x = healthy_state(dyn, 8);
  x(cfg.layout.d1()) = 0.0;
  Vec u(1);
  u << 0.1;
  double prev = 0.0;
  for (int k = 0; k < 50; ++k) {
    x = dyn.step(k, x, u);
    CHECK(x(cfg.layout.d1()) >= prev);
    prev = x(cfg.layout.d1());
  }
}

TEST_CASE("step_d1 matches a quadrature oracle for piecewise-constant flux") {
  const T1Interpolant t1 = synthetic_t1_curve();
  CHECK(step_d1(0.2, 0.0, t1) == 0.0);
  // constant T1 over total time t gives t / T1
  const T1Interpolant flat = T1Interpolant::fit({-0.5, -0.2, 0.2, 0.5}, {50.0, 50.0, 50.0, 50.0});
  double acc = 0.0;
  for (int k = 0; k < 100; ++k) acc += step_d1(0.1, 0.1, flat);
  CHECK(acc == doctest::Approx(10.0 / 50.0e3).epsilon(1e-12));
  // piecewise-constant pulse against a fine-subdivision quadrature oracle
  NormalSampler normal(9);
  double sum_steps = 0.0;
  double oracle = 0.0;
  for (int k = 0; k < 200; ++k) {
    const double a = 0.4 * std::sin(0.05 * k) + 0.02 * normal();
    sum_steps += step_d1(a, 0.1, t1);
    // the flux is constant over the step, so the fine oracle subdivides it
    for (int s = 0; s < 64; ++s) oracle += (0.1 / 64.0) / t1.t1_ns(a);
  }
  CHECK(sum_steps == doctest::Approx(oracle).epsilon(1e-6));
}

TEST_CASE("step_derivative: zero source stays zero; idle sensitivity grows linearly") {
  FluxoniumParams p;
  const RealIsoMatrix h = hamiltonian(0.0, p);
  const RealIsoMatrix dh_zero = embed(CMat(CMat::Zero(2, 2)));
  const RealIsoMatrix dh_fq = embed(CMat(kPi * (CMat(2, 2) << 1, 0, 0, -1).finished()));
  QuantumState psi = operator_basis()[3];  // (|0> - |1>)/sqrt(2)
  QuantumState dpsi(Vec(Vec::Zero(4)));
  QuantumState dzero = dpsi;
  const double dt = 0.1;
  const int steps = 500;
  for (int k = 0; k < steps; ++k) {
    dzero = step_derivative(dzero, psi, h, dh_zero, dt);
    dpsi = step_derivative(dpsi, psi, h, dh_fq, dt);
    psi = apply(propagator(h, dt), psi);
  }
  CHECK(dzero.data().cwiseAbs().maxCoeff() == 0.0);
  // commuting case: ||d_psi(T)|| = pi * T exactly, linear in T
  CHECK(std::sqrt(dpsi.squared_norm()) == doctest::Approx(kPi * steps * dt).epsilon(1e-10));
}

TEST_CASE("Lawson-Euler matches a finite-difference oracle on exact propagators") {
  // Constant, non-commuting H; the oracle evolves with f_q +/- eps using the
  // exact propagator and differences the final states.
  FluxoniumParams p;
  p.f_q = 0.0139;
  const double a = 0.01;
  const double dt = 0.025;
  const double total = 2.0;
  const int steps = static_cast<int>(total / dt);
  const double eps = 1e-6;

  QuantumState psi = operator_basis()[3];
  QuantumState dpsi(Vec(Vec::Zero(4)));
  const RealIsoMatrix h = hamiltonian(a, p);
  CMat sz(2, 2);
  sz << kPi, 0, 0, -kPi;
  const RealIsoMatrix dh = embed(sz);
  QuantumState plus = psi, minus = psi;
  FluxoniumParams pp = p, pm = p;
  pp.f_q += eps;
  pm.f_q -= eps;
  const RealIsoMatrix up = propagator(hamiltonian(a, pp), dt);
  const RealIsoMatrix um = propagator(hamiltonian(a, pm), dt);
  const RealIsoMatrix u0 = propagator(h, dt);
  for (int k = 0; k < steps; ++k) {
    dpsi = step_derivative(dpsi, psi, h, dh, dt);
    psi = apply(u0, psi);
    plus = apply(up, plus);
    minus = apply(um, minus);
  }
  const Vec oracle = (plus.data() - minus.data()) / (2.0 * eps);
  const double rel = (dpsi.data() - oracle).norm() / oracle.norm();
  CHECK(rel < 1e-3);
}

TEST_CASE("analytic jacobians match finite differences in every mode") {
  Vec u1(1), u2(2);
  u1 << 0.21;
  u2 << 0.21, std::sqrt(0.1);

  SUBCASE("base pair") {
    DynamicsConfig cfg;
    AugmentedDynamics dyn(cfg);
    check_jacobians(dyn, healthy_state(dyn, 21), u1);
  }
  SUBCASE("base pair, time optimal") {
    DynamicsConfig cfg;
    cfg.time_optimal = true;
    AugmentedDynamics dyn(cfg);
    check_jacobians(dyn, healthy_state(dyn, 22), u2);
  }
  SUBCASE("depolarization accumulator") {
    DynamicsConfig cfg;
    cfg.layout.has_d1 = true;
    cfg.t1 = shared_t1();
    AugmentedDynamics dyn(cfg);
    check_jacobians(dyn, healthy_state(dyn, 23), u1);
  }
  SUBCASE("depolarization, time optimal") {
    DynamicsConfig cfg;
    cfg.layout.has_d1 = true;
    cfg.t1 = shared_t1();
    cfg.time_optimal = true;
    AugmentedDynamics dyn(cfg);
    check_jacobians(dyn, healthy_state(dyn, 24), u2);
  }
  SUBCASE("derivative method, order 2, frequency target") {
    DynamicsConfig cfg;
    cfg.layout.n_states = 3;
    cfg.layout.n_carriers = 1;
    cfg.layout.deriv_orders = 2;
    cfg.mode = RobustnessMode::kDerivative;
    AugmentedDynamics dyn(cfg);
    check_jacobians(dyn, healthy_state(dyn, 25), u1);
  }
  SUBCASE("derivative method, flux target, time optimal") {
    DynamicsConfig cfg;
    cfg.layout.n_states = 3;
    cfg.layout.n_carriers = 1;
    cfg.layout.deriv_orders = 1;
    cfg.mode = RobustnessMode::kDerivative;
    cfg.target = UncertainTarget::kFluxAdditive;
    cfg.time_optimal = true;
    AugmentedDynamics dyn(cfg);
    check_jacobians(dyn, healthy_state(dyn, 26), u2);
  }
  SUBCASE("sampling method, frequency target") {
    DynamicsConfig cfg;
    cfg.layout.n_states = 4;
    cfg.layout.n_samples = 8;
    cfg.mode = RobustnessMode::kSampling;
    cfg.sigma = 1.39e-4;
    AugmentedDynamics dyn(cfg);
    check_jacobians(dyn, healthy_state(dyn, 27), u1);
  }
  SUBCASE("sampling method, flux target") {
    DynamicsConfig cfg;
    cfg.layout.n_states = 4;
    cfg.layout.n_samples = 8;
    cfg.mode = RobustnessMode::kSampling;
    cfg.target = UncertainTarget::kFluxAdditive;
    cfg.sigma = 2.5e-5;
    AugmentedDynamics dyn(cfg);
    check_jacobians(dyn, healthy_state(dyn, 28), u1);
  }
  SUBCASE("unscented method, flux target") {
    DynamicsConfig cfg;
    cfg.layout.n_states = 3;
    cfg.layout.n_samples = 10;
    cfg.mode = RobustnessMode::kUnscented;
    cfg.target = UncertainTarget::kFluxAdditive;
    cfg.beta = 1.0;
    cfg.p1 = 1e-8 * Mat::Identity(4, 4);
    cfg.param_var = 2.5e-5 * 2.5e-5;
    AugmentedDynamics dyn(cfg);
    // the Cholesky chain has curvature ~1/spread^2; a finer step keeps the
    // finite-difference truncation below the tolerance
    check_jacobians(dyn, healthy_state(dyn, 29), u1, 2e-5, 1e-7);
  }
  SUBCASE("unscented method, frequency target, time optimal") {
    DynamicsConfig cfg;
    cfg.layout.n_states = 3;
    cfg.layout.n_samples = 10;
    cfg.mode = RobustnessMode::kUnscented;
    cfg.beta = 1.0;
    cfg.p1 = 1e-8 * Mat::Identity(4, 4);
    cfg.param_var = 1.39e-4 * 1.39e-4;
    AugmentedDynamics dyn(cfg);
    check_jacobians(dyn, healthy_state(dyn, 30), u2, 2e-5, 1e-7);
  }
}

TEST_CASE("quantum block of A is the propagator; flux chain is the polynomial stencil") {
  DynamicsConfig cfg;
  AugmentedDynamics dyn(cfg);
  const Vec x = healthy_state(dyn, 31);
  Vec u(1);
  u << -0.4;
  Mat a, b;
  dyn.jacobians(0, x, u, a, b);
  const Eigen::Matrix4d p = two_level_propagator(cfg.params.f_q, x(cfg.layout.flux()), cfg.dt);
  CHECK((a.block<4, 4>(0, 0) - p).cwiseAbs().maxCoeff() == 0.0);
  const double dt = cfg.dt;
  CHECK(a(cfg.layout.flux_int(), cfg.layout.flux()) == dt);
  CHECK(a(cfg.layout.flux_int(), cfg.layout.flux_deriv()) == dt * dt / 2.0);
  CHECK(a(cfg.layout.flux(), cfg.layout.flux_deriv()) == dt);
  CHECK(b(cfg.layout.flux_int(), 0) == dt * dt * dt / 6.0);
  CHECK(b(cfg.layout.flux(), 0) == dt * dt / 2.0);
  CHECK(b(cfg.layout.flux_deriv(), 0) == dt);
}

TEST_CASE("full-rollout sensitivity matches finite differences of the rollout") {
  // Smooth random control sequence; the Lawson-Euler chain at the final
  // step is compared against central differences of the whole rollout.
  DynamicsConfig cfg;
  cfg.layout.n_states = 3;
  cfg.layout.n_carriers = 1;
  cfg.layout.deriv_orders = 1;
  cfg.mode = RobustnessMode::kDerivative;
  cfg.dt = 0.025;
  AugmentedDynamics dyn(cfg);

  const int steps = 200;
  NormalSampler normal(32);
  std::vector<double> accel(steps);
  for (int k = 0; k < steps; ++k) accel[k] = 0.002 * std::sin(0.07 * k) + 0.0002 * normal();

  Vec x = Vec::Zero(cfg.layout.dim());
  x(0) = 1.0;
  x(5) = 1.0;
  const auto carrier = operator_basis()[3];
  x.segment<4>(8) = carrier.data();

  auto rollout_final = [&](double fq_offset) {
    DynamicsConfig c2 = cfg;
    c2.mode = RobustnessMode::kNone;
    c2.layout.n_carriers = 0;
    c2.layout.deriv_orders = 0;
    c2.params.f_q += fq_offset;
    AugmentedDynamics d2(c2);
    Vec s = Vec::Zero(c2.layout.dim());
    s.head(12) = x.head(12);
    Vec u(1);
    for (int k = 0; k < steps; ++k) {
      u << accel[k];
      s = d2.step(k, s, u);
    }
    return Vec(s.segment<4>(8));
  };

  Vec s = x;
  Vec u(1);
  for (int k = 0; k < steps; ++k) {
    u << accel[k];
    s = dyn.step(k, s, u);
  }
  const double eps = 1e-6;
  const Vec fd = (rollout_final(eps) - rollout_final(-eps)) / (2.0 * eps);
  const Vec le = s.segment<4>(cfg.layout.deriv_offset(0, 0));
  CHECK((le - fd).norm() / fd.norm() < 1e-3);
}

TEST_SUITE_END();
