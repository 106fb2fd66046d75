#include <cmath>
#include <complex>
#include <random>

#include "doctest.h"
#include "fluxtraj/quantum.hpp"
#include "fluxtraj/rng.hpp"

using namespace fluxtraj;

namespace {

CMat random_complex_matrix(std::mt19937_64& rng, int n) {
  NormalSampler normal(rng());
  CMat m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = std::complex<double>(normal(), normal());
  return m;
}

CVec random_complex_vector(std::mt19937_64& rng, int n) {
  NormalSampler normal(rng());
  CVec v(n);
  for (int i = 0; i < n; ++i) v(i) = std::complex<double>(normal(), normal());
  return v;
}

}  // namespace

TEST_SUITE_BEGIN("quantum");

TEST_CASE("embed of a real identity is the block-diagonal identity") {
  const RealIsoMatrix iso = embed(CMat(CMat::Identity(2, 2)));
  CHECK((iso.data() - Mat::Identity(4, 4)).norm() == doctest::Approx(0.0));
  CHECK(iso.is_block_symmetric());
}

TEST_CASE("embed of i*I has the antisymmetric block form") {
  CMat m = CMat::Zero(2, 2);
  m(0, 0) = m(1, 1) = std::complex<double>(0.0, 1.0);
  const Mat iso = embed(m).data();
  Mat expected(4, 4);
  expected << 0, 0, -1, 0,
              0, 0, 0, -1,
              1, 0, 0, 0,
              0, 1, 0, 0;
  CHECK((iso - expected).norm() == doctest::Approx(0.0));
}

TEST_CASE("embedded matrix-vector products match the complex computation") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const CMat h = random_complex_matrix(rng, 2);
    const CVec psi = random_complex_vector(rng, 2);
    const CVec direct = h * psi;
    const CVec via_iso = extract(apply(embed(h), embed(psi)));
    CHECK((direct - via_iso).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("embedding is a homomorphism for matrix products") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const CMat a = random_complex_matrix(rng, 2);
    const CMat b = random_complex_matrix(rng, 2);
    const Mat lhs = embed(CMat(a * b)).data();
    const Mat rhs = embed(a).data() * embed(b).data();
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("round trip embed -> extract is the identity") {
  std::mt19937_64 rng(13);
  const CMat m = random_complex_matrix(rng, 3);
  CHECK((extract(embed(m)) - m).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  const CVec v = random_complex_vector(rng, 3);
  CHECK((extract(embed(v)) - v).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("hamiltonian at zero flux is diagonal with +-pi f_q") {
  FluxoniumParams p;
  p.f_q = 0.0139;
  const CMat h = extract(hamiltonian(0.0, p));
  CHECK(h(0, 0).real() == doctest::Approx(kPi * p.f_q));
  CHECK(h(1, 1).real() == doctest::Approx(-kPi * p.f_q));
  CHECK(std::abs(h(0, 1)) == doctest::Approx(0.0));
}

TEST_CASE("hamiltonian at zero frequency is purely off-diagonal") {
  FluxoniumParams p;
  p.f_q = 0.0;
  const CMat h = extract(hamiltonian(0.3, p));
  CHECK(std::abs(h(0, 0)) == doctest::Approx(0.0));
  CHECK(h(0, 1).real() == doctest::Approx(kPi * 0.3));
}

TEST_CASE("hamiltonian eigenvalues are +-2 pi sqrt(f_q^2 + a^2)/2") {
  FluxoniumParams p;
  p.f_q = 0.0139;
  const double a = 0.21;
  const Eigen::SelfAdjointEigenSolver<CMat> es(extract(hamiltonian(a, p)));
  const double expected = kTwoPi * std::sqrt(p.f_q * p.f_q + a * a) / 2.0;
  CHECK(es.eigenvalues()(0) == doctest::Approx(-expected).epsilon(1e-12));
  CHECK(es.eigenvalues()(1) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("propagator at dt = 0 is the identity and composes with its inverse") {
  FluxoniumParams p;
  const RealIsoMatrix h = hamiltonian(0.17, p);
  CHECK((propagator(h, 0.0).data() - Mat::Identity(4, 4)).norm() == doctest::Approx(0.0));
  const Mat forward = propagator(h, 2.7).data();
  const Mat backward = propagator(h, -2.7).data();
  CHECK((forward * backward - Mat::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("propagator is orthogonal in the embedding") {
  FluxoniumParams p;
  const Mat u = propagator(hamiltonian(0.4, p), 1.3).data();
  CHECK((u.transpose() * u - Mat::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("idling for 1/(4 f_q) realizes Z/2 exactly") {
  FluxoniumParams p;
  p.f_q = 0.0139;
  const double gate_time = 1.0 / (4.0 * p.f_q);
  const CMat u = extract(propagator(hamiltonian(0.0, p), gate_time));
  const CMat z_half = GateTarget::make(GateKind::kZHalf).matrix();
  CHECK((u - z_half).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("propagator matches the analytic Rabi rotation") {
  FluxoniumParams p;
  p.f_q = 0.02;
  const double a = 0.11;
  const double t = 3.7;
  const double r = std::sqrt(p.f_q * p.f_q + a * a);
  const double theta = kPi * t * r;
  CMat expected(2, 2);
  const std::complex<double> i(0.0, 1.0);
  const double nz = p.f_q / r, nx = a / r;
  expected << std::cos(theta) - i * std::sin(theta) * nz, -i * std::sin(theta) * nx,
              -i * std::sin(theta) * nx, std::cos(theta) + i * std::sin(theta) * nz;
  const CMat u = extract(propagator(hamiltonian(a, p), t));
  CHECK((u - expected).cwiseAbs().maxCoeff() < 1e-13);
  // and the fixed-size kernel agrees with the general path
  CHECK((two_level_propagator(p.f_q, a, t) - propagator(hamiltonian(a, p), t).data())
            .cwiseAbs()
            .maxCoeff() < 1e-14);
}

TEST_CASE("propagator preserves norms") {
  std::mt19937_64 rng(14);
  FluxoniumParams p;
  for (int trial = 0; trial < 10; ++trial) {
    const QuantumState psi = QuantumState::from_complex(random_complex_vector(rng, 2)).normalized();
    const QuantumState out = apply(propagator(hamiltonian(0.33, p), 0.9), psi);
    CHECK(std::abs(out.squared_norm() - 1.0) < 1e-12);
  }
}

TEST_CASE("fidelity basics") {
  const auto basis = operator_basis();
  CHECK(fidelity(basis[0], basis[0]) == doctest::Approx(1.0));
  CHECK(fidelity(basis[0], basis[1]) == doctest::Approx(0.0));
  CVec plus(2);
  plus << std::complex<double>(1.0 / std::sqrt(2.0), 0.0), std::complex<double>(1.0 / std::sqrt(2.0), 0.0);
  CHECK(fidelity(basis[0], embed(plus)) == doctest::Approx(0.5));
}

TEST_CASE("fidelity rejects non-normalized input") {
  Vec bad(4);
  bad << 2.0, 0.0, 0.0, 0.0;
  CHECK_THROWS_AS(fidelity(QuantumState(bad), operator_basis()[0]), std::invalid_argument);
}

TEST_CASE("fidelity is global-phase invariant") {
  std::mt19937_64 rng(15);
  NormalSampler normal(16);
  for (int trial = 0; trial < 10; ++trial) {
    const QuantumState a = QuantumState::from_complex(random_complex_vector(rng, 2)).normalized();
    const QuantumState b = QuantumState::from_complex(random_complex_vector(rng, 2)).normalized();
    const double phase = 2.0 * kPi * normal();
    const CVec rotated = std::exp(std::complex<double>(0.0, phase)) * b.to_complex();
    CHECK(fidelity(a, b) == doctest::Approx(fidelity(a, QuantumState::from_complex(rotated))).epsilon(1e-14));
  }
}

TEST_CASE("operator basis spans the operator space") {
  const auto basis = operator_basis();
  for (const auto& s : basis) CHECK(std::abs(s.squared_norm() - 1.0) < 1e-14);
  // third state carries amplitude i/sqrt(2) on |1>
  CHECK(basis[2].data()(3) == doctest::Approx(1.0 / std::sqrt(2.0)));
  // Gram matrix of the vectorized outer products has full rank 4.
  Eigen::MatrixXcd vecs(4, 4);
  for (int i = 0; i < 4; ++i) {
    const CVec psi = basis[i].to_complex();
    const CMat outer = psi * psi.adjoint();
    vecs.col(i) = Eigen::Map<const CVec>(outer.data(), 4);
  }
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(vecs);
  CHECK(lu.rank() == 4);
}

TEST_CASE("gate targets are unitary and phase-fixed") {
  for (GateKind kind : {GateKind::kXHalf, GateKind::kYHalf, GateKind::kZHalf}) {
    const GateTarget g = GateTarget::make(kind);
    const CMat err = g.matrix().adjoint() * g.matrix() - CMat::Identity(2, 2);
    CHECK(err.cwiseAbs().maxCoeff() < 1e-15);
  }
  // custom gates validate unitarity
  CMat not_unitary = CMat::Identity(2, 2) * 1.1;
  CHECK_THROWS_AS(GateTarget::custom(not_unitary), std::invalid_argument);
  // Z/2 applied twice is Z = diag(-i, i)
  const GateTarget z = GateTarget::make(GateKind::kZHalf).power(2);
  CHECK(std::abs(z.matrix()(0, 0) - std::complex<double>(0.0, -1.0)) < 1e-15);
  CHECK(std::abs(z.matrix()(1, 1) - std::complex<double>(0.0, 1.0)) < 1e-15);
}

TEST_CASE("two_level_propagator_flux_grad matches finite differences and the augmented exponential") {
  const double f_q = 0.0139;
  for (double a : {0.0, 0.05, 0.37, -0.4}) {
    for (double dt : {0.05, 0.1, 0.73}) {
      const Eigen::Matrix4d analytic = two_level_propagator_flux_grad(f_q, a, dt);
      const double eps = 1e-6;
      const Eigen::Matrix4d fd =
          (two_level_propagator(f_q, a + eps, dt) - two_level_propagator(f_q, a - eps, dt)) /
          (2.0 * eps);
      CHECK((analytic - fd).cwiseAbs().maxCoeff() < 1e-8);

      // Independent exact route: exp([[X, X'], [0, X]]) top-right block.
      CMat x = std::complex<double>(0, -dt) * extract(hamiltonian(a, FluxoniumParams{f_q, 0.5}));
      CMat xp(2, 2);
      xp << 0.0, std::complex<double>(0, -kPi * dt), std::complex<double>(0, -kPi * dt), 0.0;
      CMat aug = CMat::Zero(4, 4);
      aug.topLeftCorner(2, 2) = x;
      aug.topRightCorner(2, 2) = xp;
      aug.bottomRightCorner(2, 2) = x;
      const CMat e = expm(aug);
      const Mat exact = embed(CMat(e.topRightCorner(2, 2))).data();
      CHECK((analytic - exact).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_SUITE_END();
