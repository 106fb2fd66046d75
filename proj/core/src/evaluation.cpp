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

#include "fluxtraj/evaluation.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "fluxtraj/rng.hpp"

namespace fluxtraj {

namespace {

using Complex = std::complex<double>;
using Mat4 = Eigen::Matrix4d;
using Vec4 = Eigen::Vector4d;

constexpr std::uint64_t kHaarStream = 0x68616172ull;
constexpr std::uint64_t kNoiseStream = 0x666c7578ull;

CMat pauli_hamiltonian(double f_q, double flux) {
  CMat h(2, 2);
  h << Complex(kPi * f_q, 0), Complex(kPi * flux, 0), Complex(kPi * flux, 0),
      Complex(-kPi * f_q, 0);
  return h;
}

/// Column-major vectorization: vec(A rho B) = (B^T kron A) vec(rho).
CMat lindblad_generator(double f_q, double flux, double gamma) {
  const CMat h = pauli_hamiltonian(f_q, flux);
  const CMat eye = CMat::Identity(2, 2);
  auto kron = [](const CMat& a, const CMat& b) {
    CMat out(4, 4);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
    return out;
  };
  CMat gen = Complex(0, -1) * (kron(eye, h) - kron(h.transpose(), eye));
  CMat spl(2, 2), smi(2, 2);
  spl << 0, 1, 0, 0;  // (sx + i sy)/2
  smi << 0, 0, 1, 0;  // (sx - i sy)/2
  for (const CMat& l : {spl, smi}) {
    const CMat ldl = l.adjoint() * l;
    gen += gamma * (kron(l.conjugate(), l) -
                    0.5 * (kron(eye, ldl) + kron(ldl.transpose(), eye)));
  }
  return gen;
}

CVec vec_of(const CMat& rho) { return Eigen::Map<const CVec>(rho.data(), 4); }

CMat mat_of(const CVec& v) { return Eigen::Map<const CMat>(v.data(), 2, 2); }

struct PulseGrid {
  const Pulse* pulse;
  int steps() const { return pulse->steps(); }
  double flux(int k) const { return pulse->flux[k]; }
  double dt(int k) const { return pulse->dt[k]; }
};

std::vector<Mat4> cache_propagators(const PulseGrid& grid, double f_q) {
  std::vector<Mat4> props(grid.steps());
  for (int k = 0; k < grid.steps(); ++k) {
    props[k] = two_level_propagator(f_q, grid.flux(k), grid.dt(k));
  }
  return props;
}

double infidelity(const Vec4& psi, const Vec4& target) {
  const double re = psi.dot(target);
  const double im = psi(0) * target(2) + psi(1) * target(3) - psi(2) * target(0) -
                    psi(3) * target(1);
  return 1.0 - (re * re + im * im);
}

std::string perturbation_name(Perturbation kind) {
  switch (kind) {
    case Perturbation::kNone: return "none";
    case Perturbation::kDetuning: return "detuning";
    case Perturbation::kPinkNoise: return "pink_noise";
    case Perturbation::kDepolarization: return "depolarization";
  }
  return "unknown";
}

void validate_pulse(const Pulse& pulse) {
  if (pulse.rows() < 2) throw std::invalid_argument("evaluation: pulse needs at least two rows");
  for (int k = 0; k < pulse.steps(); ++k) {
    if (!(pulse.dt[k] > 0.0)) {
      throw std::invalid_argument("evaluation: pulse step durations must be positive");
    }
  }
}

}  // namespace

DensityMatrix::DensityMatrix(CMat rho) : rho_(std::move(rho)) {
  if (rho_.rows() != 2 || rho_.cols() != 2) {
    throw std::invalid_argument("DensityMatrix: expected 2x2");
  }
  if ((rho_ - rho_.adjoint()).cwiseAbs().maxCoeff() > 1e-12) {
    throw std::invalid_argument("DensityMatrix: not Hermitian to 1e-12");
  }
  if (std::abs(rho_.trace().real() - 1.0) > 1e-9 || std::abs(rho_.trace().imag()) > 1e-12) {
    throw std::invalid_argument("DensityMatrix: trace must be 1 to 1e-9");
  }
  if (min_eigenvalue() < -1e-9) {
    throw std::invalid_argument("DensityMatrix: negative eigenvalue beyond tolerance");
  }
}

DensityMatrix DensityMatrix::pure(const QuantumState& psi) {
  const CVec v = psi.to_complex();
  return DensityMatrix(CMat(v * v.adjoint()));
}

double DensityMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<CMat> es(rho_, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double DensityMatrix::fidelity_with(const QuantumState& psi) const {
  const CVec v = psi.to_complex();
  return (v.adjoint() * rho_ * v)(0, 0).real();
}

DensityMatrix lindblad_step(const DensityMatrix& rho, double flux, double dt,
                            const LindbladModel& model, const FluxoniumParams& p) {
  if (!(dt > 0.0)) throw std::invalid_argument("lindblad_step: dt must be positive");
  double gamma = 0.0;
  if (model.t1) {
    const double t1_ns = model.t1->t1_ns(flux);
    if (!(t1_ns > 0.0)) throw std::runtime_error("lindblad_step: non-positive T1");
    gamma = 1.0 / (2.0 * t1_ns);
  }
  const CMat prop = expm(CMat(dt * lindblad_generator(p.f_q, flux, gamma)));
  return DensityMatrix(mat_of(prop * vec_of(rho.data())));
}

QuantumState random_state(std::uint64_t seed) {
  NormalSampler normal(mix_seed(seed, kHaarStream));
  Vec v(4);
  for (int i = 0; i < 4; ++i) v(i) = normal();
  return QuantumState(std::move(v)).normalized();
}

namespace {

ErrorReport evaluate(const Pulse& pulse, const GateTarget& target, int gate_count,
                     const EvalSpec& spec, const FluxoniumParams& p, const LindbladModel* model) {
  validate_pulse(pulse);
  if (gate_count < 1) throw std::invalid_argument("evaluation: gate_count must be >= 1");
  if (spec.n_states < 1) throw std::invalid_argument("evaluation: n_states must be >= 1");
  if (spec.kind == Perturbation::kDepolarization && (model == nullptr || !model->t1)) {
    throw std::invalid_argument("evaluation: depolarization needs a Lindblad model");
  }
  const PulseGrid grid{&pulse};
  const int steps = grid.steps();

  // Phase-fixed targets after each application.
  std::vector<CMat> powers(gate_count);
  CMat acc = target.matrix();
  for (int g = 0; g < gate_count; ++g) {
    powers[g] = acc;
    acc = target.matrix() * acc;
  }

  ErrorReport report;
  report.cumulative.assign(gate_count, 0.0);
  report.n_states = spec.n_states;
  report.gate_count = gate_count;
  report.seed = spec.seed;
  report.perturbation = perturbation_name(spec.kind);
  report.detuning = spec.kind == Perturbation::kDetuning ? spec.detuning : 0.0;
  report.sigma_a = spec.kind == Perturbation::kPinkNoise ? spec.sigma_a : 0.0;

  if (spec.kind == Perturbation::kNone || spec.kind == Perturbation::kDetuning) {
    std::vector<std::vector<Mat4>> prop_sets;
    if (spec.kind == Perturbation::kNone) {
      prop_sets.push_back(cache_propagators(grid, p.f_q));
    } else {
      prop_sets.push_back(cache_propagators(grid, p.f_q + spec.detuning));
      prop_sets.push_back(cache_propagators(grid, p.f_q - spec.detuning));
    }
    for (int s = 0; s < spec.n_states; ++s) {
      const QuantumState psi0 = random_state(mix_seed(spec.seed, s));
      std::vector<CVec> targets(gate_count);
      for (int g = 0; g < gate_count; ++g) targets[g] = powers[g] * psi0.to_complex();
      for (const auto& props : prop_sets) {
        Vec4 psi = psi0.data();
        for (int g = 0; g < gate_count; ++g) {
          for (int k = 0; k < steps; ++k) psi = props[k] * psi;
          const QuantumState t = QuantumState::from_complex(targets[g]);
          report.cumulative[g] += infidelity(psi, t.data()) / prop_sets.size();
        }
      }
    }
  } else if (spec.kind == Perturbation::kPinkNoise) {
    for (int s = 0; s < spec.n_states; ++s) {
      const QuantumState psi0 = random_state(mix_seed(spec.seed, s));
      PinkNoiseSpec noise_spec;
      noise_spec.sigma_a = spec.sigma_a;
      noise_spec.length = steps * gate_count;
      noise_spec.seed = mix_seed(spec.seed, mix_seed(kNoiseStream, s));
      noise_spec.filter_order = spec.noise_filter_order;
      const std::vector<double> noise = pink_noise(noise_spec);
      Vec4 psi = psi0.data();
      for (int g = 0; g < gate_count; ++g) {
        for (int k = 0; k < steps; ++k) {
          psi = two_level_propagator(p.f_q, grid.flux(k) + noise[g * steps + k], grid.dt(k)) * psi;
        }
        const QuantumState t = QuantumState::from_complex(CVec(powers[g] * psi0.to_complex()));
        report.cumulative[g] += infidelity(psi, t.data());
      }
    }
  } else {
    // Depolarization: exact exponential of the vectorized generator per step,
    // composed once into a whole-gate superoperator.
    CMat gate_superop = CMat::Identity(4, 4);
    for (int k = 0; k < steps; ++k) {
      const double t1_ns = model->t1->t1_ns(grid.flux(k));
      if (!(t1_ns > 0.0)) throw std::runtime_error("evaluation: non-positive T1");
      const CMat gen = lindblad_generator(p.f_q, grid.flux(k), 1.0 / (2.0 * t1_ns));
      gate_superop = expm(CMat(grid.dt(k) * gen)) * gate_superop;
    }
    for (int s = 0; s < spec.n_states; ++s) {
      const QuantumState psi0 = random_state(mix_seed(spec.seed, s));
      CVec rho = vec_of(DensityMatrix::pure(psi0).data());
      for (int g = 0; g < gate_count; ++g) {
        rho = gate_superop * rho;
        const CVec t = powers[g] * psi0.to_complex();
        const double fid = (t.adjoint() * mat_of(rho) * t)(0, 0).real();
        report.cumulative[g] += 1.0 - fid;
      }
    }
  }

  for (double& v : report.cumulative) v /= spec.n_states;
  report.mean_error = report.cumulative.back();
  return report;
}

}  // namespace

ErrorReport gate_error(const Pulse& pulse, const GateTarget& target, const EvalSpec& spec,
                       const FluxoniumParams& p, const LindbladModel* model) {
  return evaluate(pulse, target, 1, spec, p, model);
}

ErrorReport cumulative_error(const Pulse& pulse, const GateTarget& target, int gate_count,
                             const EvalSpec& spec, const FluxoniumParams& p,
                             const LindbladModel* model) {
  return evaluate(pulse, target, gate_count, spec, p, model);
}

std::vector<std::pair<double, double>> detuning_sweep(const Pulse& pulse, const GateTarget& target,
                                                      const std::vector<double>& detunings,
                                                      const EvalSpec& spec,
                                                      const FluxoniumParams& p) {
  std::vector<std::pair<double, double>> rows;
  rows.reserve(detunings.size());
  for (double delta : detunings) {
    EvalSpec local = spec;
    local.kind = delta == 0.0 ? Perturbation::kNone : Perturbation::kDetuning;
    local.detuning = delta;
    rows.emplace_back(delta, gate_error(pulse, target, local, p).mean_error);
  }
  return rows;
}

double d1_metric(const Pulse& pulse, const T1Interpolant& t1) {
  validate_pulse(pulse);
  double acc = 0.0;
  for (int k = 0; k < pulse.steps(); ++k) {
    const double t1_ns = t1.t1_ns(pulse.flux[k]);
    if (!(t1_ns > 0.0)) throw std::runtime_error("d1_metric: non-positive T1");
    acc += pulse.dt[k] / t1_ns;
  }
  return acc;
}

}  // namespace fluxtraj
