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

#include "fluxtraj/problems.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "fluxtraj/rng.hpp"

namespace fluxtraj {

namespace {

// |<T|psi>|^2 = psi^T W psi with W = T T^T + (J T)(J T)^T, J = embed(i I).
Eigen::Matrix4d fidelity_form(const QuantumState& target) {
  const Vec& t = target.data();
  Vec jt(4);
  jt << -t(2), -t(3), t(0), t(1);
  return t * t.transpose() + jt * jt.transpose();
}

class TargetStateConstraint final : public Constraint {
 public:
  TargetStateConstraint(std::vector<int> offsets, std::vector<QuantumState> targets,
                        double tolerance)
      : offsets_(std::move(offsets)), targets_(std::move(targets)), tolerance_(tolerance) {}

  std::string name() const override { return "target-state (7e)"; }
  ConstraintKind kind() const override {
    return tolerance_ > 0.0 ? ConstraintKind::kInequality : ConstraintKind::kEquality;
  }
  int rows() const override {
    const int base = 4 * static_cast<int>(offsets_.size());
    return tolerance_ > 0.0 ? 2 * base : base;
  }
  bool applies_to(int k, int horizon) const override { return k == horizon - 1; }

  Vec eval(int, const Vec& x, const Vec&) const override {
    const int base = 4 * static_cast<int>(offsets_.size());
    Vec diff(base);
    for (std::size_t i = 0; i < offsets_.size(); ++i) {
      diff.segment<4>(4 * i) = x.segment<4>(offsets_[i]) - targets_[i].data();
    }
    if (tolerance_ <= 0.0) return diff;
    Vec v(2 * base);
    v.head(base) = diff.array() - tolerance_;
    v.tail(base) = -diff.array() - tolerance_;
    return v;
  }

  void jacobian(int, const Vec& x, const Vec&, Mat& cx, Mat& cu) const override {
    const int base = 4 * static_cast<int>(offsets_.size());
    Mat d = Mat::Zero(base, x.size());
    for (std::size_t i = 0; i < offsets_.size(); ++i) {
      for (int c = 0; c < 4; ++c) d(4 * i + c, offsets_[i] + c) = 1.0;
    }
    if (tolerance_ <= 0.0) {
      cx = std::move(d);
    } else {
      cx = Mat::Zero(2 * base, x.size());
      cx.topRows(base) = d;
      cx.bottomRows(base) = -d;
    }
    cu = Mat::Zero(0, 0);
  }

 private:
  std::vector<int> offsets_;
  std::vector<QuantumState> targets_;
  double tolerance_;
};

class FluxTerminalConstraint final : public Constraint {
 public:
  FluxTerminalConstraint(int flux_int_idx, int flux_idx)
      : flux_int_idx_(flux_int_idx), flux_idx_(flux_idx) {}
  std::string name() const override { return "zero net flux and terminal flux (7f)"; }
  ConstraintKind kind() const override { return ConstraintKind::kEquality; }
  int rows() const override { return 2; }
  bool applies_to(int k, int horizon) const override { return k == horizon - 1; }
  Vec eval(int, const Vec& x, const Vec&) const override {
    Vec v(2);
    v << x(flux_int_idx_), x(flux_idx_);
    return v;
  }
  void jacobian(int, const Vec& x, const Vec&, Mat& cx, Mat& cu) const override {
    cx = Mat::Zero(2, x.size());
    cx(0, flux_int_idx_) = 1.0;
    cx(1, flux_idx_) = 1.0;
    cu = Mat::Zero(0, 0);
  }

 private:
  int flux_int_idx_;
  int flux_idx_;
};

class NormalizationConstraint final : public Constraint {
 public:
  explicit NormalizationConstraint(std::vector<int> offsets) : offsets_(std::move(offsets)) {}
  std::string name() const override { return "state normalization (7g)"; }
  ConstraintKind kind() const override { return ConstraintKind::kEquality; }
  int rows() const override { return static_cast<int>(offsets_.size()); }
  bool applies_to(int k, int) const override { return k >= 1; }
  Vec eval(int, const Vec& x, const Vec&) const override {
    Vec v(rows());
    for (std::size_t i = 0; i < offsets_.size(); ++i) {
      v(i) = x.segment<4>(offsets_[i]).squaredNorm() - 1.0;
    }
    return v;
  }
  void jacobian(int, const Vec& x, const Vec&, Mat& cx, Mat& cu) const override {
    cx = Mat::Zero(rows(), x.size());
    for (std::size_t i = 0; i < offsets_.size(); ++i) {
      cx.block<1, 4>(i, offsets_[i]) = 2.0 * x.segment<4>(offsets_[i]).transpose();
    }
    cu = Mat::Zero(0, 0);
  }
  void add_weighted_hessian(int, const Vec&, const Vec&, const Vec& w, Mat& hxx,
                            Mat&) const override {
    for (std::size_t i = 0; i < offsets_.size(); ++i) {
      for (int c = 0; c < 4; ++c) hxx(offsets_[i] + c, offsets_[i] + c) += 2.0 * w(i);
    }
  }

 private:
  std::vector<int> offsets_;
};

class FluxBoundConstraint final : public Constraint {
 public:
  FluxBoundConstraint(int flux_idx, double bound) : flux_idx_(flux_idx), bound_(bound) {}
  std::string name() const override { return "flux amplitude bound (7h)"; }
  ConstraintKind kind() const override { return ConstraintKind::kInequality; }
  int rows() const override { return 2; }
  bool applies_to(int k, int) const override { return k >= 1; }
  Vec eval(int, const Vec& x, const Vec&) const override {
    Vec v(2);
    v << x(flux_idx_) - bound_, -x(flux_idx_) - bound_;
    return v;
  }
  void jacobian(int, const Vec& x, const Vec&, Mat& cx, Mat& cu) const override {
    cx = Mat::Zero(2, x.size());
    cx(0, flux_idx_) = 1.0;
    cx(1, flux_idx_) = -1.0;
    cu = Mat::Zero(0, 0);
  }

 private:
  int flux_idx_;
  double bound_;
};

class StepDurationBound final : public Constraint {
 public:
  StepDurationBound(double dt_min, double dt_max) : dt_min_(dt_min), dt_max_(dt_max) {}
  std::string name() const override { return "step duration bounds"; }
  ConstraintKind kind() const override { return ConstraintKind::kInequality; }
  int rows() const override { return 2; }
  bool applies_to(int k, int horizon) const override { return k < horizon - 1; }
  Vec eval(int, const Vec&, const Vec& u) const override {
    const double dt = u(1) * u(1);
    Vec v(2);
    v << dt - dt_max_, dt_min_ - dt;
    return v;
  }
  void jacobian(int, const Vec& x, const Vec& u, Mat& cx, Mat& cu) const override {
    cx = Mat::Zero(2, x.size());
    cu = Mat::Zero(2, u.size());
    cu(0, 1) = 2.0 * u(1);
    cu(1, 1) = -2.0 * u(1);
  }
  void add_weighted_hessian(int, const Vec&, const Vec&, const Vec& w, Mat&,
                            Mat& huu) const override {
    huu(1, 1) += 2.0 * (w(0) - w(1));
  }

 private:
  double dt_min_, dt_max_;
};

/// Sampling-method robustness cost: sum over samples of b (1 - psi^T W psi)
/// with W built from the parent state's target.
class SampleInfidelityCost final : public StageCost {
 public:
  SampleInfidelityCost(std::vector<int> offsets, std::vector<Eigen::Matrix4d> forms, double weight)
      : offsets_(std::move(offsets)), forms_(std::move(forms)), weight_(weight) {}

  double value(int, const Vec& x, const Vec*) const override {
    double acc = 0.0;
    for (std::size_t j = 0; j < offsets_.size(); ++j) {
      const Eigen::Vector4d psi = x.segment<4>(offsets_[j]);
      acc += weight_ * (1.0 - psi.dot(forms_[j] * psi));
    }
    return acc;
  }

  void expand(int, const Vec& x, const Vec*, Vec& lx, Mat& lxx, Vec&, Mat&) const override {
    for (std::size_t j = 0; j < offsets_.size(); ++j) {
      const Eigen::Vector4d psi = x.segment<4>(offsets_[j]);
      lx.segment<4>(offsets_[j]) -= 2.0 * weight_ * (forms_[j] * psi);
      lxx.block<4, 4>(offsets_[j], offsets_[j]) -= 2.0 * weight_ * forms_[j];
    }
  }

 private:
  std::vector<int> offsets_;
  std::vector<Eigen::Matrix4d> forms_;
  double weight_;
};

/// Unscented-method robustness cost: sum over samples of c |psi_j - psi|^2
/// against the nominal carrier state.
class SampleDeviationCost final : public StageCost {
 public:
  SampleDeviationCost(std::vector<int> sample_offsets, int nominal_offset, double weight)
      : offsets_(std::move(sample_offsets)), nominal_(nominal_offset), weight_(weight) {}

  double value(int, const Vec& x, const Vec*) const override {
    double acc = 0.0;
    const Eigen::Vector4d nom = x.segment<4>(nominal_);
    for (int off : offsets_) acc += weight_ * (x.segment<4>(off) - nom).squaredNorm();
    return acc;
  }

  void expand(int, const Vec& x, const Vec*, Vec& lx, Mat& lxx, Vec&, Mat&) const override {
    const Eigen::Vector4d nom = x.segment<4>(nominal_);
    for (int off : offsets_) {
      const Eigen::Vector4d diff = x.segment<4>(off) - nom;
      lx.segment<4>(off) += 2.0 * weight_ * diff;
      lx.segment<4>(nominal_) -= 2.0 * weight_ * diff;
      for (int c = 0; c < 4; ++c) {
        lxx(off + c, off + c) += 2.0 * weight_;
        lxx(nominal_ + c, nominal_ + c) += 2.0 * weight_;
        lxx(off + c, nominal_ + c) -= 2.0 * weight_;
        lxx(nominal_ + c, off + c) -= 2.0 * weight_;
      }
    }
  }

 private:
  std::vector<int> offsets_;
  int nominal_;
  double weight_;
};

/// Restricts a cost term to a single step.
class AtStepCost final : public StageCost {
 public:
  AtStepCost(std::shared_ptr<const StageCost> inner, int step)
      : inner_(std::move(inner)), step_(step) {}
  double value(int k, const Vec& x, const Vec* u) const override {
    return k == step_ ? inner_->value(k, x, u) : 0.0;
  }
  void expand(int k, const Vec& x, const Vec* u, Vec& lx, Mat& lxx, Vec& lu,
              Mat& luu) const override {
    if (k == step_) inner_->expand(k, x, u, lx, lxx, lu, luu);
  }

 private:
  std::shared_ptr<const StageCost> inner_;
  int step_;
};

QuantumState robustness_carrier() {
  return operator_basis()[3];  // (|0> - |1>)/sqrt(2)
}

double active_sigma(const GateProblemConfig& cfg, const FluxoniumParams& p) {
  if (cfg.uncertainty_target == UncertainTarget::kQubitFrequency) {
    return cfg.sigma_fq >= 0.0 ? cfg.sigma_fq : 0.01 * p.f_q;
  }
  return cfg.sigma_a;
}

}  // namespace

GateProblem build_gate_problem(const GateProblemConfig& cfg, const FluxoniumParams& p) {
  if (cfg.gate_time <= 0.0) throw std::invalid_argument("gate problem: gate_time must be > 0");
  if (cfg.dt <= 0.0) throw std::invalid_argument("gate problem: dt must be > 0");
  if (cfg.derivative_order < 1 || cfg.derivative_order > 2) {
    throw std::invalid_argument("gate problem: derivative order must be 1 or 2");
  }
  if (cfg.robustness == RobustnessMode::kSampling &&
      cfg.initial_states != InitialStateSet::kOperatorBasis) {
    throw std::invalid_argument(
        "gate problem: the sampling method requires the operator-basis initial states");
  }
  if (cfg.depolarization && !cfg.t1) {
    throw std::invalid_argument("gate problem: depolarization needs a T1 interpolant");
  }

  GateProblem gp;
  gp.params = p;
  gp.config = cfg;
  gp.target = cfg.gate == GateKind::kCustom ? GateTarget::custom(cfg.custom_matrix)
                                            : GateTarget::make(cfg.gate);

  // Fit the grid so that the horizon lands exactly on the gate time.
  const int steps = std::max(1, static_cast<int>(std::lround(cfg.gate_time / cfg.dt)));
  gp.dt = cfg.gate_time / steps;

  // Transfer states, plus one robustness carrier for the unscented and
  // derivative methods.
  const auto basis = operator_basis();
  std::vector<QuantumState> states;
  if (cfg.initial_states == InitialStateSet::kPair) {
    states = {basis[0], basis[1]};
  } else {
    states = basis;
  }
  const int n_transfer = static_cast<int>(states.size());
  const bool has_carrier = cfg.robustness == RobustnessMode::kUnscented ||
                           cfg.robustness == RobustnessMode::kDerivative;
  if (has_carrier) states.push_back(robustness_carrier());

  StateLayout layout;
  layout.n_states = static_cast<int>(states.size());
  layout.has_d1 = cfg.depolarization;
  if (cfg.robustness == RobustnessMode::kDerivative) {
    layout.n_carriers = 1;
    layout.deriv_orders = cfg.derivative_order;
  } else if (cfg.robustness == RobustnessMode::kSampling) {
    layout.n_samples = 2 * layout.n_states;
  } else if (cfg.robustness == RobustnessMode::kUnscented) {
    layout.n_samples = 10;
  }
  gp.layout = layout;
  gp.initial_quantum_states = states;
  for (const auto& s : states) gp.target_states.push_back(gp.target.apply_to(s));

  DynamicsConfig dyn_cfg;
  dyn_cfg.params = p;
  dyn_cfg.layout = layout;
  dyn_cfg.dt = gp.dt;
  dyn_cfg.time_optimal = cfg.time_optimal;
  dyn_cfg.mode = cfg.robustness;
  dyn_cfg.target = cfg.uncertainty_target;
  dyn_cfg.sigma = active_sigma(cfg, p);
  dyn_cfg.t1 = cfg.t1;
  Mat p1;
  double param_var = 0.0;
  if (cfg.robustness == RobustnessMode::kUnscented) {
    p1 = cfg.unscented.p1.size() > 0 ? cfg.unscented.p1 : Mat(1e-8 * Mat::Identity(4, 4));
    const double sigma = active_sigma(cfg, p);
    param_var = cfg.unscented.param_var > 0.0 ? cfg.unscented.param_var : sigma * sigma;
    dyn_cfg.beta = cfg.unscented.beta;
    dyn_cfg.p1 = p1;
    dyn_cfg.param_var = param_var;
  }

  TrajectoryProblem& prob = gp.problem;
  prob.horizon = steps + 1;
  prob.dynamics = std::make_shared<AugmentedDynamics>(dyn_cfg);

  // Initial augmented state: transfer states, zero flux moments, zero d1 and
  // sensitivities, robustness samples around their parents.
  Vec x1 = Vec::Zero(layout.dim());
  for (int i = 0; i < layout.n_states; ++i) {
    x1.segment<4>(layout.state_offset(i)) = states[i].data();
  }
  if (cfg.robustness == RobustnessMode::kSampling) {
    for (int i = 0; i < layout.n_states; ++i) {
      x1.segment<4>(layout.sample_offset(2 * i)) = states[i].data();
      x1.segment<4>(layout.sample_offset(2 * i + 1)) = states[i].data();
    }
  } else if (cfg.robustness == RobustnessMode::kUnscented) {
    const SigmaPoints pts =
        unscented_resample(states.back().data(), p1, Mat(param_var * Mat::Identity(1, 1)),
                           dyn_cfg.beta);
    for (int j = 0; j < layout.n_samples; ++j) {
      x1.segment<4>(layout.sample_offset(j)) = pts.states.col(j);
    }
  }
  prob.initial_state = std::move(x1);

  // Running cost (7a): diagonal weights against the target augmented state.
  Vec wx = Vec::Zero(layout.dim());
  Vec xt = Vec::Zero(layout.dim());
  for (int i = 0; i < layout.n_states; ++i) {
    wx.segment<4>(layout.state_offset(i)).setConstant(cfg.weights.q_state);
    xt.segment<4>(layout.state_offset(i)) = gp.target_states[i].data();
  }
  wx(layout.flux_int()) = cfg.weights.q_flux_int;
  wx(layout.flux()) = cfg.weights.q_flux;
  wx(layout.flux_deriv()) = cfg.weights.q_flux_deriv;
  if (layout.has_d1) wx(layout.d1()) = cfg.weights.q_d1;
  if (cfg.robustness == RobustnessMode::kDerivative) {
    for (int order = 0; order < layout.deriv_orders; ++order) {
      wx.segment<4>(layout.deriv_offset(0, order)).setConstant(cfg.weights.q_deriv);
    }
  }
  Vec wu(prob.dynamics->control_dim());
  wu(0) = cfg.weights.r_accel;
  if (cfg.time_optimal) wu(1) = cfg.weights.r_sqrt_dt;
  prob.costs.push_back(std::make_shared<DiagQuadCost>(wx, xt, wu));

  if (cfg.robustness == RobustnessMode::kDerivative && cfg.weights.q_deriv_terminal > 1.0) {
    Vec wterm = Vec::Zero(layout.dim());
    for (int order = 0; order < layout.deriv_orders; ++order) {
      wterm.segment<4>(layout.deriv_offset(0, order))
          .setConstant(cfg.weights.q_deriv * (cfg.weights.q_deriv_terminal - 1.0));
    }
    prob.costs.push_back(std::make_shared<AtStepCost>(
        std::make_shared<DiagQuadCost>(wterm, xt, Vec(Vec::Zero(prob.dynamics->control_dim()))),
        steps));
  }

  if (cfg.robustness == RobustnessMode::kSampling) {
    std::vector<int> offsets;
    std::vector<Eigen::Matrix4d> forms;
    for (int i = 0; i < layout.n_states; ++i) {
      const Eigen::Matrix4d w = fidelity_form(gp.target_states[i]);
      offsets.push_back(layout.sample_offset(2 * i));
      forms.push_back(w);
      offsets.push_back(layout.sample_offset(2 * i + 1));
      forms.push_back(w);
    }
    prob.costs.push_back(std::make_shared<SampleInfidelityCost>(offsets, forms,
                                                                cfg.weights.b_sample));
    if (cfg.weights.b_sample_terminal > 1.0) {
      prob.costs.push_back(std::make_shared<AtStepCost>(
          std::make_shared<SampleInfidelityCost>(
              offsets, forms, cfg.weights.b_sample * (cfg.weights.b_sample_terminal - 1.0)),
          steps));
    }
  } else if (cfg.robustness == RobustnessMode::kUnscented) {
    std::vector<int> offsets;
    for (int j = 0; j < layout.n_samples; ++j) offsets.push_back(layout.sample_offset(j));
    const int nominal = layout.state_offset(layout.n_states - 1);
    prob.costs.push_back(
        std::make_shared<SampleDeviationCost>(offsets, nominal, cfg.weights.c_unscented));
    if (cfg.weights.c_unscented_terminal > 1.0) {
      prob.costs.push_back(std::make_shared<AtStepCost>(
          std::make_shared<SampleDeviationCost>(
              offsets, nominal, cfg.weights.c_unscented * (cfg.weights.c_unscented_terminal - 1.0)),
          steps));
    }
  }

  // Constraints (7e)-(7h); (7b)-(7d) hold by construction in the indirect
  // stage and through the pinned initial state in the direct stage.
  std::vector<int> transfer_offsets;
  std::vector<QuantumState> transfer_targets;
  for (int i = 0; i < n_transfer; ++i) {
    transfer_offsets.push_back(layout.state_offset(i));
    transfer_targets.push_back(gp.target_states[i]);
  }
  prob.constraints.push_back(std::make_shared<TargetStateConstraint>(
      transfer_offsets, transfer_targets, cfg.target_tolerance));
  prob.constraints.push_back(
      std::make_shared<FluxTerminalConstraint>(layout.flux_int(), layout.flux()));
  std::vector<int> norm_offsets;
  for (int i = 0; i < layout.n_states; ++i) norm_offsets.push_back(layout.state_offset(i));
  prob.constraints.push_back(std::make_shared<NormalizationConstraint>(std::move(norm_offsets)));
  prob.constraints.push_back(std::make_shared<FluxBoundConstraint>(layout.flux(), p.a_max));
  if (cfg.time_optimal) {
    prob.constraints.push_back(std::make_shared<StepDurationBound>(
        cfg.dt_min_factor * gp.dt, cfg.dt_max_factor * gp.dt));
  }
  return gp;
}

Trajectory GateProblem::initial_guess(std::uint64_t seed) const {
  Trajectory init;
  std::mt19937_64 engine(mix_seed(seed, 0x67756573ull));
  init.u.assign(problem.horizon - 1, Vec::Zero(problem.nu()));
  for (Vec& u : init.u) {
    u(0) = config.init_noise * (2.0 * uniform01(engine) - 1.0);
    if (config.time_optimal) u(1) = std::sqrt(dt);
  }
  return init;
}

std::string GateProblem::audit() const {
  std::ostringstream out;
  out << "gate problem audit\n";
  out << "  horizon: " << problem.horizon << " states, dt " << dt << " ns, gate time "
      << dt * (problem.horizon - 1) << " ns\n";
  out << "  dimensions: state " << problem.nx() << ", control " << problem.nu() << "\n";
  out << "  quantum states: " << layout.n_states << " (transfer "
      << static_cast<int>(transfer_count()) << (layout.n_states > transfer_count() ? ", +carrier" : "")
      << "), samples " << layout.n_samples << ", derivative orders " << layout.deriv_orders
      << ", d1 " << (layout.has_d1 ? "yes" : "no") << "\n";
  out << "  constraints (structural):\n";
  out << "    dynamics (7b): equality, steps 1.." << problem.horizon - 1
      << ", enforced by rollout / projection defects\n";
  out << "    initial states (7c): equality, step 1, pinned initial state\n";
  out << "    flux initial conditions (7d): equality, step 1, pinned initial state\n";
  out << "  constraints (registered):\n";
  for (const auto& con : problem.constraints) {
    int first = -1, last = -1, count = 0;
    for (int k = 0; k < problem.horizon; ++k) {
      if (con->applies_to(k, problem.horizon)) {
        if (first < 0) first = k;
        last = k;
        ++count;
      }
    }
    out << "    " << con->name() << ": "
        << (con->kind() == ConstraintKind::kEquality ? "equality" : "inequality") << ", rows "
        << con->rows() << ", steps " << first + 1 << ".." << last + 1 << " (" << count << ")\n";
  }
  out << "  cost terms: " << problem.costs.size() << "\n";
  const auto* quad = dynamic_cast<const DiagQuadCost*>(problem.costs.front().get());
  if (quad != nullptr) {
    out << "    quadratic weights: q_state " << config.weights.q_state << ", q_flux ("
        << config.weights.q_flux_int << ", " << config.weights.q_flux << ", "
        << config.weights.q_flux_deriv << "), r_accel " << config.weights.r_accel;
    if (layout.has_d1) out << ", q_d1 " << config.weights.q_d1;
    if (layout.deriv_orders > 0) out << ", q_deriv " << config.weights.q_deriv;
    if (config.robustness == RobustnessMode::kSampling)
      out << ", b_sample " << config.weights.b_sample;
    if (config.robustness == RobustnessMode::kUnscented)
      out << ", c_unscented " << config.weights.c_unscented;
    out << "\n";
  }
  return out.str();
}

GateProblem add_sampling(GateProblemConfig cfg, const FluxoniumParams& p, double sigma,
                         double b_weight) {
  cfg.robustness = RobustnessMode::kSampling;
  cfg.initial_states = InitialStateSet::kOperatorBasis;
  if (cfg.uncertainty_target == UncertainTarget::kQubitFrequency) {
    cfg.sigma_fq = sigma;
  } else {
    cfg.sigma_a = sigma;
  }
  cfg.weights.b_sample = b_weight;
  return build_gate_problem(cfg, p);
}

GateProblem add_unscented(GateProblemConfig cfg, const FluxoniumParams& p,
                          const UnscentedConfig& ucfg, double c_weight) {
  cfg.robustness = RobustnessMode::kUnscented;
  cfg.unscented = ucfg;
  cfg.weights.c_unscented = c_weight;
  return build_gate_problem(cfg, p);
}

GateProblem add_derivative(GateProblemConfig cfg, const FluxoniumParams& p, UncertainTarget target,
                           int order, double weight) {
  cfg.robustness = RobustnessMode::kDerivative;
  cfg.uncertainty_target = target;
  cfg.derivative_order = order;
  cfg.weights.q_deriv = weight;
  return build_gate_problem(cfg, p);
}

GateProblem add_depolarization(GateProblemConfig cfg, const FluxoniumParams& p,
                               std::shared_ptr<const T1Interpolant> t1, double weight) {
  cfg.depolarization = true;
  cfg.t1 = std::move(t1);
  cfg.weights.q_d1 = weight;
  return build_gate_problem(cfg, p);
}

GateProblem add_time_optimal(GateProblemConfig cfg, const FluxoniumParams& p, double dt_min_factor,
                             double dt_max_factor) {
  cfg.time_optimal = true;
  cfg.dt_min_factor = dt_min_factor;
  cfg.dt_max_factor = dt_max_factor;
  return build_gate_problem(cfg, p);
}

}  // namespace fluxtraj
