#include <cmath>
#include <memory>

#include "doctest.h"
#include "fluxtraj/rng.hpp"
#include "fluxtraj/solver.hpp"

using namespace fluxtraj;

namespace {

// Linear time-invariant dynamics for the oracle problems.
class LtiDynamics final : public DiscreteDynamics {
 public:
  LtiDynamics(Mat a, Mat b) : a_(std::move(a)), b_(std::move(b)) {}
  int state_dim() const override { return static_cast<int>(a_.rows()); }
  int control_dim() const override { return static_cast<int>(b_.cols()); }
  Vec step(int, const Vec& x, const Vec& u) const override { return a_ * x + b_ * u; }
  void jacobians(int, const Vec&, const Vec&, Mat& a, Mat& b) const override {
    a = a_;
    b = b_;
  }
  const Mat& a() const { return a_; }
  const Mat& b() const { return b_; }

 private:
  Mat a_, b_;
};

class TerminalStateEquality final : public Constraint {
 public:
  TerminalStateEquality(int index, double target) : index_(index), target_(target) {}
  std::string name() const override { return "terminal-state"; }
  ConstraintKind kind() const override { return ConstraintKind::kEquality; }
  int rows() const override { return 1; }
  bool applies_to(int k, int horizon) const override { return k == horizon - 1; }
  Vec eval(int, const Vec& x, const Vec&) const override {
    Vec v(1);
    v << x(index_) - target_;
    return v;
  }
  void jacobian(int, const Vec& x, const Vec&, Mat& cx, Mat& cu) const override {
    cx = Mat::Zero(1, x.size());
    cx(0, index_) = 1.0;
    cu = Mat::Zero(1, 0);
  }

 private:
  int index_;
  double target_;
};

class ControlBound final : public Constraint {
 public:
  explicit ControlBound(double bound) : bound_(bound) {}
  std::string name() const override { return "control-bound"; }
  ConstraintKind kind() const override { return ConstraintKind::kInequality; }
  int rows() const override { return 2; }
  bool applies_to(int k, int horizon) const override { return k < horizon - 1; }
  Vec eval(int, const Vec&, const Vec& u) const override {
    Vec v(2);
    v << u(0) - bound_, -u(0) - bound_;
    return v;
  }
  void jacobian(int, const Vec& x, const Vec&, Mat& cx, Mat& cu) const override {
    cx = Mat::Zero(2, x.size());
    cu = Mat::Zero(2, 1);
    cu(0, 0) = 1.0;
    cu(1, 0) = -1.0;
  }

 private:
  double bound_;
};

// Finite-horizon Riccati recursion for cost sum x^T Q x + u^T R u.
struct RiccatiSolution {
  std::vector<Mat> gain;  // u_k = -K_k x_k
};

RiccatiSolution riccati(const Mat& a, const Mat& b, const Mat& q, const Mat& r, int horizon) {
  RiccatiSolution sol;
  sol.gain.resize(horizon - 1);
  Mat p = q;
  for (int k = horizon - 2; k >= 0; --k) {
    const Mat k_gain = (r + b.transpose() * p * b).llt().solve(b.transpose() * p * a);
    sol.gain[k] = k_gain;
    p = q + a.transpose() * p * (a - b * k_gain);
    p = 0.5 * (p + p.transpose());
  }
  return sol;
}

TrajectoryProblem double_integrator_problem(int horizon, double q_pos, double q_vel, double r) {
  const double dt = 0.1;
  Mat a(2, 2), b(2, 1);
  a << 1, dt, 0, 1;
  b << dt * dt / 2.0, dt;
  TrajectoryProblem prob;
  prob.horizon = horizon;
  prob.dynamics = std::make_shared<LtiDynamics>(a, b);
  Vec wx(2), xt(2), wu(1);
  wx << q_pos, q_vel;
  xt << 0, 0;
  wu << r;
  prob.costs.push_back(std::make_shared<DiagQuadCost>(wx, xt, wu));
  prob.initial_state = (Vec(2) << 1.0, 0.0).finished();
  return prob;
}

Trajectory zero_controls(const TrajectoryProblem& prob) {
  Trajectory init;
  init.u.assign(prob.horizon - 1, Vec::Zero(prob.nu()));
  return init;
}

}  // namespace

TEST_SUITE_BEGIN("solver");

TEST_CASE("backward pass reproduces the Riccati gains on an LQR instance") {
  const int horizon = 50;
  TrajectoryProblem prob = double_integrator_problem(horizon, 1.0, 0.3, 0.1);
  const auto* lti = dynamic_cast<const LtiDynamics*>(prob.dynamics.get());
  Mat q = Mat::Zero(2, 2);
  q(0, 0) = 1.0;
  q(1, 1) = 0.3;
  Mat r = Mat::Identity(1, 1) * 0.1;
  const RiccatiSolution oracle = riccati(lti->a(), lti->b(), q, r, horizon);

  // Expansions about the zero trajectory.
  std::vector<ilqr::StageExpansion> stages(horizon - 1);
  for (auto& st : stages) {
    st.a = lti->a();
    st.b = lti->b();
    st.lx = Vec::Zero(2);
    st.lu = Vec::Zero(1);
    st.lxx = 2.0 * q;
    st.luu = 2.0 * r;
  }
  const auto res = ilqr::backward_pass(stages, Vec::Zero(2), Mat(2.0 * q), 0.0);
  REQUIRE(res.ok);
  for (int k = 0; k < horizon - 1; ++k) {
    CHECK((res.gain[k] + oracle.gain[k]).cwiseAbs().maxCoeff() < 1e-10);
  }
  // at the optimum (zero trajectory from zero state) the expected decrease vanishes
  CHECK(std::abs(res.dv1) < 1e-12);
}

TEST_CASE("iLQR reaches the Riccati optimum on the double integrator") {
  const int horizon = 50;
  TrajectoryProblem prob = double_integrator_problem(horizon, 1.0, 0.3, 0.1);
  const auto* lti = dynamic_cast<const LtiDynamics*>(prob.dynamics.get());
  Mat q = Mat::Zero(2, 2);
  q(0, 0) = 1.0;
  q(1, 1) = 0.3;
  Mat r = Mat::Identity(1, 1) * 0.1;
  const RiccatiSolution oracle = riccati(lti->a(), lti->b(), q, r, horizon);

  SolverOptions opts;
  const Trajectory sol = ilqr_solve(prob, zero_controls(prob), opts);
  CHECK(sol.stats.converged);

  // Roll the oracle policy forward and compare the control sequences.
  Vec x = prob.initial_state;
  for (int k = 0; k < horizon - 1; ++k) {
    const Vec u_star = -oracle.gain[k] * x;
    CHECK((sol.u[k] - u_star).cwiseAbs().maxCoeff() < 1e-6);
    x = lti->a() * x + lti->b() * u_star;
  }
}

TEST_CASE("iLQR on an exactly quadratic problem converges in one step") {
  TrajectoryProblem prob = double_integrator_problem(30, 2.0, 0.5, 0.2);
  SolverOptions opts;
  opts.max_ilqr_iterations = 1;
  const Trajectory one = ilqr_solve(prob, zero_controls(prob), opts);
  opts.max_ilqr_iterations = 100;
  const Trajectory full = ilqr_solve(prob, zero_controls(prob), opts);
  CHECK(total_cost(prob, one) == doctest::Approx(total_cost(prob, full)).epsilon(1e-10));
}

TEST_CASE("zero-gradient start returns the initial controls unchanged") {
  TrajectoryProblem prob = double_integrator_problem(20, 0.0, 0.0, 1e-12);
  prob.initial_state.setZero();
  SolverOptions opts;
  const Trajectory sol = ilqr_solve(prob, zero_controls(prob), opts);
  CHECK(sol.stats.ilqr_iterations <= 1);
  for (const Vec& u : sol.u) CHECK(u.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("zero gains leave the trajectory unchanged") {
  TrajectoryProblem prob = double_integrator_problem(10, 1.0, 1.0, 1.0);
  Trajectory base = rollout(prob, zero_controls(prob).u);
  ilqr::BackwardPassResult gains;
  gains.gain.assign(9, Mat::Zero(1, 2));
  gains.feedforward.assign(9, Vec::Zero(1));
  gains.ok = true;
  const Trajectory same = ilqr::rollout_with_gains(prob, base, gains, 1.0);
  for (int k = 0; k < 10; ++k) CHECK((same.x[k] - base.x[k]).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("alm reduces to ilqr when there are no constraints") {
  TrajectoryProblem prob = double_integrator_problem(25, 1.0, 0.2, 0.3);
  SolverOptions opts;
  const Trajectory a = ilqr_solve(prob, zero_controls(prob), opts);
  const Trajectory b = alm_solve(prob, zero_controls(prob), opts);
  for (std::size_t k = 0; k < a.u.size(); ++k) {
    CHECK((a.u[k] - b.u[k]).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("inactive inequality leaves the solution at the unconstrained optimum") {
  TrajectoryProblem unconstrained = double_integrator_problem(25, 1.0, 0.2, 0.3);
  TrajectoryProblem bounded = double_integrator_problem(25, 1.0, 0.2, 0.3);
  bounded.constraints.push_back(std::make_shared<ControlBound>(50.0));
  SolverOptions opts;
  const Trajectory a = ilqr_solve(unconstrained, zero_controls(unconstrained), opts);
  const Trajectory b = alm_solve(bounded, zero_controls(bounded), opts);
  for (std::size_t k = 0; k < a.u.size(); ++k) {
    CHECK((a.u[k] - b.u[k]).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("equality-constrained scalar toy matches the hand KKT solution") {
  // x_{k+1} = x_k + u_k, three states, x_0 = 0, constraint x_2 = 1,
  // cost q x^2 + u^2. Stationarity gives u_0 = 1/(2+q), u_1 = (1+q)/(2+q).
  const double q = 0.7;
  Mat a = Mat::Identity(1, 1), b = Mat::Identity(1, 1);
  TrajectoryProblem prob;
  prob.horizon = 3;
  prob.dynamics = std::make_shared<LtiDynamics>(a, b);
  prob.costs.push_back(std::make_shared<DiagQuadCost>(
      (Vec(1) << q).finished(), Vec::Zero(1), (Vec(1) << 1.0).finished()));
  prob.constraints.push_back(std::make_shared<TerminalStateEquality>(0, 1.0));
  prob.initial_state = Vec::Zero(1);

  SolverOptions opts;
  const Trajectory sol = solve(prob, zero_controls(prob), opts);
  CHECK(sol.stats.converged);
  CHECK(sol.stats.max_violation <= opts.violation_tolerance);
  CHECK(sol.u[0](0) == doctest::Approx(1.0 / (2.0 + q)).epsilon(1e-6));
  CHECK(sol.u[1](0) == doctest::Approx((1.0 + q) / (2.0 + q)).epsilon(1e-6));
}

TEST_CASE("violation is the max over the stated deviation magnitudes") {
  TrajectoryProblem prob = double_integrator_problem(5, 1.0, 1.0, 1.0);
  prob.constraints.push_back(std::make_shared<ControlBound>(0.5));
  prob.constraints.push_back(std::make_shared<TerminalStateEquality>(0, 0.0));
  Trajectory traj = rollout(prob, {(Vec(1) << 0.6).finished(), (Vec(1) << 0.0).finished(),
                                   (Vec(1) << -0.55).finished(), (Vec(1) << 0.0).finished()});
  // feasible parts contribute zero; the max (not the sum) is reported
  const double viol = max_constraint_violation(prob, traj);
  const double expected_terminal = std::abs(traj.x[4](0));
  CHECK(viol == doctest::Approx(std::max({0.6 - 0.5, 0.55 - 0.5, expected_terminal})));
}

TEST_CASE("feasible trajectories pass through projection unchanged") {
  TrajectoryProblem prob = double_integrator_problem(10, 1.0, 0.2, 0.3);
  prob.constraints.push_back(std::make_shared<ControlBound>(10.0));
  SolverOptions opts;
  const Trajectory base = ilqr_solve(prob, zero_controls(prob), opts);
  const Trajectory projected = projected_newton(prob, base, opts);
  CHECK(projected.stats.projection_iterations == 0);
  for (std::size_t k = 0; k < base.u.size(); ++k) {
    CHECK((projected.u[k] - base.u[k]).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("projection repairs a violated terminal equality to 1e-8") {
  Mat a = Mat::Identity(1, 1), b = Mat::Identity(1, 1);
  TrajectoryProblem prob;
  prob.horizon = 4;
  prob.dynamics = std::make_shared<LtiDynamics>(a, b);
  prob.costs.push_back(std::make_shared<DiagQuadCost>(Vec::Zero(1), Vec::Zero(1),
                                                      (Vec(1) << 1.0).finished()));
  prob.constraints.push_back(std::make_shared<TerminalStateEquality>(0, 1.0));
  prob.initial_state = Vec::Zero(1);
  // Start eps away from feasibility.
  Trajectory init = rollout(prob, {(Vec(1) << 0.4).finished(), (Vec(1) << 0.3).finished(),
                                   (Vec(1) << 0.3 - 1e-4).finished()});
  SolverOptions opts;
  const Trajectory projected = projected_newton(prob, init, opts);
  CHECK(max_violation(prob, projected) <= 1e-8);
  // The min-norm correction splits the defect evenly over the controls.
  for (int k = 0; k < 3; ++k) {
    CHECK(projected.u[k](0) - init.u[k](0) == doctest::Approx(1e-4 / 3.0).epsilon(1e-3));
  }
}

TEST_CASE("identical inputs produce identical trajectories") {
  TrajectoryProblem prob = double_integrator_problem(40, 1.0, 0.1, 0.2);
  prob.constraints.push_back(std::make_shared<ControlBound>(0.35));
  SolverOptions opts;
  const Trajectory a = solve(prob, zero_controls(prob), opts);
  const Trajectory b = solve(prob, zero_controls(prob), opts);
  REQUIRE(a.u.size() == b.u.size());
  for (std::size_t k = 0; k < a.u.size(); ++k) {
    CHECK((a.u[k] - b.u[k]).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_SUITE_END();
