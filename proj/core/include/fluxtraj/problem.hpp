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
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fluxtraj/quantum.hpp"

namespace fluxtraj {

/// Discrete dynamics x_{k+1} = f(x_k, u_k), with analytic Jacobians.
/// Steps are indexed k = 0..N-2 for a horizon of N states.
class DiscreteDynamics {
 public:
  virtual ~DiscreteDynamics() = default;
  virtual int state_dim() const = 0;
  virtual int control_dim() const = 0;
  virtual Vec step(int k, const Vec& x, const Vec& u) const = 0;
  virtual void jacobians(int k, const Vec& x, const Vec& u, Mat& a, Mat& b) const = 0;
};

/// One additive term of the stage cost l_k(x, u). Terminal stages pass
/// u = nullptr. Expansions are exact for every cost used here.
class StageCost {
 public:
  virtual ~StageCost() = default;
  virtual double value(int k, const Vec& x, const Vec* u) const = 0;
  /// Accumulates gradient and Hessian contributions into the outputs.
  virtual void expand(int k, const Vec& x, const Vec* u, Vec& lx, Mat& lxx, Vec& lu,
                      Mat& luu) const = 0;
};

/// Diagonal quadratic cost sum_i wx_i (x_i - xt_i)^2 + sum_j wu_j u_j^2.
class DiagQuadCost final : public StageCost {
 public:
  DiagQuadCost(Vec state_weights, Vec state_target, Vec control_weights)
      : wx_(std::move(state_weights)), xt_(std::move(state_target)), wu_(std::move(control_weights)) {}

  double value(int k, const Vec& x, const Vec* u) const override;
  void expand(int k, const Vec& x, const Vec* u, Vec& lx, Mat& lxx, Vec& lu,
              Mat& luu) const override;

  const Vec& state_weights() const { return wx_; }
  const Vec& state_target() const { return xt_; }
  const Vec& control_weights() const { return wu_; }

 private:
  Vec wx_, xt_, wu_;
};

enum class ConstraintKind { kEquality, kInequality };

/// Stage-local constraint h_k(x_k, u_k) = 0 or g_k(x_k, u_k) <= 0.
/// Violation is |h| for equalities and max(g, 0) for inequalities.
class Constraint {
 public:
  virtual ~Constraint() = default;
  virtual std::string name() const = 0;
  virtual ConstraintKind kind() const = 0;
  virtual int rows() const = 0;
  /// Steps this constraint applies to (state index k = 0..N-1; constraints
  /// touching u are only meaningful for k < N-1).
  virtual bool applies_to(int k, int horizon) const = 0;
  virtual Vec eval(int k, const Vec& x, const Vec& u) const = 0;
  virtual void jacobian(int k, const Vec& x, const Vec& u, Mat& cx, Mat& cu) const = 0;
  /// Optional exact constraint-curvature contribution sum_i w_i grad^2 c_i;
  /// the default keeps the Gauss-Newton approximation.
  virtual void add_weighted_hessian(int k, const Vec& x, const Vec& u, const Vec& w, Mat& hxx,
                                    Mat& huu) const {
    (void)k;
    (void)x;
    (void)u;
    (void)w;
    (void)hxx;
    (void)huu;
  }
};

/// Constrained trajectory optimization problem over a horizon of N states
/// and N-1 controls, with a fixed initial state.
struct TrajectoryProblem {
  int horizon = 0;  // N
  std::shared_ptr<const DiscreteDynamics> dynamics;
  std::vector<std::shared_ptr<const StageCost>> costs;
  std::vector<std::shared_ptr<const Constraint>> constraints;
  Vec initial_state;

  int nx() const { return dynamics->state_dim(); }
  int nu() const { return dynamics->control_dim(); }
};

struct SolveStats {
  double cost = 0.0;
  double max_violation = 0.0;        // after the final re-rollout
  double projection_violation = 0.0; // before the final re-rollout
  int ilqr_iterations = 0;
  int alm_iterations = 0;
  int projection_iterations = 0;
  double alm_seconds = 0.0;
  double projection_seconds = 0.0;
  bool converged = false;
  std::string failure;
};

struct Trajectory {
  std::vector<Vec> x;  // size N
  std::vector<Vec> u;  // size N-1
  SolveStats stats;
};

double total_cost(const TrajectoryProblem& prob, const Trajectory& traj);

/// Rolls the controls through the dynamics from the problem's initial state.
Trajectory rollout(const TrajectoryProblem& prob, const std::vector<Vec>& controls);

/// Max violation over all registered constraints plus the dynamics defect
/// max|f(x_k, u_k) - x_{k+1}|.
double max_violation(const TrajectoryProblem& prob, const Trajectory& traj);

/// Max violation over the registered constraints only.
double max_constraint_violation(const TrajectoryProblem& prob, const Trajectory& traj);

}  // namespace fluxtraj
