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

#include <vector>

#include "fluxtraj/problem.hpp"

namespace fluxtraj {

struct SolverOptions {
  double violation_tolerance = 1e-8;     // projection stage target
  double intermediate_tolerance = 1e-6;  // ALM stage target
  double cost_tolerance = 1e-10;         // iLQR absolute cost-decrease tolerance
  double gradient_tolerance = 1e-9;      // max |d_k| termination
  int max_ilqr_iterations = 200;
  int max_alm_iterations = 30;
  double initial_penalty = 1.0;
  double penalty_scaling = 10.0;
  double max_penalty = 1e12;
  double violation_drop_factor = 4.0;  // scale penalty unless violation drops this much
  double armijo_low = 1e-4;            // accepted decrease ratio window
  double armijo_high = 10.0;
  double reg_initial = 1e-8;
  double reg_min = 1e-8;
  double reg_max = 1e8;
  int max_line_search_steps = 16;  // alpha = 1, 1/2, ..., 2^-15
  int max_projection_iterations = 40;
  int max_projection_rollouts = 8;  // project / re-rollout cycles
  bool verbose = false;
};

namespace ilqr {

/// Per-step quadratic models about the current iterate.
struct StageExpansion {
  Mat a;       // dynamics d f / d x
  Mat b;       // dynamics d f / d u
  Vec lx, lu;  // cost gradients
  Mat lxx, luu;
};

struct BackwardPassResult {
  std::vector<Mat> gain;        // K_k
  std::vector<Vec> feedforward; // d_k
  double dv1 = 0.0;             // expected decrease, linear coefficient
  double dv2 = 0.0;             // expected decrease, quadratic coefficient
  bool ok = false;
};

/// Riccati-style value recursion over the stage expansions. `reg` is the
/// additive value-Hessian regularization; returns ok = false when a
/// regularized control Hessian fails to be positive definite.
BackwardPassResult backward_pass(const std::vector<StageExpansion>& stages, const Vec& lx_final,
                                 const Mat& lxx_final, double reg);

/// Closed-loop rollout u_k = u*_k + alpha d_k + K_k (x_k - x*_k).
Trajectory rollout_with_gains(const TrajectoryProblem& prob, const Trajectory& reference,
                              const BackwardPassResult& gains, double alpha);

}  // namespace ilqr

/// Objective-only solver (constraints ignored); monotone non-increasing
/// accepted cost. Returns the best iterate with diagnostics.
Trajectory ilqr_solve(const TrajectoryProblem& prob, const Trajectory& init,
                      const SolverOptions& opts);

/// Augmented-Lagrangian outer loop around ilqr_solve; drives the max
/// constraint violation to opts.intermediate_tolerance.
Trajectory alm_solve(const TrajectoryProblem& prob, const Trajectory& init,
                     const SolverOptions& opts);

/// Direct projection of a near-feasible trajectory onto the constraint
/// manifold (dynamics defects included): damped Gauss-Newton min-norm
/// steps on the stacked active constraint system.
Trajectory projected_newton(const TrajectoryProblem& prob, const Trajectory& init,
                            const SolverOptions& opts);

/// Full pipeline: ALM, then projection/re-rollout cycles until the
/// violation measured on a fresh rollout of the returned controls meets
/// opts.violation_tolerance.
Trajectory solve(const TrajectoryProblem& prob, const Trajectory& init, const SolverOptions& opts);

}  // namespace fluxtraj
