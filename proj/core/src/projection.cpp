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

#include <chrono>
#include <cmath>
#include <iostream>
#include <vector>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "fluxtraj/solver.hpp"

namespace fluxtraj {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

// Decision vector for the direct stage: all free states x_1..x_{N-1}
// followed by all controls u_0..u_{N-2}; x_0 stays pinned.
struct Indexer {
  int nx, nu, horizon;
  int state_index(int k) const { return (k - 1) * nx; }  // k >= 1
  int control_index(int k) const { return (horizon - 1) * nx + k * nu; }
  int size() const { return (horizon - 1) * (nx + nu); }
};

struct ActiveRow {
  int constraint = -1;  // -1 marks a dynamics defect block
  int step = 0;
};

// Gathers dynamics defects plus equality rows plus active inequality rows.
void gather_active(const TrajectoryProblem& prob, const Trajectory& traj, double margin,
                   std::vector<ActiveRow>& rows, int& total_rows) {
  rows.clear();
  total_rows = 0;
  for (int k = 0; k + 1 < prob.horizon; ++k) {
    rows.push_back({-1, k});
    total_rows += prob.nx();
  }
  static const Vec kEmpty;
  for (std::size_t c = 0; c < prob.constraints.size(); ++c) {
    const auto& con = prob.constraints[c];
    for (int k = 0; k < prob.horizon; ++k) {
      if (!con->applies_to(k, prob.horizon)) continue;
      if (con->kind() == ConstraintKind::kInequality) {
        const Vec v = con->eval(k, traj.x[k], k < prob.horizon - 1 ? traj.u[k] : kEmpty);
        if (v.maxCoeff() < -margin) continue;  // fully inactive block
      }
      rows.push_back({static_cast<int>(c), k});
      total_rows += con->rows();
    }
  }
}

}  // namespace

Trajectory projected_newton(const TrajectoryProblem& prob, const Trajectory& init,
                            const SolverOptions& opts) {
  const auto t_start = std::chrono::steady_clock::now();
  const int nx = prob.nx();
  const int nu = prob.nu();
  const Indexer idx{nx, nu, prob.horizon};

  Trajectory traj = init;
  traj.stats = init.stats;
  static const Vec kEmpty;

  int iterations = 0;
  for (int iter = 0; iter < opts.max_projection_iterations; ++iter) {
    const double viol = max_violation(prob, traj);
    if (opts.verbose) {
      std::cout << "[projection] iter " << iter << " violation " << viol << "\n";
    }
    if (viol <= opts.violation_tolerance) break;
    ++iterations;

    std::vector<ActiveRow> blocks;
    int rows = 0;
    gather_active(prob, traj, 1e-10, blocks, rows);

    std::vector<Triplet> trips;
    trips.reserve(static_cast<std::size_t>(rows) * (2 * nx + nu));
    Vec resid = Vec::Zero(rows);
    int row0 = 0;
    Mat a, b, cx, cu;
    for (const ActiveRow& blk : blocks) {
      const int k = blk.step;
      if (blk.constraint < 0) {
        // f(x_k, u_k) - x_{k+1} = 0
        prob.dynamics->jacobians(k, traj.x[k], traj.u[k], a, b);
        resid.segment(row0, nx) = prob.dynamics->step(k, traj.x[k], traj.u[k]) - traj.x[k + 1];
        if (k >= 1) {
          for (int r = 0; r < nx; ++r)
            for (int c = 0; c < nx; ++c)
              if (a(r, c) != 0.0) trips.emplace_back(row0 + r, idx.state_index(k) + c, a(r, c));
        }
        for (int r = 0; r < nx; ++r)
          for (int c = 0; c < nu; ++c)
            if (b(r, c) != 0.0) trips.emplace_back(row0 + r, idx.control_index(k) + c, b(r, c));
        for (int r = 0; r < nx; ++r) {
          trips.emplace_back(row0 + r, idx.state_index(k + 1) + r, -1.0);
        }
        row0 += nx;
      } else {
        const auto& con = prob.constraints[blk.constraint];
        const Vec& uk = k < prob.horizon - 1 ? traj.u[k] : kEmpty;
        Vec v = con->eval(k, traj.x[k], uk);
        if (con->kind() == ConstraintKind::kInequality) {
          // Correct only the violated components; rows at or inside the
          // boundary get a zero residual and zero Jacobian contribution.
          for (int i = 0; i < v.size(); ++i) v(i) = std::max(v(i), 0.0);
        }
        con->jacobian(k, traj.x[k], uk, cx, cu);
        resid.segment(row0, con->rows()) = v;
        for (int r = 0; r < con->rows(); ++r) {
          const bool keep = con->kind() == ConstraintKind::kEquality || v(r) > 0.0;
          if (!keep) continue;
          if (k >= 1) {
            for (int c = 0; c < nx; ++c)
              if (cx(r, c) != 0.0) trips.emplace_back(row0 + r, idx.state_index(k) + c, cx(r, c));
          }
          if (cu.size() > 0 && k < prob.horizon - 1) {
            for (int c = 0; c < nu; ++c)
              if (cu(r, c) != 0.0) trips.emplace_back(row0 + r, idx.control_index(k) + c, cu(r, c));
          }
        }
        row0 += con->rows();
      }
    }

    SpMat cmat(rows, idx.size());
    cmat.setFromTriplets(trips.begin(), trips.end());

    // Min-norm Gauss-Newton step: dz = -C^T (C C^T + delta I)^{-1} resid.
    SpMat normal = cmat * SpMat(cmat.transpose());
    const double damping = 1e-14;
    for (int r = 0; r < rows; ++r) normal.coeffRef(r, r) += damping;
    Eigen::SimplicialLDLT<SpMat> ldlt(normal);
    if (ldlt.info() != Eigen::Success) {
      traj.stats.failure = "projection: normal-equation factorization failed";
      break;
    }
    const Vec y = ldlt.solve(resid);
    const Vec dz = -cmat.transpose() * y;

    // Backtracking on the violation measure.
    double step_scale = 1.0;
    bool improved = false;
    for (int bt = 0; bt < 8; ++bt) {
      Trajectory cand = traj;
      for (int k = 1; k < prob.horizon; ++k) {
        cand.x[k] += step_scale * dz.segment(idx.state_index(k), nx);
      }
      for (int k = 0; k + 1 < prob.horizon; ++k) {
        cand.u[k] += step_scale * dz.segment(idx.control_index(k), nu);
      }
      if (max_violation(prob, cand) < viol) {
        traj = std::move(cand);
        improved = true;
        break;
      }
      step_scale *= 0.5;
    }
    if (!improved) {
      traj.stats.failure = "projection: no violation decrease";
      break;
    }
  }

  traj.stats.projection_iterations += iterations;
  traj.stats.projection_violation = max_violation(prob, traj);
  traj.stats.projection_seconds +=
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return traj;
}

Trajectory solve(const TrajectoryProblem& prob, const Trajectory& init, const SolverOptions& opts) {
  Trajectory current = alm_solve(prob, init, opts);
  const SolveStats alm_stats = current.stats;

  // The indirect stage satisfies dynamics by construction; check whether
  // the constraints already meet the final tolerance.
  double rollout_viol = max_constraint_violation(prob, current);
  if (rollout_viol <= opts.violation_tolerance) {
    current.stats.max_violation = rollout_viol;
    current.stats.converged = true;
    return current;
  }

  // Direct stage: project onto the constraint manifold, then re-roll the
  // controls through the true dynamics and re-measure. Gate errors and
  // violations are always reported from explicit re-integration.
  Trajectory best = current;
  double best_viol = rollout_viol;
  for (int cycle = 0; cycle < opts.max_projection_rollouts; ++cycle) {
    Trajectory projected = projected_newton(prob, current, opts);
    Trajectory rerolled = rollout(prob, projected.u);
    rerolled.stats = projected.stats;
    rollout_viol = max_constraint_violation(prob, rerolled);
    rerolled.stats.max_violation = rollout_viol;
    if (rollout_viol < best_viol) {
      best = rerolled;
      best_viol = rollout_viol;
    }
    if (rollout_viol <= opts.violation_tolerance) break;
    if (!rerolled.stats.failure.empty()) break;
    current = rerolled;
  }

  best.stats.cost = total_cost(prob, best);
  best.stats.alm_iterations = alm_stats.alm_iterations;
  best.stats.ilqr_iterations = alm_stats.ilqr_iterations;
  best.stats.alm_seconds = alm_stats.alm_seconds;
  best.stats.max_violation = best_viol;
  best.stats.converged = best_viol <= opts.violation_tolerance;
  if (!best.stats.converged && best.stats.failure.empty()) {
    best.stats.failure = "projection did not reach the violation tolerance";
  }
  return best;
}

}  // namespace fluxtraj
