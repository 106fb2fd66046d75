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

#include "fluxtraj/solver.hpp"

#include <chrono>
#include <cmath>
#include <iostream>
#include <limits>

#include <Eigen/Cholesky>

namespace fluxtraj {

double DiagQuadCost::value(int /*k*/, const Vec& x, const Vec* u) const {
  double acc = 0.0;
  for (int i = 0; i < x.size(); ++i) {
    const double e = x(i) - xt_(i);
    acc += wx_(i) * e * e;
  }
  if (u != nullptr) {
    for (int j = 0; j < u->size(); ++j) acc += wu_(j) * (*u)(j) * (*u)(j);
  }
  return acc;
}

void DiagQuadCost::expand(int /*k*/, const Vec& x, const Vec* u, Vec& lx, Mat& lxx, Vec& lu,
                          Mat& luu) const {
  for (int i = 0; i < x.size(); ++i) {
    lx(i) += 2.0 * wx_(i) * (x(i) - xt_(i));
    lxx(i, i) += 2.0 * wx_(i);
  }
  if (u != nullptr) {
    for (int j = 0; j < u->size(); ++j) {
      lu(j) += 2.0 * wu_(j) * (*u)(j);
      luu(j, j) += 2.0 * wu_(j);
    }
  }
}

Trajectory rollout(const TrajectoryProblem& prob, const std::vector<Vec>& controls) {
  if (static_cast<int>(controls.size()) != prob.horizon - 1) {
    throw std::invalid_argument("rollout: need N-1 controls");
  }
  Trajectory traj;
  traj.x.resize(prob.horizon);
  traj.u = controls;
  traj.x[0] = prob.initial_state;
  for (int k = 0; k + 1 < prob.horizon; ++k) {
    traj.x[k + 1] = prob.dynamics->step(k, traj.x[k], traj.u[k]);
  }
  return traj;
}

double total_cost(const TrajectoryProblem& prob, const Trajectory& traj) {
  double acc = 0.0;
  for (int k = 0; k < prob.horizon; ++k) {
    const Vec* u = k + 1 < prob.horizon ? &traj.u[k] : nullptr;
    for (const auto& cost : prob.costs) acc += cost->value(k, traj.x[k], u);
  }
  return acc;
}

namespace {

double violation_of(const Constraint& con, const Vec& v) {
  if (con.kind() == ConstraintKind::kEquality) return v.cwiseAbs().maxCoeff();
  return std::max(0.0, v.maxCoeff());
}

const Vec& control_or_empty(const Trajectory& traj, int k) {
  static const Vec kEmpty;
  return k < static_cast<int>(traj.u.size()) ? traj.u[k] : kEmpty;
}

}  // namespace

double max_constraint_violation(const TrajectoryProblem& prob, const Trajectory& traj) {
  double worst = 0.0;
  for (const auto& con : prob.constraints) {
    for (int k = 0; k < prob.horizon; ++k) {
      if (!con->applies_to(k, prob.horizon)) continue;
      worst = std::max(worst, violation_of(*con, con->eval(k, traj.x[k], control_or_empty(traj, k))));
    }
  }
  return worst;
}

double max_violation(const TrajectoryProblem& prob, const Trajectory& traj) {
  double worst = max_constraint_violation(prob, traj);
  for (int k = 0; k + 1 < prob.horizon; ++k) {
    const Vec defect = prob.dynamics->step(k, traj.x[k], traj.u[k]) - traj.x[k + 1];
    worst = std::max(worst, defect.cwiseAbs().maxCoeff());
  }
  return worst;
}

namespace ilqr {

BackwardPassResult backward_pass(const std::vector<StageExpansion>& stages, const Vec& lx_final,
                                 const Mat& lxx_final, double reg) {
  const int steps = static_cast<int>(stages.size());
  BackwardPassResult res;
  res.gain.resize(steps);
  res.feedforward.resize(steps);
  Vec vx = lx_final;
  Mat vxx = lxx_final;
  const int nx = static_cast<int>(lx_final.size());
  const Mat reg_eye = reg * Mat::Identity(nx, nx);
  for (int k = steps - 1; k >= 0; --k) {
    const StageExpansion& st = stages[k];
    const Mat vxx_reg = vxx + reg_eye;
    const Vec qx = st.lx + st.a.transpose() * vx;
    const Vec qu = st.lu + st.b.transpose() * vx;
    const Mat qxx = st.lxx + st.a.transpose() * vxx * st.a;
    const Mat quu = st.luu + st.b.transpose() * vxx * st.b;
    const Mat qux = st.b.transpose() * vxx * st.a;
    const Mat quu_reg = st.luu + st.b.transpose() * vxx_reg * st.b;
    const Mat qux_reg = st.b.transpose() * vxx_reg * st.a;

    Eigen::LLT<Mat> llt(quu_reg);
    if (llt.info() != Eigen::Success) {
      res.ok = false;
      return res;
    }
    const Mat gain = -llt.solve(qux_reg);
    const Vec ff = -llt.solve(qu);
    res.gain[k] = gain;
    res.feedforward[k] = ff;
    res.dv1 += ff.dot(qu);
    res.dv2 += 0.5 * ff.dot(quu * ff);

    vx = qx + gain.transpose() * (quu * ff + qu) + qux.transpose() * ff;
    vxx = qxx + gain.transpose() * quu * gain + gain.transpose() * qux +
          qux.transpose() * gain;
    vxx = 0.5 * (vxx + vxx.transpose());
  }
  res.ok = true;
  return res;
}

Trajectory rollout_with_gains(const TrajectoryProblem& prob, const Trajectory& reference,
                              const BackwardPassResult& gains, double alpha) {
  Trajectory traj;
  traj.x.resize(prob.horizon);
  traj.u.resize(prob.horizon - 1);
  traj.x[0] = prob.initial_state;
  for (int k = 0; k + 1 < prob.horizon; ++k) {
    traj.u[k] = reference.u[k] + alpha * gains.feedforward[k] +
                gains.gain[k] * (traj.x[k] - reference.x[k]);
    traj.x[k + 1] = prob.dynamics->step(k, traj.x[k], traj.u[k]);
  }
  return traj;
}

}  // namespace ilqr

namespace {

// Stage objective seen by the inner solver: the problem costs plus, for the
// ALM stage, multiplier and penalty terms for every constraint.
class StageObjective {
 public:
  explicit StageObjective(const TrajectoryProblem& prob) : prob_(prob) {}
  virtual ~StageObjective() = default;

  virtual double value(int k, const Vec& x, const Vec* u) const {
    double acc = 0.0;
    for (const auto& cost : prob_.costs) acc += cost->value(k, x, u);
    return acc;
  }

  virtual void expand(int k, const Vec& x, const Vec* u, Vec& lx, Mat& lxx, Vec& lu,
                      Mat& luu) const {
    for (const auto& cost : prob_.costs) cost->expand(k, x, u, lx, lxx, lu, luu);
  }

  double trajectory_value(const Trajectory& traj) const {
    double acc = 0.0;
    for (int k = 0; k < prob_.horizon; ++k) {
      const Vec* u = k + 1 < prob_.horizon ? &traj.u[k] : nullptr;
      acc += value(k, traj.x[k], u);
    }
    return acc;
  }

 protected:
  const TrajectoryProblem& prob_;
};

struct MultiplierSet {
  // multipliers[c][k]: multiplier vector of constraint c at step k (empty
  // when the constraint does not apply at k).
  std::vector<std::vector<Vec>> lambda;
  double penalty = 1.0;
};

class AlmObjective final : public StageObjective {
 public:
  AlmObjective(const TrajectoryProblem& prob, const MultiplierSet& mults)
      : StageObjective(prob), mults_(mults) {}

  double value(int k, const Vec& x, const Vec* u) const override {
    double acc = StageObjective::value(k, x, u);
    static const Vec kEmpty;
    const Vec& uc = u != nullptr ? *u : kEmpty;
    const double rho = mults_.penalty;
    for (std::size_t c = 0; c < prob_.constraints.size(); ++c) {
      const auto& con = prob_.constraints[c];
      if (!con->applies_to(k, prob_.horizon)) continue;
      const Vec v = con->eval(k, x, uc);
      const Vec& lam = mults_.lambda[c][k];
      if (con->kind() == ConstraintKind::kEquality) {
        acc += lam.dot(v) + 0.5 * rho * v.squaredNorm();
      } else {
        for (int i = 0; i < v.size(); ++i) {
          const double w = std::max(0.0, lam(i) + rho * v(i));
          acc += (w * w - lam(i) * lam(i)) / (2.0 * rho);
        }
      }
    }
    return acc;
  }

  void expand(int k, const Vec& x, const Vec* u, Vec& lx, Mat& lxx, Vec& lu,
              Mat& luu) const override {
    StageObjective::expand(k, x, u, lx, lxx, lu, luu);
    static const Vec kEmpty;
    const Vec& uc = u != nullptr ? *u : kEmpty;
    const double rho = mults_.penalty;
    const int nu = u != nullptr ? static_cast<int>(u->size()) : 0;
    for (std::size_t c = 0; c < prob_.constraints.size(); ++c) {
      const auto& con = prob_.constraints[c];
      if (!con->applies_to(k, prob_.horizon)) continue;
      const Vec v = con->eval(k, x, uc);
      const Vec& lam = mults_.lambda[c][k];
      Mat cx, cu;
      con->jacobian(k, x, uc, cx, cu);
      // Weights of the first-order term and the active penalty rows.
      Vec w(v.size());
      Vec active(v.size());
      if (con->kind() == ConstraintKind::kEquality) {
        w = lam + rho * v;
        active.setOnes();
      } else {
        for (int i = 0; i < v.size(); ++i) {
          const double m = lam(i) + rho * v(i);
          w(i) = std::max(0.0, m);
          active(i) = m > 0.0 ? 1.0 : 0.0;
        }
      }
      lx.noalias() += cx.transpose() * w;
      for (int i = 0; i < v.size(); ++i) {
        if (active(i) > 0.0) {
          lxx.noalias() += rho * cx.row(i).transpose() * cx.row(i);
        }
      }
      if (nu > 0 && cu.size() > 0) {
        lu.noalias() += cu.transpose() * w;
        for (int i = 0; i < v.size(); ++i) {
          if (active(i) > 0.0) {
            luu.noalias() += rho * cu.row(i).transpose() * cu.row(i);
          }
        }
      }
      // Exact constraint curvature (e.g. state-norm equalities); w is zero
      // on inactive inequality rows.
      con->add_weighted_hessian(k, x, uc, w, lxx, luu);
    }
  }

 private:
  const MultiplierSet& mults_;
};

struct IlqrOutcome {
  Trajectory traj;
  double cost = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string failure;
};

IlqrOutcome ilqr_core(const TrajectoryProblem& prob, const StageObjective& objective,
                      const Trajectory& init, const SolverOptions& opts) {
  const int steps = prob.horizon - 1;
  IlqrOutcome out;
  out.traj = rollout(prob, init.u);
  out.cost = objective.trajectory_value(out.traj);

  double reg = opts.reg_initial;
  std::vector<ilqr::StageExpansion> stages(steps);
  const int nx = prob.nx();
  const int nu = prob.nu();

  for (int iter = 0; iter < opts.max_ilqr_iterations; ++iter) {
    // Quadratic models about the current iterate.
    for (int k = 0; k < steps; ++k) {
      ilqr::StageExpansion& st = stages[k];
      prob.dynamics->jacobians(k, out.traj.x[k], out.traj.u[k], st.a, st.b);
      st.lx = Vec::Zero(nx);
      st.lu = Vec::Zero(nu);
      st.lxx = Mat::Zero(nx, nx);
      st.luu = Mat::Zero(nu, nu);
      objective.expand(k, out.traj.x[k], &out.traj.u[k], st.lx, st.lxx, st.lu, st.luu);
    }
    Vec lx_final = Vec::Zero(nx);
    Vec lu_dummy = Vec::Zero(nu);
    Mat lxx_final = Mat::Zero(nx, nx);
    Mat luu_dummy = Mat::Zero(nu, nu);
    objective.expand(prob.horizon - 1, out.traj.x.back(), nullptr, lx_final, lxx_final, lu_dummy,
                     luu_dummy);

    // Backward pass, raising regularization until the recursion succeeds.
    ilqr::BackwardPassResult gains;
    while (true) {
      gains = ilqr::backward_pass(stages, lx_final, lxx_final, reg);
      if (gains.ok) break;
      reg = std::max(reg * 10.0, opts.reg_min * 10.0);
      if (reg > opts.reg_max) {
        out.failure = "backward pass failed at maximum regularization";
        return out;
      }
    }
    out.iterations = iter + 1;

    double grad_inf = 0.0;
    for (const Vec& d : gains.feedforward) grad_inf = std::max(grad_inf, d.cwiseAbs().maxCoeff());
    if (grad_inf < opts.gradient_tolerance) {
      out.converged = true;
      return out;
    }

    // Line search over the halving schedule.
    bool accepted = false;
    for (int ls = 0; ls < opts.max_line_search_steps; ++ls) {
      const double alpha = std::pow(0.5, ls);
      const Trajectory cand = ilqr::rollout_with_gains(prob, out.traj, gains, alpha);
      const double cand_cost = objective.trajectory_value(cand);
      const double expected = -(alpha * gains.dv1 + alpha * alpha * gains.dv2);
      const double actual = out.cost - cand_cost;
      if (expected > 0.0) {
        const double ratio = actual / expected;
        if (ratio < opts.armijo_low || ratio > opts.armijo_high) continue;
      } else if (actual < 0.0) {
        continue;
      }
      const double decrease = actual;
      out.traj = cand;
      out.cost = cand_cost;
      accepted = true;
      reg = std::max(reg / 10.0, opts.reg_min);
      if (decrease < opts.cost_tolerance) {
        out.converged = true;
        return out;
      }
      break;
    }
    if (!accepted) {
      reg *= 10.0;
      if (reg > opts.reg_max) {
        out.failure = "line search failed at maximum regularization";
        return out;
      }
    }
  }
  return out;
}

MultiplierSet make_multipliers(const TrajectoryProblem& prob, double initial_penalty) {
  MultiplierSet m;
  m.penalty = initial_penalty;
  m.lambda.resize(prob.constraints.size());
  for (std::size_t c = 0; c < prob.constraints.size(); ++c) {
    m.lambda[c].resize(prob.horizon);
    for (int k = 0; k < prob.horizon; ++k) {
      if (prob.constraints[c]->applies_to(k, prob.horizon)) {
        m.lambda[c][k] = Vec::Zero(prob.constraints[c]->rows());
      }
    }
  }
  return m;
}

}  // namespace

Trajectory ilqr_solve(const TrajectoryProblem& prob, const Trajectory& init,
                      const SolverOptions& opts) {
  const StageObjective objective(prob);
  IlqrOutcome out = ilqr_core(prob, objective, init, opts);
  Trajectory traj = std::move(out.traj);
  traj.stats.cost = out.cost;
  traj.stats.ilqr_iterations = out.iterations;
  traj.stats.converged = out.converged;
  traj.stats.failure = out.failure;
  traj.stats.max_violation = max_constraint_violation(prob, traj);
  return traj;
}

Trajectory alm_solve(const TrajectoryProblem& prob, const Trajectory& init,
                     const SolverOptions& opts) {
  const auto t_start = std::chrono::steady_clock::now();
  MultiplierSet mults = make_multipliers(prob, opts.initial_penalty);

  Trajectory current = rollout(prob, init.u);
  double prev_violation = std::numeric_limits<double>::infinity();
  int total_ilqr = 0;
  int outer = 0;
  std::string failure;
  bool converged = false;

  for (outer = 0; outer < opts.max_alm_iterations; ++outer) {
    const AlmObjective objective(prob, mults);
    IlqrOutcome inner = ilqr_core(prob, objective, current, opts);
    total_ilqr += inner.iterations;
    current = std::move(inner.traj);

    const double violation = max_constraint_violation(prob, current);
    if (opts.verbose) {
      std::cout << "[alm] outer " << outer << " violation " << violation << " penalty "
                << mults.penalty << " cost " << total_cost(prob, current) << "\n";
    }

    // First-order multiplier update.
    for (std::size_t c = 0; c < prob.constraints.size(); ++c) {
      const auto& con = prob.constraints[c];
      for (int k = 0; k < prob.horizon; ++k) {
        if (!con->applies_to(k, prob.horizon)) continue;
        const Vec v = con->eval(k, current.x[k], control_or_empty(current, k));
        Vec& lam = mults.lambda[c][k];
        if (con->kind() == ConstraintKind::kEquality) {
          lam += mults.penalty * v;
        } else {
          lam = (lam + mults.penalty * v).cwiseMax(0.0);
        }
      }
    }

    if (violation <= opts.intermediate_tolerance) {
      converged = true;
      ++outer;
      break;
    }
    if (violation > prev_violation / opts.violation_drop_factor) {
      if (mults.penalty >= opts.max_penalty) {
        failure = "penalty cap reached before feasibility";
        ++outer;
        break;
      }
      mults.penalty = std::min(mults.penalty * opts.penalty_scaling, opts.max_penalty);
    }
    prev_violation = violation;
  }

  current.stats.cost = total_cost(prob, current);
  current.stats.max_violation = max_constraint_violation(prob, current);
  current.stats.alm_iterations = outer;
  current.stats.ilqr_iterations = total_ilqr;
  current.stats.converged = converged && current.stats.failure.empty();
  current.stats.failure = failure;
  current.stats.alm_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return current;
}

}  // namespace fluxtraj
