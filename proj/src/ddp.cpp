// Copyright 2026 The retro Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "retro/ddp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace retro {

double GainSchedule::expected_change(double eps) const {
  const double lin = std::accumulate(linear.begin(), linear.end(), 0.0);
  const double quad = std::accumulate(quadratic.begin(), quadratic.end(), 0.0);
  return eps * lin + eps * eps * quad;
}

QExpansion q_expansion(const SystemModel& model, const Vector& x,
                       const Vector& u, int t, const Vector& target,
                       const Vector& Vx_next, const Matrix& Vxx_next,
                       bool full_ddp) {
  const CostExpansion l = stage_cost_expansion(model, x, u, target);
  const Linearization lin = linearize(model, x, u, t);
  const Matrix& A = lin.A;
  const Matrix& B = lin.B;

  QExpansion q;
  q.Qx = l.lx + A.transpose() * Vx_next;
  q.Qu = l.lu + B.transpose() * Vx_next;
  const Matrix VA = Vxx_next * A;
  q.Qxx = l.lxx + A.transpose() * VA;
  q.Quu = l.luu + B.transpose() * Vxx_next * B;
  q.Qux = l.lux + B.transpose() * VA;
  if (full_ddp) {
    DynamicsCurvature c;
    if (model.curvature(x, u, t, Vx_next, &c)) {
      q.Qxx += c.fxx;
      q.Quu += c.fuu;
      q.Qux += c.fux;
    }
  }
  q.Qxx = 0.5 * (q.Qxx + q.Qxx.transpose()).eval();
  q.Quu = 0.5 * (q.Quu + q.Quu.transpose()).eval();
  return q;
}

BackwardResult backward_pass(const NominalTrajectory& traj,
                             const SystemModel& model,
                             const PointSeries& targets, double reg,
                             bool full_ddp) {
  const int T = traj.horizon();
  if (static_cast<int>(targets.size()) != T + 1 ||
      static_cast<int>(traj.states.size()) != T + 1) {
    throw DimensionError("backward pass: trajectory/target length mismatch");
  }
  const int m = model.control_dim();

  BackwardResult out;
  GainSchedule& g = out.gains;
  ValueTrace& v = out.value;
  g.feedforward.resize(T);
  g.feedback.resize(T);
  g.linear.assign(T, 0.0);
  g.quadratic.assign(T, 0.0);
  v.V.assign(T + 1, 0.0);
  v.Vx.resize(T + 1);
  v.Vxx.resize(T + 1);

  const CostExpansion lf = final_cost_expansion(model, traj.states[T], targets[T]);
  v.Vx[T] = lf.lx;
  v.Vxx[T] = lf.lxx;

  for (int t = T - 1; t >= 0; --t) {
    const QExpansion q = q_expansion(model, traj.states[t], traj.controls[t], t,
                                     targets[t], v.Vx[t + 1], v.Vxx[t + 1],
                                     full_ddp);
    const Matrix Quu_reg = q.Quu + reg * Matrix::Identity(m, m);
    Eigen::LLT<Matrix> llt(Quu_reg);
    if (llt.info() != Eigen::Success) {
      out.failed_step = t;
      return out;
    }
    const Vector Kr = -llt.solve(q.Qu);
    const Matrix Kg = -llt.solve(q.Qux);
    if (!Kr.allFinite() || !Kg.allFinite()) {
      out.failed_step = t;
      return out;
    }
    g.feedforward[t] = Kr;
    g.feedback[t] = Kg;
    g.linear[t] = Kr.dot(q.Qu);
    g.quadratic[t] = 0.5 * Kr.dot(q.Quu * Kr);

    v.Vx[t] = q.Qx + Kg.transpose() * q.Quu * Kr + Kg.transpose() * q.Qu +
              q.Qux.transpose() * Kr;
    Matrix Vxx = q.Qxx + Kg.transpose() * q.Quu * Kg +
                 Kg.transpose() * q.Qux + q.Qux.transpose() * Kg;
    v.Vxx[t] = 0.5 * (Vxx + Vxx.transpose());
  }

  // Cost-to-go along the trajectory itself.
  double acc = 0.0;
  for (int t = T; t >= 0; --t) {
    acc += traj.stage_costs.empty()
               ? (t == T ? final_cost(model, traj.states[T], targets[T])
                         : stage_cost(model, traj.states[t], traj.controls[t],
                                      targets[t]))
               : traj.stage_costs[t];
    v.V[t] = acc;
  }
  return out;
}

std::optional<NominalTrajectory> forward_pass(const NominalTrajectory& traj,
                                              const GainSchedule& gains,
                                              const SystemModel& model,
                                              const PointSeries& targets,
                                              double eps) {
  const int T = traj.horizon();
  NominalTrajectory out;
  out.states.reserve(T + 1);
  out.controls.reserve(T);
  out.states.push_back(traj.states[0]);
  for (int t = 0; t < T; ++t) {
    const Vector& x = out.states[t];
    Vector u = traj.controls[t] + eps * gains.feedforward[t] +
               gains.feedback[t] * (x - traj.states[t]);
    Vector next = model.transition(x, u, t);
    if (!u.allFinite() || !next.allFinite()) return std::nullopt;
    out.controls.push_back(std::move(u));
    out.states.push_back(std::move(next));
  }
  out.total_cost = trajectory_cost(model, out.states, out.controls, targets,
                                   &out.stage_costs);
  if (!std::isfinite(out.total_cost)) return std::nullopt;
  return out;
}

SolveReport solve(const SystemModel& model, const Vector& x0,
                  const PointSeries& targets, const DdpOptions& opts,
                  const std::vector<Vector>* initial_controls) {
  const int T = static_cast<int>(targets.size()) - 1;
  if (T < 1) throw DimensionError("solve: need at least two target points");
  for (const Vector& o : targets) require_dim(o, model.target_dim(), "target");

  std::vector<Vector> u0;
  if (initial_controls != nullptr) {
    if (static_cast<int>(initial_controls->size()) != T) {
      throw DimensionError("solve: initial controls must have length T");
    }
    u0 = *initial_controls;
  } else {
    u0.assign(T, Vector::Zero(model.control_dim()));
  }

  SolveReport report;
  report.trajectory = rollout(model, x0, u0, targets);
  report.cost_history.push_back(report.trajectory.total_cost);
  if (opts.record_iterates) report.control_iterates.push_back(u0);

  double reg = std::clamp(opts.reg_init, opts.reg_min, opts.reg_max);
  BackwardResult bw;
  bool gains_current = false;

  for (int iter = 0; iter < opts.max_iters; ++iter) {
    bw = backward_pass(report.trajectory, model, targets, reg, opts.full_ddp);
    ++report.stats.backward_passes;
    if (bw.failed_step) {
      ++report.stats.factorization_failures;
      gains_current = false;
      if (reg >= opts.reg_max) break;
      reg = std::min(reg * opts.reg_increase, opts.reg_max);
      continue;
    }
    gains_current = true;

    if (-bw.gains.expected_change(1.0) < opts.tol) {
      report.converged = true;
      break;
    }

    const double J = report.trajectory.total_cost;
    bool accepted = false;
    double eps = 1.0;
    for (int k = 0; k < opts.line_search_steps; ++k, eps *= 0.5) {
      auto cand = forward_pass(report.trajectory, bw.gains, model, targets, eps);
      ++report.stats.forward_passes;
      if (!cand) continue;
      const double actual = J - cand->total_cost;
      const double expected = -bw.gains.expected_change(eps);
      if (actual > 0.0 && actual >= opts.accept_ratio * expected) {
        report.trajectory = std::move(*cand);
        accepted = true;
        break;
      }
    }

    if (!accepted) {
      ++report.stats.rejected_line_searches;
      if (reg >= opts.reg_max) break;
      reg = std::min(reg * opts.reg_increase, opts.reg_max);
      continue;
    }

    gains_current = false;
    ++report.iterations;
    const double J_new = report.trajectory.total_cost;
    report.cost_history.push_back(J_new);
    if (opts.record_iterates) {
      report.control_iterates.push_back(report.trajectory.controls);
    }
    reg = std::max(reg * opts.reg_decrease, opts.reg_min);
    if (J - J_new < opts.tol * (1.0 + std::abs(J_new))) {
      report.converged = true;
      break;
    }
  }

  if (!gains_current) {
    bw = backward_pass(report.trajectory, model, targets, reg, opts.full_ddp);
    ++report.stats.backward_passes;
    if (bw.failed_step) {
      // Fall back to a heavily regularized schedule so gains stay defined.
      bw = backward_pass(report.trajectory, model, targets, opts.reg_max,
                         opts.full_ddp);
      ++report.stats.backward_passes;
    }
  }
  report.gains = std::move(bw.gains);
  report.value_trace = std::move(bw.value);
  report.final_reg = reg;
  return report;
}

RiccatiSolution riccati_lqr(const Matrix& A, const Matrix& B, const Matrix& Q,
                            const Matrix& R, const Matrix& Qf, int T) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n || B.rows() != n || Q.rows() != n || Qf.rows() != n ||
      R.rows() != B.cols()) {
    throw DimensionError("riccati_lqr: inconsistent shapes");
  }
  RiccatiSolution sol;
  sol.K.resize(T);
  sol.P.resize(T + 1);
  sol.P[T] = Qf;
  for (int t = T - 1; t >= 0; --t) {
    const Matrix& P = sol.P[t + 1];
    const Matrix S = R + B.transpose() * P * B;
    Eigen::LDLT<Matrix> ldlt(S);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
        std::abs(ldlt.vectorD().minCoeff()) < 1e-300) {
      throw Error("riccati_lqr: R + B'PB is singular at step " +
                  std::to_string(t));
    }
    sol.K[t] = ldlt.solve(B.transpose() * P * A);
    const Matrix Pt = Q + A.transpose() * P * (A - B * sol.K[t]);
    sol.P[t] = 0.5 * (Pt + Pt.transpose());
  }
  return sol;
}

}  // namespace retro
