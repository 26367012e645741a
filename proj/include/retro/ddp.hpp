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

// Iterative LQR / DDP with Levenberg-Marquardt regularization on Quu and a
// backtracking line search on the feedforward term.

#pragma once

#include <optional>
#include <vector>

#include "retro/dynamics.hpp"

namespace retro {

struct QExpansion {
  Vector Qx;
  Vector Qu;
  Matrix Qxx;
  Matrix Quu;
  Matrix Qux;
};

struct GainSchedule {
  std::vector<Vector> feedforward;  // K_r, m
  std::vector<Matrix> feedback;     // K_g, m x n
  // Expected cost change of a forward pass with step eps is
  //   eps * sum(linear) + eps^2 * sum(quadratic).
  std::vector<double> linear;
  std::vector<double> quadratic;

  double expected_change(double eps) const;
};

struct ValueTrace {
  std::vector<double> V;   // cost-to-go along the trajectory, t = 0..T
  std::vector<Vector> Vx;  // gradient of the quadratic value model
  std::vector<Matrix> Vxx;
};

struct DdpOptions {
  int max_iters = 200;
  double tol = 1e-8;
  double reg_init = 1e-10;
  double reg_min = 1e-10;
  double reg_max = 1e8;
  double reg_increase = 10.0;
  double reg_decrease = 0.5;
  int line_search_steps = 11;  // eps = 1, 1/2, ..., 2^-10
  double accept_ratio = 1e-4;
  bool full_ddp = false;
  bool record_iterates = false;
};

struct SolveStats {
  int backward_passes = 0;
  int forward_passes = 0;
  int factorization_failures = 0;
  int rejected_line_searches = 0;
};

struct SolveReport {
  NominalTrajectory trajectory;
  GainSchedule gains;
  ValueTrace value_trace;
  int iterations = 0;  // accepted backward+forward iterations
  bool converged = false;
  std::vector<double> cost_history;  // initial cost, then each accepted step
  std::vector<std::vector<Vector>> control_iterates;  // if record_iterates
  SolveStats stats;
  double final_reg = 0.0;
};

// Second-order expansion of Q(x, u) = L(x, u) + V'(f(x, u)) around (x, u).
// Dynamics tensors are included only when full_ddp is set and the model
// provides them.
QExpansion q_expansion(const SystemModel& model, const Vector& x,
                       const Vector& u, int t, const Vector& target,
                       const Vector& Vx_next, const Matrix& Vxx_next,
                       bool full_ddp = false);

struct BackwardResult {
  GainSchedule gains;
  ValueTrace value;
  // Set when the regularized Quu failed to factorize at this step.
  std::optional<int> failed_step;
};

BackwardResult backward_pass(const NominalTrajectory& traj,
                             const SystemModel& model,
                             const PointSeries& targets, double reg,
                             bool full_ddp = false);

// Closed-loop forward pass. Returns nullopt when the rollout diverges.
std::optional<NominalTrajectory> forward_pass(const NominalTrajectory& traj,
                                              const GainSchedule& gains,
                                              const SystemModel& model,
                                              const PointSeries& targets,
                                              double eps);

// Solves from zero controls unless initial_controls is given.
SolveReport solve(const SystemModel& model, const Vector& x0,
                  const PointSeries& targets, const DdpOptions& opts = {},
                  const std::vector<Vector>* initial_controls = nullptr);

struct RiccatiSolution {
  std::vector<Matrix> K;  // u_t = -K_t x_t, t = 0..T-1
  std::vector<Matrix> P;  // value Hessians, t = 0..T
};

// Finite-horizon discrete Riccati recursion for
//   sum 1/2 (x'Qx + u'Ru) + 1/2 x_T' Qf x_T,   x' = Ax + Bu.
RiccatiSolution riccati_lqr(const Matrix& A, const Matrix& B, const Matrix& Q,
                            const Matrix& R, const Matrix& Qf, int T);

}  // namespace retro
