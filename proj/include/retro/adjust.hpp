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

// Linearly solvable value update after a belief shift.
//
// Over a window of steps first..T (index i = t - first, terminal i = N-1):
//
//   dL_t   expected tracking cost under the posterior minus under the prior
//   M      N x N, M[i][j] = exp(-dL_i) p_j for j >= i, zero below
//   z      z = M z on the non-terminal rows, z_T = exp(-dL_T)
//   g_t    sum_{j >= t} p_j z_j
//   dV_t   dL_t - log g_t   (dV_T = dL_T), so that z_t = exp(-dV_t)
//
// The non-terminal block (diag(exp(dL)) - P) z = P_T z_T is upper triangular
// and is solved by dense back substitution.

#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "retro/belief.hpp"
#include "retro/dynamics.hpp"

namespace retro {

struct DesirabilityOptions {
  double cost_shift_clamp = 50.0;   // |dL| limit
  double condition_limit = 1e12;    // ridge added above this
  double ridge = 1e-9;
};

struct CostShiftVector {
  int first = 0;                       // time index of entry 0
  std::vector<double> delta;           // dL, clamped
  std::vector<double> posterior_cost;  // E_posterior[tracking cost]
  std::vector<double> prior_cost;      // E_prior[tracking cost]
  std::vector<bool> clamped;

  int size() const { return static_cast<int>(delta.size()); }
  int last() const { return first + size() - 1; }
};

// Cost shift along the nominal states for steps first..T. The terminal step
// uses W_final.
CostShiftVector delta_running_cost(const NominalTrajectory& traj,
                                   const BeliefTrajectory& prior,
                                   const BeliefTrajectory& posterior,
                                   const SystemModel& model, int first = 1,
                                   const DesirabilityOptions& opts = {});

struct DesirabilityMatrix {
  int first = 0;
  std::vector<double> scale;    // exp(-dL_i)
  std::vector<double> weights;  // p_j, normalized

  int size() const { return static_cast<int>(scale.size()); }
  double entry(int i, int j) const {
    return j >= i ? scale[i] * weights[j] : 0.0;
  }
  RowMajorMatrix dense() const;
};

// Throws Error when the weights do not sum to one or sizes differ.
DesirabilityMatrix build_M(const CostShiftVector& dl,
                           const std::vector<double>& weights);

struct DesirabilitySolution {
  int first = 0;
  std::vector<double> z;
  std::vector<double> g;
  std::vector<double> delta_v;
  std::vector<double> delta_l;
  std::vector<double> weights;
  double condition = 1.0;  // 1-norm estimate of the non-terminal block
  double residual = 0.0;   // max |z - Mz| over non-terminal rows
  bool ill_conditioned = false;  // ridge added
  bool zero_shift = false;       // dL == 0 everywhere: z = 1, dV = 0
  std::vector<int> nonpositive_rows;  // diagonal floored to the ridge

  int size() const { return static_cast<int>(z.size()); }
  int last() const { return first + size() - 1; }
};

DesirabilitySolution solve_desirability(const DesirabilityMatrix& M,
                                        const CostShiftVector& dl,
                                        const DesirabilityOptions& opts = {});

// Estimate of ||A||_1 ||A^{-1}||_1 for an upper-triangular row-major A
// (Hager's method with Higham's refinements).
double condition_estimate_upper(const RowMajorMatrix& A);

// Solves A x = b and A' x = b for upper-triangular row-major A.
Vector solve_upper(const RowMajorMatrix& A, const Vector& b);
Vector solve_upper_transposed(const RowMajorMatrix& A, const Vector& b);

enum class GradientMode { kAnalytic, kFiniteDifference };

// Target-space gradient of dV_t for t = first..T: the derivative under a
// common translation of the prior and posterior target means over steps
// s >= t. The finite-difference mode perturbs that translation with step
// 1e-4 (1 + |mu|) and re-solves the whole system.
std::vector<Vector> value_gradient(const DesirabilitySolution& sol,
                                   const BeliefTrajectory& prior,
                                   const BeliefTrajectory& posterior,
                                   const NominalTrajectory& traj,
                                   const SystemModel& model,
                                   GradientMode mode = GradientMode::kAnalytic,
                                   const DesirabilityOptions& opts = {});

// Input and output Jacobians along a fixed nominal trajectory.
struct LinearizationCache {
  std::vector<Matrix> Bt;     // B_t at (x_t, u_t), t = 0..T-1
  std::vector<Matrix> Ct;     // output Jacobian at x_t, t = 0..T
  Matrix R_inv;

  static LinearizationCache build(const NominalTrajectory& traj,
                                  const SystemModel& model);
};

struct AdjustmentResult {
  int first_control = 0;                // index of delta_u[0]
  std::vector<Vector> delta_u;          // for t = first_control..T-1
  std::vector<Vector> state_gradient;   // dV/dx for t = first_control+1..T
  std::vector<Vector> controls;         // full u* = u_bar + delta_u
};

// du_t = -R^{-1} B_t' (dV/dx)_{t+1} with dV/dx = -C' (dV/do); controls
// before the window are copied unchanged.
AdjustmentResult control_adjustment(const std::vector<Vector>& grad,
                                    int first, const NominalTrajectory& traj,
                                    const SystemModel& model,
                                    const LinearizationCache* cache = nullptr);

// Number of solve_desirability calls in this process.
std::uint64_t desirability_solve_count();

// Called with every solution produced by solve_desirability (tests use this
// to check properties globally). Pass an empty function to clear.
using SolutionObserver = std::function<void(const DesirabilitySolution&)>;
void set_solution_observer(SolutionObserver observer);

}  // namespace retro
