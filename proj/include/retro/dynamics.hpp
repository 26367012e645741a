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

// System models, the quadratic tracking cost and trajectory rollout.
//
// Every model tracks a moving target point o in a d-dimensional target space
// through an output map C(x). The cost is
//
//   L(x, u; o)  = 1/2 u'Ru + 1/2 (C(x) - o)'W(C(x) - o)       t = 0..T-1
//   Lf(x; o)    = 1/2 (C(x) - o)'Wf(C(x) - o)                 t = T

#pragma once

#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "retro/common.hpp"

namespace retro {

struct CostWeights {
  Matrix R;        // m x m, symmetric positive definite
  Matrix W;        // d x d, running tracking weight
  Matrix W_final;  // d x d, terminal tracking weight
};

struct Linearization {
  Matrix A;  // df/dx
  Matrix B;  // df/du
};

// Second-order terms of the dynamics contracted with a costate lambda:
// fxx = sum_i lambda_i d2f_i/dx2, and likewise for ux and uu.
struct DynamicsCurvature {
  Matrix fxx;
  Matrix fux;
  Matrix fuu;
};

class SystemModel {
 public:
  SystemModel(int n, int m, int d, CostWeights weights, double sigma);
  virtual ~SystemModel() = default;

  virtual std::string name() const = 0;

  int state_dim() const { return n_; }
  int control_dim() const { return m_; }
  int target_dim() const { return d_; }
  const CostWeights& weights() const { return weights_; }
  double noise_scale() const { return sigma_; }

  // Mean dynamics f(x, u, t).
  virtual Vector transition(const Vector& x, const Vector& u, int t) const = 0;

  // Analytic Jacobians. Models without them return false and the caller
  // falls back to central differences (when allowed).
  virtual bool jacobians(const Vector& x, const Vector& u, int t, Matrix* A,
                         Matrix* B) const;

  // Contracted second derivatives for full DDP. The default differentiates
  // the analytic Jacobians numerically; returns false without them.
  virtual bool curvature(const Vector& x, const Vector& u, int t,
                         const Vector& lambda, DynamicsCurvature* out) const;

  virtual Vector output(const Vector& x) const = 0;
  virtual Matrix output_jacobian(const Vector& x) const = 0;

  // sum_k w_k d2C_k/dx2 (n x n). Zero for linear outputs.
  virtual Matrix output_curvature(const Vector& x, const Vector& w) const;

  bool finite_difference_fallback() const { return fd_fallback_; }
  void set_finite_difference_fallback(bool on) { fd_fallback_ = on; }

 protected:
  void validate() const;

 private:
  int n_;
  int m_;
  int d_;
  CostWeights weights_;
  double sigma_;
  bool fd_fallback_ = true;
};

using ModelPtr = std::shared_ptr<const SystemModel>;

// x' = A x + B u, o = C x.
class LinearModel : public SystemModel {
 public:
  LinearModel(std::string name, Matrix A, Matrix B, Matrix C,
              CostWeights weights, double sigma = 0.0);

  std::string name() const override { return name_; }
  Vector transition(const Vector& x, const Vector& u, int t) const override;
  bool jacobians(const Vector& x, const Vector& u, int t, Matrix* A,
                 Matrix* B) const override;
  bool curvature(const Vector& x, const Vector& u, int t, const Vector& lambda,
                 DynamicsCurvature* out) const override;
  Vector output(const Vector& x) const override { return C_ * x; }
  Matrix output_jacobian(const Vector&) const override { return C_; }

  const Matrix& A() const { return A_; }
  const Matrix& B() const { return B_; }
  const Matrix& C() const { return C_; }

 private:
  std::string name_;
  Matrix A_;
  Matrix B_;
  Matrix C_;
};

struct ArmParams {
  double l1 = 0.6;
  double l2 = 0.5;
  double m1 = 1.0;  // point mass at the elbow
  double m2 = 0.8;  // point mass at the end effector
  double damping = 0.1;
  double gravity = 9.81;  // along -y
  double dt = 0.01;
  double base_x = 0.0;
  double base_y = 0.0;
};

// Planar two-link arm with point masses at the link ends, semi-implicit Euler.
// State (q1, q2, dq1, dq2), control joint torques, output end-effector
// position.
class TwoLinkArm : public SystemModel {
 public:
  TwoLinkArm(ArmParams params, CostWeights weights, double sigma = 0.0);

  std::string name() const override { return "two_link_arm"; }
  Vector transition(const Vector& x, const Vector& u, int t) const override;
  bool jacobians(const Vector& x, const Vector& u, int t, Matrix* A,
                 Matrix* B) const override;
  Vector output(const Vector& x) const override;
  Matrix output_jacobian(const Vector& x) const override;
  Matrix output_curvature(const Vector& x, const Vector& w) const override;

  const ArmParams& params() const { return p_; }

  Eigen::Matrix2d mass_matrix(const Eigen::Vector2d& q) const;
  // Joint accelerations for the continuous-time dynamics.
  Eigen::Vector2d acceleration(const Eigen::Vector2d& q,
                               const Eigen::Vector2d& dq,
                               const Eigen::Vector2d& tau) const;

 protected:
  // d(qdd)/dq, d(qdd)/ddq and d(qdd)/dtau at (q, dq, tau).
  void acceleration_jacobians(const Eigen::Vector2d& q,
                              const Eigen::Vector2d& dq,
                              const Eigen::Vector2d& tau, Eigen::Matrix2d* Jq,
                              Eigen::Matrix2d* Jv, Eigen::Matrix2d* Jt) const;

 private:
  ArmParams p_;
};

// Two-link arm padded with first-order filter states
//   z_i' = (1 - beta) z_i + beta x_arm[i mod 4],   i = 0..n-5
// which leave the arm and the output untouched. Used to scale the state
// dimension while keeping the task fixed.
class AugmentedArm : public SystemModel {
 public:
  AugmentedArm(int n, ArmParams params, CostWeights weights, double beta = 0.2,
               double sigma = 0.0);

  std::string name() const override { return "arm_augmented"; }
  Vector transition(const Vector& x, const Vector& u, int t) const override;
  bool jacobians(const Vector& x, const Vector& u, int t, Matrix* A,
                 Matrix* B) const override;
  Vector output(const Vector& x) const override;
  Matrix output_jacobian(const Vector& x) const override;
  Matrix output_curvature(const Vector& x, const Vector& w) const override;

  const TwoLinkArm& arm() const { return arm_; }

 private:
  TwoLinkArm arm_;
  double beta_;
};

// Parameters for the built-in catalog. Unset weights take per-model defaults.
struct ModelOptions {
  double dt = 0.01;
  double mass = 1.0;  // double integrator
  double sigma = 0.0;
  ArmParams arm;
  int augmented_dim = 13;
  double filter_beta = 0.2;
  std::optional<Matrix> R;
  std::optional<Matrix> W;
  std::optional<Matrix> W_final;
};

ModelPtr make_scalar_lti(const ModelOptions& opts = {});
ModelPtr make_lti_n4m2(const ModelOptions& opts = {});
ModelPtr make_double_integrator_2d(const ModelOptions& opts = {});
ModelPtr make_two_link_arm(const ModelOptions& opts = {});
ModelPtr make_arm_augmented(const ModelOptions& opts = {});

// Catalog by id: scalar_lti, lti_n4m2, double_integrator_2d, two_link_arm,
// arm_augmented.
std::map<std::string, ModelPtr> builtin_models(const ModelOptions& opts = {});
ModelPtr make_model(const std::string& id, const ModelOptions& opts = {});

// ---------------------------------------------------------------------------
// Cost and rollout.

struct CostExpansion {
  double value = 0.0;
  Vector lx;
  Vector lu;
  Matrix lxx;
  Matrix luu;
  Matrix lux;
};

double stage_cost(const SystemModel& model, const Vector& x, const Vector& u,
                  const Vector& target);
double final_cost(const SystemModel& model, const Vector& x,
                  const Vector& target);

// Exact derivatives of the stage cost (including output curvature).
CostExpansion stage_cost_expansion(const SystemModel& model, const Vector& x,
                                   const Vector& u, const Vector& target);
// Final-cost expansion; lu, luu, lux are empty.
CostExpansion final_cost_expansion(const SystemModel& model, const Vector& x,
                                   const Vector& target);

// f(x, u) + noise. Throws DimensionError or DivergenceError.
Vector step(const SystemModel& model, const Vector& x, const Vector& u, int t,
            const std::optional<Vector>& noise = std::nullopt);

// Jacobians at (x, u): analytic when available, else central differences
// with step 1e-6 (throws Error when the fallback is disabled).
Linearization linearize(const SystemModel& model, const Vector& x,
                        const Vector& u, int t);

struct NominalTrajectory {
  std::vector<Vector> states;    // x_0..x_T
  std::vector<Vector> controls;  // u_0..u_{T-1}
  std::vector<double> stage_costs;  // L_0..L_{T-1}, Lf at index T
  double total_cost = 0.0;

  int horizon() const { return static_cast<int>(controls.size()); }
};

// Sum of stage costs and the final cost of the given states and controls.
double trajectory_cost(const SystemModel& model,
                       const std::vector<Vector>& states,
                       const std::vector<Vector>& controls,
                       const PointSeries& targets,
                       std::vector<double>* stage_costs = nullptr);

// Noise-free rollout. targets must hold T+1 points.
NominalTrajectory rollout(const SystemModel& model, const Vector& x0,
                          const std::vector<Vector>& controls,
                          const PointSeries& targets);

// Rollout with process noise N(0, sigma^2 I) drawn from rng.
NominalTrajectory rollout_noisy(const SystemModel& model, const Vector& x0,
                                const std::vector<Vector>& controls,
                                const PointSeries& targets, std::mt19937_64& rng);

}  // namespace retro
