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

#include <cmath>
#include <utility>

#include "retro/dynamics.hpp"

namespace retro {

using Eigen::Matrix2d;
using Eigen::Vector2d;

// ---------------------------------------------------------------------------
// LinearModel

LinearModel::LinearModel(std::string name, Matrix A, Matrix B, Matrix C,
                         CostWeights weights, double sigma)
    : SystemModel(static_cast<int>(A.rows()), static_cast<int>(B.cols()),
                  static_cast<int>(C.rows()), std::move(weights), sigma),
      name_(std::move(name)),
      A_(std::move(A)),
      B_(std::move(B)),
      C_(std::move(C)) {
  const int n = state_dim();
  if (A_.cols() != n || B_.rows() != n || C_.cols() != n) {
    throw DimensionError("linear model: inconsistent A, B, C shapes");
  }
}

Vector LinearModel::transition(const Vector& x, const Vector& u, int) const {
  return A_ * x + B_ * u;
}

bool LinearModel::jacobians(const Vector&, const Vector&, int, Matrix* A,
                            Matrix* B) const {
  *A = A_;
  *B = B_;
  return true;
}

bool LinearModel::curvature(const Vector&, const Vector&, int, const Vector&,
                            DynamicsCurvature* out) const {
  out->fxx = Matrix::Zero(state_dim(), state_dim());
  out->fux = Matrix::Zero(control_dim(), state_dim());
  out->fuu = Matrix::Zero(control_dim(), control_dim());
  return true;
}

// ---------------------------------------------------------------------------
// TwoLinkArm

TwoLinkArm::TwoLinkArm(ArmParams params, CostWeights weights, double sigma)
    : SystemModel(4, 2, 2, std::move(weights), sigma), p_(params) {
  if (!(p_.l1 > 0 && p_.l2 > 0 && p_.m1 > 0 && p_.m2 > 0 && p_.dt > 0 &&
        p_.damping >= 0)) {
    throw Error("two-link arm: lengths, masses and dt must be positive");
  }
}

Matrix2d TwoLinkArm::mass_matrix(const Vector2d& q) const {
  const double c2 = std::cos(q(1));
  const double a = p_.m2 * p_.l1 * p_.l2;
  Matrix2d M;
  M(0, 0) = p_.m1 * p_.l1 * p_.l1 +
            p_.m2 * (p_.l1 * p_.l1 + p_.l2 * p_.l2) + 2 * a * c2;
  M(0, 1) = p_.m2 * p_.l2 * p_.l2 + a * c2;
  M(1, 0) = M(0, 1);
  M(1, 1) = p_.m2 * p_.l2 * p_.l2;
  return M;
}

namespace {

struct ArmTerms {
  Vector2d coriolis;
  Vector2d gravity;
};

ArmTerms arm_terms(const ArmParams& p, const Vector2d& q, const Vector2d& dq) {
  const double s2 = std::sin(q(1));
  const double c1 = std::cos(q(0));
  const double c12 = std::cos(q(0) + q(1));
  const double h = -p.m2 * p.l1 * p.l2 * s2;
  ArmTerms terms;
  terms.coriolis << h * (2 * dq(0) * dq(1) + dq(1) * dq(1)), -h * dq(0) * dq(0);
  terms.gravity << (p.m1 + p.m2) * p.gravity * p.l1 * c1 +
                       p.m2 * p.gravity * p.l2 * c12,
      p.m2 * p.gravity * p.l2 * c12;
  return terms;
}

}  // namespace

Vector2d TwoLinkArm::acceleration(const Vector2d& q, const Vector2d& dq,
                                  const Vector2d& tau) const {
  const ArmTerms terms = arm_terms(p_, q, dq);
  const Vector2d rhs = tau - terms.coriolis - terms.gravity - p_.damping * dq;
  return mass_matrix(q).ldlt().solve(rhs);
}

void TwoLinkArm::acceleration_jacobians(const Vector2d& q, const Vector2d& dq,
                                        const Vector2d& tau, Matrix2d* Jq,
                                        Matrix2d* Jv, Matrix2d* Jt) const {
  const double s1 = std::sin(q(0));
  const double s2 = std::sin(q(1));
  const double c2 = std::cos(q(1));
  const double s12 = std::sin(q(0) + q(1));
  const double a = p_.m2 * p_.l1 * p_.l2;
  const double g = p_.gravity;

  const Matrix2d M = mass_matrix(q);
  const Matrix2d Minv = M.inverse();
  const Vector2d qdd = acceleration(q, dq, tau);

  Matrix2d dM_dq2;
  dM_dq2 << -2 * a * s2, -a * s2, -a * s2, 0.0;

  // Partial derivatives of coriolis + gravity with respect to q.
  Matrix2d dcg_dq;
  dcg_dq(0, 0) = -(p_.m1 + p_.m2) * g * p_.l1 * s1 - p_.m2 * g * p_.l2 * s12;
  dcg_dq(1, 0) = -p_.m2 * g * p_.l2 * s12;
  dcg_dq(0, 1) =
      -a * c2 * (2 * dq(0) * dq(1) + dq(1) * dq(1)) - p_.m2 * g * p_.l2 * s12;
  dcg_dq(1, 1) = a * c2 * dq(0) * dq(0) - p_.m2 * g * p_.l2 * s12;

  Matrix2d dMqdd_dq = Matrix2d::Zero();
  dMqdd_dq.col(1) = dM_dq2 * qdd;

  const double h = -a * s2;
  Matrix2d dc_ddq;
  dc_ddq << 2 * h * dq(1), h * (2 * dq(0) + 2 * dq(1)), -2 * h * dq(0), 0.0;

  *Jq = Minv * (-dcg_dq - dMqdd_dq);
  *Jv = Minv * (-dc_ddq - p_.damping * Matrix2d::Identity());
  *Jt = Minv;
}

Vector TwoLinkArm::transition(const Vector& x, const Vector& u, int) const {
  const Vector2d q = x.head<2>();
  const Vector2d dq = x.tail<2>();
  const Vector2d qdd = acceleration(q, dq, u.head<2>());
  const Vector2d dq_next = dq + p_.dt * qdd;
  Vector next(4);
  next << q + p_.dt * dq_next, dq_next;
  return next;
}

bool TwoLinkArm::jacobians(const Vector& x, const Vector& u, int, Matrix* A,
                           Matrix* B) const {
  Matrix2d Jq, Jv, Jt;
  acceleration_jacobians(x.head<2>(), x.tail<2>(), u.head<2>(), &Jq, &Jv, &Jt);
  const double dt = p_.dt;
  const Matrix2d I = Matrix2d::Identity();
  A->resize(4, 4);
  B->resize(4, 2);
  A->topLeftCorner<2, 2>() = I + dt * dt * Jq;
  A->topRightCorner<2, 2>() = dt * I + dt * dt * Jv;
  A->bottomLeftCorner<2, 2>() = dt * Jq;
  A->bottomRightCorner<2, 2>() = I + dt * Jv;
  B->topRows<2>() = dt * dt * Jt;
  B->bottomRows<2>() = dt * Jt;
  return true;
}

Vector TwoLinkArm::output(const Vector& x) const {
  const double q1 = x(0);
  const double q12 = x(0) + x(1);
  Vector p(2);
  p << p_.base_x + p_.l1 * std::cos(q1) + p_.l2 * std::cos(q12),
      p_.base_y + p_.l1 * std::sin(q1) + p_.l2 * std::sin(q12);
  return p;
}

Matrix TwoLinkArm::output_jacobian(const Vector& x) const {
  const double s1 = std::sin(x(0)), c1 = std::cos(x(0));
  const double s12 = std::sin(x(0) + x(1)), c12 = std::cos(x(0) + x(1));
  Matrix J = Matrix::Zero(2, 4);
  J(0, 0) = -p_.l1 * s1 - p_.l2 * s12;
  J(0, 1) = -p_.l2 * s12;
  J(1, 0) = p_.l1 * c1 + p_.l2 * c12;
  J(1, 1) = p_.l2 * c12;
  return J;
}

Matrix TwoLinkArm::output_curvature(const Vector& x, const Vector& w) const {
  const double s1 = std::sin(x(0)), c1 = std::cos(x(0));
  const double s12 = std::sin(x(0) + x(1)), c12 = std::cos(x(0) + x(1));
  const double e11 = -w(0) * (p_.l1 * c1 + p_.l2 * c12) -
                     w(1) * (p_.l1 * s1 + p_.l2 * s12);
  const double e12 = -w(0) * p_.l2 * c12 - w(1) * p_.l2 * s12;
  Matrix H = Matrix::Zero(4, 4);
  H(0, 0) = e11;
  H(0, 1) = e12;
  H(1, 0) = e12;
  H(1, 1) = e12;
  return H;
}

// ---------------------------------------------------------------------------
// AugmentedArm

AugmentedArm::AugmentedArm(int n, ArmParams params, CostWeights weights,
                           double beta, double sigma)
    : SystemModel(n, 2, 2, weights, sigma),
      arm_(params, std::move(weights), sigma),
      beta_(beta) {
  if (n < 4) throw DimensionError("augmented arm needs n >= 4");
  if (!(beta > 0.0 && beta <= 1.0)) {
    throw Error("augmented arm: filter beta must be in (0, 1]");
  }
}

Vector AugmentedArm::transition(const Vector& x, const Vector& u,
                                int t) const {
  const int n = state_dim();
  Vector next(n);
  next.head<4>() = arm_.transition(x.head<4>(), u, t);
  for (int i = 4; i < n; ++i) {
    next(i) = (1.0 - beta_) * x(i) + beta_ * x((i - 4) % 4);
  }
  return next;
}

bool AugmentedArm::jacobians(const Vector& x, const Vector& u, int t,
                             Matrix* A, Matrix* B) const {
  const int n = state_dim();
  Matrix A4, B4;
  arm_.jacobians(x.head<4>(), u, t, &A4, &B4);
  A->setZero(n, n);
  B->setZero(n, 2);
  A->topLeftCorner<4, 4>() = A4;
  B->topRows<4>() = B4;
  for (int i = 4; i < n; ++i) {
    (*A)(i, i) = 1.0 - beta_;
    (*A)(i, (i - 4) % 4) += beta_;
  }
  return true;
}

Vector AugmentedArm::output(const Vector& x) const {
  return arm_.output(x.head<4>());
}

Matrix AugmentedArm::output_jacobian(const Vector& x) const {
  Matrix J = Matrix::Zero(2, state_dim());
  J.leftCols<4>() = arm_.output_jacobian(x.head<4>());
  return J;
}

Matrix AugmentedArm::output_curvature(const Vector& x, const Vector& w) const {
  Matrix H = Matrix::Zero(state_dim(), state_dim());
  H.topLeftCorner<4, 4>() = arm_.output_curvature(x.head<4>(), w);
  return H;
}

// ---------------------------------------------------------------------------
// Catalog

namespace {

CostWeights resolve_weights(const ModelOptions& opts, int m, int d,
                            double r, double w, double wf) {
  CostWeights cw;
  cw.R = opts.R.value_or(r * Matrix::Identity(m, m));
  cw.W = opts.W.value_or(w * Matrix::Identity(d, d));
  cw.W_final = opts.W_final.value_or(wf * Matrix::Identity(d, d));
  return cw;
}

}  // namespace

ModelPtr make_scalar_lti(const ModelOptions& opts) {
  return std::make_shared<LinearModel>(
      "scalar_lti", Matrix::Ones(1, 1), Matrix::Ones(1, 1), Matrix::Ones(1, 1),
      resolve_weights(opts, 1, 1, 1.0, 1.0, 1.0), opts.sigma);
}

ModelPtr make_lti_n4m2(const ModelOptions& opts) {
  const double dt = opts.dt;
  Matrix A(4, 4);
  A << 1.0, dt, 0.0, 0.0,
       -0.5 * dt, 1.0 - 0.1 * dt, 0.5 * dt, 0.0,
       0.0, 0.0, 1.0, dt,
       0.5 * dt, 0.0, -0.5 * dt, 1.0 - 0.1 * dt;
  Matrix B(4, 2);
  B << 0.5 * dt * dt, 0.0,
       dt, 0.0,
       0.0, 0.5 * dt * dt,
       0.0, dt;
  Matrix C = Matrix::Zero(2, 4);
  C(0, 0) = 1.0;
  C(1, 2) = 1.0;
  return std::make_shared<LinearModel>(
      "lti_n4m2", std::move(A), std::move(B), std::move(C),
      resolve_weights(opts, 2, 2, 0.1, 1.0, 10.0), opts.sigma);
}

ModelPtr make_double_integrator_2d(const ModelOptions& opts) {
  const double dt = opts.dt;
  const double inv_mass = 1.0 / opts.mass;
  const Matrix I2 = Matrix::Identity(2, 2);
  Matrix A = Matrix::Identity(4, 4);
  A.topRightCorner(2, 2) = dt * I2;
  Matrix B(4, 2);
  B.topRows(2) = 0.5 * dt * dt * inv_mass * I2;
  B.bottomRows(2) = dt * inv_mass * I2;
  Matrix C = Matrix::Zero(2, 4);
  C.leftCols(2) = I2;
  return std::make_shared<LinearModel>(
      "double_integrator_2d", std::move(A), std::move(B), std::move(C),
      resolve_weights(opts, 2, 2, 0.01, 0.0, 80.0), opts.sigma);
}

ModelPtr make_two_link_arm(const ModelOptions& opts) {
  ArmParams p = opts.arm;
  p.dt = opts.dt;
  return std::make_shared<TwoLinkArm>(
      p, resolve_weights(opts, 2, 2, 1e-3, 0.0, 80.0), opts.sigma);
}

ModelPtr make_arm_augmented(const ModelOptions& opts) {
  ArmParams p = opts.arm;
  p.dt = opts.dt;
  return std::make_shared<AugmentedArm>(
      opts.augmented_dim, p, resolve_weights(opts, 2, 2, 1e-3, 0.0, 80.0),
      opts.filter_beta, opts.sigma);
}

std::map<std::string, ModelPtr> builtin_models(const ModelOptions& opts) {
  return {
      {"scalar_lti", make_scalar_lti(opts)},
      {"lti_n4m2", make_lti_n4m2(opts)},
      {"double_integrator_2d", make_double_integrator_2d(opts)},
      {"two_link_arm", make_two_link_arm(opts)},
      {"arm_augmented", make_arm_augmented(opts)},
  };
}

ModelPtr make_model(const std::string& id, const ModelOptions& opts) {
  if (id == "scalar_lti") return make_scalar_lti(opts);
  if (id == "lti_n4m2") return make_lti_n4m2(opts);
  if (id == "double_integrator_2d") return make_double_integrator_2d(opts);
  if (id == "two_link_arm") return make_two_link_arm(opts);
  if (id == "arm_augmented") return make_arm_augmented(opts);
  throw Error("unknown model id: " + id);
}

}  // namespace retro
