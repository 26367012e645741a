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

#include "retro/dynamics.hpp"

#include <cmath>
#include <utility>

namespace retro {

namespace {

constexpr double kJacobianStep = 1e-6;
constexpr double kCurvatureStep = 1e-5;

bool is_symmetric(const Matrix& M, double tol) {
  return M.rows() == M.cols() && (M - M.transpose()).cwiseAbs().maxCoeff() <=
                                     tol * (1.0 + M.cwiseAbs().maxCoeff());
}

}  // namespace

SystemModel::SystemModel(int n, int m, int d, CostWeights weights,
                         double sigma)
    : n_(n), m_(m), d_(d), weights_(std::move(weights)), sigma_(sigma) {
  validate();
}

void SystemModel::validate() const {
  if (n_ <= 0 || m_ <= 0 || d_ <= 0) {
    throw DimensionError("model dimensions must be positive");
  }
  const auto check = [](const Matrix& M, int k, const char* what) {
    if (M.rows() != k || M.cols() != k) {
      throw DimensionError(std::string(what) + " must be " +
                           std::to_string(k) + "x" + std::to_string(k));
    }
    if (!M.allFinite() || !is_symmetric(M, 1e-12)) {
      throw Error(std::string(what) + " must be finite and symmetric");
    }
  };
  check(weights_.R, m_, "R");
  check(weights_.W, d_, "W");
  check(weights_.W_final, d_, "W_final");
  Eigen::LLT<Matrix> llt(weights_.R);
  if (llt.info() != Eigen::Success) {
    throw Error("R must be positive definite");
  }
  for (const Matrix* M : {&weights_.W, &weights_.W_final}) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(*M);
    if (es.eigenvalues().minCoeff() < -1e-12 * (1.0 + M->norm())) {
      throw Error("tracking weights must be positive semidefinite");
    }
  }
  if (!(sigma_ >= 0.0) || !std::isfinite(sigma_)) {
    throw Error("noise scale must be finite and non-negative");
  }
}

bool SystemModel::jacobians(const Vector&, const Vector&, int, Matrix*,
                            Matrix*) const {
  return false;
}

bool SystemModel::curvature(const Vector& x, const Vector& u, int t,
                            const Vector& lambda,
                            DynamicsCurvature* out) const {
  Matrix A, B;
  if (!jacobians(x, u, t, &A, &B)) return false;
  const int n = n_;
  const int m = m_;
  out->fxx.setZero(n, n);
  out->fux.setZero(m, n);
  out->fuu.setZero(m, m);
  Matrix Ap, Bp, Am, Bm;
  for (int j = 0; j < n; ++j) {
    Vector xp = x, xm = x;
    xp(j) += kCurvatureStep;
    xm(j) -= kCurvatureStep;
    jacobians(xp, u, t, &Ap, &Bp);
    jacobians(xm, u, t, &Am, &Bm);
    out->fxx.col(j) = (Ap - Am).transpose() * lambda / (2 * kCurvatureStep);
    out->fux.col(j) = (Bp - Bm).transpose() * lambda / (2 * kCurvatureStep);
  }
  for (int j = 0; j < m; ++j) {
    Vector up = u, um = u;
    up(j) += kCurvatureStep;
    um(j) -= kCurvatureStep;
    jacobians(x, up, t, &Ap, &Bp);
    jacobians(x, um, t, &Am, &Bm);
    out->fuu.col(j) = (Bp - Bm).transpose() * lambda / (2 * kCurvatureStep);
  }
  out->fxx = 0.5 * (out->fxx + out->fxx.transpose()).eval();
  out->fuu = 0.5 * (out->fuu + out->fuu.transpose()).eval();
  return true;
}

Matrix SystemModel::output_curvature(const Vector&, const Vector&) const {
  return Matrix::Zero(n_, n_);
}

// ---------------------------------------------------------------------------

double stage_cost(const SystemModel& model, const Vector& x, const Vector& u,
                  const Vector& target) {
  const CostWeights& w = model.weights();
  const Vector r = model.output(x) - target;
  return 0.5 * u.dot(w.R * u) + 0.5 * r.dot(w.W * r);
}

double final_cost(const SystemModel& model, const Vector& x,
                  const Vector& target) {
  const Vector r = model.output(x) - target;
  return 0.5 * r.dot(model.weights().W_final * r);
}

namespace {

void tracking_terms(const SystemModel& model, const Vector& x,
                    const Vector& target, const Matrix& W, CostExpansion* e) {
  const Vector r = model.output(x) - target;
  const Matrix J = model.output_jacobian(x);
  const Vector Wr = W * r;
  e->value += 0.5 * r.dot(Wr);
  e->lx = J.transpose() * Wr;
  e->lxx = J.transpose() * W * J + model.output_curvature(x, Wr);
}

}  // namespace

CostExpansion stage_cost_expansion(const SystemModel& model, const Vector& x,
                                   const Vector& u, const Vector& target) {
  CostExpansion e;
  const Matrix& R = model.weights().R;
  tracking_terms(model, x, target, model.weights().W, &e);
  e.value += 0.5 * u.dot(R * u);
  e.lu = R * u;
  e.luu = R;
  e.lux = Matrix::Zero(model.control_dim(), model.state_dim());
  return e;
}

CostExpansion final_cost_expansion(const SystemModel& model, const Vector& x,
                                   const Vector& target) {
  CostExpansion e;
  tracking_terms(model, x, target, model.weights().W_final, &e);
  return e;
}

Vector step(const SystemModel& model, const Vector& x, const Vector& u, int t,
            const std::optional<Vector>& noise) {
  require_dim(x, model.state_dim(), "state");
  require_dim(u, model.control_dim(), "control");
  Vector next = model.transition(x, u, t);
  if (noise) {
    require_dim(*noise, model.state_dim(), "noise");
    next += *noise;
  }
  if (!next.allFinite()) {
    throw DivergenceError("non-finite state from " + model.name(), t + 1);
  }
  return next;
}

Linearization linearize(const SystemModel& model, const Vector& x,
                        const Vector& u, int t) {
  require_dim(x, model.state_dim(), "state");
  require_dim(u, model.control_dim(), "control");
  Linearization lin;
  if (model.jacobians(x, u, t, &lin.A, &lin.B)) return lin;
  if (!model.finite_difference_fallback()) {
    throw Error("model " + model.name() +
                " has no analytic Jacobians and the finite-difference "
                "fallback is disabled");
  }
  const int n = model.state_dim();
  const int m = model.control_dim();
  lin.A.resize(n, n);
  lin.B.resize(n, m);
  for (int j = 0; j < n; ++j) {
    const double h = kJacobianStep * (1.0 + std::abs(x(j)));
    Vector xp = x, xm = x;
    xp(j) += h;
    xm(j) -= h;
    lin.A.col(j) =
        (model.transition(xp, u, t) - model.transition(xm, u, t)) / (2 * h);
  }
  for (int j = 0; j < m; ++j) {
    const double h = kJacobianStep * (1.0 + std::abs(u(j)));
    Vector up = u, um = u;
    up(j) += h;
    um(j) -= h;
    lin.B.col(j) =
        (model.transition(x, up, t) - model.transition(x, um, t)) / (2 * h);
  }
  return lin;
}

double trajectory_cost(const SystemModel& model,
                       const std::vector<Vector>& states,
                       const std::vector<Vector>& controls,
                       const PointSeries& targets,
                       std::vector<double>* stage_costs) {
  const std::size_t T = controls.size();
  if (states.size() != T + 1 || targets.size() != T + 1) {
    throw DimensionError("trajectory cost: need T+1 states and targets");
  }
  if (stage_costs) stage_costs->assign(T + 1, 0.0);
  double total = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    const double c = stage_cost(model, states[t], controls[t], targets[t]);
    if (stage_costs) (*stage_costs)[t] = c;
    total += c;
  }
  const double cf = final_cost(model, states[T], targets[T]);
  if (stage_costs) (*stage_costs)[T] = cf;
  return total + cf;
}

namespace {

NominalTrajectory rollout_impl(const SystemModel& model, const Vector& x0,
                               const std::vector<Vector>& controls,
                               const PointSeries& targets,
                               std::mt19937_64* rng) {
  const int T = static_cast<int>(controls.size());
  if (static_cast<int>(targets.size()) != T + 1) {
    throw DimensionError("rollout: target series must have T+1 points");
  }
  require_dim(x0, model.state_dim(), "initial state");
  NominalTrajectory traj;
  traj.controls = controls;
  traj.states.reserve(T + 1);
  traj.states.push_back(x0);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int t = 0; t < T; ++t) {
    std::optional<Vector> noise;
    if (rng != nullptr && model.noise_scale() > 0.0) {
      Vector w(model.state_dim());
      for (int i = 0; i < w.size(); ++i) {
        w(i) = model.noise_scale() * normal(*rng);
      }
      noise = std::move(w);
    }
    traj.states.push_back(step(model, traj.states[t], controls[t], t, noise));
  }
  traj.total_cost = trajectory_cost(model, traj.states, traj.controls, targets,
                                    &traj.stage_costs);
  return traj;
}

}  // namespace

NominalTrajectory rollout(const SystemModel& model, const Vector& x0,
                          const std::vector<Vector>& controls,
                          const PointSeries& targets) {
  return rollout_impl(model, x0, controls, targets, nullptr);
}

NominalTrajectory rollout_noisy(const SystemModel& model, const Vector& x0,
                                const std::vector<Vector>& controls,
                                const PointSeries& targets,
                                std::mt19937_64& rng) {
  return rollout_impl(model, x0, controls, targets, &rng);
}

}  // namespace retro
