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

// Independent reference computations shared by the tests and the acceptance
// run. Nothing here calls into the library code it is used to check.

#pragma once

#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "retro/adjust.hpp"
#include "retro/dynamics.hpp"

namespace retro::testing {

struct LqrInstance {
  Matrix A, B, Q, R, Qf;
  Vector x0;
  int T = 0;
};

inline Matrix random_matrix(int r, int c, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Matrix M(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) M(i, j) = nd(rng);
  return M;
}

inline Matrix random_spd(int n, double floor, std::mt19937_64& rng) {
  const Matrix G = random_matrix(n, n, rng);
  return G * G.transpose() / n + floor * Matrix::Identity(n, n);
}

// Spectral radius scaled to `radius`.
inline LqrInstance random_lqr(int n, int m, int T, std::mt19937_64& rng,
                              double radius = 1.05) {
  LqrInstance p;
  p.A = random_matrix(n, n, rng);
  const double rho = p.A.eigenvalues().cwiseAbs().maxCoeff();
  p.A *= radius / rho;
  p.B = random_matrix(n, m, rng);
  p.Q = random_spd(n, 0.1, rng);
  p.R = random_spd(m, 0.5, rng);
  p.Qf = random_spd(n, 0.5, rng);
  p.x0 = random_matrix(n, 1, rng);
  p.T = T;
  return p;
}

// Backward Riccati recursion; u_t = -K_t x_t.
struct RiccatiReference {
  std::vector<Matrix> K;
  std::vector<Vector> x;
  std::vector<Vector> u;
};

inline RiccatiReference riccati_reference(const LqrInstance& p) {
  RiccatiReference ref;
  ref.K.resize(p.T);
  Matrix P = p.Qf;
  for (int t = p.T - 1; t >= 0; --t) {
    const Matrix S = p.R + p.B.transpose() * P * p.B;
    const Matrix K = S.ldlt().solve(p.B.transpose() * P * p.A);
    ref.K[t] = K;
    const Matrix Acl = p.A - p.B * K;
    P = p.Q + K.transpose() * p.R * K + Acl.transpose() * P * Acl;
    P = 0.5 * (P + P.transpose());
  }
  ref.x.push_back(p.x0);
  for (int t = 0; t < p.T; ++t) {
    ref.u.push_back(-ref.K[t] * ref.x.back());
    ref.x.push_back(p.A * ref.x.back() + p.B * ref.u.back());
  }
  return ref;
}

// The LQR instance as a tracking problem with zero targets and C = I.
inline std::shared_ptr<LinearModel> lqr_model(const LqrInstance& p) {
  const int n = static_cast<int>(p.A.rows());
  return std::make_shared<LinearModel>("lqr", p.A, p.B,
                                       Matrix::Identity(n, n),
                                       CostWeights{p.R, p.Q, p.Qf});
}

inline double rel_err(const Matrix& a, const Matrix& b) {
  return (a - b).norm() / std::max(b.norm(), 1e-12);
}

// Solves the full N x N desirability system with a dense LU factorization:
// rows i < N-1: z_i - sum_{j>=i} exp(-dL_i) p_j z_j = 0; row N-1:
// z_{N-1} = exp(-dL_{N-1}).
inline Vector dense_desirability(const std::vector<double>& dl,
                                 const std::vector<double>& p) {
  const int N = static_cast<int>(dl.size());
  Matrix A = Matrix::Zero(N, N);
  Vector b = Vector::Zero(N);
  for (int i = 0; i < N - 1; ++i) {
    A(i, i) = 1.0;
    for (int j = i; j < N; ++j) A(i, j) -= std::exp(-dl[i]) * p[j];
  }
  A(N - 1, N - 1) = 1.0;
  b(N - 1) = std::exp(-dl[N - 1]);
  return A.fullPivLu().solve(b);
}

struct DesirabilityInstance {
  CostShiftVector dl;
  std::vector<double> weights;
};

// Random well-posed window: every non-terminal pivot 1 - exp(-dL_i) p_i is
// at least `min_pivot` (instances are redrawn until it is).
inline DesirabilityInstance random_desirability(int N, double shift_range,
                                                std::mt19937_64& rng,
                                                double min_pivot = 0.05) {
  while (true) {
    std::uniform_real_distribution<double> shift(-shift_range, shift_range);
    std::uniform_real_distribution<double> w(0.05, 1.0);
    DesirabilityInstance inst;
    inst.dl.first = 1;
    double total = 0.0;
    for (int i = 0; i < N; ++i) {
      inst.dl.delta.push_back(shift(rng));
      inst.dl.posterior_cost.push_back(0.0);
      inst.dl.prior_cost.push_back(0.0);
      inst.dl.clamped.push_back(false);
      inst.weights.push_back(w(rng));
      total += inst.weights.back();
    }
    for (double& x : inst.weights) x /= total;
    bool ok = true;
    for (int i = 0; i + 1 < N; ++i) {
      ok = ok && 1.0 - std::exp(-inst.dl.delta[i]) * inst.weights[i] >= min_pivot;
    }
    if (ok) return inst;
  }
}

// KL(N(mu1, s1^2) || N(mu2, s2^2)) by adaptive Gauss-Kronrod quadrature.
inline double kl_quadrature(double mu1, double s1, double mu2, double s2) {
  const double log_norm = 0.5 * std::log(2.0 * M_PI);
  auto f = [&](double x) {
    const double a = (x - mu1) / s1;
    const double b = (x - mu2) / s2;
    const double lp = -0.5 * a * a - std::log(s1) - log_norm;
    const double lq = -0.5 * b * b - std::log(s2) - log_norm;
    return std::exp(lp) * (lp - lq);
  };
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  return GK::integrate(f, mu1 - 14.0 * s1, mu1 + 14.0 * s1, 20, 1e-14);
}

}  // namespace retro::testing
