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

#include "retro/adjust.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <numeric>
#include <span>

#include "retro/simd.hpp"

namespace retro {

namespace {

std::atomic<std::uint64_t> g_solve_count{0};
std::mutex g_observer_mu;
SolutionObserver g_observer;

std::span<const double> row_tail(const RowMajorMatrix& A, Eigen::Index i,
                                 Eigen::Index from) {
  return {A.data() + i * A.cols() + from,
          static_cast<std::size_t>(A.cols() - from)};
}

double expected_tracking_cost(const GaussianMixture& belief, const Vector& y,
                              const Matrix& W) {
  double c = 0.0;
  for (std::size_t k = 0; k < belief.components.size(); ++k) {
    const GaussianBelief& g = belief.components[k];
    const Vector r = y - g.mean;
    c += belief.weights[k] *
         (0.5 * r.dot(W * r) + 0.5 * (W * g.cov).trace());
  }
  return c;
}

const Matrix& tracking_weight(const SystemModel& model, int t, int T) {
  return t == T ? model.weights().W_final : model.weights().W;
}

BeliefTrajectory translated(const BeliefTrajectory& b, int from,
                            const Vector& shift) {
  BeliefTrajectory out = b;
  auto& steps = out.mutable_steps();
  for (int t = from; t < static_cast<int>(steps.size()); ++t) {
    for (GaussianBelief& g : steps[t].components) g.mean += shift;
  }
  return out;
}

}  // namespace

CostShiftVector delta_running_cost(const NominalTrajectory& traj,
                                   const BeliefTrajectory& prior,
                                   const BeliefTrajectory& posterior,
                                   const SystemModel& model, int first,
                                   const DesirabilityOptions& opts) {
  const int T = traj.horizon();
  if (prior.horizon() != T || posterior.horizon() != T) {
    throw DimensionError("cost shift: belief and trajectory horizons differ");
  }
  if (prior.dim() != model.target_dim() ||
      posterior.dim() != model.target_dim()) {
    throw DimensionError("cost shift: belief dimension != target dimension");
  }
  if (first < 0 || first > T) throw Error("cost shift: window start outside horizon");

  CostShiftVector out;
  out.first = first;
  const int N = T - first + 1;
  out.delta.resize(N);
  out.posterior_cost.resize(N);
  out.prior_cost.resize(N);
  out.clamped.assign(N, false);
  for (int i = 0; i < N; ++i) {
    const int t = first + i;
    const Vector y = model.output(traj.states[t]);
    const Matrix& W = tracking_weight(model, t, T);
    out.posterior_cost[i] = expected_tracking_cost(posterior.at(t), y, W);
    out.prior_cost[i] = expected_tracking_cost(prior.at(t), y, W);
    double dl = out.posterior_cost[i] - out.prior_cost[i];
    if (!std::isfinite(dl)) throw Error("cost shift: non-finite value");
    if (std::abs(dl) > opts.cost_shift_clamp) {
      dl = std::copysign(opts.cost_shift_clamp, dl);
      out.clamped[i] = true;
    }
    out.delta[i] = dl;
  }
  return out;
}

RowMajorMatrix DesirabilityMatrix::dense() const {
  const int N = size();
  RowMajorMatrix M = RowMajorMatrix::Zero(N, N);
  for (int i = 0; i < N; ++i) {
    for (int j = i; j < N; ++j) M(i, j) = scale[i] * weights[j];
  }
  return M;
}

DesirabilityMatrix build_M(const CostShiftVector& dl,
                           const std::vector<double>& weights) {
  if (static_cast<int>(weights.size()) != dl.size() || dl.size() == 0) {
    throw DimensionError("build_M: weights and cost shift sizes differ");
  }
  double sum = 0.0;
  for (double p : weights) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw Error("build_M: weights must be finite and non-negative");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw Error("build_M: weights must be normalized (sum " +
                std::to_string(sum) + ")");
  }
  DesirabilityMatrix M;
  M.first = dl.first;
  M.weights = weights;
  M.scale.resize(dl.size());
  for (int i = 0; i < dl.size(); ++i) {
    M.scale[i] = std::exp(-dl.delta[i]);
  }
  return M;
}

Vector solve_upper(const RowMajorMatrix& A, const Vector& b) {
  const Eigen::Index n = A.rows();
  Vector x(n);
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    const double s =
        simd::dot(row_tail(A, i, i + 1),
                  {x.data() + i + 1, static_cast<std::size_t>(n - i - 1)});
    x(i) = (b(i) - s) / A(i, i);
  }
  return x;
}

Vector solve_upper_transposed(const RowMajorMatrix& A, const Vector& b) {
  const Eigen::Index n = A.rows();
  Vector c = b;
  for (Eigen::Index i = 0; i < n; ++i) {
    c(i) /= A(i, i);
    simd::axpy(-c(i), row_tail(A, i, i + 1),
               {c.data() + i + 1, static_cast<std::size_t>(n - i - 1)});
  }
  return c;
}

double condition_estimate_upper(const RowMajorMatrix& A) {
  const Eigen::Index n = A.rows();
  if (n == 0) return 1.0;
  const double norm_a = A.cwiseAbs().colwise().sum().maxCoeff();

  Vector x = Vector::Constant(n, 1.0 / static_cast<double>(n));
  double est = 0.0;
  Eigen::Index last_j = -1;
  for (int iter = 0; iter < 5; ++iter) {
    const Vector y = solve_upper(A, x);
    const double y_norm = y.lpNorm<1>();
    if (iter > 0 && y_norm <= est) break;
    est = y_norm;
    Vector xi(n);
    for (Eigen::Index i = 0; i < n; ++i) xi(i) = y(i) >= 0.0 ? 1.0 : -1.0;
    const Vector w = solve_upper_transposed(A, xi);
    Eigen::Index j = 0;
    const double wmax = w.cwiseAbs().maxCoeff(&j);
    if (wmax <= w.dot(x) || j == last_j) break;
    x.setZero();
    x(j) = 1.0;
    last_j = j;
  }
  if (n > 1) {
    Vector alt(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      alt(i) = (i % 2 == 0 ? 1.0 : -1.0) *
               (1.0 + static_cast<double>(i) / static_cast<double>(n - 1));
    }
    est = std::max(est, 2.0 * solve_upper(A, alt).lpNorm<1>() / (3.0 * n));
  }
  return norm_a * est;
}

DesirabilitySolution solve_desirability(const DesirabilityMatrix& M,
                                        const CostShiftVector& dl,
                                        const DesirabilityOptions& opts) {
  const int N = M.size();
  if (dl.size() != N || dl.first != M.first || N == 0) {
    throw DimensionError("solve_desirability: matrix and cost shift differ");
  }
  g_solve_count.fetch_add(1, std::memory_order_relaxed);

  DesirabilitySolution sol;
  sol.first = M.first;
  sol.delta_l = dl.delta;
  sol.weights = M.weights;
  sol.z.assign(N, 1.0);
  sol.g.assign(N, 1.0);
  sol.delta_v.assign(N, 0.0);
  sol.zero_shift = std::all_of(dl.delta.begin(), dl.delta.end(),
                               [](double v) { return v == 0.0; });

  if (!sol.zero_shift) {
    const int n = N - 1;
    const double z_terminal = M.scale[n];
    RowMajorMatrix A = RowMajorMatrix::Zero(n, n);
    Vector b(n);
    for (int i = 0; i < n; ++i) {
      double diag = 1.0 / M.scale[i] - M.weights[i];
      if (!(diag > opts.ridge)) {
        sol.nonpositive_rows.push_back(M.first + i);
        diag = opts.ridge;
      }
      A(i, i) = diag;
      for (int j = i + 1; j < n; ++j) A(i, j) = -M.weights[j];
      b(i) = M.weights[n] * z_terminal;
    }
    sol.condition = condition_estimate_upper(A);
    if (!(sol.condition <= opts.condition_limit)) {
      sol.ill_conditioned = true;
      A.diagonal().array() += opts.ridge;
    }
    const Vector zn = solve_upper(A, b);
    for (int i = 0; i < n; ++i) sol.z[i] = zn(i);
    sol.z[n] = z_terminal;

    double acc = 0.0;
    for (int i = N - 1; i >= 0; --i) {
      acc += M.weights[i] * sol.z[i];
      sol.g[i] = acc;
      sol.delta_v[i] = i == n ? dl.delta[i] : dl.delta[i] - std::log(acc);
    }

    const RowMajorMatrix Md = M.dense();
    std::span<const double> zs(sol.z.data(), sol.z.size());
    for (int i = 0; i < n; ++i) {
      const double mz = simd::dot(row_tail(Md, i, i), zs.subspan(i));
      sol.residual = std::max(sol.residual, std::abs(sol.z[i] - mz));
    }
  }

  SolutionObserver observer;
  {
    std::lock_guard<std::mutex> lock(g_observer_mu);
    observer = g_observer;
  }
  if (observer) observer(sol);
  return sol;
}

std::vector<Vector> value_gradient(const DesirabilitySolution& sol,
                                   const BeliefTrajectory& prior,
                                   const BeliefTrajectory& posterior,
                                   const NominalTrajectory& traj,
                                   const SystemModel& model,
                                   GradientMode mode,
                                   const DesirabilityOptions& opts) {
  const int N = sol.size();
  const int T = traj.horizon();
  const int d = model.target_dim();
  if (sol.last() != T) throw Error("value_gradient: window must end at T");
  std::vector<Vector> grad(N, Vector::Zero(d));
  if (sol.zero_shift) return grad;

  if (mode == GradientMode::kAnalytic) {
    std::vector<Vector> ell(N);
    for (int i = 0; i < N; ++i) {
      const int t = sol.first + i;
      const Vector shift = posterior.at(t).mean() - prior.at(t).mean();
      ell[i] = std::abs(sol.delta_l[i]) >= opts.cost_shift_clamp
                   ? Vector::Zero(d)
                   : Vector(tracking_weight(model, t, T) * shift);
    }
    grad[N - 1] = ell[N - 1];
    double tail = sol.weights[N - 1] * sol.z[N - 1];
    Vector acc = tail * grad[N - 1];
    for (int i = N - 2; i >= 0; --i) {
      grad[i] = (sol.g[i] * ell[i] + acc) / tail;
      const double pz = sol.weights[i] * sol.z[i];
      acc += pz * grad[i];
      tail += pz;
    }
    return grad;
  }

  const auto delta_v_at = [&](int i, const Vector& shift) {
    const int t = sol.first + i;
    const BeliefTrajectory pr = translated(prior, t, shift);
    const BeliefTrajectory po = translated(posterior, t, shift);
    const CostShiftVector dl =
        delta_running_cost(traj, pr, po, model, sol.first, opts);
    const std::vector<double> w = predictive_weights(pr, po, sol.first, T);
    return solve_desirability(build_M(dl, w), dl, opts).delta_v[i];
  };
  for (int i = 0; i < N; ++i) {
    const Vector mu = posterior.at(sol.first + i).mean();
    for (int c = 0; c < d; ++c) {
      const double h = 1e-4 * (1.0 + std::abs(mu(c)));
      Vector e = Vector::Zero(d);
      e(c) = h;
      grad[i](c) = (delta_v_at(i, e) - delta_v_at(i, -e)) / (2.0 * h);
    }
  }
  return grad;
}

LinearizationCache LinearizationCache::build(const NominalTrajectory& traj,
                                             const SystemModel& model) {
  const int T = traj.horizon();
  LinearizationCache c;
  c.Bt.resize(T);
  c.Ct.resize(T + 1);
  for (int t = 0; t < T; ++t) {
    c.Bt[t] = linearize(model, traj.states[t], traj.controls[t], t).B;
  }
  for (int t = 0; t <= T; ++t) c.Ct[t] = model.output_jacobian(traj.states[t]);
  c.R_inv = model.weights().R.inverse();
  return c;
}

AdjustmentResult control_adjustment(const std::vector<Vector>& grad,
                                    int first, const NominalTrajectory& traj,
                                    const SystemModel& model,
                                    const LinearizationCache* cache) {
  const int T = traj.horizon();
  if (first < 1 || first > T ||
      static_cast<int>(grad.size()) != T - first + 1) {
    throw DimensionError("control_adjustment: gradient window mismatch");
  }
  LinearizationCache local;
  if (cache == nullptr) {
    local = LinearizationCache::build(traj, model);
    cache = &local;
  }
  AdjustmentResult out;
  out.first_control = first - 1;
  out.controls = traj.controls;
  for (int t = first - 1; t < T; ++t) {
    const Vector& g = grad[t + 1 - first];
    Vector gx = -(cache->Ct[t + 1].transpose() * g);
    Vector du = -(cache->R_inv * (cache->Bt[t].transpose() * gx));
    out.controls[t] += du;
    out.state_gradient.push_back(std::move(gx));
    out.delta_u.push_back(std::move(du));
  }
  return out;
}

std::uint64_t desirability_solve_count() {
  return g_solve_count.load(std::memory_order_relaxed);
}

void set_solution_observer(SolutionObserver observer) {
  std::lock_guard<std::mutex> lock(g_observer_mu);
  g_observer = std::move(observer);
}

}  // namespace retro
