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

#include "retro/belief.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

namespace retro {

namespace {

Matrix floor_cov(const Matrix& M) {
  Matrix S = 0.5 * (M + M.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(S, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  if (lo < kVarianceFloor) {
    S.diagonal().array() += kVarianceFloor - lo;
  }
  return S;
}

double log_sum_exp(const std::vector<double>& v) {
  const double mx = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (double x : v) s += std::exp(x - mx);
  return mx + std::log(s);
}

GaussianBelief position_marginal(const FilterAnchor& a, const Vector& mean,
                                 const Matrix& cov) {
  const int d = a.model.dim();
  return {mean.head(d), floor_cov(cov.topLeftCorner(d, d))};
}

}  // namespace

double GaussianBelief::log_density(const Vector& y) const {
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw Error("belief covariance is not positive definite");
  }
  const Vector r = llt.matrixL().solve(y - mean);
  const double log_det =
      2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return -0.5 * (r.squaredNorm() + log_det +
                 mean.size() * std::log(2.0 * std::numbers::pi));
}

GaussianMixture GaussianMixture::single(GaussianBelief g) {
  GaussianMixture m;
  m.weights = {1.0};
  g.cov = floor_cov(g.cov);
  m.components.push_back(std::move(g));
  return m;
}

Vector GaussianMixture::mean() const {
  Vector mu = Vector::Zero(dim());
  for (std::size_t k = 0; k < components.size(); ++k) {
    mu += weights[k] * components[k].mean;
  }
  return mu;
}

Matrix GaussianMixture::covariance() const {
  const Vector mu = mean();
  Matrix S = Matrix::Zero(dim(), dim());
  for (std::size_t k = 0; k < components.size(); ++k) {
    const Vector dm = components[k].mean - mu;
    S += weights[k] * (components[k].cov + dm * dm.transpose());
  }
  return S;
}

double GaussianMixture::log_density(const Vector& y) const {
  if (is_gaussian()) return components.front().log_density(y);
  std::vector<double> terms;
  terms.reserve(components.size());
  for (std::size_t k = 0; k < components.size(); ++k) {
    if (weights[k] <= 0.0) continue;
    terms.push_back(std::log(weights[k]) + components[k].log_density(y));
  }
  return log_sum_exp(terms);
}

Vector GaussianMixture::sample(std::mt19937_64& rng) const {
  std::size_t k = 0;
  if (components.size() > 1) {
    std::discrete_distribution<std::size_t> pick(weights.begin(),
                                                 weights.end());
    k = pick(rng);
  }
  const GaussianBelief& g = components[k];
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector e(g.dim());
  for (int i = 0; i < e.size(); ++i) e(i) = normal(rng);
  Eigen::LLT<Matrix> llt(g.cov);
  return g.mean + llt.matrixL() * e;
}

// ---------------------------------------------------------------------------

Matrix BallisticModel::transition() const {
  const int d = dim();
  Matrix F = Matrix::Identity(2 * d, 2 * d);
  F.topRightCorner(d, d) = dt * Matrix::Identity(d, d);
  return F;
}

Vector BallisticModel::drift() const {
  Vector c(2 * dim());
  c << 0.5 * dt * dt * gravity, dt * gravity;
  return c;
}

Matrix BallisticModel::process_cov() const {
  const int d = dim();
  Matrix G(2 * d, d);
  G << 0.5 * dt * dt * Matrix::Identity(d, d), dt * Matrix::Identity(d, d);
  return process_noise * process_noise * G * G.transpose();
}

BeliefTrajectory::BeliefTrajectory(std::vector<GaussianMixture> steps)
    : steps_(std::move(steps)) {
  if (steps_.empty()) throw Error("belief trajectory needs at least one step");
}

const GaussianMixture& BeliefTrajectory::at(int t) const {
  if (t < 0 || t > horizon()) {
    throw Error("belief step " + std::to_string(t) + " outside horizon " +
                std::to_string(horizon()));
  }
  return steps_[t];
}

std::vector<Vector> BeliefTrajectory::means() const {
  std::vector<Vector> out;
  out.reserve(steps_.size());
  for (const GaussianMixture& g : steps_) out.push_back(g.mean());
  return out;
}

void BeliefTrajectory::propagate_from_anchor() {
  if (!anchor_) throw Error("belief has no filter anchor");
  const FilterAnchor& a = *anchor_;
  const Matrix F = a.model.transition();
  const Vector c = a.model.drift();
  const Matrix Q = a.model.process_cov();
  Vector mean = a.mean;
  Matrix cov = a.cov;
  for (int t = a.t; t <= horizon(); ++t) {
    if (t > a.t) {
      mean = F * mean + c;
      cov = F * cov * F.transpose() + Q;
    }
    steps_[t] = GaussianMixture::single(position_marginal(a, mean, cov));
  }
}

bool BeliefTrajectory::operator==(const BeliefTrajectory& other) const {
  if (steps_.size() != other.steps_.size()) return false;
  for (std::size_t t = 0; t < steps_.size(); ++t) {
    const GaussianMixture& a = steps_[t];
    const GaussianMixture& b = other.steps_[t];
    if (a.weights != b.weights || a.components.size() != b.components.size()) {
      return false;
    }
    for (std::size_t k = 0; k < a.components.size(); ++k) {
      if (a.components[k].mean != b.components[k].mean ||
          a.components[k].cov != b.components[k].cov) {
        return false;
      }
    }
  }
  return true;
}

BeliefTrajectory ballistic_prior(const Vector& launch_mean,
                                 const Matrix& launch_cov,
                                 const BallisticModel& model, int T) {
  const int d = model.dim();
  if (!(model.dt > 0.0)) throw Error("ballistic prior: dt must be positive");
  if (T < 1) throw Error("ballistic prior: horizon must be >= 1");
  require_dim(launch_mean, 2 * d, "launch mean");
  if (launch_cov.rows() != 2 * d || launch_cov.cols() != 2 * d) {
    throw DimensionError("launch covariance must be 2d x 2d");
  }
  std::vector<GaussianMixture> steps(
      T + 1, GaussianMixture::single({Vector::Zero(d), Matrix::Identity(d, d)}));
  BeliefTrajectory belief(std::move(steps));
  belief.set_anchor({model, 0, launch_mean, 0.5 * (launch_cov + launch_cov.transpose())});
  belief.propagate_from_anchor();
  return belief;
}

BeliefTrajectory observe_and_update(const BeliefTrajectory& belief,
                                    const Observation& obs) {
  if (!belief.anchor()) {
    throw Error("observe_and_update needs a filter-backed belief");
  }
  if (obs.t < 0 || obs.t > belief.horizon()) {
    throw Error("observation time " + std::to_string(obs.t) +
                " outside horizon");
  }
  const FilterAnchor& a = *belief.anchor();
  if (obs.t < a.t) {
    throw Error("observation at t=" + std::to_string(obs.t) +
                " precedes the filter state at t=" + std::to_string(a.t));
  }
  const int d = a.model.dim();
  require_dim(obs.y, d, "observation");
  if (!obs.y.allFinite() || !(obs.noise >= 0.0)) {
    throw Error("observation must be finite with non-negative noise");
  }

  const Matrix F = a.model.transition();
  const Vector c = a.model.drift();
  const Matrix Q = a.model.process_cov();
  Vector mean = a.mean;
  Matrix cov = a.cov;
  for (int t = a.t; t < obs.t; ++t) {
    mean = F * mean + c;
    cov = F * cov * F.transpose() + Q;
  }

  // Joseph-form update.
  Matrix H = Matrix::Zero(d, 2 * d);
  H.leftCols(d) = Matrix::Identity(d, d);
  const Matrix Rn = obs.noise * obs.noise * Matrix::Identity(d, d);
  const Matrix S = H * cov * H.transpose() + Rn;
  Eigen::LDLT<Matrix> ldlt(S);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      ldlt.vectorD().minCoeff() <= 1e-300) {
    throw Error("singular innovation covariance at t=" + std::to_string(obs.t));
  }
  const Matrix K = ldlt.solve(H * cov).transpose();
  mean += K * (obs.y - H * mean);
  const Matrix IKH = Matrix::Identity(2 * d, 2 * d) - K * H;
  cov = IKH * cov * IKH.transpose() + K * Rn * K.transpose();
  cov = 0.5 * (cov + cov.transpose());

  BeliefTrajectory out = belief;
  out.set_anchor({a.model, obs.t, mean, cov});
  out.propagate_from_anchor();
  out.add_history(obs);
  return out;
}

// ---------------------------------------------------------------------------

double kl_gaussian(double mu1, double sigma1, double mu2, double sigma2) {
  if (!(sigma1 > 0.0) || !(sigma2 > 0.0)) {
    throw Error("kl_gaussian: standard deviations must be positive");
  }
  const double dm = mu1 - mu2;
  return std::log(sigma2 / sigma1) +
         (sigma1 * sigma1 + dm * dm) / (2.0 * sigma2 * sigma2) - 0.5;
}

double kl_gaussian(const GaussianBelief& p, const GaussianBelief& q) {
  if (p.dim() != q.dim()) throw DimensionError("kl_gaussian: dimension mismatch");
  const int d = p.dim();
  if (d == 1) {
    return kl_gaussian(p.mean(0), std::sqrt(p.cov(0, 0)), q.mean(0),
                       std::sqrt(q.cov(0, 0)));
  }
  Eigen::LLT<Matrix> lq(q.cov);
  Eigen::LLT<Matrix> lp(p.cov);
  if (lq.info() != Eigen::Success || lp.info() != Eigen::Success) {
    throw Error("kl_gaussian: covariance not positive definite");
  }
  const Matrix Lq = lq.matrixL();
  const Matrix Lp = lp.matrixL();
  const Matrix X = lq.matrixL().solve(Lp);
  const Vector r = lq.matrixL().solve(q.mean - p.mean);
  const double log_det_q = 2.0 * Lq.diagonal().array().log().sum();
  const double log_det_p = 2.0 * Lp.diagonal().array().log().sum();
  const double kl =
      0.5 * (X.squaredNorm() + r.squaredNorm() - d + log_det_q - log_det_p);
  return std::max(kl, 0.0);
}

KlEstimate kl_mixture(const GaussianMixture& p, const GaussianMixture& q,
                      const KlOptions& opts) {
  if (p.dim() != q.dim()) throw DimensionError("kl: dimension mismatch");
  if (p.is_gaussian() && q.is_gaussian()) {
    return {kl_gaussian(p.components.front(), q.components.front()), 0.0};
  }
  if (opts.samples < 2) throw Error("kl: Monte-Carlo needs >= 2 samples");
  std::mt19937_64 rng(opts.seed);
  double mean = 0.0;
  double m2 = 0.0;
  for (int i = 0; i < opts.samples; ++i) {
    const Vector y = p.sample(rng);
    const double v = p.log_density(y) - q.log_density(y);
    const double delta = v - mean;
    mean += delta / (i + 1);
    m2 += delta * (v - mean);
  }
  const double var = m2 / (opts.samples - 1);
  return {mean, std::sqrt(var / opts.samples)};
}

KlEstimate kl_shift(const BeliefTrajectory& posterior,
                    const BeliefTrajectory& prior, int t,
                    const KlOptions& opts) {
  if (posterior.dim() != prior.dim()) {
    throw DimensionError("kl_shift: incompatible belief dimensions");
  }
  return kl_mixture(posterior.at(t), prior.at(t), opts);
}

std::vector<double> predictive_weights(const BeliefTrajectory& prior,
                                       const BeliefTrajectory& posterior,
                                       int first, int last) {
  if (first > last) throw Error("predictive_weights: empty window");
  std::vector<double> logp;
  logp.reserve(last - first + 1);
  for (int t = first; t <= last; ++t) {
    logp.push_back(prior.at(t).log_density(posterior.at(t).mean()));
  }
  const double norm = log_sum_exp(logp);
  if (!std::isfinite(norm)) throw Error("predictive_weights: non-finite");
  std::vector<double> w(logp.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::exp(logp[i] - norm);
  return w;
}

double alpha_bound(int T) {
  if (T < 1) throw Error("alpha_bound: T must be >= 1");
  const double x = 1.0 / T;
  return x + x * x;
}

}  // namespace retro
