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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

#include "retro/belief.hpp"

namespace retro {

namespace {

struct Sample {
  double tau;
  Vector r;  // observation minus the gravity term
};

struct EmState {
  std::vector<GmmComponent> comps;
  Matrix resp;  // N x K
  std::vector<double> ll;
  bool degenerate = false;
};

Eigen::Vector2d features(double tau) { return {1.0, tau}; }

double log_normal_diag(const Vector& r, const Vector& mean,
                       const Vector& var) {
  double s = 0.0;
  for (int j = 0; j < r.size(); ++j) {
    const double e = r(j) - mean(j);
    s += -0.5 * (e * e / var(j) + std::log(2.0 * std::numbers::pi * var(j)));
  }
  return s;
}

// Weighted least-squares refit of one component from column k of resp.
bool fit_component(const std::vector<Sample>& data, const Vector& w, int d,
                   GmmComponent* c) {
  bool degenerate = false;
  Eigen::Matrix2d A = Eigen::Matrix2d::Zero();
  Matrix b = Matrix::Zero(2, d);
  double wsum = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Eigen::Vector2d phi = features(data[i].tau);
    A += w(i) * phi * phi.transpose();
    b += w(i) * phi * data[i].r.transpose();
    wsum += w(i);
  }
  Eigen::LDLT<Eigen::Matrix2d> ldlt(A);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      ldlt.vectorD().minCoeff() <= 1e-12 * (1.0 + A.trace())) {
    A += 1e-12 * (1.0 + A.trace()) * Eigen::Matrix2d::Identity();
    ldlt.compute(A);
    degenerate = true;
  }
  c->coef = ldlt.solve(b).transpose();
  c->info_inv = ldlt.solve(Eigen::Matrix2d::Identity());
  c->variance = Vector::Zero(d);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Vector e = data[i].r - c->coef * features(data[i].tau);
    c->variance += w(i) * e.cwiseProduct(e);
  }
  c->variance /= std::max(wsum, std::numeric_limits<double>::min());
  for (int j = 0; j < d; ++j) {
    if (!(c->variance(j) >= kVarianceFloor)) {
      c->variance(j) = kVarianceFloor;
      degenerate = true;
    }
  }
  return degenerate;
}

// E-step; returns the log-likelihood.
double expectation(const std::vector<Sample>& data,
                   const std::vector<GmmComponent>& comps, Matrix* resp) {
  const int N = static_cast<int>(data.size());
  const int K = static_cast<int>(comps.size());
  double ll = 0.0;
  std::vector<double> lp(K);
  for (int i = 0; i < N; ++i) {
    const Eigen::Vector2d phi = features(data[i].tau);
    double mx = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < K; ++k) {
      lp[k] = comps[k].weight > 0.0
                  ? std::log(comps[k].weight) +
                        log_normal_diag(data[i].r, comps[k].coef * phi,
                                        comps[k].variance)
                  : -std::numeric_limits<double>::infinity();
      mx = std::max(mx, lp[k]);
    }
    double s = 0.0;
    for (int k = 0; k < K; ++k) s += std::exp(lp[k] - mx);
    const double lse = mx + std::log(s);
    ll += lse;
    for (int k = 0; k < K; ++k) (*resp)(i, k) = std::exp(lp[k] - lse);
  }
  return ll;
}

bool maximization(const std::vector<Sample>& data, const Matrix& resp, int d,
                  std::vector<GmmComponent>* comps) {
  const int N = static_cast<int>(data.size());
  bool degenerate = false;
  for (std::size_t k = 0; k < comps->size(); ++k) {
    const Vector w = resp.col(static_cast<Eigen::Index>(k));
    (*comps)[k].weight = w.sum() / N;
    degenerate |= fit_component(data, w, d, &(*comps)[k]);
  }
  return degenerate;
}

EmState run_em(const std::vector<Sample>& data, int K, int d,
               const GmmOptions& opts, std::mt19937_64& rng) {
  const int N = static_cast<int>(data.size());
  EmState s;
  s.comps.resize(K);
  s.resp = Matrix::Zero(N, K);

  // Seed each component with the exact ballistic fit through two random
  // observations at distinct times.
  Vector pooled_var = Vector::Zero(d);
  {
    Vector mean = Vector::Zero(d);
    for (const Sample& x : data) mean += x.r;
    mean /= N;
    for (const Sample& x : data) {
      pooled_var += (x.r - mean).cwiseProduct(x.r - mean);
    }
    pooled_var = (pooled_var / N).cwiseMax(1e-6);
  }
  std::uniform_int_distribution<int> pick(0, N - 1);
  for (int k = 0; k < K; ++k) {
    int i = pick(rng), j = pick(rng);
    for (int tries = 0; tries < 64 && data[i].tau == data[j].tau; ++tries) {
      j = pick(rng);
    }
    Vector w = Vector::Zero(N);
    w(i) = 1.0;
    w(j) = 1.0;
    fit_component(data, w, d, &s.comps[k]);
    s.comps[k].variance = pooled_var;
    s.comps[k].weight = 1.0 / K;
  }

  double prev = -std::numeric_limits<double>::infinity();
  for (int it = 0; it < opts.max_iters; ++it) {
    const double ll = expectation(data, s.comps, &s.resp);
    s.ll.push_back(ll);
    s.degenerate = maximization(data, s.resp, d, &s.comps);
    if (std::isfinite(prev) &&
        std::abs(ll - prev) <= opts.tol * (1.0 + std::abs(ll))) {
      break;
    }
    prev = ll;
  }
  s.ll.push_back(expectation(data, s.comps, &s.resp));
  return s;
}

}  // namespace

GmmForecast forecast_gmm(const std::vector<Observation>& observations, int K,
                         int T, const BallisticModel& model,
                         const GmmOptions& opts) {
  if (K < 1) throw Error("forecast_gmm: K must be >= 1");
  if (static_cast<int>(observations.size()) < K) {
    throw Error("forecast_gmm: need at least K observations");
  }
  const int d = model.dim();
  std::vector<Sample> data;
  data.reserve(observations.size());
  std::set<int> times;
  for (const Observation& o : observations) {
    require_dim(o.y, d, "observation");
    const double tau = o.t * model.dt;
    data.push_back({tau, o.y - 0.5 * tau * tau * model.gravity});
    times.insert(o.t);
  }

  std::mt19937_64 rng(opts.seed);
  EmState best;
  double best_ll = -std::numeric_limits<double>::infinity();
  const int restarts = std::max(1, opts.restarts);
  for (int r = 0; r < restarts; ++r) {
    EmState s = run_em(data, K, d, opts, rng);
    if (best.ll.empty() || s.ll.back() > best_ll) {
      best_ll = s.ll.back();
      best = std::move(s);
    }
  }

  GmmForecast out;
  out.components = best.comps;
  out.responsibilities = best.resp;
  out.log_likelihood = best.ll;
  out.degenerate = best.degenerate || times.size() < 2;

  std::vector<GaussianMixture> steps;
  steps.reserve(T + 1);
  for (int t = 0; t <= T; ++t) {
    const double tau = t * model.dt;
    const Eigen::Vector2d phi = features(tau);
    GaussianMixture mix;
    for (const GmmComponent& c : best.comps) {
      const double inflate = 1.0 + phi.dot(c.info_inv * phi);
      GaussianBelief g;
      g.mean = c.coef * phi + 0.5 * tau * tau * model.gravity;
      g.cov = (c.variance * inflate).cwiseMax(kVarianceFloor).asDiagonal();
      mix.weights.push_back(c.weight);
      mix.components.push_back(std::move(g));
    }
    steps.push_back(std::move(mix));
  }
  out.belief = BeliefTrajectory(std::move(steps));
  for (const Observation& o : observations) out.belief.add_history(o);
  return out;
}

}  // namespace retro
