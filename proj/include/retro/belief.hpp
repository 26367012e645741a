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

// Beliefs over the moving target: per-step Gaussians (or Gaussian mixtures)
// from a ballistic Kalman filter or an EM-fitted mixture of ballistic
// regressions, plus KL divergences between beliefs.

#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "retro/common.hpp"

namespace retro {

inline constexpr double kVarianceFloor = 1e-12;

struct GaussianBelief {
  Vector mean;
  Matrix cov;

  int dim() const { return static_cast<int>(mean.size()); }
  double log_density(const Vector& y) const;
};

struct GaussianMixture {
  std::vector<double> weights;
  std::vector<GaussianBelief> components;

  static GaussianMixture single(GaussianBelief g);

  int dim() const { return components.front().dim(); }
  bool is_gaussian() const { return components.size() == 1; }
  Vector mean() const;
  Matrix covariance() const;  // moment-matched
  double log_density(const Vector& y) const;
  Vector sample(std::mt19937_64& rng) const;
};

struct Observation {
  int t = 0;
  Vector y;
  double noise = 0.0;  // measurement standard deviation
};

// Linear-Gaussian projectile: state (position, velocity) in 2d dimensions,
// constant acceleration `gravity`, white-acceleration process noise.
struct BallisticModel {
  Vector gravity;              // d
  double dt = 0.01;
  double process_noise = 0.0;  // acceleration standard deviation

  int dim() const { return static_cast<int>(gravity.size()); }
  Matrix transition() const;   // 2d x 2d
  Vector drift() const;        // 2d
  Matrix process_cov() const;  // 2d x 2d
};

// Filter state anchoring the future part of a belief trajectory.
struct FilterAnchor {
  BallisticModel model;
  int t = 0;
  Vector mean;  // 2d
  Matrix cov;   // 2d x 2d
};

class BeliefTrajectory {
 public:
  BeliefTrajectory() = default;
  explicit BeliefTrajectory(std::vector<GaussianMixture> steps);

  int horizon() const { return static_cast<int>(steps_.size()) - 1; }
  int dim() const { return steps_.front().dim(); }
  const GaussianMixture& at(int t) const;
  const std::vector<GaussianMixture>& steps() const { return steps_; }
  std::vector<GaussianMixture>& mutable_steps() { return steps_; }

  // Per-step means (mixture means for GMM beliefs).
  std::vector<Vector> means() const;

  const std::optional<FilterAnchor>& anchor() const { return anchor_; }
  void set_anchor(FilterAnchor a) { anchor_ = std::move(a); }
  const std::vector<Observation>& history() const { return history_; }
  void add_history(const Observation& obs) { history_.push_back(obs); }

  // Rewrites steps t..T from the anchor's propagated position marginals.
  void propagate_from_anchor();

  bool operator==(const BeliefTrajectory& other) const;

 private:
  std::vector<GaussianMixture> steps_;
  std::optional<FilterAnchor> anchor_;
  std::vector<Observation> history_;
};

// Per-step position beliefs of a projectile launched from N(launch_mean,
// launch_cov) over the 2d-dimensional (position, velocity) state.
BeliefTrajectory ballistic_prior(const Vector& launch_mean,
                                 const Matrix& launch_cov,
                                 const BallisticModel& model, int T);

// Kalman update at obs.t. Steps before obs.t keep their values.
// Throws Error for singular innovation covariance or an out-of-order
// observation.
BeliefTrajectory observe_and_update(const BeliefTrajectory& belief,
                                    const Observation& obs);

double kl_gaussian(double mu1, double sigma1, double mu2, double sigma2);
double kl_gaussian(const GaussianBelief& p, const GaussianBelief& q);

struct KlOptions {
  int samples = 100000;
  std::uint64_t seed = 0;
};

struct KlEstimate {
  double value = 0.0;
  double std_error = 0.0;  // zero for the closed form
};

// KL(p || q) between mixtures; closed form when both are Gaussian.
KlEstimate kl_mixture(const GaussianMixture& p, const GaussianMixture& q,
                      const KlOptions& opts = {});

// KL(posterior_t || prior_t).
KlEstimate kl_shift(const BeliefTrajectory& posterior,
                    const BeliefTrajectory& prior, int t,
                    const KlOptions& opts = {});

// Scalar step weights p_t for steps first..last: the prior density at the
// posterior mean, normalized to sum to one over the window.
std::vector<double> predictive_weights(const BeliefTrajectory& prior,
                                       const BeliefTrajectory& posterior,
                                       int first, int last);

// Upper bound 1/T + 1/T^2 on the per-step KL of a conforming belief schedule.
double alpha_bound(int T);

// ---------------------------------------------------------------------------
// Mixture of ballistic regressions fitted by EM:
//   y(tau) = a_k + b_k tau + 1/2 g tau^2 + e,  e ~ N(0, diag(s_k^2)),
// with tau = t * dt.

struct GmmOptions {
  int max_iters = 200;
  double tol = 1e-10;
  int restarts = 8;
  std::uint64_t seed = 0;
};

struct GmmComponent {
  double weight = 0.0;
  Matrix coef;       // d x 2, columns (a, b)
  Vector variance;   // d, residual variance per coordinate
  Matrix info_inv;   // 2 x 2, inverse weighted normal matrix
};

struct GmmForecast {
  BeliefTrajectory belief;
  std::vector<GmmComponent> components;
  Matrix responsibilities;  // N x K
  std::vector<double> log_likelihood;  // per EM iteration of the best restart
  bool degenerate = false;
};

GmmForecast forecast_gmm(const std::vector<Observation>& observations, int K,
                         int T, const BallisticModel& model,
                         const GmmOptions& opts = {});

}  // namespace retro
