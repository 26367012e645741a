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
#include <numeric>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "retro/belief.hpp"
#include "test_util.hpp"

namespace retro {
namespace {

using testing::kl_quadrature;

BallisticModel ballistic(double dt = 0.02, double process_noise = 0.0) {
  BallisticModel m;
  m.gravity = Eigen::Vector2d(0.0, -9.81);
  m.dt = dt;
  m.process_noise = process_noise;
  return m;
}

TEST(Kl, ScalarClosedFormMatchesQuadrature) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> mu(-3.0, 3.0), s(0.1, 4.0);
  for (int i = 0; i < 200; ++i) {
    const double m1 = mu(rng), s1 = s(rng), m2 = mu(rng), s2 = s(rng);
    const double ref = kl_quadrature(m1, s1, m2, s2);
    EXPECT_NEAR(kl_gaussian(m1, s1, m2, s2), ref, 1e-8 * (1.0 + ref));
  }
}

TEST(Kl, NonNegativeAndZeroOnlyForEqualBeliefs) {
  EXPECT_EQ(kl_gaussian(0.3, 1.2, 0.3, 1.2), 0.0);
  EXPECT_GT(kl_gaussian(0.3, 1.2, 0.3, 1.3), 0.0);
  EXPECT_GT(kl_gaussian(0.3, 1.2, 0.31, 1.2), 0.0);
  EXPECT_THROW(kl_gaussian(0.0, 0.0, 0.0, 1.0), Error);
}

TEST(Kl, DiagonalMultivariateIsSumOfScalars) {
  GaussianBelief p{Eigen::Vector3d(0.1, -0.4, 2.0), Eigen::Vector3d(0.5, 1.5, 2.0).asDiagonal()};
  GaussianBelief q{Eigen::Vector3d(0.0, 0.3, 1.0), Eigen::Vector3d(1.0, 0.7, 3.0).asDiagonal()};
  double sum = 0.0;
  for (int i = 0; i < 3; ++i) {
    sum += kl_gaussian(p.mean(i), std::sqrt(p.cov(i, i)), q.mean(i), std::sqrt(q.cov(i, i)));
  }
  EXPECT_NEAR(kl_gaussian(p, q), sum, 1e-13);
}

TEST(Kl, FullCovarianceMatchesMonteCarlo) {
  std::mt19937_64 rng(42);
  GaussianBelief p{testing::random_matrix(2, 1, rng), testing::random_spd(2, 0.3, rng)};
  GaussianBelief q{testing::random_matrix(2, 1, rng), testing::random_spd(2, 0.3, rng)};
  // Independent estimator: E_p[log p - log q] from samples of p.
  Eigen::LLT<Matrix> llt(p.cov);
  std::normal_distribution<double> nd(0.0, 1.0);
  const int n = 200000;
  double mean = 0.0, m2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const Vector y = p.mean + llt.matrixL() * Eigen::Vector2d(nd(rng), nd(rng));
    const double v = p.log_density(y) - q.log_density(y);
    const double delta = v - mean;
    mean += delta / (i + 1);
    m2 += delta * (v - mean);
  }
  const double se = std::sqrt(m2 / (n - 1) / n);
  EXPECT_NEAR(kl_gaussian(p, q), mean, 5.0 * se);
}

TEST(Kl, MixtureMonteCarloMatchesQuadrature) {
  GaussianMixture p, q;
  p.weights = {0.3, 0.7};
  p.components = {{Vector::Constant(1, -1.0), Matrix::Constant(1, 1, 0.25)},
                  {Vector::Constant(1, 1.5), Matrix::Constant(1, 1, 0.5)}};
  q = GaussianMixture::single({Vector::Constant(1, 0.5), Matrix::Constant(1, 1, 2.0)});
  auto density = [](const GaussianMixture& g, double x) {
    double s = 0.0;
    for (size_t k = 0; k < g.components.size(); ++k) {
      const double v = g.components[k].cov(0, 0);
      const double e = x - g.components[k].mean(0);
      s += g.weights[k] * std::exp(-0.5 * e * e / v) / std::sqrt(2 * M_PI * v);
    }
    return s;
  };
  auto f = [&](double x) {
    const double a = density(p, x);
    return a > 0 ? a * std::log(a / density(q, x)) : 0.0;
  };
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  const double ref = GK::integrate(f, -15.0, 15.0, 20, 1e-13);
  const KlEstimate est = kl_mixture(p, q, {200000, 5});
  EXPECT_GT(est.std_error, 0.0);
  EXPECT_NEAR(est.value, ref, 5.0 * est.std_error);
  // Same seed, same estimate.
  EXPECT_EQ(kl_mixture(p, q, {200000, 5}).value, est.value);
}

TEST(Kl, MixtureOfOneIsClosedForm) {
  auto p = GaussianMixture::single({Vector::Constant(1, 0.2), Matrix::Constant(1, 1, 0.3)});
  auto q = GaussianMixture::single({Vector::Constant(1, -0.1), Matrix::Constant(1, 1, 0.9)});
  const KlEstimate e = kl_mixture(p, q);
  EXPECT_EQ(e.std_error, 0.0);
  EXPECT_NEAR(e.value, kl_quadrature(0.2, std::sqrt(0.3), -0.1, std::sqrt(0.9)), 1e-10);
}

TEST(Ballistic, PriorFollowsFreeFlight) {
  const BallisticModel m = ballistic();
  const Vector s0 = Eigen::Vector4d(3.0, 0.0, -1.0, 9.81);
  const BeliefTrajectory prior = ballistic_prior(s0, 0.01 * Matrix::Identity(4, 4), m, 50);
  for (int t : {0, 1, 17, 50}) {
    const double tau = t * m.dt;
    const Eigen::Vector2d expect(3.0 - tau, 9.81 * tau - 0.5 * 9.81 * tau * tau);
    EXPECT_LT((prior.at(t).mean() - expect).norm(), 1e-12) << t;
    EXPECT_NEAR(prior.at(t).covariance()(0, 0), 0.01 * (1 + tau * tau), 1e-14);
  }
}

// Posterior of the launch state by batch weighted least squares, pushed
// forward to the position at t.
GaussianBelief batch_position(const Vector& s0, const Matrix& P0,
                              const std::vector<Observation>& obs,
                              const BallisticModel& m, int t) {
  auto design = [&](int k) {
    Matrix A(2, 4);
    const double tau = k * m.dt;
    A << Matrix::Identity(2, 2), tau * Matrix::Identity(2, 2);
    return A;
  };
  Matrix info = P0.inverse();
  Vector rhs = info * s0;
  for (const Observation& o : obs) {
    const double tau = o.t * m.dt;
    const Matrix A = design(o.t);
    const Vector y = o.y - 0.5 * tau * tau * m.gravity;
    info += A.transpose() * A / (o.noise * o.noise);
    rhs += A.transpose() * y / (o.noise * o.noise);
  }
  const Matrix cov = info.inverse();
  const Vector mean = cov * rhs;
  const double tau = t * m.dt;
  const Matrix A = design(t);
  return {A * mean + 0.5 * tau * tau * m.gravity, A * cov * A.transpose()};
}

TEST(Ballistic, SequentialKalmanMatchesBatchLeastSquares) {
  const BallisticModel m = ballistic();
  const Vector s0 = Eigen::Vector4d(3.0, 0.0, -1.0, 9.81);
  const Matrix P0 = Eigen::Vector4d(0.05, 0.05, 0.3, 0.3).cwiseAbs2().asDiagonal();
  const int T = 60;
  BeliefTrajectory belief = ballistic_prior(s0, P0, m, T);
  std::mt19937_64 rng(43);
  std::normal_distribution<double> nd(0.0, 0.02);
  std::vector<Observation> obs;
  for (int t = 1; t <= 30; t += 3) {
    const double tau = t * m.dt;
    Observation o;
    o.t = t;
    o.y = Eigen::Vector2d(2.9 - 1.1 * tau + nd(rng), 0.1 + 9.5 * tau - 4.905 * tau * tau + nd(rng));
    o.noise = 0.02;
    obs.push_back(o);
    belief = observe_and_update(belief, o);
  }
  for (int t : {28, 40, 60}) {
    const GaussianBelief ref = batch_position(s0, P0, obs, m, t);
    EXPECT_LT((belief.at(t).mean() - ref.mean).norm(), 1e-9) << t;
    EXPECT_LT((belief.at(t).covariance() - ref.cov).norm(), 1e-11) << t;
  }
  EXPECT_EQ(belief.history().size(), obs.size());
}

TEST(Ballistic, UpdateLeavesEarlierStepsAlone) {
  const BallisticModel m = ballistic();
  const BeliefTrajectory prior = ballistic_prior(Eigen::Vector4d(0, 0, 1, 1), Matrix::Identity(4, 4), m, 20);
  Observation o{10, Eigen::Vector2d(0.5, 0.1), 0.01};
  const BeliefTrajectory post = observe_and_update(prior, o);
  for (int t = 0; t < 10; ++t) {
    EXPECT_EQ(post.at(t).mean(), prior.at(t).mean());
  }
  EXPECT_LT((post.at(10).mean() - o.y).norm(), 0.01);
  EXPECT_THROW(observe_and_update(post, {5, Eigen::Vector2d(0, 0), 0.01}), Error);
  EXPECT_THROW(observe_and_update(post, {21, Eigen::Vector2d(0, 0), 0.01}), Error);
  EXPECT_THROW(observe_and_update(post, {12, Eigen::Vector3d(0, 0, 0), 0.01}), DimensionError);
}

TEST(Ballistic, ProcessNoiseWidensForecasts) {
  const Vector s0 = Eigen::Vector4d(0, 0, 1, 1);
  const auto quiet = ballistic_prior(s0, Matrix::Identity(4, 4), ballistic(0.02, 0.0), 30);
  const auto noisy = ballistic_prior(s0, Matrix::Identity(4, 4), ballistic(0.02, 2.0), 30);
  EXPECT_EQ(quiet.at(0).covariance(), noisy.at(0).covariance());
  for (int t = 1; t <= 30; ++t) {
    EXPECT_GT(noisy.at(t).covariance().trace(), quiet.at(t).covariance().trace());
  }
}

TEST(PredictiveWeights, NormalizedPriorDensities) {
  const BallisticModel m = ballistic();
  const auto prior = ballistic_prior(Eigen::Vector4d(0, 0, 1, 1), 0.1 * Matrix::Identity(4, 4), m, 25);
  const auto post = observe_and_update(prior, {5, Eigen::Vector2d(0.2, 0.05), 0.01});
  const auto w = predictive_weights(prior, post, 6, 25);
  ASSERT_EQ(w.size(), 20u);
  EXPECT_NEAR(std::accumulate(w.begin(), w.end(), 0.0), 1.0, 1e-14);
  std::vector<double> dens;
  for (int t = 6; t <= 25; ++t) {
    const GaussianBelief& g = prior.at(t).components.front();
    const Vector r = post.at(t).mean() - g.mean;
    dens.push_back(std::exp(-0.5 * r.dot(g.cov.ldlt().solve(r))) /
                   (2 * M_PI * std::sqrt(g.cov.determinant())));
  }
  const double total = std::accumulate(dens.begin(), dens.end(), 0.0);
  for (int i = 0; i < 20; ++i) EXPECT_NEAR(w[i], dens[i] / total, 1e-12);
}

TEST(PredictiveWeights, IdenticalStationaryBeliefsGiveEqualWeights) {
  const std::vector<GaussianMixture> steps(
      11, GaussianMixture::single({Eigen::Vector2d(1, 2), Matrix::Identity(2, 2)}));
  const BeliefTrajectory b(steps);
  for (double w : predictive_weights(b, b, 1, 10)) EXPECT_NEAR(w, 0.1, 1e-15);
}

TEST(AlphaBound, InverseHorizonPlusSquare) {
  EXPECT_DOUBLE_EQ(alpha_bound(1), 2.0);
  EXPECT_DOUBLE_EQ(alpha_bound(10), 0.11);
  EXPECT_THROW(alpha_bound(0), Error);
}

// ---------------------------------------------------------------------------
// Mixture of ballistic regressions.

std::vector<Observation> two_ball_stream(const BallisticModel& m, double noise,
                                         std::vector<int>* labels,
                                         std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, noise);
  std::vector<Observation> obs;
  for (int t = 1; t <= 40; ++t) {
    const double tau = t * m.dt;
    const int k = t % 2;
    const Eigen::Vector2d p0 = k ? Eigen::Vector2d(0.0, 0.0) : Eigen::Vector2d(2.0, 1.0);
    const Eigen::Vector2d v0 = k ? Eigen::Vector2d(1.0, 5.0) : Eigen::Vector2d(-1.0, 3.0);
    const Vector y = p0 + v0 * tau + 0.5 * tau * tau * m.gravity +
                     Eigen::Vector2d(nd(rng), nd(rng));
    obs.push_back({t, y, noise});
    labels->push_back(k);
  }
  return obs;
}

TEST(Gmm, SeparatesTwoTrajectories) {
  const BallisticModel m = ballistic();
  std::mt19937_64 rng(44);
  std::vector<int> labels;
  const auto obs = two_ball_stream(m, 0.01, &labels, rng);
  const GmmForecast f = forecast_gmm(obs, 2, 60, m, {200, 1e-10, 8, 3});
  ASSERT_EQ(f.components.size(), 2u);
  // Purity: each component's hard assignments come from one trajectory.
  int agree = 0;
  for (size_t i = 0; i < obs.size(); ++i) {
    const int k = f.responsibilities(i, 0) > f.responsibilities(i, 1) ? 0 : 1;
    agree += (k == labels[i]);
  }
  const int purity = std::max(agree, static_cast<int>(obs.size()) - agree);
  EXPECT_EQ(purity, static_cast<int>(obs.size()));
  EXPECT_NEAR(f.components[0].weight + f.components[1].weight, 1.0, 1e-12);
  EXPECT_EQ(f.belief.horizon(), 60);
  EXPECT_EQ(f.belief.at(30).components.size(), 2u);
}

TEST(Gmm, LogLikelihoodIsMonotoneInEm) {
  const BallisticModel m = ballistic();
  std::mt19937_64 rng(45);
  std::vector<int> labels;
  const auto obs = two_ball_stream(m, 0.05, &labels, rng);
  for (int K : {1, 2, 3}) {
    const GmmForecast f = forecast_gmm(obs, K, 40, m, {300, 1e-12, 4, 9});
    for (size_t i = 1; i < f.log_likelihood.size(); ++i) {
      EXPECT_GE(f.log_likelihood[i], f.log_likelihood[i - 1] - 1e-9 * std::abs(f.log_likelihood[i - 1]))
          << "K=" << K << " iter " << i;
    }
  }
}

TEST(Gmm, SingleComponentIsOrdinaryLeastSquares) {
  const BallisticModel m = ballistic();
  std::mt19937_64 rng(46);
  std::normal_distribution<double> nd(0.0, 0.03);
  std::vector<Observation> obs;
  for (int t = 0; t < 25; ++t) {
    const double tau = t * m.dt;
    obs.push_back({t, Eigen::Vector2d(1.0 - 2.0 * tau + nd(rng), 4.0 * tau - 4.905 * tau * tau + nd(rng)), 0.03});
  }
  const GmmForecast f = forecast_gmm(obs, 1, 30, m);
  Matrix X(25, 2), Y(25, 2);
  for (int i = 0; i < 25; ++i) {
    const double tau = obs[i].t * m.dt;
    X.row(i) << 1.0, tau;
    Y.row(i) = (obs[i].y - 0.5 * tau * tau * m.gravity).transpose();
  }
  const Matrix coef = X.colPivHouseholderQr().solve(Y);  // 2 x d
  EXPECT_LT((f.components[0].coef - coef.transpose()).norm(), 1e-9);
  EXPECT_FALSE(f.degenerate);
}

TEST(Gmm, RejectsTooFewObservations) {
  const BallisticModel m = ballistic();
  std::vector<Observation> obs{{1, Eigen::Vector2d(0, 0), 0.01}};
  EXPECT_THROW(forecast_gmm(obs, 2, 10, m), Error);
  EXPECT_THROW(forecast_gmm(obs, 0, 10, m), Error);
}

}  // namespace
}  // namespace retro
