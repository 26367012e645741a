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
#include <memory>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "retro/regret.hpp"
#include "retro/session.hpp"
#include "test_util.hpp"

namespace retro {
namespace {

struct Frozen : Forecaster {
  std::string name() const override { return "frozen"; }
  BeliefTrajectory update(const BeliefTrajectory& b, const Observation&) const override {
    return b;
  }
};

struct Interception {
  ModelPtr model;
  BeliefTrajectory prior;
  SolveReport plan;
  BallisticModel ball;
  int T = 40;
};

Interception make_interception() {
  Interception s;
  ModelOptions mo;
  mo.dt = 0.05;
  mo.W = Matrix::Identity(2, 2);
  s.model = make_double_integrator_2d(mo);
  s.ball.gravity = Eigen::Vector2d(0.0, -9.81);
  s.ball.dt = mo.dt;
  s.prior = ballistic_prior(Eigen::Vector4d(2.0, 0.0, -1.0, 5.0),
                            Eigen::Vector4d(0.01, 0.01, 0.09, 0.09).asDiagonal(), s.ball, s.T);
  s.plan = solve(*s.model, Vector::Zero(4), s.prior.means());
  return s;
}

Observation observe(const Interception& s, int t, double dx) {
  Vector y = s.prior.at(t).mean();
  y(0) += dx;
  return {t, y, 0.02};
}

TEST(Session, FrozenBeliefWithEveryStepTriggeredIsExact) {
  const Interception s = make_interception();
  RetroOptions ro;
  ro.threshold = -1.0;
  RetroSession session(s.model, s.plan, s.prior, std::make_shared<Frozen>(), ro);
  for (int t = 0; t < s.T; ++t) {
    const auto r = session.step(t, observe(s, t, 0.3));
    ASSERT_TRUE(r.event.has_value());
    EXPECT_FALSE(r.event->failed);
    EXPECT_EQ(r.control, s.plan.trajectory.controls[t]);
  }
  EXPECT_EQ(session.events().size(), static_cast<size_t>(s.T));
}

TEST(Session, HighThresholdNeverAdjusts) {
  const Interception s = make_interception();
  RetroOptions ro;
  ro.threshold = 1e300;
  RetroSession session(s.model, s.plan, s.prior, std::make_shared<KalmanForecaster>(), ro);
  for (int t = 0; t < s.T; ++t) {
    const auto r = session.step(t, t > 0 ? std::optional(observe(s, t, 0.2)) : std::nullopt);
    EXPECT_FALSE(r.event.has_value());
    EXPECT_EQ(r.control, s.plan.trajectory.controls[t]);
  }
  EXPECT_FALSE(session.last_solution().has_value());
  EXPECT_GT(session.posterior().history().size(), 0u);
}

TEST(Session, ShiftTriggersAdjustmentAndRebase) {
  const Interception s = make_interception();
  RetroOptions ro;
  ro.threshold = 0.05;
  RetroSession session(s.model, s.plan, s.prior, std::make_shared<KalmanForecaster>(), ro);
  session.step(0, std::nullopt);
  const auto r = session.step(1, observe(s, 1, 0.3));
  ASSERT_TRUE(r.event.has_value());
  EXPECT_GT(r.event->kl, 0.05);
  EXPECT_GT(r.event->du_norm, 0.0);
  EXPECT_NE(r.control, s.plan.trajectory.controls[1]);
  ASSERT_TRUE(session.last_solution().has_value());
  EXPECT_EQ(session.last_solution()->first, 2);
  // The same measurement again carries little new information.
  const auto again = session.step(2, observe(s, 2, 0.3));
  if (again.event) {
    EXPECT_LT(again.event->kl, r.event->kl);
  }
}

TEST(Session, RejectsStepsOutsideHorizon) {
  const Interception s = make_interception();
  RetroSession session(s.model, s.plan, s.prior, std::make_shared<KalmanForecaster>());
  EXPECT_THROW(session.step(s.T, std::nullopt), Error);
  EXPECT_THROW(session.step(-1, std::nullopt), Error);
}

TEST(Trigger, MeasuresTerminalStepKl) {
  const Interception s = make_interception();
  const auto post = observe_and_update(s.prior, observe(s, 5, 0.2));
  ShiftTrigger trig(s.prior, 0.1, {});
  const double ref = kl_gaussian(post.at(s.T).components[0], s.prior.at(s.T).components[0]);
  EXPECT_NEAR(trig.measure(post).value, ref, 1e-14);
  trig.rebase(post);
  EXPECT_EQ(trig.measure(post).value, 0.0);
  EXPECT_FALSE(trig.exceeds(trig.measure(post)));
}

TEST(GmmForecaster, KeepsPriorUntilEnoughObservations) {
  const Interception s = make_interception();
  GmmForecaster f(2, s.ball, {}, 3);
  BeliefTrajectory b = f.update(s.prior, observe(s, 1, 0.0));
  EXPECT_TRUE(b.at(s.T).is_gaussian());
  b = f.update(b, observe(s, 2, 0.0));
  b = f.update(b, observe(s, 3, 0.0));
  EXPECT_EQ(b.history().size(), 3u);
  EXPECT_EQ(b.at(0).mean(), s.prior.at(0).mean());
}

// ---------------------------------------------------------------------------

TEST(Regret, IdenticalTracesHaveZeroRegret) {
  ValueTrace v;
  v.V = {3.0, 2.0, 1.0, 0.5};
  const RegretReport r = regret_series(v, nullptr, v);
  EXPECT_EQ(r.total_regret, 0.0);
  EXPECT_TRUE(r.violations.empty());
  EXPECT_DOUBLE_EQ(r.bound, alpha_bound(3) + std::log(3.0));
}

TEST(Regret, AddsValueShiftInsideTheWindow) {
  ValueTrace nominal, oracle;
  nominal.V = {0.0, 1.0, 1.0, 1.0, 1.0};
  oracle.V = {0.0, 1.0, 2.0, 2.0, 2.0};
  DesirabilitySolution sol;
  sol.first = 3;
  sol.delta_v = {0.5, 1.0};
  sol.z = {std::exp(-0.5), std::exp(-1.0)};
  sol.g = sol.z;
  const RegretReport r = regret_series(nominal, &sol, oracle);
  ASSERT_EQ(r.R.size(), 4u);
  EXPECT_DOUBLE_EQ(r.R[0], 0.0);
  EXPECT_DOUBLE_EQ(r.R[1], 1.0);
  EXPECT_DOUBLE_EQ(r.R[2], 0.5);
  EXPECT_DOUBLE_EQ(r.R[3], 0.0);
  EXPECT_EQ(r.m, 3);
  EXPECT_DOUBLE_EQ(r.delta_v_m, 0.5);
}

TEST(Regret, NormalizationBoundHoldsOnRandomWindows) {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 300; ++trial) {
    const int N = 2 + static_cast<int>(rng() % 50);
    const auto inst = testing::random_desirability(N, 2.0, rng);
    const auto sol = solve_desirability(build_M(inst.dl, inst.weights), inst.dl);
    const Lemma1Check c = check_lemma1(sol, N);
    EXPECT_TRUE(c.holds);
    const double max_z = *std::max_element(sol.z.begin(), sol.z.end());
    EXPECT_NEAR(c.margin, N * max_z - c.max_g, 1e-12 * N * max_z);
  }
}

TEST(Regret, ConformingScheduleStaysWithinKlBudget) {
  for (int T : {5, 20, 80}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const ConformingRun run = run_conforming_scenario(T, seed);
      EXPECT_LE(run.max_step_kl, alpha_bound(T));
      EXPECT_GE(run.a, 0.0);
      EXPECT_LE(run.a, 1.0);
      EXPECT_LE(std::abs(run.b), 1.0);
      EXPECT_EQ(run.regret.R.size(), static_cast<size_t>(T));
      EXPECT_TRUE(run.lemma1.holds);
    }
  }
  EXPECT_EQ(run_conforming_scenario(30, 9).regret.R, run_conforming_scenario(30, 9).regret.R);
}

TEST(Regret, ValueTraceIsTailCostAtTheOptimum) {
  ModelOptions mo;
  mo.W = Matrix::Identity(2, 2);
  const ModelPtr m = make_double_integrator_2d(mo);
  PointSeries truth;
  for (int t = 0; t <= 25; ++t) truth.push_back(Eigen::Vector2d(0.1 * t, 1.0));
  DdpOptions opts;
  opts.tol = 1e-12;
  const SolveReport rep = oracle_solve(*m, Vector::Zero(4), truth, opts);
  const auto& c = rep.trajectory.stage_costs;
  for (int t = 0; t <= 25; ++t) {
    const double tail = std::accumulate(c.begin() + t, c.end(), 0.0);
    EXPECT_NEAR(rep.value_trace.V[t], tail, 1e-8 * (1 + tail)) << t;
  }
}

TEST(Sweep, SmallSweepProducesOneRowPerHorizon) {
  SweepConfig cfg;
  cfg.horizons = {10, 40};
  cfg.seeds = 3;
  const auto rows = horizon_sweep(cfg, 5);
  ASSERT_EQ(rows.size(), 2u);
  for (const SweepRow& r : rows) {
    EXPECT_TRUE(r.valid);
    EXPECT_GE(r.cost_diff, -1e-9);
    EXPECT_DOUBLE_EQ(r.bound, alpha_bound(r.T) + std::log(r.T));
  }
  EXPECT_GT(rows[0].cost_diff, rows[1].cost_diff);
}

TEST(Timing, LogLogSlopeOfPowerLaw) {
  const std::vector<double> x = {1, 2, 4, 8, 16};
  std::vector<double> y;
  for (double v : x) y.push_back(3.0 * v * v);
  EXPECT_NEAR(loglog_slope(x, y), 2.0, 1e-12);
  EXPECT_GE(median_time_us([] {}, 5, 1), 0.0);
}

}  // namespace
}  // namespace retro
