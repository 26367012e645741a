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
#include <random>

#include <gtest/gtest.h>

#include "retro/ddp.hpp"
#include "test_util.hpp"

namespace retro {
namespace {

using testing::lqr_model;
using testing::random_lqr;
using testing::rel_err;
using testing::riccati_reference;

TEST(Riccati, LibraryRecursionMatchesReference) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const auto p = random_lqr(3 + trial % 3, 1 + trial % 2, 30, rng);
    const auto ref = riccati_reference(p);
    const RiccatiSolution sol = riccati_lqr(p.A, p.B, p.Q, p.R, p.Qf, p.T);
    ASSERT_EQ(sol.K.size(), ref.K.size());
    for (int t = 0; t < p.T; ++t) EXPECT_LT(rel_err(sol.K[t], ref.K[t]), 1e-12);
    EXPECT_LT(rel_err(sol.P.back(), p.Qf), 1e-15);
  }
}

TEST(Ddp, LinearQuadraticSolveMatchesRiccati) {
  std::mt19937_64 rng(32);
  DdpOptions opts;
  opts.tol = 1e-12;
  for (int trial = 0; trial < 8; ++trial) {
    const auto p = random_lqr(4, 2, 40, rng);
    const auto ref = riccati_reference(p);
    const auto model = lqr_model(p);
    const SolveReport rep = solve(*model, p.x0, PointSeries(p.T + 1, Vector::Zero(4)), opts);
    EXPECT_TRUE(rep.converged);
    for (int t = 0; t < p.T; ++t) {
      EXPECT_LT((rep.trajectory.controls[t] - ref.u[t]).norm(),
                1e-7 * (1.0 + ref.u[t].norm()));
      EXPECT_LT(rel_err(-rep.gains.feedback[t], ref.K[t]), 1e-7);
    }
    // Value at t = 0 is the optimal cost 1/2 x0' P0 x0.
    const RiccatiSolution sol = riccati_lqr(p.A, p.B, p.Q, p.R, p.Qf, p.T);
    EXPECT_NEAR(rep.value_trace.V[0], 0.5 * p.x0.dot(sol.P[0] * p.x0),
                1e-7 * (1.0 + rep.value_trace.V[0]));
    EXPECT_NEAR(rep.trajectory.total_cost, rep.value_trace.V[0],
                1e-7 * (1.0 + rep.value_trace.V[0]));
  }
}

PointSeries arc_targets(int T) {
  PointSeries targets;
  for (int t = 0; t <= T; ++t) {
    const double s = static_cast<double>(t) / T;
    targets.push_back(Eigen::Vector2d(0.9 - 0.5 * s, 0.2 + 0.5 * s));
  }
  return targets;
}

class ArmSolveTest : public ::testing::TestWithParam<bool> {};

TEST_P(ArmSolveTest, CostIsMonotoneAndConverges) {
  ModelOptions mo;
  mo.W = Matrix::Identity(2, 2);
  const ModelPtr arm = make_two_link_arm(mo);
  DdpOptions opts;
  opts.full_ddp = GetParam();
  opts.record_iterates = true;
  const Vector x0 = Eigen::Vector4d(0.2, 0.9, 0.0, 0.0);
  const SolveReport rep = solve(*arm, x0, arc_targets(80), opts);
  EXPECT_TRUE(rep.converged);
  ASSERT_GE(rep.cost_history.size(), 2u);
  for (size_t i = 1; i < rep.cost_history.size(); ++i) {
    EXPECT_LE(rep.cost_history[i], rep.cost_history[i - 1] + 1e-12) << i;
  }
  EXPECT_EQ(rep.control_iterates.size(), static_cast<size_t>(rep.iterations) + 1);
  // Consistency of the returned trajectory with a fresh rollout.
  const auto check = rollout(*arm, x0, rep.trajectory.controls, arc_targets(80));
  EXPECT_NEAR(check.total_cost, rep.trajectory.total_cost, 1e-12);
}

INSTANTIATE_TEST_SUITE_P(Variants, ArmSolveTest, ::testing::Bool(),
                         [](const auto& info) {
                           return info.param ? "full" : "gauss_newton";
                         });

// The arm problem is not convex and the two variants may settle in different
// local minima; each must still be a fixed point of the other.
TEST(Ddp, FullAndGaussNewtonShareStationaryPoints) {
  ModelOptions mo;
  mo.W = Matrix::Identity(2, 2);
  const ModelPtr arm = make_two_link_arm(mo);
  const Vector x0 = Eigen::Vector4d(0.2, 0.9, 0.0, 0.0);
  const auto targets = arc_targets(60);
  for (bool full : {false, true}) {
    DdpOptions opts;
    opts.tol = 1e-12;
    opts.full_ddp = full;
    const SolveReport first = solve(*arm, x0, targets, opts);
    ASSERT_TRUE(first.converged);
    opts.full_ddp = !full;
    const SolveReport other = solve(*arm, x0, targets, opts, &first.trajectory.controls);
    EXPECT_LE(other.iterations, 1);
    EXPECT_NEAR(other.trajectory.total_cost, first.trajectory.total_cost,
                1e-9 * first.trajectory.total_cost);

    // Central-difference gradient of the rollout cost.
    const auto& u = first.trajectory.controls;
    double grad_sq = 0.0;
    for (size_t t = 0; t < u.size(); ++t) {
      for (int j = 0; j < 2; ++j) {
        auto up = u, um = u;
        up[t](j) += 1e-6;
        um[t](j) -= 1e-6;
        const double d = (rollout(*arm, x0, up, targets).total_cost -
                          rollout(*arm, x0, um, targets).total_cost) / 2e-6;
        grad_sq += d * d;
      }
    }
    EXPECT_LT(std::sqrt(grad_sq), 1e-5);
  }
}

TEST(Ddp, OptimumIsStationaryUnderControlPerturbations) {
  ModelOptions mo;
  mo.W = Matrix::Identity(2, 2);
  const ModelPtr arm = make_two_link_arm(mo);
  const Vector x0 = Eigen::Vector4d(0.2, 0.9, 0.0, 0.0);
  const auto targets = arc_targets(40);
  DdpOptions opts;
  opts.tol = 1e-12;
  const SolveReport rep = solve(*arm, x0, targets, opts);
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 10; ++trial) {
    auto u = rep.trajectory.controls;
    for (auto& v : u) v += 1e-3 * testing::random_matrix(2, 1, rng);
    EXPECT_GE(rollout(*arm, x0, u, targets).total_cost,
              rep.trajectory.total_cost - 1e-10);
  }
}

TEST(Ddp, ExpectedChangeIsQuadraticInStep) {
  GainSchedule g;
  g.linear = {-1.0, -2.0};
  g.quadratic = {0.25, 0.5};
  EXPECT_DOUBLE_EQ(g.expected_change(1.0), -3.0 + 0.75);
  EXPECT_DOUBLE_EQ(g.expected_change(0.5), -1.5 + 0.1875);
}

TEST(Ddp, WarmStartAtOptimumTakesNoSteps) {
  std::mt19937_64 rng(34);
  const auto p = random_lqr(3, 1, 20, rng);
  const auto model = lqr_model(p);
  const PointSeries targets(21, Vector::Zero(3));
  DdpOptions opts;
  opts.tol = 1e-12;
  const SolveReport first = solve(*model, p.x0, targets, opts);
  const SolveReport again = solve(*model, p.x0, targets, opts, &first.trajectory.controls);
  EXPECT_LE(again.iterations, 1);
  EXPECT_NEAR(again.trajectory.total_cost, first.trajectory.total_cost, 1e-12);
}

TEST(Ddp, RejectsBadInputs) {
  const ModelPtr m = make_double_integrator_2d();
  EXPECT_THROW(solve(*m, Vector::Zero(4), PointSeries(1, Vector::Zero(2))),
               DimensionError);
  const std::vector<Vector> wrong(3, Vector::Zero(2));
  EXPECT_THROW(solve(*m, Vector::Zero(4), PointSeries(6, Vector::Zero(2)), {}, &wrong),
               DimensionError);
  EXPECT_THROW(riccati_lqr(Matrix::Identity(2, 2), Matrix::Identity(3, 1),
                           Matrix::Identity(2, 2), Matrix::Identity(1, 1),
                           Matrix::Identity(2, 2), 5),
               DimensionError);
}

}  // namespace
}  // namespace retro
