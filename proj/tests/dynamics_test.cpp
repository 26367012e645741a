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
#include <string>

#include <gtest/gtest.h>

#include "retro/dynamics.hpp"
#include "test_util.hpp"

namespace retro {
namespace {

using testing::random_matrix;

Vector random_state(const SystemModel& model, std::mt19937_64& rng) {
  return 0.5 * random_matrix(model.state_dim(), 1, rng);
}

class BuiltinModelTest : public ::testing::TestWithParam<std::string> {
 protected:
  ModelPtr model() const {
    ModelOptions opts;
    opts.augmented_dim = 9;
    return make_model(GetParam(), opts);
  }
};

TEST_P(BuiltinModelTest, JacobiansMatchCentralDifferences) {
  const ModelPtr m = model();
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 5; ++trial) {
    const Vector x = random_state(*m, rng);
    const Vector u = random_matrix(m->control_dim(), 1, rng);
    Matrix A, B;
    ASSERT_TRUE(m->jacobians(x, u, 0, &A, &B));
    const double h = 1e-6;
    for (int j = 0; j < m->state_dim(); ++j) {
      Vector xp = x, xm = x;
      xp(j) += h;
      xm(j) -= h;
      const Vector fd = (m->transition(xp, u, 0) - m->transition(xm, u, 0)) / (2 * h);
      EXPECT_LT((A.col(j) - fd).norm(), 1e-7) << "column " << j;
    }
    for (int j = 0; j < m->control_dim(); ++j) {
      Vector up = u, um = u;
      up(j) += h;
      um(j) -= h;
      const Vector fd = (m->transition(x, up, 0) - m->transition(x, um, 0)) / (2 * h);
      EXPECT_LT((B.col(j) - fd).norm(), 1e-7) << "column " << j;
    }
  }
}

TEST_P(BuiltinModelTest, OutputDerivativesMatchCentralDifferences) {
  const ModelPtr m = model();
  std::mt19937_64 rng(22);
  const Vector x = random_state(*m, rng);
  const Vector w = random_matrix(m->target_dim(), 1, rng);
  const Matrix J = m->output_jacobian(x);
  const Matrix H = m->output_curvature(x, w);
  const double h = 1e-5;
  for (int j = 0; j < m->state_dim(); ++j) {
    Vector xp = x, xm = x;
    xp(j) += h;
    xm(j) -= h;
    const Vector dy = (m->output(xp) - m->output(xm)) / (2 * h);
    EXPECT_LT((J.col(j) - dy).norm(), 1e-8);
    const Vector dJw = (m->output_jacobian(xp).transpose() * w -
                        m->output_jacobian(xm).transpose() * w) / (2 * h);
    EXPECT_LT((H.col(j) - dJw).norm(), 1e-7);
  }
}

TEST_P(BuiltinModelTest, CostExpansionMatchesCostValue) {
  const ModelPtr m = model();
  std::mt19937_64 rng(23);
  const Vector x = random_state(*m, rng);
  const Vector u = random_matrix(m->control_dim(), 1, rng);
  const Vector target = random_matrix(m->target_dim(), 1, rng);
  const CostExpansion e = stage_cost_expansion(*m, x, u, target);
  EXPECT_NEAR(e.value, stage_cost(*m, x, u, target), 1e-12);
  const double h = 1e-6;
  for (int j = 0; j < m->state_dim(); ++j) {
    Vector xp = x, xm = x;
    xp(j) += h;
    xm(j) -= h;
    const double fd = (stage_cost(*m, xp, u, target) - stage_cost(*m, xm, u, target)) / (2 * h);
    EXPECT_NEAR(e.lx(j), fd, 1e-6);
  }
}

INSTANTIATE_TEST_SUITE_P(Models, BuiltinModelTest,
                         ::testing::Values("scalar_lti", "lti_n4m2",
                                           "double_integrator_2d",
                                           "two_link_arm", "arm_augmented"));

// Mechanical energy of the arm computed from the point-mass positions, with
// velocities by differentiating the positions numerically.
double arm_energy(const ArmParams& p, const Eigen::Vector2d& q,
                  const Eigen::Vector2d& dq) {
  auto positions = [&](const Eigen::Vector2d& qq) {
    Eigen::Vector4d r;
    r << p.l1 * std::cos(qq(0)), p.l1 * std::sin(qq(0)),
        p.l1 * std::cos(qq(0)) + p.l2 * std::cos(qq(0) + qq(1)),
        p.l1 * std::sin(qq(0)) + p.l2 * std::sin(qq(0) + qq(1));
    return r;
  };
  const double h = 1e-6;
  const Eigen::Vector4d v = (positions(q + h * dq) - positions(q - h * dq)) / (2 * h);
  const Eigen::Vector4d r = positions(q);
  const double kinetic = 0.5 * p.m1 * v.head<2>().squaredNorm() +
                         0.5 * p.m2 * v.tail<2>().squaredNorm();
  const double potential = p.gravity * (p.m1 * r(1) + p.m2 * r(3));
  return kinetic + potential;
}

TEST(TwoLinkArm, PowerBalanceMatchesLagrangianMechanics) {
  ArmParams p;
  CostWeights w{Matrix::Identity(2, 2), Matrix::Identity(2, 2),
                Matrix::Identity(2, 2)};
  const TwoLinkArm arm(p, w);
  std::mt19937_64 rng(24);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Vector2d q(u(rng), u(rng)), dq(u(rng), u(rng));
    const Eigen::Vector2d tau(u(rng), u(rng));
    const Eigen::Vector2d qdd = arm.acceleration(q, dq, tau);
    // dE/dt along the continuous dynamics equals the power delivered by the
    // torques minus the damping loss.
    const double h = 1e-4;
    const double dE = (arm_energy(p, q + h * dq, dq + h * qdd) -
                       arm_energy(p, q - h * dq, dq - h * qdd)) / (2 * h);
    const double power = dq.dot(tau) - p.damping * dq.squaredNorm();
    EXPECT_NEAR(dE, power, 1e-5 * (1.0 + std::abs(power)));
  }
}

TEST(TwoLinkArm, MassMatrixMatchesKineticEnergy) {
  ArmParams p;
  CostWeights w{Matrix::Identity(2, 2), Matrix::Identity(2, 2),
                Matrix::Identity(2, 2)};
  const TwoLinkArm arm(p, w);
  const Eigen::Vector2d q(0.3, -1.1), dq(0.7, -0.4);
  ArmParams no_gravity = p;
  no_gravity.gravity = 0.0;
  EXPECT_NEAR(0.5 * dq.dot(arm.mass_matrix(q) * dq),
              arm_energy(no_gravity, q, dq), 1e-8);
}

TEST(TwoLinkArm, EndEffectorAtReach) {
  const ModelPtr arm = make_two_link_arm();
  const Vector x = Vector::Zero(4);
  EXPECT_NEAR(arm->output(x)(0), 1.1, 1e-15);
  EXPECT_NEAR(arm->output(x)(1), 0.0, 1e-15);
}

TEST(Rollout, MatchesManualStepping) {
  const ModelPtr m = make_double_integrator_2d();
  std::mt19937_64 rng(25);
  std::vector<Vector> controls;
  for (int t = 0; t < 10; ++t) controls.push_back(random_matrix(2, 1, rng));
  const PointSeries targets(11, Eigen::Vector2d(1.0, 2.0));
  const Vector x0 = random_matrix(4, 1, rng);
  const NominalTrajectory traj = rollout(*m, x0, controls, targets);
  Vector x = x0;
  for (int t = 0; t < 10; ++t) x = m->transition(x, controls[t], t);
  EXPECT_LT((traj.states.back() - x).norm(), 1e-14);
  EXPECT_NEAR(traj.total_cost,
              trajectory_cost(*m, traj.states, controls, targets), 1e-12);
}

TEST(Rollout, NoisyRolloutIsSeededAndZeroNoiseIsExact) {
  ModelOptions opts;
  opts.sigma = 0.1;
  const ModelPtr noisy = make_double_integrator_2d(opts);
  const ModelPtr clean = make_double_integrator_2d();
  const std::vector<Vector> controls(5, Vector::Ones(2));
  const PointSeries targets(6, Vector::Zero(2));
  const Vector x0 = Vector::Zero(4);
  std::mt19937_64 a(7), b(7), c(7);
  const auto ra = rollout_noisy(*noisy, x0, controls, targets, a);
  const auto rb = rollout_noisy(*noisy, x0, controls, targets, b);
  EXPECT_EQ(ra.states.back(), rb.states.back());
  const auto rc = rollout_noisy(*clean, x0, controls, targets, c);
  EXPECT_EQ(rc.states.back(), rollout(*clean, x0, controls, targets).states.back());
}

TEST(Validation, RejectsBadModels) {
  const Matrix I = Matrix::Identity(2, 2);
  CostWeights good{I, I, I};
  EXPECT_THROW(LinearModel("m", I, Matrix::Identity(3, 2), I, good), DimensionError);
  CostWeights bad_r{-I, I, I};
  EXPECT_THROW(LinearModel("m", I, I, I, bad_r), Error);
  CostWeights bad_w{I, -I, I};
  EXPECT_THROW(LinearModel("m", I, I, I, bad_w), Error);
  EXPECT_THROW(LinearModel("m", I, I, I, good, -1.0), Error);
  EXPECT_THROW(make_model("no_such_model"), Error);
  ModelOptions small;
  small.augmented_dim = 3;
  EXPECT_THROW(make_arm_augmented(small), DimensionError);
}

TEST(Validation, RejectsBadInputs) {
  const ModelPtr m = make_double_integrator_2d();
  EXPECT_THROW(step(*m, Vector::Zero(3), Vector::Zero(2), 0), DimensionError);
  EXPECT_THROW(step(*m, Vector::Zero(4), Vector::Zero(1), 0), DimensionError);
  const std::vector<Vector> controls(3, Vector::Zero(2));
  EXPECT_THROW(rollout(*m, Vector::Zero(4), controls, PointSeries(3, Vector::Zero(2))),
               DimensionError);
  Vector inf = Vector::Zero(4);
  inf(0) = INFINITY;
  EXPECT_THROW(step(*m, inf, Vector::Zero(2), 4), DivergenceError);
}

class NoJacobianModel : public SystemModel {
 public:
  NoJacobianModel()
      : SystemModel(1, 1, 1,
                    CostWeights{Matrix::Ones(1, 1), Matrix::Ones(1, 1),
                                Matrix::Ones(1, 1)},
                    0.0) {}
  std::string name() const override { return "cubic"; }
  Vector transition(const Vector& x, const Vector& u, int) const override {
    return x + 0.1 * x.array().cube().matrix() + u;
  }
  Vector output(const Vector& x) const override { return x; }
  Matrix output_jacobian(const Vector&) const override {
    return Matrix::Ones(1, 1);
  }
};

TEST(Linearize, FallsBackToFiniteDifferencesWhenAllowed) {
  NoJacobianModel m;
  const Vector x = Vector::Constant(1, 0.7);
  const Linearization lin = linearize(m, x, Vector::Zero(1), 0);
  EXPECT_NEAR(lin.A(0, 0), 1.0 + 0.3 * 0.49, 1e-8);
  EXPECT_NEAR(lin.B(0, 0), 1.0, 1e-10);
  m.set_finite_difference_fallback(false);
  EXPECT_THROW(linearize(m, x, Vector::Zero(1), 0), Error);
}

}  // namespace
}  // namespace retro
