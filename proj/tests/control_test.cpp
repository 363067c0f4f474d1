// Copyright 2026 The tendonkit Authors
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

// Tension QP and the controller pipeline.

#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "tendonkit/tendonkit.hpp"

namespace tk = tendonkit;
using Eigen::MatrixXd;
using Eigen::Vector2d;
using Eigen::VectorXd;

namespace {

tk::TensionProblem antagonist(double tau, double lambda = 1e6) {
  tk::TensionProblem p;
  p.G = MatrixXd(2, 1);
  p.G << -0.01, 0.01;
  p.tau_ref = VectorXd::Constant(1, tau);
  p.Lambda = MatrixXd::Constant(1, 1, lambda);
  p.f_min = VectorXd::Constant(2, 5.0);
  p.f_max = VectorXd::Constant(2, 490.0);
  return p;
}

tk::TensionProblem random_problem(std::mt19937_64& rng, int R, int N) {
  std::uniform_real_distribution<double> arm(-0.08, 0.08), tq(-6.0, 6.0), lo(0.0, 10.0), hi(60.0, 490.0);
  std::uniform_real_distribution<double> expo(0.0, 8.0);
  tk::TensionProblem p;
  p.G = MatrixXd(R, N);
  for (int i = 0; i < R; ++i) {
    for (int j = 0; j < N; ++j) p.G(i, j) = arm(rng);
  }
  p.tau_ref = VectorXd(N);
  for (int j = 0; j < N; ++j) p.tau_ref[j] = tq(rng);
  MatrixXd B = MatrixXd::Random(N, N);
  p.Lambda = std::pow(10.0, expo(rng)) * (B * B.transpose() / N + 0.1 * MatrixXd::Identity(N, N));
  p.f_min = VectorXd(R);
  p.f_max = VectorXd(R);
  for (int i = 0; i < R; ++i) {
    p.f_min[i] = lo(rng);
    p.f_max[i] = hi(rng);
  }
  return p;
}

}  // namespace

// ----- tension QP -------------------------------------------------------------

TEST(Tension, AntagonistLowerBoundActivates) {
  const tk::TensionProblem p = antagonist(1.0);
  const tk::TensionSolution s = tk::solve_tension(p);
  ASSERT_EQ(s.status, tk::TensionStatus::kOptimal);
  // f2 at its floor; f1 from 2 f1 = 2e4 (1 - 0.01 f1 + 0.05).
  EXPECT_NEAR(s.f_ref[0], 10500.0 / 101.0, 1e-9);
  EXPECT_DOUBLE_EQ(s.f_ref[1], 5.0);
  // The 1 N.m target is met up to the regularisation trade-off.
  const double tau = tk::torque_from_tension(p.G, s.f_ref)[0];
  EXPECT_NEAR(tau, 1.0, 0.02);
  // Brute force on a 0.1 N grid over the useful corner of the box.
  VectorXd lo(2), hi(2);
  lo << 5.0, 5.0;
  hi << 150.0, 30.0;
  const oracle::GridResult g = oracle::grid_search(p.G, p.tau_ref, p.Lambda, lo, hi, 0.1);
  const double best = oracle::qp_objective(p.G, p.tau_ref, p.Lambda, s.f_ref);
  EXPECT_LE(best, g.best + 1e-9);
  EXPECT_NEAR(g.argmin[0], s.f_ref[0], 0.1);
  EXPECT_NEAR(g.argmin[1], 5.0, 1e-12);
}

TEST(Tension, ZeroTorqueGivesPretensionFloor) {
  for (double lambda : {0.0, 1.0, 1e6, 1e8}) {
    const tk::TensionSolution s = tk::solve_tension(antagonist(0.0, lambda));
    EXPECT_DOUBLE_EQ(s.f_ref[0], 5.0);
    EXPECT_DOUBLE_EQ(s.f_ref[1], 5.0);
    EXPECT_NEAR(s.torque_residual.norm(), 0.0, 1e-15);
  }
}

TEST(Tension, SaturatedDemandTradesOffResidual) {
  const tk::TensionProblem p = antagonist(10.0);
  const tk::TensionSolution s = tk::solve_tension(p);
  EXPECT_EQ(s.status, tk::TensionStatus::kOptimal);
  EXPECT_DOUBLE_EQ(s.f_ref[0], 490.0);
  EXPECT_DOUBLE_EQ(s.f_ref[1], 5.0);
  EXPECT_NEAR(s.torque_residual[0], 10.0 - 4.85, 1e-9);
  VectorXd lo(2), hi(2);
  lo << 400.0, 5.0;
  hi << 490.0, 20.0;
  const oracle::GridResult g = oracle::grid_search(p.G, p.tau_ref, p.Lambda, lo, hi, 0.1);
  EXPECT_NEAR(g.argmin[0], 490.0, 1e-9);
  EXPECT_NEAR(g.argmin[1], 5.0, 1e-9);
}

TEST(Tension, KktAtOptimumAndAtWrongVertex) {
  const tk::TensionProblem p = antagonist(1.0);
  const tk::TensionSolution s = tk::solve_tension(p);
  EXPECT_LT(tk::kkt_residual(p, s.f_ref), 1e-8);
  EXPECT_GT(tk::kkt_residual(p, Vector2d(5.0, 490.0)), 1.0);
}

TEST(Tension, KktZeroAtConstructedInteriorPoint) {
  // Square invertible G: any interior f0 is stationary for the torque
  // r0 = -Lambda^-1 G^-1 f0, i.e. tau = r0 - G^T f0.
  tk::TensionProblem p;
  p.G = MatrixXd(2, 2);
  p.G << 0.03, -0.01, 0.02, 0.04;
  p.Lambda = 1e3 * MatrixXd::Identity(2, 2);
  p.f_min = VectorXd::Constant(2, 5.0);
  p.f_max = VectorXd::Constant(2, 490.0);
  const Vector2d f0(50.0, 80.0);
  const VectorXd r0 = -(p.Lambda.inverse() * p.G.inverse() * f0);
  p.tau_ref = r0 - p.G.transpose() * f0;
  EXPECT_NEAR(tk::kkt_residual(p, f0), 0.0, 1e-12);
  const tk::TensionSolution s = tk::solve_tension(p);
  EXPECT_LT((s.f_ref - f0).norm(), 1e-9);
}

TEST(Tension, FuzzFeasibleAndStationary) {
  std::mt19937_64 rng(404);
  std::uniform_int_distribution<int> rr(1, 10), nn(1, 7);
  for (int k = 0; k < 300; ++k) {
    const int R = rr(rng), N = nn(rng);
    const tk::TensionProblem p = random_problem(rng, R, N);
    const tk::TensionSolution s = tk::solve_tension(p);
    ASSERT_EQ(s.status, tk::TensionStatus::kOptimal) << "instance " << k;
    EXPECT_LE(s.kkt_residual, 1e-8) << "instance " << k;
    EXPECT_NEAR(s.kkt_residual, tk::kkt_residual(p, s.f_ref), 1e-15);
    EXPECT_GE((s.f_ref - p.f_min).minCoeff(), -1e-9);
    EXPECT_GE((p.f_max - s.f_ref).minCoeff(), -1e-9);
  }
}

TEST(Tension, WarmStartDoesNotChangeAnswer) {
  std::mt19937_64 rng(5);
  tk::TensionSolver warm;
  tk::TensionProblem p = random_problem(rng, 10, 7);
  for (int k = 0; k < 50; ++k) {
    // Slowly varying torque, as along a trajectory.
    p.tau_ref += 0.3 * VectorXd::Random(7);
    const tk::TensionSolution a = warm.solve(p);
    const tk::TensionSolution b = tk::solve_tension(p);
    EXPECT_LT((a.f_ref - b.f_ref).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Tension, EqualBoundsPinTheValue) {
  tk::TensionProblem p = antagonist(1.0);
  p.f_min[0] = p.f_max[0] = 40.0;
  const tk::TensionSolution s = tk::solve_tension(p);
  EXPECT_EQ(s.f_ref[0], 40.0);
}

TEST(Tension, RejectsMalformedProblems) {
  tk::TensionProblem p = antagonist(1.0);
  p.tau_ref = VectorXd::Zero(2);
  EXPECT_THROW(tk::solve_tension(p), tk::DimensionMismatch);
  p = antagonist(1.0);
  p.f_min[1] = 500.0;
  EXPECT_THROW(tk::solve_tension(p), tk::InvalidArgument);
  p = antagonist(1.0);
  p.tau_ref[0] = std::nan("");
  EXPECT_THROW(tk::solve_tension(p), tk::InvalidArgument);
}

// ----- controller ---------------------------------------------------------------

TEST(ComputedTorque, ZeroAtTargetWithoutGravity) {
  const tk::RobotModel m = oracle::random_chain(4, 9);
  const VectorXd q = VectorXd::Constant(4, 0.2);
  const tk::Reference ref = tk::make_reference(m, q, VectorXd::Zero(4), VectorXd::Zero(4));
  tk::RobotModel flat = m;
  flat.gravity.setZero();
  EXPECT_LT(tk::computed_torque(flat, q, ref, 400.0 * MatrixXd::Identity(4, 4)).norm(), 1e-15);
}

TEST(ComputedTorque, PendulumHorizontalHold) {
  const tk::RobotModel m = oracle::pendulum(1.0, 1.0);
  const VectorXd q = VectorXd::Constant(1, std::numbers::pi / 2);
  const tk::Reference ref = tk::make_reference(m, q, VectorXd::Zero(1), VectorXd::Zero(1));
  EXPECT_NEAR(tk::computed_torque(m, q, ref, MatrixXd::Constant(1, 1, 400.0))[0], 9.81, 1e-12);
}

TEST(ComputedTorque, TermByTerm) {
  std::mt19937_64 rng(21);
  const tk::RobotModel m = tk::load_model_file(oracle::source_path("models/saqiel_ref.model"));
  for (int k = 0; k < 10; ++k) {
    const VectorXd q = oracle::random_q(m, rng), qr = oracle::random_q(m, rng);
    const VectorXd qd = VectorXd::Random(7), qdd = VectorXd::Random(7);
    MatrixXd B = MatrixXd::Random(7, 7);
    const MatrixXd Kp = B * B.transpose();
    const tk::Reference ref = tk::make_reference(m, qr, qd, qdd);
    const VectorXd a = Kp * (qr - q) + qdd;
    const VectorXd expect = tk::inertia_matrix(m, q) * a + tk::bias_forces(m, q, qd) + tk::gravity_vector(m, q);
    const VectorXd got = tk::computed_torque(m, q, ref, Kp);
    EXPECT_LT((got - expect).norm() / expect.norm(), 1e-12);
  }
}

TEST(TorqueFromTension, Basics) {
  MatrixXd G(2, 1);
  G << -0.01, 0.01;
  EXPECT_EQ(tk::torque_from_tension(G, Vector2d::Zero())[0], 0.0);
  EXPECT_NEAR(tk::torque_from_tension(G, Vector2d(105.0, 5.0))[0], 1.0, 1e-15);
}

TEST(TorqueFromTension, RoundTripWithSlack) {
  // r = (I + Lambda G^T G)^-1 tau, so Lambda sigma_min(G)^2 sets the residual.
  const tk::RobotModel m = oracle::planar_two_link();
  const MatrixXd G = tk::muscle_jacobian(m, VectorXd::Zero(2));
  const double smin = Eigen::JacobiSVD<MatrixXd>(G).singularValues().minCoeff();
  const double lambda = 1e10;
  ASSERT_GT(lambda * smin * smin, 1e6);
  const VectorXd tau = Vector2d(0.8, -0.5);
  tk::TensionProblem p{G, tau, lambda * MatrixXd::Identity(2, 2), VectorXd::Constant(4, 5.0),
                       VectorXd::Constant(4, 490.0)};
  const tk::TensionSolution s = tk::solve_tension(p);
  EXPECT_LT((tk::torque_from_tension(G, s.f_ref) - tau).norm(), 1e-6);
  EXPECT_GT((s.f_ref.array() - 5.0).maxCoeff(), 1.0);  // something is off the floor
}

TEST(TensionCommand, NoErrorNoChange) {
  const VectorXd f = Vector2d(10.0, 20.0), l = Vector2d(0.1, -0.3);
  const MatrixXd Kv = 100.0 * MatrixXd::Identity(2, 2);
  const tk::TensionCommand c = tk::tension_command(f, Kv, l, l, VectorXd::Constant(2, 490.0));
  EXPECT_EQ(c.f_final, f);
  EXPECT_FALSE(c.clamped);
  const tk::TensionCommand z =
      tk::tension_command(f, MatrixXd::Zero(2, 2), l, Vector2d(1.0, 1.0), VectorXd::Constant(2, 490.0));
  EXPECT_EQ(z.f_final, f);
}

TEST(TensionCommand, ClampsToZeroAndMax) {
  const MatrixXd Kv = 100.0 * MatrixXd::Identity(2, 2);
  // ldot_ref - ldot = (0.01, -0.2): pre-clamp (11, -10).
  const tk::TensionCommand c = tk::tension_command(Vector2d(10.0, 10.0), Kv, Vector2d(0.01, -0.2), Vector2d::Zero(),
                                                   VectorXd::Constant(2, 490.0));
  EXPECT_NEAR(c.f_final[0], 11.0, 1e-12);
  EXPECT_EQ(c.f_final[1], 0.0);
  EXPECT_TRUE(c.clamped);
  const tk::TensionCommand hi = tk::tension_command(Vector2d(480.0, 10.0), Kv, Vector2d(1.0, 0.0), Vector2d::Zero(),
                                                    VectorXd::Constant(2, 490.0));
  EXPECT_EQ(hi.f_final[0], 490.0);
}

TEST(Controller, RestAtTargetGivesFloor) {
  const tk::RobotModel m = oracle::planar_two_link();  // antagonists with equal arms
  const VectorXd q = Vector2d(0.3, -0.4);
  tk::ControllerConfig cfg = tk::ControllerConfig::defaults(m);
  cfg.f_min = VectorXd::Constant(4, 5.0);
  cfg.f_max = VectorXd::Constant(4, 490.0);
  const tk::Reference ref = tk::make_reference(m, q, VectorXd::Zero(2), VectorXd::Zero(2));
  const tk::ControlOutput out = tk::control_step(m, {q, VectorXd::Zero(2), VectorXd::Zero(4)}, ref, cfg);
  EXPECT_LT((out.f_final - cfg.f_min).norm(), 1e-12);
}

TEST(Controller, IgnoresMeasuredJointVelocity) {
  const tk::RobotModel m = tk::load_model_file(oracle::source_path("models/saqiel_ref.model"));
  const tk::ControllerConfig cfg = tk::ControllerConfig::defaults(m);
  std::mt19937_64 rng(3);
  const VectorXd q = oracle::random_q(m, rng), qr = oracle::random_q(m, rng, 0.3);
  const tk::Reference ref = tk::make_reference(m, qr, VectorXd::Constant(7, 0.2), VectorXd::Zero(7));
  const VectorXd ldot = VectorXd::Constant(10, 0.01);
  const tk::ControlOutput a = tk::control_step(m, {q, VectorXd::Zero(7), ldot}, ref, cfg);
  const tk::ControlOutput b = tk::control_step(m, {q, VectorXd::Constant(7, 50.0), ldot}, ref, cfg);
  EXPECT_EQ(a.f_final, b.f_final);
  EXPECT_EQ(a.diag.tau_ref, b.diag.tau_ref);
}

TEST(Controller, OutputsInsideBoxAndConsistent) {
  const tk::RobotModel m = tk::load_model_file(oracle::source_path("models/saqiel_ref.model"));
  const tk::ControllerConfig cfg = tk::ControllerConfig::defaults(m);
  tk::Controller ctl(m, cfg);
  std::mt19937_64 rng(4);
  for (int k = 0; k < 50; ++k) {
    const VectorXd q = oracle::random_q(m, rng, 1.0);
    const tk::Reference ref = tk::make_reference(m, q + 0.05 * VectorXd::Random(7), 0.5 * VectorXd::Random(7),
                                                 VectorXd::Random(7));
    const tk::MeasuredState st{q, VectorXd::Zero(7), 0.05 * VectorXd::Random(10)};
    const tk::ControlOutput out = ctl.step(st, ref);
    EXPECT_GE(out.f_final.minCoeff(), 0.0);
    EXPECT_LE((out.f_final - cfg.f_max).maxCoeff(), 0.0);
    EXPECT_GE((out.diag.f_ref - cfg.f_min).minCoeff(), -1e-9);
    EXPECT_LE(out.diag.kkt_residual, 1e-8);
    // Stateless call agrees with the warm-started one.
    const tk::ControlOutput cold = tk::control_step(m, st, ref, cfg);
    EXPECT_LT((cold.f_final - out.f_final).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Controller, ReferenceTakeUpRate) {
  const tk::RobotModel m = oracle::pendulum();
  const tk::Reference r = tk::make_reference(m, VectorXd::Zero(1), VectorXd::Constant(1, 2.0), VectorXd::Zero(1));
  // flexor (dl/dq = -0.02) winds in at 0.04 m/s when q grows at 2 rad/s.
  EXPECT_NEAR(r.ldot_ref[0], 0.04, 1e-15);
  EXPECT_NEAR(r.ldot_ref[1], -0.04, 1e-15);
}

TEST(Controller, ConfigValidation) {
  const tk::RobotModel m = oracle::pendulum();
  tk::ControllerConfig c = tk::ControllerConfig::defaults(m);
  c.control_rate = 100.0;
  EXPECT_THROW(tk::Controller(m, c), tk::ValidationError);
  c = tk::ControllerConfig::defaults(m);
  c.Kv(0, 1) = 5.0;
  EXPECT_THROW(tk::Controller(m, c), tk::ValidationError);
  c = tk::ControllerConfig::defaults(m);
  c.Kp = -c.Kp;
  EXPECT_THROW(tk::Controller(m, c), tk::ValidationError);
  c = tk::ControllerConfig::defaults(m);
  c.f_min = VectorXd::Zero(3);
  EXPECT_THROW(tk::Controller(m, c), tk::DimensionMismatch);
}

TEST(Controller, LowGainPresetDividesByTen) {
  const tk::RobotModel m = oracle::pendulum();
  tk::ControllerConfig c = tk::ControllerConfig::defaults(m);
  c.apply_low_gain_preset();
  EXPECT_DOUBLE_EQ(c.Kp(0, 0), 40.0);
  EXPECT_DOUBLE_EQ(c.Kv(0, 0), 20.0);
}
