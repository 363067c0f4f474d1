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

// Plant integration, contact, scenarios and traces.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "tendonkit/tendonkit.hpp"

namespace tk = tendonkit;
using Eigen::Vector3d;
using Eigen::VectorXd;

namespace {

tk::Scenario free_scenario(const tk::RobotModel& m) {
  tk::Scenario sc;
  sc.model = m;
  sc.controller_enabled = false;
  sc.stops.enabled = false;
  sc.tool_link = m.num_links() - 1;
  sc.make_reference = [](const tk::RobotModel& model) -> std::unique_ptr<tk::Trajectory> {
    return std::make_unique<tk::HoldTrajectory>(model, VectorXd::Zero(model.dof()), model.num_links() - 1,
                                                Vector3d::Zero());
  };
  return sc;
}

tk::SimState at_rest(const tk::RobotModel& m, const VectorXd& q) {
  tk::SimState s;
  s.q = q;
  s.qdot = VectorXd::Zero(m.dof());
  s.f_applied = VectorXd::Zero(m.num_routes());
  return s;
}

constexpr const char* kPendulumHold = R"(
[scenario]
name = "pendulum_hold"
model = "../models/pendulum.model"
duration = 0.5
tool_link = "bob"
tool_point = [0, 0, -1]
initial_q = [0]

[reference]
type = "hold"
q = [0]
)";

tk::Scenario pendulum_hold(const std::vector<std::string>& overrides = {}) {
  return tk::load_scenario(kPendulumHold, oracle::source_path("scenarios"), overrides);
}

}  // namespace

// ----- transmission ---------------------------------------------------------

TEST(Transmission, WireTension) {
  // EA 10 kN over 1 m: 1 mm of stretch carries 10 N.
  EXPECT_NEAR(tk::wire_transmission(1e4, 0.0, 1.001, 1.0, 0.0, 0.0), 10.0, 1e-9);
  EXPECT_EQ(tk::wire_transmission(1e4, 3.0, 1.0, 1.0, 0.0, 0.0), 0.0);
  EXPECT_EQ(tk::wire_transmission(1e4, 3.0, 0.99, 1.0, 0.0, 0.0), 0.0);  // slack
  EXPECT_NEAR(tk::wire_transmission(1e4, 3.0, 1.001, 1.0, 0.5, 0.0), 11.5, 1e-9);
  // A slack wire cannot push, however fast it shortens.
  EXPECT_EQ(tk::wire_transmission(1e4, 3.0, 1.0, 1.0, -10.0, 0.0), 0.0);
}

// ----- plant ----------------------------------------------------------------

TEST(Plant, NoForcesNoMotion) {
  tk::RobotModel m = oracle::random_chain(4, 5);
  m.gravity.setZero();
  const tk::Scenario sc = free_scenario(m);
  tk::Simulator sim(sc);
  const VectorXd q0 = VectorXd::LinSpaced(4, -0.3, 0.6);
  sim.set_state(at_rest(m, q0));
  for (int k = 0; k < 200; ++k) sim.step(1e-3, VectorXd::Zero(m.num_routes()));
  EXPECT_EQ((sim.state().q - q0).norm(), 0.0);
  EXPECT_EQ(sim.state().qdot.norm(), 0.0);
}

TEST(Plant, BalancedPretensionDoesNothing) {
  const tk::RobotModel m = oracle::pendulum(1.0, 1.0);
  const tk::Scenario sc = free_scenario(m);
  tk::Simulator pulled(sc), free(sc);
  pulled.set_state(at_rest(m, VectorXd::Constant(1, 0.5)));
  free.set_state(at_rest(m, VectorXd::Constant(1, 0.5)));
  for (int k = 0; k < 1000; ++k) {
    pulled.step(1e-3, Eigen::Vector2d(40.0, 40.0));
    free.step(1e-3, Eigen::Vector2d::Zero());
  }
  EXPECT_NEAR(pulled.state().q[0], free.state().q[0], 1e-9);
  EXPECT_NEAR(pulled.state().qdot[0], free.state().qdot[0], 1e-9);
  // It did swing.
  EXPECT_GT(std::abs(free.state().q[0] - 0.5), 0.1);
}

TEST(Plant, OneWireAcceleratesFromRest) {
  tk::RobotModel m = oracle::pendulum(1.0, 1.0, false);
  const tk::Scenario sc = free_scenario(m);
  tk::Simulator sim(sc);
  sim.set_state(at_rest(m, VectorXd::Zero(1)));
  sim.step(1e-3, Eigen::Vector2d(10.0, 0.0));
  const double tau = -tk::muscle_jacobian(m, VectorXd::Zero(1)).col(0).dot(Eigen::Vector2d(10.0, 0.0));
  EXPECT_GT(tau * sim.state().qdot[0], 0.0);
  EXPECT_NEAR(sim.state().qdot[0], tau * 1e-3, 1e-12);
}

TEST(Plant, EnergyIsConservedUnderRk4) {
  tk::Scenario sc = tk::load_scenario_file(oracle::source_path("scenarios/energy_audit.scn"));
  tk::Simulator sim(sc);
  const tk::RunResult r = sim.run();
  ASSERT_TRUE(r.ok) << r.error_message;
  const tk::Summary s = tk::summarize(r.trace);
  EXPECT_LT(s.get("energy.relative_drift"), 1e-3);
  EXPECT_NEAR(s.get("duration"), 5.0, 1e-9);
}

TEST(Plant, JointStopHoldsTheLimit) {
  const tk::RobotModel m = oracle::pendulum(1.0, 1.0);
  tk::RobotModel tight = m;
  tight.joints[0].lower = -0.2;
  tight.joints[0].upper = 0.2;
  tk::Scenario sc = free_scenario(tight);
  sc.stops.enabled = true;
  tk::Simulator sim(sc);
  tk::SimState s = at_rest(tight, VectorXd::Constant(1, 0.19));
  s.qdot[0] = 3.0;
  sim.set_state(s);
  double peak = 0.0;
  for (int k = 0; k < 400; ++k) {
    sim.step(2.5e-4, Eigen::Vector2d::Zero());
    peak = std::max(peak, sim.state().q[0]);
  }
  // 3 rad/s into a 400 rad/s stop: overshoot about v / (e w).
  EXPECT_LT(peak - 0.2, 3.0 / 400.0);
  EXPECT_LT(sim.state().q[0], 0.2 + 1e-3);
}

// ----- contact --------------------------------------------------------------

TEST(Contact, PenaltyForce) {
  const tk::RobotModel m = oracle::pendulum(1.0, 1.0);
  const tk::Frames fr = tk::forward_kinematics(m, VectorXd::Zero(1));
  tk::PlaneContact plane;
  plane.enabled = true;
  plane.normal = Vector3d::UnitZ();
  plane.stiffness = 1e5;
  plane.damping = 0.0;
  plane.candidates = {{1, Vector3d(0, 0, -1)}};
  plane.offset = -1.5;  // bob sits 0.5 m above
  tk::ContactResult above = tk::apply_plane_contact(m, fr, VectorXd::Zero(1), plane);
  EXPECT_FALSE(above.active);
  EXPECT_EQ(above.force, 0.0);
  plane.offset = -0.999;  // 1 mm deep
  tk::ContactResult in = tk::apply_plane_contact(m, fr, VectorXd::Zero(1), plane);
  EXPECT_TRUE(in.active);
  EXPECT_NEAR(in.force, 100.0, 1e-6);
  EXPECT_NEAR(in.wrench.force.z(), 100.0, 1e-6);
  // Swinging through the bottom: all tangential.
  const tk::ContactResult moving = tk::apply_plane_contact(m, fr, VectorXd::Constant(1, 5.0), plane);
  EXPECT_NEAR(moving.vt, 5.0, 1e-12);
  EXPECT_NEAR(moving.vn, 0.0, 1e-12);
  // Leaving the surface fast enough: the damper cannot pull.
  plane.damping = 1e3;
  const tk::Frames lifted = tk::forward_kinematics(m, VectorXd::Constant(1, 0.02));
  const tk::ContactResult leaving = tk::apply_plane_contact(m, lifted, VectorXd::Constant(1, 5.0), plane);
  EXPECT_EQ(leaving.force, 0.0);
}

// ----- scenarios ------------------------------------------------------------

TEST(Scenario, DefaultsAndOverrides) {
  const tk::Scenario a = pendulum_hold();
  EXPECT_EQ(a.name, "pendulum_hold");
  EXPECT_DOUBLE_EQ(a.controller.control_rate, 2000.0);
  EXPECT_DOUBLE_EQ(a.dt, 5e-4);
  EXPECT_EQ(a.mode, tk::ActuationMode::kIdealTension);
  const tk::Scenario b = pendulum_hold({"scenario.duration=0.25", "scenario.mode=\"elastic\""});
  EXPECT_DOUBLE_EQ(b.duration, 0.25);
  EXPECT_EQ(b.mode, tk::ActuationMode::kElastic);
}

TEST(Scenario, Rejects) {
  EXPECT_THROW(pendulum_hold({"bogus.key=1"}), tk::ValidationError);
  EXPECT_THROW(pendulum_hold({"scenario.warp=1"}), tk::ValidationError);
  EXPECT_THROW(pendulum_hold({"scenario.mode=\"magic\""}), tk::ValidationError);
  // A physics step longer than the control period.
  EXPECT_THROW(tk::Simulator{pendulum_hold({"scenario.dt=0.002"})}, tk::ValidationError);
  EXPECT_THROW(pendulum_hold({"scenario.duration=-1"}), tk::ValidationError);
}

// ----- runs and traces ------------------------------------------------------

TEST(Run, StationaryHoldHasNoError) {
  const tk::Scenario sc = pendulum_hold();
  tk::Simulator sim(sc);
  const tk::RunResult r = sim.run();
  ASSERT_TRUE(r.ok) << r.error_message;
  const tk::Summary s = tk::summarize(r.trace);
  EXPECT_LT(s.get("error.rms"), 1e-12);
  EXPECT_LT(s.get("error.max"), 1e-12);
  // Both wires sit at the floor.
  EXPECT_NEAR(s.get("tension.peak"), 5.0, 1e-9);
  EXPECT_NEAR(s.get("tension.min"), 5.0, 1e-9);
  EXPECT_NEAR(s.get("rows"), 51.0, 0.0);
}

TEST(Run, ElasticHoldStartsPretensioned) {
  const tk::Scenario sc = pendulum_hold({"scenario.mode=\"elastic\""});
  tk::Simulator sim(sc);
  const tk::RunResult r = sim.run();
  ASSERT_TRUE(r.ok) << r.error_message;
  const tk::Summary s = tk::summarize(r.trace);
  EXPECT_LT(s.get("error.max"), 1e-9);
  EXPECT_NEAR(s.get("tension.peak"), 5.0, 1e-6);
  EXPECT_NEAR(s.get("tension.min"), 5.0, 1e-6);
}

TEST(Run, Deterministic) {
  const tk::Scenario sc = tk::load_scenario_file(oracle::source_path("scenarios/circle_track.scn"),
                                                 {"scenario.duration=0.3"});
  tk::Simulator a(sc), b(sc);
  EXPECT_EQ(tk::write_trace_csv(a.run().trace), tk::write_trace_csv(b.run().trace));
}

// Wires only pull: every applied tension in every row, both modes, through an impact.
TEST(Run, TensionsNeverPush) {
  for (const char* mode : {"\"ideal_tension\"", "\"elastic\""}) {
    const tk::Scenario sc = tk::load_scenario_file(oracle::source_path("scenarios/passive_impact.scn"),
                                                   {"scenario.duration=0.8", std::string("scenario.mode=") + mode});
    tk::Simulator sim(sc);
    const tk::RunResult r = sim.run();
    ASSERT_TRUE(r.ok) << r.error_message;
    const auto cols = r.trace.columns_with_prefix("f.");
    ASSERT_EQ(cols.size(), 10u);
    double low = std::numeric_limits<double>::infinity();
    for (const auto& row : r.trace.rows) {
      for (int c : cols) low = std::min(low, row[static_cast<std::size_t>(c)]);
    }
    EXPECT_GE(low, 0.0) << mode;
  }
}

TEST(Trace, RoundTrip) {
  const tk::Scenario sc = pendulum_hold({"scenario.initial_q=[0.2]"});
  tk::Simulator sim(sc);
  const std::string csv = tk::write_trace_csv(sim.run().trace);
  const tk::Trace back = tk::read_trace_csv(csv);
  EXPECT_EQ(back.scenario, "pendulum_hold");
  EXPECT_DOUBLE_EQ(back.sample_rate, 100.0);
  EXPECT_EQ(tk::write_trace_csv(back), csv);
}

TEST(Trace, RejectsForeignFiles) {
  EXPECT_THROW(tk::read_trace_csv("t,q.a\n0,1\n"), tk::SchemaError);
  EXPECT_THROW(tk::read_trace_csv(""), tk::SchemaError);
}
