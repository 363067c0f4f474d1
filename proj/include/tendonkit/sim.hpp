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

// Closed-loop simulation. The controller runs at its control rate with a
// zero-order hold on the tension command; the plant integrates at dt.
//
// Elastic transmission. Each wire is a unilateral spring-damper between the
// joint side and the motor:
//   f = max(0, k (l_geo - l_motor) + c (ldot_geo - ldot_motor)),  k = EA / L0.
// The motor side has three states per wire. The drive force f_m follows the
// command through a first-order lag, tau_m dfm/dt = f_cmd - f_m (current loop,
// stepped by its exact exponential). The rotor, of reflected mass m_r, then
// pays out wire at ldot_motor with m_r d(ldot_motor)/dt = f - f_m.

#ifndef TENDONKIT_SIM_HPP_
#define TENDONKIT_SIM_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tendonkit/controller.hpp"
#include "tendonkit/dynamics.hpp"
#include "tendonkit/errors.hpp"
#include "tendonkit/kinematics.hpp"
#include "tendonkit/model.hpp"
#include "tendonkit/trace.hpp"
#include "tendonkit/trajectory.hpp"

namespace tendonkit {

enum class ActuationMode { kIdealTension, kElastic };
enum class IntegratorKind { kSemiImplicitEuler, kRK4 };

struct TransmissionParams {
  double ea_scale = 1.0;
  double damping_ratio = 0.1;
  double motor_time_constant = 0.002;  // s
  double rotor_mass = 0.1;             // kg, reflected at the pulley when the route gives none
};

// Penalty stop beyond each joint limit, sized per joint from the inertia the
// joint feels with the others free, m_j = 1 / (M^-1)_jj, so that every stop
// rings at the same frequency: k = m_j w^2, c = 2 zeta m_j w.
struct JointStopParams {
  bool enabled = true;
  double frequency = 400.0;   // rad/s
  double damping_ratio = 1.0;
};

struct PlaneContact {
  bool enabled = false;
  Vector3d normal = Vector3d::UnitZ();  // points out of the surface
  double offset = 0.0;                  // surface is normal . x = offset
  double stiffness = 2.0e4;             // N/m
  double damping = 50.0;                // N s/m
  std::vector<std::pair<int, Vector3d>> candidates;  // (link, point in link)
};

struct SimEvent {
  enum class Kind { kAttachMass, kDetachMass, kImpulse };
  double time = 0.0;
  Kind kind = Kind::kImpulse;
  int link = 0;
  Vector3d point = Vector3d::Zero();
  double mass = 0.0;
  Vector3d impulse = Vector3d::Zero();  // N s, world frame
};

struct SimState {
  double t = 0.0;
  VectorXd q, qdot;
  VectorXd l_motor, ldot_motor;  // released length and its rate, m and m/s
  VectorXd f_applied;
  VectorXd f_motor;  // drive force, elastic mode only
};

// Per-wire stiffness EA/L0 and damping at the given ratio of critical for a
// moving mass m.
inline double wire_stiffness(const WireRoute& r, const TransmissionParams& p) {
  return r.ea * p.ea_scale / r.free_length;
}
inline double wire_damping(const WireRoute& r, const TransmissionParams& p, double moving_mass) {
  return 2.0 * p.damping_ratio * std::sqrt(wire_stiffness(r, p) * std::max(moving_mass, 0.0));
}

// Unilateral spring-damper tension of one wire.
inline double wire_transmission(double stiffness, double damping, double l_geometric, double l_motor,
                                double ldot_geometric, double ldot_motor) {
  return std::max(0.0, stiffness * (l_geometric - l_motor) + damping * (ldot_geometric - ldot_motor));
}

struct ContactResult {
  bool active = false;
  double force = 0.0;  // N along the normal
  double penetration = 0.0;
  double vn = 0.0;  // normal velocity of the reported point
  double vt = 0.0;  // tangential speed of the reported point
  PointForce wrench;
};

// Penalty force at the deepest candidate point. When no point penetrates the
// reported velocities belong to the candidate nearest the surface.
inline ContactResult apply_plane_contact(const RobotModel& model, const Frames& fr,
                                         const Eigen::Ref<const VectorXd>& qdot, const PlaneContact& plane) {
  ContactResult out;
  if (!plane.enabled || plane.candidates.empty()) return out;
  const Vector3d n = plane.normal.normalized();
  int best = -1;
  double best_depth = -std::numeric_limits<double>::infinity();
  Vector3d best_x;
  for (std::size_t i = 0; i < plane.candidates.size(); ++i) {
    const auto& [link, point] = plane.candidates[i];
    const Vector3d x = fr.link[static_cast<std::size_t>(link)].apply(point);
    const double depth = plane.offset - n.dot(x);
    if (depth > best_depth) {
      best_depth = depth;
      best = static_cast<int>(i);
      best_x = x;
    }
  }
  const auto& [link, point] = plane.candidates[static_cast<std::size_t>(best)];
  const Vector3d v = point_jacobian(model, fr, link, point) * qdot;
  out.vn = n.dot(v);
  out.vt = (v - out.vn * n).norm();
  out.penetration = std::max(0.0, best_depth);
  if (best_depth > 0.0) {
    const double f = std::max(0.0, plane.stiffness * best_depth - plane.damping * out.vn);
    out.active = f > 0.0;
    out.force = f;
    out.wrench = PointForce{link, point, f * n};
  }
  return out;
}

inline VectorXd joint_stop_torque(const RobotModel& model, const Frames& fr, const Eigen::Ref<const VectorXd>& q,
                                  const Eigen::Ref<const VectorXd>& qd, const JointStopParams& p) {
  VectorXd tau = VectorXd::Zero(model.dof());
  if (!p.enabled) return tau;
  std::optional<Eigen::LDLT<MatrixXd>> ldlt;
  for (int j = 0; j < model.dof(); ++j) {
    const JointSpec& js = model.joints[static_cast<std::size_t>(j)];
    const double over = q[j] > js.upper ? q[j] - js.upper : (q[j] < js.lower ? q[j] - js.lower : 0.0);
    if (over == 0.0) continue;
    if (!ldlt) ldlt.emplace(inertia_matrix(model, fr));
    const double m = 1.0 / ldlt->solve(VectorXd::Unit(model.dof(), j))[j];
    const double w = p.frequency;
    tau[j] = -m * (w * w * over + 2.0 * p.damping_ratio * w * qd[j]);
  }
  return tau;
}

struct Scenario {
  std::string name = "scenario";
  RobotModel model;
  ControllerConfig controller;
  bool controller_enabled = true;
  bool controller_knows_payload = true;
  ActuationMode mode = ActuationMode::kIdealTension;
  IntegratorKind integrator = IntegratorKind::kSemiImplicitEuler;
  double duration = 1.0;
  double dt = 5e-4;
  double sample_rate = 100.0;
  int tool_link = 0;
  Vector3d tool_point = Vector3d::Zero();
  std::optional<VectorXd> initial_q;
  std::optional<VectorXd> initial_qd;
  std::vector<SimEvent> events;
  PlaneContact contact;
  TransmissionParams transmission;
  JointStopParams stops;
  double blowup_threshold = 1e9;
  // Builds a fresh reference generator; called once per run.
  std::function<std::unique_ptr<Trajectory>(const RobotModel&)> make_reference;
};

inline void validate(const Scenario& s) {
  if (!(s.dt > 0.0)) throw ValidationError("scenario.dt must be > 0");
  if (!(s.duration >= s.dt)) throw ValidationError("scenario.duration must be >= dt");
  if (!(s.sample_rate > 0.0)) throw ValidationError("scenario.sample_rate must be > 0");
  const double period = 1.0 / s.controller.control_rate;
  if (s.controller_enabled && s.dt > period * (1.0 + 1e-9)) {
    throw ValidationError("scenario.dt must not exceed the control period");
  }
  for (const auto& e : s.events) {
    if (!(e.time >= 0.0 && e.time <= s.duration)) {
      throw ValidationError("event time " + std::to_string(e.time) + " outside [0, duration]");
    }
    check_link(s.model, e.link);
    if (e.kind == SimEvent::Kind::kAttachMass && !(e.mass > 0.0)) {
      throw ValidationError("attach_mass event needs mass > 0");
    }
  }
  if (!s.make_reference) throw ValidationError("scenario has no reference trajectory");
}

struct RunResult {
  Trace trace;
  SimState final_state;
  bool ok = true;
  std::string error_code;
  std::string error_message;
  double max_control_seconds = 0.0;
};

class Simulator {
 public:
  explicit Simulator(const Scenario& sc)
      : sc_(sc), plant_(sc.model), control_model_(sc.model) {
    validate(sc_);
    validate_model(plant_);
    reference_ = sc_.make_reference(sc_.model);
    stiffness_.resize(plant_.num_routes());
    damping_.resize(plant_.num_routes());
    rotor_mass_.resize(plant_.num_routes());
    const double mass = moving_part_mass(plant_);
    for (int i = 0; i < plant_.num_routes(); ++i) {
      const WireRoute& r = plant_.routes[static_cast<std::size_t>(i)];
      stiffness_[i] = wire_stiffness(r, sc_.transmission);
      damping_[i] = wire_damping(r, sc_.transmission, mass);
      rotor_mass_[i] = r.motor.rotor_inertia > 0.0
                           ? r.motor.rotor_inertia / (r.motor.pulley_radius * r.motor.pulley_radius)
                           : sc_.transmission.rotor_mass;
    }
  }

  RunResult run() {
    RunResult result;
    // Without a controller the loop ticks once per physics step.
    const double period = sc_.controller_enabled ? 1.0 / sc_.controller.control_rate : sc_.dt;
    const long ticks = std::lround(sc_.duration / period);
    const int substeps = std::max(1, static_cast<int>(std::lround(period / sc_.dt)));
    const double h = period / substeps;
    const long sample_every = std::max(1L, std::lround(1.0 / (sc_.sample_rate * period)));

    std::optional<Controller> controller;
    if (sc_.controller_enabled) controller.emplace(control_model_, sc_.controller);
    result.trace = make_trace_layout(plant_, sc_.name, sc_.sample_rate);

    const TrajectorySample ref0 = reference_->sample(0.0);
    state_.t = 0.0;
    state_.q = sc_.initial_q.value_or(ref0.q);
    state_.qdot = sc_.initial_qd.value_or(ref0.qd);
    require_size(state_.q.size(), plant_.dof(), "initial q");
    require_size(state_.qdot.size(), plant_.dof(), "initial qdot");
    const int R = plant_.num_routes();
    state_.f_applied = VectorXd::Zero(R);
    state_.f_motor = VectorXd::Zero(R);
    state_.l_motor = VectorXd::Zero(R);
    state_.ldot_motor = VectorXd::Zero(R);
    std::size_t next_event = 0;
    std::vector<SimEvent> events = sc_.events;
    std::stable_sort(events.begin(), events.end(),
                     [](const SimEvent& a, const SimEvent& b) { return a.time < b.time; });
    int event_count = 0;
    VectorXd f_cmd = VectorXd::Zero(R);

    try {
      for (long tick = 0; tick <= ticks; ++tick) {
        const double t = static_cast<double>(tick) * period;
        state_.t = t;
        while (next_event < events.size() && events[next_event].time <= t + 1e-12) {
          apply_event(events[next_event]);
          ++event_count;
          ++next_event;
        }
        // Motor and wire rates seen by the controller follow the command held
        // over the previous period.
        refresh_wire_state(f_cmd);
        if (controller) controller->set_model(control_model_);
        const TrajectorySample ref = reference_->sample(t);
        ControlDiagnostics diag;
        if (controller) {
          const Frames fr_ref = forward_kinematics(control_model_, ref.q, LimitPolicy::kAllow);
          Reference r{ref.q, ref.qd, ref.qdd, take_up_rate(muscle_jacobian(control_model_, fr_ref), ref.qd)};
          const ControlOutput out = controller->step(measure(), r);
          f_cmd = out.f_final;
          diag = out.diag;
          result.max_control_seconds = std::max(result.max_control_seconds, diag.elapsed_seconds);
        }
        if (tick == 0) initialise_transmission(f_cmd);
        refresh_wire_state(f_cmd);
        if (tick % sample_every == 0) record(result.trace, ref, diag, event_count);
        if (tick == ticks) break;
        for (int s = 0; s < substeps; ++s) physics_step(h, f_cmd);
      }
      result.ok = true;
    } catch (const NumericalBlowup& e) {
      result.ok = false;
      result.error_code = e.code();
      result.error_message = std::string(e.what()) + " at t=" + std::to_string(state_.t);
    } catch (const SingularInertia& e) {
      result.ok = false;
      result.error_code = e.code();
      result.error_message = e.what();
    }
    result.final_state = state_;
    return result;
  }

  const RobotModel& plant() const { return plant_; }
  const SimState& state() const { return state_; }
  // Direct access for single-step use without run().
  void set_state(SimState s) { state_ = std::move(s); }

  // One plant step of length h under a held tension command.
  void step(double h, const VectorXd& f_cmd) { physics_step(h, f_cmd); }

 private:
  MeasuredState measure() const {
    MeasuredState m;
    m.q = state_.q;
    m.qdot = state_.qdot;
    if (sc_.mode == ActuationMode::kElastic) {
      m.ldot = -state_.ldot_motor;
    } else {
      m.ldot = take_up_rate(muscle_jacobian(plant_, state_.q, LimitPolicy::kAllow), state_.qdot);
    }
    return m;
  }

  void apply_event(const SimEvent& e) {
    switch (e.kind) {
      case SimEvent::Kind::kAttachMass:
        attach_point_mass(plant_.links[static_cast<std::size_t>(e.link)], e.point, e.mass);
        if (sc_.controller_knows_payload) {
          attach_point_mass(control_model_.links[static_cast<std::size_t>(e.link)], e.point, e.mass);
        }
        attached_.push_back(e);
        break;
      case SimEvent::Kind::kDetachMass: {
        // Rebuild the affected links from the originals minus this payload.
        std::vector<SimEvent> keep;
        bool removed = false;
        for (const auto& a : attached_) {
          if (!removed && a.link == e.link) {
            removed = true;
            continue;
          }
          keep.push_back(a);
        }
        attached_ = keep;
        plant_.links = sc_.model.links;
        control_model_.links = sc_.model.links;
        for (const auto& a : attached_) {
          attach_point_mass(plant_.links[static_cast<std::size_t>(a.link)], a.point, a.mass);
          if (sc_.controller_knows_payload) {
            attach_point_mass(control_model_.links[static_cast<std::size_t>(a.link)], a.point, a.mass);
          }
        }
        break;
      }
      case SimEvent::Kind::kImpulse: {
        const Frames fr = forward_kinematics(plant_, state_.q, LimitPolicy::kAllow);
        const Eigen::Matrix3Xd J = point_jacobian(plant_, fr, e.link, e.point);
        state_.qdot += factor_inertia(inertia_matrix(plant_, fr)).solve(J.transpose() * e.impulse);
        break;
      }
    }
  }

  // Starts every wire taut at the first command, motor at rest relative to
  // the joint side.
  void initialise_transmission(const VectorXd& f_cmd) {
    if (sc_.mode != ActuationMode::kElastic) return;
    const Frames fr = forward_kinematics(plant_, state_.q, LimitPolicy::kAllow);
    const VectorXd l = wire_lengths(plant_, fr, state_.q);
    const VectorXd ldot = muscle_jacobian(plant_, fr) * state_.qdot;
    for (int i = 0; i < f_cmd.size(); ++i) {
      state_.f_motor[i] = f_cmd[i];
      state_.l_motor[i] = l[i] - f_cmd[i] / stiffness_[i];
      state_.ldot_motor[i] = ldot[i];
    }
  }

  VectorXd elastic_tension(const Frames& fr, const VectorXd& q, const VectorXd& qd, const VectorXd& lm,
                           const VectorXd& vm) const {
    const VectorXd l = wire_lengths(plant_, fr, q);
    const VectorXd ldot = muscle_jacobian(plant_, fr) * qd;
    VectorXd f(l.size());
    for (long i = 0; i < l.size(); ++i) {
      f[i] = wire_transmission(stiffness_[i], damping_[i], l[i], lm[i], ldot[i], vm[i]);
    }
    return f;
  }

  void refresh_wire_state(const VectorXd& f_cmd) {
    const Frames fr = forward_kinematics(plant_, state_.q, LimitPolicy::kAllow);
    if (sc_.mode == ActuationMode::kElastic) {
      state_.f_applied = elastic_tension(fr, state_.q, state_.qdot, state_.l_motor, state_.ldot_motor);
    } else {
      state_.f_applied = f_cmd;
      state_.l_motor = wire_lengths(plant_, fr, state_.q);
      state_.ldot_motor = muscle_jacobian(plant_, fr) * state_.qdot;
    }
  }

  VectorXd acceleration(const Frames& fr, const VectorXd& q, const VectorXd& qd, const VectorXd& f) const {
    VectorXd tau = torque_from_tension(muscle_jacobian(plant_, fr), f) + joint_stop_torque(plant_, fr, q, qd, sc_.stops);
    std::vector<PointForce> forces;
    const ContactResult c = apply_plane_contact(plant_, fr, qd, sc_.contact);
    if (c.active) forces.push_back(c.wrench);
    return forward_dynamics(plant_, fr, qd, tau, forces);
  }

  // Time derivative of (q, qd, l_motor, ldot_motor) with the drive force held.
  struct Deriv {
    VectorXd dq, dqd, dlm, dvm;
  };
  Deriv derivative(const VectorXd& q, const VectorXd& qd, const VectorXd& lm, const VectorXd& vm,
                   const VectorXd& f_cmd) const {
    const Frames fr = forward_kinematics(plant_, q, LimitPolicy::kAllow);
    Deriv d;
    d.dq = qd;
    if (sc_.mode == ActuationMode::kElastic) {
      const VectorXd f = elastic_tension(fr, q, qd, lm, vm);
      d.dqd = acceleration(fr, q, qd, f);
      d.dlm = vm;
      d.dvm = (f - state_.f_motor).cwiseQuotient(rotor_mass_);
    } else {
      d.dqd = acceleration(fr, q, qd, f_cmd);
      d.dlm = VectorXd::Zero(lm.size());
      d.dvm = VectorXd::Zero(vm.size());
    }
    return d;
  }

  void physics_step(double h, const VectorXd& f_cmd) {
    SimState& x = state_;
    if (sc_.integrator == IntegratorKind::kSemiImplicitEuler) {
      const Deriv d = derivative(x.q, x.qdot, x.l_motor, x.ldot_motor, f_cmd);
      x.qdot += h * d.dqd;
      x.q += h * x.qdot;
      x.ldot_motor += h * d.dvm;
      if (sc_.mode == ActuationMode::kElastic) x.l_motor += h * x.ldot_motor;
    } else {
      const Deriv k1 = derivative(x.q, x.qdot, x.l_motor, x.ldot_motor, f_cmd);
      const Deriv k2 = derivative(x.q + 0.5 * h * k1.dq, x.qdot + 0.5 * h * k1.dqd, x.l_motor + 0.5 * h * k1.dlm,
                                  x.ldot_motor + 0.5 * h * k1.dvm, f_cmd);
      const Deriv k3 = derivative(x.q + 0.5 * h * k2.dq, x.qdot + 0.5 * h * k2.dqd, x.l_motor + 0.5 * h * k2.dlm,
                                  x.ldot_motor + 0.5 * h * k2.dvm, f_cmd);
      const Deriv k4 = derivative(x.q + h * k3.dq, x.qdot + h * k3.dqd, x.l_motor + h * k3.dlm,
                                  x.ldot_motor + h * k3.dvm, f_cmd);
      x.q += h / 6.0 * (k1.dq + 2.0 * k2.dq + 2.0 * k3.dq + k4.dq);
      x.qdot += h / 6.0 * (k1.dqd + 2.0 * k2.dqd + 2.0 * k3.dqd + k4.dqd);
      if (sc_.mode == ActuationMode::kElastic) {
        x.l_motor += h / 6.0 * (k1.dlm + 2.0 * k2.dlm + 2.0 * k3.dlm + k4.dlm);
        x.ldot_motor += h / 6.0 * (k1.dvm + 2.0 * k2.dvm + 2.0 * k3.dvm + k4.dvm);
      }
    }
    if (sc_.mode == ActuationMode::kElastic) {
      const double decay = std::exp(-h / sc_.transmission.motor_time_constant);
      x.f_motor = f_cmd + (x.f_motor - f_cmd) * decay;
    }
    x.t += h;
    const double norm = std::max(x.q.cwiseAbs().maxCoeff(), x.qdot.cwiseAbs().maxCoeff());
    if (!std::isfinite(norm) || norm > sc_.blowup_threshold || !x.l_motor.allFinite() ||
        !x.ldot_motor.allFinite()) {
      throw NumericalBlowup("state norm exceeded " + std::to_string(sc_.blowup_threshold));
    }
  }

  void record(Trace& trace, const TrajectorySample& ref, const ControlDiagnostics& diag, int event_count) {
    const Frames fr = forward_kinematics(plant_, state_.q, LimitPolicy::kAllow);
    const Vector3d x = fr.link[static_cast<std::size_t>(sc_.tool_link)].apply(sc_.tool_point);
    const Vector3d v = point_jacobian(plant_, fr, sc_.tool_link, sc_.tool_point) * state_.qdot;
    const ContactResult c = apply_plane_contact(plant_, fr, state_.qdot, sc_.contact);
    const double energy = 0.5 * state_.qdot.dot(inertia_matrix(plant_, fr) * state_.qdot) + potential_energy(plant_, fr);
    std::vector<double> row;
    row.reserve(trace.columns.size());
    row.push_back(state_.t);
    for (int j = 0; j < plant_.dof(); ++j) row.push_back(state_.q[j]);
    for (int j = 0; j < plant_.dof(); ++j) row.push_back(state_.qdot[j]);
    for (int j = 0; j < plant_.dof(); ++j) row.push_back(ref.q[j]);
    for (int i = 0; i < plant_.num_routes(); ++i) row.push_back(state_.f_applied[i]);
    for (int i = 0; i < plant_.num_routes(); ++i) row.push_back(diag.f_ref.size() ? diag.f_ref[i] : 0.0);
    for (int k = 0; k < 3; ++k) row.push_back(x[k]);
    for (int k = 0; k < 3; ++k) row.push_back(v[k]);
    for (int k = 0; k < 3; ++k) row.push_back(ref.x[k]);
    row.push_back(c.force);
    row.push_back(c.vn);
    row.push_back(c.vt);
    row.push_back(static_cast<double>(event_count));
    row.push_back(diag.kkt_residual);
    row.push_back(energy);
    trace.rows.push_back(std::move(row));
  }

  const Scenario& sc_;
  RobotModel plant_;
  RobotModel control_model_;
  std::unique_ptr<Trajectory> reference_;
  std::vector<SimEvent> attached_;
  SimState state_;
  VectorXd stiffness_, damping_, rotor_mass_;
};

inline RunResult run_scenario(const Scenario& sc) {
  Simulator sim(sc);
  return sim.run();
}

}  // namespace tendonkit

#endif  // TENDONKIT_SIM_HPP_
