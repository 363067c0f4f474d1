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

// Reference trajectories sampled as (q, qd, qdd) plus the task-space point the
// tool should be at.

#ifndef TENDONKIT_TRAJECTORY_HPP_
#define TENDONKIT_TRAJECTORY_HPP_

#include <cmath>
#include <memory>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "tendonkit/errors.hpp"
#include "tendonkit/kinematics.hpp"
#include "tendonkit/model.hpp"

namespace tendonkit {

struct TrajectorySample {
  VectorXd q, qd, qdd;
  Vector3d x = Vector3d::Zero();  // desired tool position
};

class Trajectory {
 public:
  virtual ~Trajectory() = default;
  virtual TrajectorySample sample(double t) = 0;
};

namespace detail {

inline Vector3d tool_position(const RobotModel& model, const Eigen::Ref<const VectorXd>& q, int link,
                              const Vector3d& point) {
  return forward_kinematics(model, q, LimitPolicy::kAllow).link[static_cast<std::size_t>(link)].apply(point);
}

}  // namespace detail

class HoldTrajectory : public Trajectory {
 public:
  HoldTrajectory(const RobotModel& model, VectorXd q, int tool_link, Vector3d tool_point) : q_(std::move(q)) {
    require_size(q_.size(), model.dof(), "reference q");
    x_ = detail::tool_position(model, q_, tool_link, tool_point);
  }
  TrajectorySample sample(double) override {
    const VectorXd zero = VectorXd::Zero(q_.size());
    return TrajectorySample{q_, zero, zero, x_};
  }

 private:
  VectorXd q_;
  Vector3d x_;
};

// Minimum-jerk (quintic) blend from `start` to `goal` over [t0, t0 + T].
class JointRampTrajectory : public Trajectory {
 public:
  JointRampTrajectory(const RobotModel& model, VectorXd start, VectorXd goal, double t0, double duration,
                      int tool_link, Vector3d tool_point)
      : model_(&model), start_(std::move(start)), goal_(std::move(goal)), t0_(t0), T_(duration),
        link_(tool_link), point_(std::move(tool_point)) {
    require_size(start_.size(), model.dof(), "reference start");
    require_size(goal_.size(), model.dof(), "reference goal");
    if (!(T_ > 0.0)) throw ValidationError("reference.duration must be > 0");
  }

  TrajectorySample sample(double t) override {
    const double s = std::clamp((t - t0_) / T_, 0.0, 1.0);
    const bool moving = t > t0_ && t < t0_ + T_;
    const double p = s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
    const double dp = moving ? 30.0 * s * s * (1.0 - s) * (1.0 - s) / T_ : 0.0;
    const double ddp = moving ? 60.0 * s * (1.0 - s) * (1.0 - 2.0 * s) / (T_ * T_) : 0.0;
    const VectorXd d = goal_ - start_;
    TrajectorySample out{start_ + p * d, dp * d, ddp * d, Vector3d::Zero()};
    out.x = detail::tool_position(*model_, out.q, link_, point_);
    return out;
  }

 private:
  const RobotModel* model_;
  VectorXd start_, goal_;
  double t0_, T_;
  int link_;
  Vector3d point_;
};

struct CircleSpec {
  VectorXd base;              // posture whose tool point is the default center
  std::vector<int> ik_joints; // exactly three joints solved by IK
  Eigen::Vector3d e1 = Vector3d::UnitY();  // in-plane basis
  Eigen::Vector3d e2 = Vector3d::UnitZ();
  Vector3d center = Vector3d::Zero();
  bool center_from_base = true;
  double diameter = 0.25;
  double period = 0.6;
  double phase = 0.0;  // rad, start angle on the circle
  int tool_link = 0;
  Vector3d tool_point = Vector3d::Zero();
};

// Task-space circle tracked through inverse kinematics on three joints.
class CircleTrajectory : public Trajectory {
 public:
  CircleTrajectory(const RobotModel& model, CircleSpec spec) : model_(&model), spec_(std::move(spec)) {
    require_size(spec_.base.size(), model.dof(), "circle base posture");
    if (spec_.ik_joints.size() != 3) throw ValidationError("reference.ik_joints must name exactly three joints");
    if (!(spec_.diameter > 0.0) || !(spec_.period > 0.0)) {
      throw ValidationError("circle diameter and period must be > 0");
    }
    if (spec_.center_from_base) {
      spec_.center = detail::tool_position(model, spec_.base, spec_.tool_link, spec_.tool_point);
    }
    guess_ = spec_.base;
  }

  const Vector3d& center() const { return spec_.center; }

  Vector3d position(double t) const {
    const double r = 0.5 * spec_.diameter;
    const double th = spec_.phase + 2.0 * std::numbers::pi * t / spec_.period;
    return spec_.center + r * (std::cos(th) * spec_.e1 + std::sin(th) * spec_.e2);
  }

  TrajectorySample sample(double t) override {
    const double r = 0.5 * spec_.diameter;
    const double w = 2.0 * std::numbers::pi / spec_.period;
    const double th = spec_.phase + w * t;
    const Vector3d x = position(t);
    const Vector3d xd = r * w * (-std::sin(th) * spec_.e1 + std::cos(th) * spec_.e2);
    const Vector3d xdd = -r * w * w * (std::cos(th) * spec_.e1 + std::sin(th) * spec_.e2);

    VectorXd q = solve_ik(x);
    guess_ = q;
    const Eigen::Matrix3d J = reduced_jacobian(q);
    const Eigen::PartialPivLU<Eigen::Matrix3d> lu(J);
    TrajectorySample out{q, VectorXd::Zero(q.size()), VectorXd::Zero(q.size()), x};
    const Vector3d qd3 = lu.solve(xd);
    for (int k = 0; k < 3; ++k) out.qd[spec_.ik_joints[static_cast<std::size_t>(k)]] = qd3[k];
    // Jdot * qd by central difference along qd.
    const double h = 1e-6;
    const Eigen::Matrix3d Jp = reduced_jacobian(q + h * out.qd);
    const Eigen::Matrix3d Jm = reduced_jacobian(q - h * out.qd);
    const Vector3d jdot_qd = (Jp - Jm) * qd3 / (2.0 * h);
    const Vector3d qdd3 = lu.solve(xdd - jdot_qd);
    for (int k = 0; k < 3; ++k) out.qdd[spec_.ik_joints[static_cast<std::size_t>(k)]] = qdd3[k];
    return out;
  }

 private:
  Eigen::Matrix3d reduced_jacobian(const VectorXd& q) const {
    const Eigen::Matrix3Xd J = point_jacobian(*model_, forward_kinematics(*model_, q, LimitPolicy::kAllow),
                                              spec_.tool_link, spec_.tool_point);
    Eigen::Matrix3d Jr;
    for (int k = 0; k < 3; ++k) Jr.col(k) = J.col(spec_.ik_joints[static_cast<std::size_t>(k)]);
    return Jr;
  }

  VectorXd solve_ik(const Vector3d& x) const {
    VectorXd q = guess_;
    for (int it = 0; it < 50; ++it) {
      const Vector3d err = x - detail::tool_position(*model_, q, spec_.tool_link, spec_.tool_point);
      if (err.norm() < 1e-13) return q;
      const Vector3d dq = reduced_jacobian(q).partialPivLu().solve(err);
      for (int k = 0; k < 3; ++k) q[spec_.ik_joints[static_cast<std::size_t>(k)]] += dq[k];
    }
    const double err = (x - detail::tool_position(*model_, q, spec_.tool_link, spec_.tool_point)).norm();
    if (err > 1e-9) throw NumericalBlowup("circle inverse kinematics did not converge (error " + std::to_string(err) + " m)");
    return q;
  }

  const RobotModel* model_;
  CircleSpec spec_;
  VectorXd guess_;
};

}  // namespace tendonkit

#endif  // TENDONKIT_TRAJECTORY_HPP_
