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

// Forward kinematics, point Jacobians, wire lengths l(q) and the muscle
// Jacobian G = dl/dq. Tension f >= 0 maps to joint torque as tau = -G^T f, so a
// wire that flexes joint j has G(i, j) < 0.

#ifndef TENDONKIT_KINEMATICS_HPP_
#define TENDONKIT_KINEMATICS_HPP_

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tendonkit/errors.hpp"
#include "tendonkit/model.hpp"

namespace tendonkit {

enum class LimitPolicy { kEnforce, kAllow };

struct Pose {
  Matrix3d R = Matrix3d::Identity();
  Vector3d p = Vector3d::Zero();

  Vector3d apply(const Vector3d& x) const { return R * x + p; }
};

// World-frame link poses plus per-joint world axis and origin.
struct Frames {
  std::vector<Pose> link;
  std::vector<Vector3d> axis;    // world axis of joint j
  std::vector<Vector3d> origin;  // world origin of joint j (= child link origin)
};

inline Matrix3d axis_rotation(const Vector3d& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis).toRotationMatrix();
}

inline void check_joint_vector(const RobotModel& model, const Eigen::Ref<const VectorXd>& q,
                               LimitPolicy policy, const char* what = "q") {
  require_size(q.size(), model.dof(), what);
  if (!q.allFinite()) throw InvalidArgument(std::string(what) + " must be finite");
  if (policy == LimitPolicy::kEnforce) {
    for (int j = 0; j < model.dof(); ++j) {
      const JointSpec& js = model.joints[static_cast<std::size_t>(j)];
      if (q[j] < js.lower - 1e-9 || q[j] > js.upper + 1e-9) {
        throw JointLimitViolation("joint '" + js.name + "' at " + std::to_string(q[j]) +
                                  " rad is outside [" + std::to_string(js.lower) + ", " +
                                  std::to_string(js.upper) + "]");
      }
    }
  }
}

inline Frames forward_kinematics(const RobotModel& model, const Eigen::Ref<const VectorXd>& q,
                                 LimitPolicy policy = LimitPolicy::kEnforce) {
  check_joint_vector(model, q, policy);
  Frames fr;
  fr.link.resize(static_cast<std::size_t>(model.num_links()));
  fr.axis.resize(static_cast<std::size_t>(model.dof()));
  fr.origin.resize(static_cast<std::size_t>(model.dof()));
  for (int j = 0; j < model.dof(); ++j) {
    const JointSpec& js = model.joints[static_cast<std::size_t>(j)];
    const Pose& parent = fr.link[static_cast<std::size_t>(js.parent)];
    Pose& child = fr.link[static_cast<std::size_t>(js.child)];
    child.R = parent.R * axis_rotation(js.axis, q[j]) * rotation_rpy(js.origin_rpy);
    child.p = parent.p + parent.R * js.origin_xyz;
    fr.axis[static_cast<std::size_t>(j)] = parent.R * js.axis;
    fr.origin[static_cast<std::size_t>(j)] = child.p;
  }
  return fr;
}

inline void check_link(const RobotModel& model, int link) {
  if (link < 0 || link >= model.num_links()) {
    throw UnknownLink("link index " + std::to_string(link) + " does not exist");
  }
}

// 3 x N translational Jacobian of a point fixed in `link`.
inline Eigen::Matrix3Xd point_jacobian(const RobotModel& model, const Frames& fr, int link,
                                       const Vector3d& point_in_link) {
  check_link(model, link);
  const Vector3d p = fr.link[static_cast<std::size_t>(link)].apply(point_in_link);
  Eigen::Matrix3Xd J = Eigen::Matrix3Xd::Zero(3, model.dof());
  for (int j = 0; j < model.dof(); ++j) {
    if (model.is_ancestor_joint(j, link)) {
      J.col(j) = fr.axis[static_cast<std::size_t>(j)].cross(p - fr.origin[static_cast<std::size_t>(j)]);
    }
  }
  return J;
}

inline Eigen::Matrix3Xd point_jacobian(const RobotModel& model, const Eigen::Ref<const VectorXd>& q,
                                       int link, const Vector3d& point_in_link,
                                       LimitPolicy policy = LimitPolicy::kEnforce) {
  check_link(model, link);
  return point_jacobian(model, forward_kinematics(model, q, policy), link, point_in_link);
}

// 3 x N rotational Jacobian of `link`.
inline Eigen::Matrix3Xd angular_jacobian(const RobotModel& model, const Frames& fr, int link) {
  Eigen::Matrix3Xd J = Eigen::Matrix3Xd::Zero(3, model.dof());
  for (int j = 0; j < model.dof(); ++j) {
    if (model.is_ancestor_joint(j, link)) J.col(j) = fr.axis[static_cast<std::size_t>(j)];
  }
  return J;
}

namespace detail {

constexpr double kDegenerateSpan = 1e-9;

inline double span_length(const RobotModel& model, const Frames& fr, const WireRoute& r,
                          const LinearSpan& ls, Vector3d* a_out = nullptr,
                          Vector3d* b_out = nullptr) {
  Vector3d a = fr.link[static_cast<std::size_t>(ls.from_link)].apply(ls.from_point);
  Vector3d b = fr.link[static_cast<std::size_t>(ls.to_link)].apply(ls.to_point);
  double d = (b - a).norm();
  if (d < kDegenerateSpan) {
    throw DegenerateSpan("route '" + r.name + "': linear span anchors coincide (" +
                         std::to_string(d) + " m)");
  }
  (void)model;
  if (a_out) *a_out = a;
  if (b_out) *b_out = b;
  return d;
}

}  // namespace detail

inline VectorXd wire_lengths(const RobotModel& model, const Frames& fr,
                             const Eigen::Ref<const VectorXd>& q) {
  VectorXd l(model.num_routes());
  for (int i = 0; i < model.num_routes(); ++i) {
    const WireRoute& r = model.routes[static_cast<std::size_t>(i)];
    double li = 0.0;
    for (const Segment& seg : r.segments) {
      if (const auto* ls = std::get_if<LinearSpan>(&seg)) {
        li += detail::span_length(model, fr, r, *ls);
      } else {
        const auto& cw = std::get<CircularWrap>(seg);
        li += cw.arc_offset + cw.sign * cw.radius * q[cw.joint];
      }
    }
    l[i] = li;
  }
  return l;
}

inline VectorXd wire_lengths(const RobotModel& model, const Eigen::Ref<const VectorXd>& q,
                             LimitPolicy policy = LimitPolicy::kEnforce) {
  return wire_lengths(model, forward_kinematics(model, q, policy), q);
}

inline MatrixXd muscle_jacobian(const RobotModel& model, const Frames& fr) {
  MatrixXd G = MatrixXd::Zero(model.num_routes(), model.dof());
  for (int i = 0; i < model.num_routes(); ++i) {
    const WireRoute& r = model.routes[static_cast<std::size_t>(i)];
    for (const Segment& seg : r.segments) {
      if (const auto* ls = std::get_if<LinearSpan>(&seg)) {
        Vector3d a, b;
        double d = detail::span_length(model, fr, r, *ls, &a, &b);
        Vector3d u = (b - a) / d;
        // Joints above from_link move both anchors rigidly and contribute
        // exactly zero.
        for (int j = 0; j < model.dof(); ++j) {
          if (model.is_ancestor_joint(j, ls->to_link) && !model.is_ancestor_joint(j, ls->from_link)) {
            const Vector3d& z = fr.axis[static_cast<std::size_t>(j)];
            const Vector3d& o = fr.origin[static_cast<std::size_t>(j)];
            G(i, j) += u.dot(z.cross(b - o));
          }
        }
      } else {
        const auto& cw = std::get<CircularWrap>(seg);
        G(i, cw.joint) += cw.sign * cw.radius;
      }
    }
  }
  return G;
}

inline MatrixXd muscle_jacobian(const RobotModel& model, const Eigen::Ref<const VectorXd>& q,
                                LimitPolicy policy = LimitPolicy::kEnforce) {
  return muscle_jacobian(model, forward_kinematics(model, q, policy));
}

// Central-difference oracle for muscle_jacobian.
inline MatrixXd muscle_jacobian_fd(const RobotModel& model, const Eigen::Ref<const VectorXd>& q,
                                   double eps = 1e-6) {
  if (!(eps > 0.0)) throw InvalidArgument("eps must be > 0");
  check_joint_vector(model, q, LimitPolicy::kAllow);
  MatrixXd G(model.num_routes(), model.dof());
  VectorXd qp = q, qm = q;
  for (int j = 0; j < model.dof(); ++j) {
    qp[j] = q[j] + eps;
    qm[j] = q[j] - eps;
    G.col(j) = (wire_lengths(model, qp, LimitPolicy::kAllow) -
                wire_lengths(model, qm, LimitPolicy::kAllow)) /
               (2.0 * eps);
    qp[j] = q[j];
    qm[j] = q[j];
  }
  return G;
}

}  // namespace tendonkit

#endif  // TENDONKIT_KINEMATICS_HPP_
