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

// Joint-space rigid-body dynamics
//
//   M(q) qdd + h(q, qd) + g(q) = tau + sum_k J_k^T F_k
//
// M comes from the composite-rigid-body algorithm, h and g from recursive
// Newton-Euler. Both run on 6D spatial quantities expressed in the world frame
// about the world origin (angular part first), so no per-link frame changes
// are needed: the motion subspace of joint j is S_j = [z_j; o_j x z_j].

#ifndef TENDONKIT_DYNAMICS_HPP_
#define TENDONKIT_DYNAMICS_HPP_

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "tendonkit/errors.hpp"
#include "tendonkit/kinematics.hpp"
#include "tendonkit/model.hpp"

namespace tendonkit {

using Vector6d = Eigen::Matrix<double, 6, 1>;
using Matrix6d = Eigen::Matrix<double, 6, 6>;

struct DynamicsTerms {
  MatrixXd M;
  VectorXd h;
  VectorXd g;
};

// External force applied at a point fixed in a link.
struct PointForce {
  int link = 0;
  Vector3d point = Vector3d::Zero();  // link frame
  Vector3d force = Vector3d::Zero();  // world frame, N
};

inline Matrix3d skew(const Vector3d& v) {
  Matrix3d S;
  S << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return S;
}

namespace detail {

// Spatial inertia of one link about the world origin.
inline Matrix6d spatial_inertia(const LinkSpec& link, const Pose& pose) {
  Matrix6d I = Matrix6d::Zero();
  if (link.mass == 0.0 && link.inertia.isZero(0.0)) return I;
  const Vector3d c = pose.apply(link.center_of_mass);
  const Matrix3d Ic = pose.R * link.inertia * pose.R.transpose();
  const Matrix3d C = skew(c);
  I.topLeftCorner<3, 3>() = Ic - link.mass * C * C;
  I.topRightCorner<3, 3>() = link.mass * C;
  I.bottomLeftCorner<3, 3>() = -link.mass * C;
  I.bottomRightCorner<3, 3>() = link.mass * Matrix3d::Identity();
  return I;
}

inline Vector6d motion_subspace(const Frames& fr, int j) {
  Vector6d S;
  const Vector3d& z = fr.axis[static_cast<std::size_t>(j)];
  S << z, fr.origin[static_cast<std::size_t>(j)].cross(z);
  return S;
}

// v x m  (motion cross product)
inline Vector6d cross_motion(const Vector6d& v, const Vector6d& m) {
  Vector6d out;
  const Vector3d w = v.head<3>(), vo = v.tail<3>();
  out << w.cross(m.head<3>()), w.cross(m.tail<3>()) + vo.cross(m.head<3>());
  return out;
}

// v x* f  (force cross product)
inline Vector6d cross_force(const Vector6d& v, const Vector6d& f) {
  Vector6d out;
  const Vector3d w = v.head<3>(), vo = v.tail<3>();
  out << w.cross(f.head<3>()) + vo.cross(f.tail<3>()), w.cross(f.tail<3>());
  return out;
}

}  // namespace detail

inline MatrixXd inertia_matrix(const RobotModel& model, const Frames& fr) {
  const int n = model.dof();
  const int nl = model.num_links();
  std::vector<Matrix6d> Ic(static_cast<std::size_t>(nl));
  for (int k = 0; k < nl; ++k) {
    Ic[static_cast<std::size_t>(k)] =
        detail::spatial_inertia(model.links[static_cast<std::size_t>(k)], fr.link[static_cast<std::size_t>(k)]);
  }
  // Links are topologically ordered, so a reverse sweep accumulates subtrees.
  for (int k = nl - 1; k >= 1; --k) {
    int parent = model.joints[static_cast<std::size_t>(model.link_parent_joint()[static_cast<std::size_t>(k)])].parent;
    Ic[static_cast<std::size_t>(parent)] += Ic[static_cast<std::size_t>(k)];
  }
  std::vector<Vector6d> S(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) S[static_cast<std::size_t>(j)] = detail::motion_subspace(fr, j);
  MatrixXd M = MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const int ci = model.joints[static_cast<std::size_t>(i)].child;
    const Vector6d F = Ic[static_cast<std::size_t>(ci)] * S[static_cast<std::size_t>(i)];
    M(i, i) = S[static_cast<std::size_t>(i)].dot(F);
    for (int j = 0; j < n; ++j) {
      if (j != i && model.is_ancestor_joint(j, ci)) {
        M(j, i) = S[static_cast<std::size_t>(j)].dot(F);
        M(i, j) = M(j, i);
      }
    }
  }
  return M;
}

inline MatrixXd inertia_matrix(const RobotModel& model, const Eigen::Ref<const VectorXd>& q,
                               LimitPolicy policy = LimitPolicy::kEnforce) {
  return inertia_matrix(model, forward_kinematics(model, q, policy));
}

// Recursive Newton-Euler: tau = M qdd + h + (with_gravity ? g : 0).
inline VectorXd inverse_dynamics(const RobotModel& model, const Frames& fr,
                                 const Eigen::Ref<const VectorXd>& qd,
                                 const Eigen::Ref<const VectorXd>& qdd, bool with_gravity) {
  const int n = model.dof();
  const int nl = model.num_links();
  require_size(qd.size(), n, "qdot");
  require_size(qdd.size(), n, "qddot");
  std::vector<Vector6d> v(static_cast<std::size_t>(nl), Vector6d::Zero());
  std::vector<Vector6d> a(static_cast<std::size_t>(nl), Vector6d::Zero());
  std::vector<Vector6d> f(static_cast<std::size_t>(nl), Vector6d::Zero());
  if (with_gravity) a[0].tail<3>() = -model.gravity;
  for (int k = 1; k < nl; ++k) {
    const int j = model.link_parent_joint()[static_cast<std::size_t>(k)];
    const int p = model.joints[static_cast<std::size_t>(j)].parent;
    const Vector6d S = detail::motion_subspace(fr, j);
    v[static_cast<std::size_t>(k)] = v[static_cast<std::size_t>(p)] + S * qd[j];
    a[static_cast<std::size_t>(k)] = a[static_cast<std::size_t>(p)] + S * qdd[j] +
                                     detail::cross_motion(v[static_cast<std::size_t>(k)], S * qd[j]);
    const Matrix6d I = detail::spatial_inertia(model.links[static_cast<std::size_t>(k)],
                                               fr.link[static_cast<std::size_t>(k)]);
    f[static_cast<std::size_t>(k)] = I * a[static_cast<std::size_t>(k)] +
                                     detail::cross_force(v[static_cast<std::size_t>(k)], I * v[static_cast<std::size_t>(k)]);
  }
  VectorXd tau(n);
  for (int k = nl - 1; k >= 1; --k) {
    const int j = model.link_parent_joint()[static_cast<std::size_t>(k)];
    const int p = model.joints[static_cast<std::size_t>(j)].parent;
    tau[j] = detail::motion_subspace(fr, j).dot(f[static_cast<std::size_t>(k)]);
    f[static_cast<std::size_t>(p)] += f[static_cast<std::size_t>(k)];
  }
  return tau;
}

inline VectorXd bias_forces(const RobotModel& model, const Frames& fr,
                            const Eigen::Ref<const VectorXd>& qd) {
  require_size(qd.size(), model.dof(), "qdot");
  if (qd.isZero(0.0)) return VectorXd::Zero(model.dof());
  return inverse_dynamics(model, fr, qd, VectorXd::Zero(model.dof()), false);
}

inline VectorXd bias_forces(const RobotModel& model, const Eigen::Ref<const VectorXd>& q,
                            const Eigen::Ref<const VectorXd>& qd,
                            LimitPolicy policy = LimitPolicy::kEnforce) {
  return bias_forces(model, forward_kinematics(model, q, policy), qd);
}

inline VectorXd gravity_vector(const RobotModel& model, const Frames& fr) {
  const VectorXd zero = VectorXd::Zero(model.dof());
  return inverse_dynamics(model, fr, zero, zero, true);
}

inline VectorXd gravity_vector(const RobotModel& model, const Eigen::Ref<const VectorXd>& q,
                               LimitPolicy policy = LimitPolicy::kEnforce) {
  return gravity_vector(model, forward_kinematics(model, q, policy));
}

inline DynamicsTerms dynamics_terms(const RobotModel& model, const Frames& fr,
                                    const Eigen::Ref<const VectorXd>& qd) {
  return DynamicsTerms{inertia_matrix(model, fr), bias_forces(model, fr, qd), gravity_vector(model, fr)};
}

inline double potential_energy(const RobotModel& model, const Frames& fr) {
  double V = 0.0;
  for (int k = 1; k < model.num_links(); ++k) {
    const LinkSpec& l = model.links[static_cast<std::size_t>(k)];
    V -= l.mass * model.gravity.dot(fr.link[static_cast<std::size_t>(k)].apply(l.center_of_mass));
  }
  return V;
}

// Reflected rotor inertia  G^T diag(J_rotor / r_pulley^2) G.
inline MatrixXd reflected_rotor_inertia(const RobotModel& model, const Eigen::Ref<const MatrixXd>& G) {
  VectorXd w(model.num_routes());
  for (int i = 0; i < model.num_routes(); ++i) {
    const MotorSpec& m = model.routes[static_cast<std::size_t>(i)].motor;
    w[i] = m.rotor_inertia / (m.pulley_radius * m.pulley_radius);
  }
  return G.transpose() * w.asDiagonal() * G;
}

inline VectorXd external_torque(const RobotModel& model, const Frames& fr,
                                const std::vector<PointForce>& forces) {
  VectorXd tau = VectorXd::Zero(model.dof());
  for (const PointForce& pf : forces) {
    tau += point_jacobian(model, fr, pf.link, pf.point).transpose() * pf.force;
  }
  return tau;
}

constexpr double kMinInertiaRcond = 1e-12;

inline Eigen::LDLT<MatrixXd> factor_inertia(const MatrixXd& M) {
  Eigen::LDLT<MatrixXd> ldlt(M);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || !(ldlt.rcond() >= kMinInertiaRcond)) {
    throw SingularInertia("inertia matrix is singular or ill-conditioned (rcond " +
                          std::to_string(ldlt.rcond()) + ")");
  }
  return ldlt;
}

inline VectorXd forward_dynamics(const RobotModel& model, const Frames& fr,
                                 const Eigen::Ref<const VectorXd>& qd,
                                 const Eigen::Ref<const VectorXd>& tau,
                                 const std::vector<PointForce>& forces = {}) {
  require_size(tau.size(), model.dof(), "tau");
  const MatrixXd M = inertia_matrix(model, fr);
  VectorXd rhs = tau - bias_forces(model, fr, qd) - gravity_vector(model, fr);
  if (!forces.empty()) rhs += external_torque(model, fr, forces);
  return factor_inertia(M).solve(rhs);
}

inline VectorXd forward_dynamics(const RobotModel& model, const Eigen::Ref<const VectorXd>& q,
                                 const Eigen::Ref<const VectorXd>& qd,
                                 const Eigen::Ref<const VectorXd>& tau,
                                 const std::vector<PointForce>& forces = {},
                                 LimitPolicy policy = LimitPolicy::kEnforce) {
  return forward_dynamics(model, forward_kinematics(model, q, policy), qd, tau, forces);
}

// Merges a point mass rigidly fixed at `point` into a link's inertial data.
inline void attach_point_mass(LinkSpec& link, const Vector3d& point, double mass) {
  if (!(mass >= 0.0)) throw InvalidArgument("attached mass must be >= 0");
  const double m0 = link.mass;
  const double m = m0 + mass;
  if (m == 0.0) return;
  const Vector3d c = (m0 * link.center_of_mass + mass * point) / m;
  auto shift = [](double mass_i, const Vector3d& d) {
    return mass_i * (d.squaredNorm() * Matrix3d::Identity() - d * d.transpose());
  };
  link.inertia = link.inertia + shift(m0, link.center_of_mass - c) + shift(mass, point - c);
  link.center_of_mass = c;
  link.mass = m;
}

// ---------------------------------------------------------------------------
// Operational-space effective mass.

struct EffectiveMassOptions {
  bool include_rotor_inertia = false;
};

namespace detail {

inline MatrixXd joint_inertia_for_effmass(const RobotModel& model, const Frames& fr,
                                          const EffectiveMassOptions& opt) {
  MatrixXd M = inertia_matrix(model, fr);
  if (opt.include_rotor_inertia) M += reflected_rotor_inertia(model, muscle_jacobian(model, fr));
  return M;
}

}  // namespace detail

// A = J M^-1 J^T, the inverse operational inertia of a point. Defined at every
// configuration, including singular ones.
inline Matrix3d mobility_matrix(const RobotModel& model, const Frames& fr, int link,
                                const Vector3d& point, const EffectiveMassOptions& opt = {}) {
  const Eigen::Matrix3Xd J = point_jacobian(model, fr, link, point);
  const MatrixXd Minv_Jt = factor_inertia(detail::joint_inertia_for_effmass(model, fr, opt)).solve(J.transpose());
  Matrix3d A = J * Minv_Jt;
  return 0.5 * (A + A.transpose());
}

inline Matrix3d operational_inertia(const RobotModel& model, const Frames& fr, int link,
                                    const Vector3d& point, const EffectiveMassOptions& opt = {}) {
  const Eigen::Matrix3Xd J = point_jacobian(model, fr, link, point);
  Eigen::JacobiSVD<MatrixXd> svd(J);
  const auto& s = svd.singularValues();
  if (s.size() < 3 || s[0] == 0.0 || s[2] < 1e-9 * s[0]) {
    throw SingularConfiguration("point Jacobian has rank < 3; operational inertia undefined");
  }
  Matrix3d L = mobility_matrix(model, fr, link, point, opt).inverse();
  return 0.5 * (L + L.transpose());
}

inline Matrix3d operational_inertia(const RobotModel& model, const Eigen::Ref<const VectorXd>& q,
                                    int link, const Vector3d& point,
                                    const EffectiveMassOptions& opt = {},
                                    LimitPolicy policy = LimitPolicy::kEnforce) {
  return operational_inertia(model, forward_kinematics(model, q, policy), link, point, opt);
}

struct EffectiveMass {
  double value = 0.0;  // kg, +inf when the point cannot move along u
  bool constrained_direction = false;
};

// Below this fraction of the largest mobility the direction counts as
// immobile.
constexpr double kConstrainedDirectionTol = 1e-12;

inline EffectiveMass effective_mass(const RobotModel& model, const Frames& fr, int link,
                                    const Vector3d& point, const Vector3d& u,
                                    const EffectiveMassOptions& opt = {}) {
  if (std::abs(u.norm() - 1.0) > 1e-9) throw InvalidArgument("direction u must be a unit vector");
  const Matrix3d A = mobility_matrix(model, fr, link, point, opt);
  const double a = u.dot(A * u);
  const double scale = A.trace();
  if (!(scale > 0.0) || a <= kConstrainedDirectionTol * scale) {
    return EffectiveMass{std::numeric_limits<double>::infinity(), true};
  }
  return EffectiveMass{1.0 / a, false};
}

inline EffectiveMass effective_mass(const RobotModel& model, const Eigen::Ref<const VectorXd>& q,
                                    int link, const Vector3d& point, const Vector3d& u,
                                    const EffectiveMassOptions& opt = {},
                                    LimitPolicy policy = LimitPolicy::kEnforce) {
  return effective_mass(model, forward_kinematics(model, q, policy), link, point, u, opt);
}

// Maximum reduced-mass contact force for a collision with a human body part.
inline double max_contact_force(const SafetyParams& s, double m_u) {
  validate(s);
  if (!(m_u > 0.0)) throw InvalidArgument("effective mass must be > 0");
  // M_H / (1 + M_H / m_u) == m_u M_H / (m_u + M_H), finite as m_u -> inf.
  const double reduced = s.human_mass / (1.0 + s.human_mass / m_u);
  return std::sqrt(reduced) * std::sqrt(s.contact_stiffness) * s.relative_speed;
}

}  // namespace tendonkit

#endif  // TENDONKIT_DYNAMICS_HPP_
