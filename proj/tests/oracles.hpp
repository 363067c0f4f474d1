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

// Test-only fixtures and oracles. Nothing here calls the library's
// kinematics or dynamics: poses come from explicit Rodrigues rotations and
// homogeneous chains, energies from link twists, so agreement with the
// library is evidence rather than tautology.

#ifndef TENDONKIT_TESTS_ORACLES_HPP_
#define TENDONKIT_TESTS_ORACLES_HPP_

#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tendonkit/tendonkit.hpp"

#ifndef TENDONKIT_SOURCE_DIR
#define TENDONKIT_SOURCE_DIR "."
#endif

namespace oracle {

using Eigen::Matrix3d;
using Eigen::MatrixXd;
using Eigen::Vector3d;
using Eigen::VectorXd;
using tendonkit::RobotModel;

inline std::string source_path(const std::string& rel) { return std::string(TENDONKIT_SOURCE_DIR) + "/" + rel; }

inline double deg(double d) { return d * std::numbers::pi / 180.0; }

// ---------------------------------------------------------------------------
// Fixtures built in code.

inline tendonkit::WireRoute wrap_route(const std::string& name, int joint, double r, double sign, double offset) {
  tendonkit::WireRoute w;
  w.name = name;
  w.segments.push_back(tendonkit::CircularWrap{joint, r, sign, offset});
  return w;
}

// Point-mass bob `L` below a pin about y. Two antagonistic 20 mm wraps.
inline RobotModel pendulum(double m = 1.0, double L = 1.0, bool gravity = true) {
  RobotModel model;
  model.name = "pendulum";
  model.links.push_back({"base", 0.0, Vector3d::Zero(), Matrix3d::Zero()});
  model.links.push_back({"bob", m, Vector3d(0, 0, -L), Matrix3d::Zero()});
  tendonkit::JointSpec j;
  j.name = "pin";
  j.parent = 0;
  j.child = 1;
  j.axis = Vector3d::UnitY();
  model.joints.push_back(j);
  model.routes.push_back(wrap_route("flexor", 0, 0.02, -1.0, 0.3));
  model.routes.push_back(wrap_route("extensor", 0, 0.02, 1.0, 0.3));
  model.max_tension = 490.0;
  if (!gravity) model.gravity.setZero();
  tendonkit::validate_model(model);
  return model;
}

// Planar arm in xz: links along +z at q = 0, joints about y, point masses at
// the link tips.
inline RobotModel planar_two_link(double m1 = 1.0, double m2 = 1.0, double L1 = 1.0, double L2 = 1.0,
                                  bool gravity = false) {
  RobotModel model;
  model.name = "two_link";
  model.links.push_back({"base", 0.0, Vector3d::Zero(), Matrix3d::Zero()});
  model.links.push_back({"upper", m1, Vector3d(0, 0, L1), Matrix3d::Zero()});
  model.links.push_back({"lower", m2, Vector3d(0, 0, L2), Matrix3d::Zero()});
  tendonkit::JointSpec a;
  a.name = "j1";
  a.parent = 0;
  a.child = 1;
  a.axis = Vector3d::UnitY();
  tendonkit::JointSpec b = a;
  b.name = "j2";
  b.parent = 1;
  b.child = 2;
  b.origin_xyz = Vector3d(0, 0, L1);
  model.joints = {a, b};
  model.routes.push_back(wrap_route("a", 0, 0.03, 1.0, 0.3));
  model.routes.push_back(wrap_route("b", 0, 0.03, -1.0, 0.3));
  model.routes.push_back(wrap_route("c", 1, 0.02, 1.0, 0.3));
  model.routes.push_back(wrap_route("d", 1, 0.02, -1.0, 0.3));
  if (!gravity) model.gravity.setZero();
  tendonkit::validate_model(model);
  return model;
}

inline Vector3d random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vector3d v;
  do {
    v = Vector3d(n(rng), n(rng), n(rng));
  } while (v.norm() < 1e-3);
  return v.normalized();
}

// Serial chain with random axes, offsets, masses and full inertia tensors.
// Routes: one wrap per joint plus straight spans from the base and from
// intermediate links to later links, so spans cross several joints.
inline RobotModel random_chain(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> pos(0.2, 1.5);
  RobotModel model;
  model.name = "random" + std::to_string(seed);
  model.links.push_back({"base", 0.0, Vector3d::Zero(), Matrix3d::Zero()});
  for (int k = 1; k <= n; ++k) {
    tendonkit::LinkSpec l;
    l.name = "l" + std::to_string(k);
    l.mass = pos(rng);
    l.center_of_mass = Vector3d(0.05 * u(rng), 0.05 * u(rng), 0.1 + 0.1 * pos(rng));
    // Principal moments satisfying the triangle inequality, random orientation.
    const Vector3d pm(0.002 + 0.01 * pos(rng), 0.002 + 0.01 * pos(rng), 0.002 + 0.01 * pos(rng));
    const Vector3d d(pm[1] + pm[2], pm[0] + pm[2], pm[0] + pm[1]);  // from a mass-distribution form
    const Matrix3d Q = Eigen::AngleAxisd(std::numbers::pi * u(rng), random_unit(rng)).toRotationMatrix();
    l.inertia = Q * d.asDiagonal() * Q.transpose();
    l.inertia = 0.5 * (l.inertia + l.inertia.transpose());
    model.links.push_back(l);
    tendonkit::JointSpec j;
    j.name = "j" + std::to_string(k);
    j.parent = k - 1;
    j.child = k;
    j.axis = random_unit(rng);
    j.origin_xyz = k == 1 ? Vector3d(0.02 * u(rng), 0.02 * u(rng), 0.05) : Vector3d(0.05 * u(rng), 0.05 * u(rng), 0.3);
    j.origin_rpy = Vector3d(0.5 * u(rng), 0.5 * u(rng), 0.5 * u(rng));
    model.joints.push_back(j);
  }
  for (int k = 0; k < n; ++k) {
    model.routes.push_back(wrap_route("wrap" + std::to_string(k), k, 0.02 + 0.01 * pos(rng), k % 2 ? 1.0 : -1.0, 0.4));
  }
  auto anchor = [&] { return Vector3d(0.06 * u(rng), 0.06 * u(rng), 0.02 + 0.15 * pos(rng)); };
  int idx = 0;
  for (int from = 0; from < n; ++from) {
    for (int to = from + 1; to <= n; ++to) {
      tendonkit::WireRoute w;
      w.name = "span" + std::to_string(idx++);
      w.segments.push_back(tendonkit::LinearSpan{from, anchor(), to, anchor()});
      model.routes.push_back(w);
    }
  }
  tendonkit::validate_model(model);
  return model;
}

inline VectorXd random_q(const RobotModel& m, std::mt19937_64& rng, double span = 1.5) {
  std::uniform_real_distribution<double> u(-span, span);
  VectorXd q(m.dof());
  for (int j = 0; j < m.dof(); ++j) {
    const auto& js = m.joints[static_cast<std::size_t>(j)];
    q[j] = std::clamp(u(rng), js.lower, js.upper);
  }
  return q;
}

// ---------------------------------------------------------------------------
// Independent kinematics: explicit Rodrigues matrices and a homogeneous chain.

inline Matrix3d rodrigues(const Vector3d& k, double a) {
  Matrix3d K;
  K << 0, -k.z(), k.y(), k.z(), 0, -k.x(), -k.y(), k.x(), 0;
  return Matrix3d::Identity() + std::sin(a) * K + (1.0 - std::cos(a)) * K * K;
}

inline Matrix3d rpy(const Vector3d& r) {
  return rodrigues(Vector3d::UnitZ(), r.z()) * rodrigues(Vector3d::UnitY(), r.y()) *
         rodrigues(Vector3d::UnitX(), r.x());
}

struct Chain {
  std::vector<Matrix3d> R;  // per link
  std::vector<Vector3d> p;
  std::vector<Vector3d> axis;    // per joint, world
  std::vector<Vector3d> origin;  // per joint, world
  std::vector<std::vector<int>> ancestors;  // joints on the path to each link

  Vector3d point(int link, const Vector3d& x) const {
    return R[static_cast<std::size_t>(link)] * x + p[static_cast<std::size_t>(link)];
  }
};

inline Chain chain(const RobotModel& m, const VectorXd& q) {
  Chain c;
  const auto nl = static_cast<std::size_t>(m.num_links());
  c.R.assign(nl, Matrix3d::Identity());
  c.p.assign(nl, Vector3d::Zero());
  c.axis.resize(static_cast<std::size_t>(m.dof()));
  c.origin.resize(static_cast<std::size_t>(m.dof()));
  c.ancestors.assign(nl, {});
  for (int j = 0; j < m.dof(); ++j) {
    const auto& js = m.joints[static_cast<std::size_t>(j)];
    const auto pa = static_cast<std::size_t>(js.parent), ch = static_cast<std::size_t>(js.child);
    // Axis is given in the parent frame; the fixed rpy follows the joint turn.
    const Vector3d o = c.R[pa] * js.origin_xyz + c.p[pa];
    c.R[ch] = c.R[pa] * rodrigues(js.axis, q[j]) * rpy(js.origin_rpy);
    c.p[ch] = o;
    c.axis[static_cast<std::size_t>(j)] = c.R[pa] * js.axis;
    c.origin[static_cast<std::size_t>(j)] = o;
    c.ancestors[ch] = c.ancestors[pa];
    c.ancestors[ch].push_back(j);
  }
  return c;
}

// Wire lengths from the independent chain.
inline VectorXd wire_lengths(const RobotModel& m, const VectorXd& q) {
  const Chain c = chain(m, q);
  VectorXd l = VectorXd::Zero(m.num_routes());
  for (int i = 0; i < m.num_routes(); ++i) {
    for (const auto& seg : m.routes[static_cast<std::size_t>(i)].segments) {
      if (const auto* s = std::get_if<tendonkit::LinearSpan>(&seg)) {
        l[i] += (c.point(s->to_link, s->to_point) - c.point(s->from_link, s->from_point)).norm();
      } else {
        const auto& w = std::get<tendonkit::CircularWrap>(seg);
        l[i] += w.arc_offset + w.sign * w.radius * q[w.joint];
      }
    }
  }
  return l;
}

// Central differences of the independent wire lengths.
inline MatrixXd jacobian_fd(const RobotModel& m, const VectorXd& q, double eps = 1e-6) {
  MatrixXd G(m.num_routes(), m.dof());
  for (int j = 0; j < m.dof(); ++j) {
    VectorXd a = q, b = q;
    a[j] += eps;
    b[j] -= eps;
    G.col(j) = (wire_lengths(m, a) - wire_lengths(m, b)) / (2.0 * eps);
  }
  return G;
}

inline double max_rel_error(const MatrixXd& a, const MatrixXd& ref) {
  const double scale = std::max(ref.cwiseAbs().maxCoeff(), 1e-12);
  return (a - ref).cwiseAbs().maxCoeff() / scale;
}

// 2 x kinetic energy from link twists: sum m |v_c|^2 + w^T I_world w.
inline double twice_kinetic_energy(const RobotModel& m, const VectorXd& q, const VectorXd& qd) {
  const Chain c = chain(m, q);
  double e = 0.0;
  for (int k = 1; k < m.num_links(); ++k) {
    const auto& l = m.links[static_cast<std::size_t>(k)];
    const Vector3d com = c.point(k, l.center_of_mass);
    Vector3d w = Vector3d::Zero(), v = Vector3d::Zero();
    for (int j : c.ancestors[static_cast<std::size_t>(k)]) {
      const Vector3d a = c.axis[static_cast<std::size_t>(j)];
      w += a * qd[j];
      v += a.cross(com - c.origin[static_cast<std::size_t>(j)]) * qd[j];
    }
    const Matrix3d Rk = c.R[static_cast<std::size_t>(k)];
    e += l.mass * v.squaredNorm() + w.dot(Rk * l.inertia * Rk.transpose() * w);
  }
  return e;
}

inline double potential_energy(const RobotModel& m, const VectorXd& q) {
  const Chain c = chain(m, q);
  double V = 0.0;
  for (int k = 1; k < m.num_links(); ++k) {
    const auto& l = m.links[static_cast<std::size_t>(k)];
    V -= l.mass * m.gravity.dot(c.point(k, l.center_of_mass));
  }
  return V;
}

// Gravity torque as the gradient of potential energy.
inline VectorXd gravity_fd(const RobotModel& m, const VectorXd& q, double eps = 1e-6) {
  VectorXd g(m.dof());
  for (int j = 0; j < m.dof(); ++j) {
    VectorXd a = q, b = q;
    a[j] += eps;
    b[j] -= eps;
    g[j] = (potential_energy(m, a) - potential_energy(m, b)) / (2.0 * eps);
  }
  return g;
}

// Joint inertia from the energy oracle by polarisation: M_ij from
// 2T(e_i + e_j), 2T(e_i), 2T(e_j).
inline MatrixXd inertia_from_energy(const RobotModel& m, const VectorXd& q) {
  const int n = m.dof();
  MatrixXd M(n, n);
  for (int i = 0; i < n; ++i) {
    const VectorXd ei = VectorXd::Unit(n, i);
    M(i, i) = twice_kinetic_energy(m, q, ei);
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double t = twice_kinetic_energy(m, q, VectorXd::Unit(n, i) + VectorXd::Unit(n, j));
      M(i, j) = M(j, i) = 0.5 * (t - M(i, i) - M(j, j));
    }
  }
  return M;
}

// Coriolis/centrifugal vector  Mdot qd - 1/2 d(qd^T M qd)/dq  with M from the
// energy oracle and both derivatives by central differences.
inline VectorXd bias_fd(const RobotModel& m, const VectorXd& q, const VectorXd& qd, double eps = 1e-5) {
  const int n = m.dof();
  MatrixXd Mdot = MatrixXd::Zero(n, n);
  VectorXd dT(n);
  for (int j = 0; j < n; ++j) {
    VectorXd a = q, b = q;
    a[j] += eps;
    b[j] -= eps;
    const MatrixXd Ma = inertia_from_energy(m, a), Mb = inertia_from_energy(m, b);
    Mdot += (Ma - Mb) / (2.0 * eps) * qd[j];
    dT[j] = (qd.dot(Ma * qd) - qd.dot(Mb * qd)) / (2.0 * eps);
  }
  return Mdot * qd - 0.5 * dT;
}

// ---------------------------------------------------------------------------
// Planar two-link closed forms (point masses at the tips, xz-plane, about y).

inline Eigen::Matrix2d two_link_M(double m1, double m2, double L1, double L2, double q2) {
  const double c2 = std::cos(q2);
  Eigen::Matrix2d M;
  M(0, 0) = m1 * L1 * L1 + m2 * (L1 * L1 + L2 * L2 + 2.0 * L1 * L2 * c2);
  M(0, 1) = M(1, 0) = m2 * (L2 * L2 + L1 * L2 * c2);
  M(1, 1) = m2 * L2 * L2;
  return M;
}

// Rotation about +y carries +z into (sin, 0, cos); rows are x and z.
inline Eigen::Matrix2d two_link_J(double L1, double L2, double q1, double q2) {
  Eigen::Matrix2d J;
  J(0, 0) = L1 * std::cos(q1) + L2 * std::cos(q1 + q2);
  J(0, 1) = L2 * std::cos(q1 + q2);
  J(1, 0) = -L1 * std::sin(q1) - L2 * std::sin(q1 + q2);
  J(1, 1) = -L2 * std::sin(q1 + q2);
  return J;
}

// Unit impulse along u at the tip from rest: dqd = M^-1 J^T u, dv = J dqd;
// the apparent mass along u is 1 / (u . dv).
inline double two_link_impulse_mass(double m1, double m2, double L1, double L2, double q1, double q2,
                                    const Eigen::Vector2d& u_xz) {
  const Eigen::Matrix2d M = two_link_M(m1, m2, L1, L2, q2);
  const Eigen::Matrix2d J = two_link_J(L1, L2, q1, q2);
  const Eigen::Vector2d dqd = M.inverse() * (J.transpose() * u_xz);
  return 1.0 / u_xz.dot(J * dqd);
}

// ---------------------------------------------------------------------------
// Tension QP brute force and closed forms.

// Objective |f|^2 + r^T Lambda r with r = tau + G^T f, written out directly.
inline double qp_objective(const MatrixXd& G, const VectorXd& tau, const MatrixXd& Lambda, const VectorXd& f) {
  VectorXd r = tau;
  for (int j = 0; j < G.cols(); ++j) {
    for (int i = 0; i < G.rows(); ++i) r[j] += G(i, j) * f[i];
  }
  return f.squaredNorm() + r.dot(Lambda * r);
}

struct GridResult {
  double best = std::numeric_limits<double>::infinity();
  VectorXd argmin;
};

// Exhaustive search over every point f_min + k h inside the box (R <= 3).
inline GridResult grid_search(const MatrixXd& G, const VectorXd& tau, const MatrixXd& Lambda, const VectorXd& lo,
                              const VectorXd& hi, double h) {
  const int R = static_cast<int>(G.rows());
  // Expand the quadratic once: f^T A f + b^T f + c.
  const MatrixXd A = MatrixXd::Identity(R, R) + G * Lambda * G.transpose();
  const VectorXd b = 2.0 * G * (Lambda * tau);
  const double c = tau.dot(Lambda * tau);
  std::vector<long> count(static_cast<std::size_t>(R));
  for (int i = 0; i < R; ++i) count[static_cast<std::size_t>(i)] = static_cast<long>(std::floor((hi[i] - lo[i]) / h + 1e-9)) + 1;
  GridResult out;
  VectorXd f(R);
  std::vector<long> idx(static_cast<std::size_t>(R), 0);
  while (true) {
    for (int i = 0; i < R; ++i) f[i] = lo[i] + h * static_cast<double>(idx[static_cast<std::size_t>(i)]);
    const double v = f.dot(A * f) + b.dot(f) + c;
    if (v < out.best) {
      out.best = v;
      out.argmin = f;
    }
    int k = R - 1;
    while (k >= 0 && ++idx[static_cast<std::size_t>(k)] == count[static_cast<std::size_t>(k)]) {
      idx[static_cast<std::size_t>(k)] = 0;
      --k;
    }
    if (k < 0) break;
  }
  return out;
}

// Static balance: joint torque demanded to hold still, computed from the
// potential energy oracle. -G^T f must equal this for a hold.
inline VectorXd hold_torque(const RobotModel& m, const VectorXd& q) { return gravity_fd(m, q); }

// Reduced-mass contact force written out from the two-body impact formula.
inline double contact_force(double m_u, double M_H, double K_H, double v) {
  if (std::isinf(m_u)) return std::sqrt(M_H * K_H) * v;
  return std::sqrt(m_u * M_H / (m_u + M_H) * K_H) * v;
}

}  // namespace oracle

#endif  // TENDONKIT_TESTS_ORACLES_HPP_
