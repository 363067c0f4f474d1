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

// Robot description: a rooted tree of links joined by revolute joints, plus
// the wire routes that actuate it.
//
// Conventions used throughout the library:
//  * link 0 is the fixed root; links are stored in topological order.
//  * joint i drives link joint_child(i); `link_parent_joint(k)` inverts this.
//  * a joint axis is expressed in its parent link frame. For joint angle q the
//    child frame is  R_c = R_p * Rot(axis, q) * Rpy(origin_rpy),
//                    p_c = p_p + R_p * origin_xyz.

#ifndef TENDONKIT_MODEL_HPP_
#define TENDONKIT_MODEL_HPP_

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "tendonkit/errors.hpp"
#include "tendonkit/text_format.hpp"

namespace tendonkit {

using Eigen::Matrix3d;
using Eigen::MatrixXd;
using Eigen::Vector3d;
using Eigen::VectorXd;

struct LinkSpec {
  std::string name;
  double mass = 0.0;
  Vector3d center_of_mass = Vector3d::Zero();
  Matrix3d inertia = Matrix3d::Zero();  // about the COM, link frame

  bool operator==(const LinkSpec&) const = default;
};

struct JointSpec {
  std::string name;
  int parent = 0;  // link index
  int child = 1;   // link index
  Vector3d axis = Vector3d::UnitZ();
  Vector3d origin_xyz = Vector3d::Zero();
  Vector3d origin_rpy = Vector3d::Zero();
  double lower = -M_PI;
  double upper = M_PI;

  bool operator==(const JointSpec&) const = default;
};

struct LinearSpan {
  int from_link = 0;
  Vector3d from_point = Vector3d::Zero();
  int to_link = 0;
  Vector3d to_point = Vector3d::Zero();

  bool operator==(const LinearSpan&) const = default;
};

struct CircularWrap {
  int joint = 0;
  double radius = 0.0;
  double sign = 1.0;
  double arc_offset = 0.0;

  bool operator==(const CircularWrap&) const = default;
};

using Segment = std::variant<LinearSpan, CircularWrap>;

struct MotorSpec {
  double pulley_radius = 0.01;    // m
  double torque_constant = 0.1;   // N·m/A
  int winding_sign = 1;
  double rotor_inertia = 0.0;     // kg·m², excluded unless asked for

  bool operator==(const MotorSpec&) const = default;
};

struct WireRoute {
  std::string name;
  std::vector<Segment> segments;
  double f_min = 5.0;
  double f_max = 490.0;
  double ea = 1.0e4;         // N per unit strain
  double free_length = 0.5;  // m, rest length used for stiffness EA/L0
  MotorSpec motor;

  bool operator==(const WireRoute&) const = default;
};

struct SafetyParams {
  double human_mass = 4.0;         // M_H, kg
  double contact_stiffness = 1.0;  // K_H, N/m
  double relative_speed = 1.0;     // m/s
};

inline void validate(const SafetyParams& s) {
  if (!(s.human_mass > 0.0)) throw ValidationError("safety.human_mass must be > 0");
  if (!(s.contact_stiffness > 0.0)) throw ValidationError("safety.contact_stiffness must be > 0");
  if (!(s.relative_speed > 0.0)) throw ValidationError("safety.relative_speed must be > 0");
}

class RobotModel {
 public:
  std::string name = "robot";
  std::vector<LinkSpec> links;
  std::vector<JointSpec> joints;
  std::vector<WireRoute> routes;
  Vector3d gravity{0.0, 0.0, -9.81};
  bool fully_actuated = false;
  double max_tension = std::numeric_limits<double>::infinity();

  int dof() const { return static_cast<int>(joints.size()); }
  int num_routes() const { return static_cast<int>(routes.size()); }
  int num_links() const { return static_cast<int>(links.size()); }

  // Derived tables. Filled by finalize(); valid after validate_model().
  const std::vector<int>& link_parent_joint() const { return link_parent_joint_; }
  // ancestor_joints()[k][j] is true when joint j lies on the path root -> k.
  const std::vector<std::vector<bool>>& ancestor_joints() const { return ancestor_joints_; }

  bool is_ancestor_joint(int joint, int link) const {
    return ancestor_joints_[static_cast<std::size_t>(link)][static_cast<std::size_t>(joint)];
  }
  // True when `a` is a strict ancestor of `b`.
  bool is_ancestor_link(int a, int b) const {
    if (a == b) return false;
    for (int k = b; k != 0;) {
      k = joints[static_cast<std::size_t>(link_parent_joint_[static_cast<std::size_t>(k)])].parent;
      if (k == a) return true;
    }
    return false;
  }

  int link_index(const std::string& link_name) const {
    for (int i = 0; i < num_links(); ++i) {
      if (links[static_cast<std::size_t>(i)].name == link_name) return i;
    }
    throw UnknownLink("no link named '" + link_name + "'");
  }
  int joint_index(const std::string& joint_name) const {
    for (int i = 0; i < dof(); ++i) {
      if (joints[static_cast<std::size_t>(i)].name == joint_name) return i;
    }
    throw UnknownLink("no joint named '" + joint_name + "'");
  }
  int route_index(const std::string& route_name) const {
    for (int i = 0; i < num_routes(); ++i) {
      if (routes[static_cast<std::size_t>(i)].name == route_name) return i;
    }
    throw UnknownLink("no route named '" + route_name + "'");
  }

  VectorXd lower_limits() const {
    VectorXd v(dof());
    for (int i = 0; i < dof(); ++i) v[i] = joints[static_cast<std::size_t>(i)].lower;
    return v;
  }
  VectorXd upper_limits() const {
    VectorXd v(dof());
    for (int i = 0; i < dof(); ++i) v[i] = joints[static_cast<std::size_t>(i)].upper;
    return v;
  }
  VectorXd f_min() const {
    VectorXd v(num_routes());
    for (int i = 0; i < num_routes(); ++i) v[i] = routes[static_cast<std::size_t>(i)].f_min;
    return v;
  }
  VectorXd f_max() const {
    VectorXd v(num_routes());
    for (int i = 0; i < num_routes(); ++i) v[i] = routes[static_cast<std::size_t>(i)].f_max;
    return v;
  }

  bool operator==(const RobotModel& o) const {
    return name == o.name && links == o.links && joints == o.joints && routes == o.routes &&
           gravity == o.gravity && fully_actuated == o.fully_actuated &&
           max_tension == o.max_tension;
  }

  // Recomputes derived tables; throws ValidationError on a malformed graph.
  void finalize();

 private:
  std::vector<int> link_parent_joint_;
  std::vector<std::vector<bool>> ancestor_joints_;
};

inline Matrix3d rotation_rpy(const Vector3d& rpy) {
  return (Eigen::AngleAxisd(rpy.z(), Vector3d::UnitZ()) *
          Eigen::AngleAxisd(rpy.y(), Vector3d::UnitY()) *
          Eigen::AngleAxisd(rpy.x(), Vector3d::UnitX()))
      .toRotationMatrix();
}

// Symmetric inertia from [ixx, iyy, izz, ixy, ixz, iyz].
inline Matrix3d inertia_from_moments(double ixx, double iyy, double izz, double ixy = 0.0,
                                     double ixz = 0.0, double iyz = 0.0) {
  Matrix3d I;
  I << ixx, ixy, ixz, ixy, iyy, iyz, ixz, iyz, izz;
  return I;
}

inline void RobotModel::finalize() {
  const int nl = num_links();
  const int nj = dof();
  if (nl == 0) throw ValidationError("model has no links");
  if (nj != nl - 1) {
    throw ValidationError("chain must have exactly links-1 joints (" + std::to_string(nl) +
                          " links, " + std::to_string(nj) + " joints)");
  }
  link_parent_joint_.assign(static_cast<std::size_t>(nl), -1);
  for (int j = 0; j < nj; ++j) {
    const JointSpec& js = joints[static_cast<std::size_t>(j)];
    if (js.parent < 0 || js.parent >= nl || js.child < 0 || js.child >= nl) {
      throw ValidationError("joint '" + js.name + "' references a missing link");
    }
    if (js.child == 0) throw ValidationError("joint '" + js.name + "' has the root link as child");
    if (link_parent_joint_[static_cast<std::size_t>(js.child)] != -1) {
      throw ValidationError("link '" + links[static_cast<std::size_t>(js.child)].name +
                            "' has more than one parent joint");
    }
    // Topological storage makes cycles impossible to express.
    if (js.parent >= js.child) {
      throw ValidationError("joint '" + js.name + "': links must be ordered parent before child");
    }
    link_parent_joint_[static_cast<std::size_t>(js.child)] = j;
  }
  ancestor_joints_.assign(static_cast<std::size_t>(nl), std::vector<bool>(static_cast<std::size_t>(nj), false));
  for (int k = 1; k < nl; ++k) {
    int j = link_parent_joint_[static_cast<std::size_t>(k)];
    int p = joints[static_cast<std::size_t>(j)].parent;
    ancestor_joints_[static_cast<std::size_t>(k)] = ancestor_joints_[static_cast<std::size_t>(p)];
    ancestor_joints_[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] = true;
  }
}

namespace detail {

inline void check_finite(const Eigen::Ref<const MatrixXd>& m, const std::string& field) {
  if (!m.allFinite()) throw ValidationError("field '" + field + "' must be finite");
}

inline void validate_link(const LinkSpec& l) {
  const std::string f = "link." + l.name;
  if (!std::isfinite(l.mass) || l.mass < 0.0) throw ValidationError(f + ".mass must be >= 0");
  check_finite(l.center_of_mass, f + ".com");
  check_finite(l.inertia, f + ".inertia");
  const double scale = std::max(1.0, l.inertia.cwiseAbs().maxCoeff());
  if ((l.inertia - l.inertia.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw ValidationError(f + ".inertia must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix3d> es(l.inertia);
  Vector3d ev = es.eigenvalues();
  const double tol = 1e-12 * scale;
  if (ev.minCoeff() < -tol) {
    throw ValidationError(f + ".inertia must be positive semidefinite");
  }
  for (int i = 0; i < 3; ++i) {
    if (ev[i] > ev[(i + 1) % 3] + ev[(i + 2) % 3] + tol) {
      throw ValidationError(f + ".inertia violates the triangle inequality on principal moments");
    }
  }
}

}  // namespace detail

// Checks every documented invariant; throws ValidationError naming the field.
inline void validate_model(RobotModel& model) {
  model.finalize();
  std::set<std::string> names;
  for (const auto& l : model.links) {
    if (l.name.empty()) throw ValidationError("link name must not be empty");
    if (!names.insert(l.name).second) throw ValidationError("duplicate link name '" + l.name + "'");
    detail::validate_link(l);
  }
  names.clear();
  for (const auto& j : model.joints) {
    const std::string f = "joint." + j.name;
    if (!names.insert(j.name).second) throw ValidationError("duplicate joint name '" + j.name + "'");
    detail::check_finite(j.axis, f + ".axis");
    detail::check_finite(j.origin_xyz, f + ".origin_xyz");
    detail::check_finite(j.origin_rpy, f + ".origin_rpy");
    if (std::abs(j.axis.norm() - 1.0) > 1e-9) throw ValidationError(f + ".axis must have unit norm");
    if (!(j.lower < j.upper)) throw ValidationError(f + ": limits must satisfy lower < upper");
  }
  detail::check_finite(model.gravity, "gravity");
  if (!(model.max_tension > 0.0)) throw ValidationError("max_tension must be > 0");
  if (model.fully_actuated && model.num_routes() < model.dof() + 1) {
    throw ValidationError("fully_actuated model needs at least dof+1 routes (" +
                          std::to_string(model.dof() + 1) + "), has " +
                          std::to_string(model.num_routes()));
  }
  names.clear();
  for (const auto& r : model.routes) {
    const std::string f = "route." + r.name;
    if (!names.insert(r.name).second) throw ValidationError("duplicate route name '" + r.name + "'");
    if (!(r.f_min >= 0.0)) throw ValidationError(f + ".f_min must be >= 0");
    if (!(r.f_min < r.f_max)) throw ValidationError(f + ": tension bounds must satisfy f_min < f_max");
    if (r.f_max > model.max_tension) {
      throw ValidationError(f + ".f_max exceeds the model-wide max_tension");
    }
    if (!(r.ea > 0.0) || !std::isfinite(r.ea)) throw ValidationError(f + ".ea must be > 0");
    if (!(r.free_length > 0.0)) throw ValidationError(f + ".free_length must be > 0");
    if (!(r.motor.pulley_radius > 0.0)) throw ValidationError(f + ".pulley_radius must be > 0");
    if (!(r.motor.torque_constant > 0.0)) throw ValidationError(f + ".torque_constant must be > 0");
    if (r.motor.winding_sign != 1 && r.motor.winding_sign != -1) {
      throw ValidationError(f + ".winding_sign must be +1 or -1");
    }
    if (!(r.motor.rotor_inertia >= 0.0)) throw ValidationError(f + ".rotor_inertia must be >= 0");
    if (r.segments.empty()) throw ValidationError(f + " has no segments");
    for (std::size_t k = 0; k < r.segments.size(); ++k) {
      const std::string sf = f + ".segment." + std::to_string(k);
      if (const auto* ls = std::get_if<LinearSpan>(&r.segments[k])) {
        if (ls->from_link < 0 || ls->from_link >= model.num_links() || ls->to_link < 0 ||
            ls->to_link >= model.num_links()) {
          throw ValidationError(sf + " references a missing link");
        }
        detail::check_finite(ls->from_point, sf + ".from_point");
        detail::check_finite(ls->to_point, sf + ".to_point");
        if (ls->from_link == ls->to_link) {
          throw ValidationError(sf + ": linear span crosses zero joints (both anchors on link '" +
                                model.links[static_cast<std::size_t>(ls->from_link)].name + "')");
        }
        if (!model.is_ancestor_link(ls->from_link, ls->to_link)) {
          throw ValidationError(sf + ": from_link must be an ancestor of to_link");
        }
      } else {
        const auto& cw = std::get<CircularWrap>(r.segments[k]);
        if (cw.joint < 0 || cw.joint >= model.dof()) throw ValidationError(sf + " references a missing joint");
        if (!(cw.radius > 0.0) || !std::isfinite(cw.radius)) throw ValidationError(sf + ".radius must be > 0");
        if (cw.sign != 1.0 && cw.sign != -1.0) throw ValidationError(sf + ".sign must be +1 or -1");
        if (!std::isfinite(cw.arc_offset)) throw ValidationError(sf + ".arc_offset must be finite");
      }
    }
  }
}

// Sum of all link masses except the root.
inline double moving_part_mass(const RobotModel& model) {
  double m = 0.0;
  for (std::size_t k = 1; k < model.links.size(); ++k) m += model.links[k].mass;
  return m;
}

namespace detail {

inline void check_keys(const text::Section& s, std::initializer_list<const char*> allowed) {
  for (const auto& e : s.entries()) {
    bool ok = std::any_of(allowed.begin(), allowed.end(),
                          [&](const char* a) { return e.key == a; });
    if (!ok) {
      throw ValidationError("unknown field '" + s.path(e.key) + "' (line " +
                            std::to_string(e.line) + ")");
    }
  }
}

inline std::string last_component(const std::string& name) {
  return name.substr(name.rfind('.') + 1);
}

}  // namespace detail

inline RobotModel model_from_document(const text::Document& doc) {
  RobotModel model;
  const text::Section& root = doc.root();
  detail::check_keys(root, {"name", "gravity", "fully_actuated", "max_tension"});
  model.name = root.string("name", "robot");
  model.gravity = root.vec3("gravity", model.gravity);
  model.fully_actuated = root.boolean("fully_actuated", false);
  model.max_tension = root.number("max_tension", std::numeric_limits<double>::infinity());

  for (const auto& s : doc.sections()) {
    const std::string& n = s.name();
    if (n.empty()) continue;
    auto head = n.substr(0, n.find('.'));
    if (head != "link" && head != "joint" && head != "route") {
      throw ValidationError("unknown section [" + n + "] (line " + std::to_string(s.line()) + ")");
    }
  }

  // Links in file order; reordered topologically below.
  std::vector<LinkSpec> links;
  std::map<std::string, int> file_link;
  for (const text::Section* s : doc.children("link")) {
    detail::check_keys(*s, {"mass", "com", "inertia"});
    LinkSpec l;
    l.name = detail::last_component(s->name());
    l.mass = s->number("mass", 0.0);
    l.center_of_mass = s->vec3("com", Vector3d::Zero());
    if (s->has("inertia")) {
      VectorXd in = s->vector("inertia");
      if (in.size() != 6) {
        throw ValidationError("field '" + s->path("inertia") +
                              "' must be [ixx, iyy, izz, ixy, ixz, iyz]");
      }
      l.inertia = inertia_from_moments(in[0], in[1], in[2], in[3], in[4], in[5]);
    }
    file_link[l.name] = static_cast<int>(links.size());
    links.push_back(std::move(l));
  }
  if (links.empty()) throw ValidationError("model declares no [link.*] sections");

  struct RawJoint {
    JointSpec spec;
    std::string parent, child;
  };
  std::vector<RawJoint> raw;
  for (const text::Section* s : doc.children("joint")) {
    detail::check_keys(*s, {"parent", "child", "axis", "origin_xyz", "origin_rpy", "lower", "upper"});
    RawJoint rj;
    rj.spec.name = detail::last_component(s->name());
    rj.parent = s->string("parent");
    rj.child = s->string("child");
    for (const auto* ln : {&rj.parent, &rj.child}) {
      if (!file_link.count(*ln)) {
        throw ValidationError("field '" + s->path(ln == &rj.parent ? "parent" : "child") +
                              "' names unknown link '" + *ln + "'");
      }
    }
    rj.spec.axis = s->vec3("axis");
    rj.spec.origin_xyz = s->vec3("origin_xyz", Vector3d::Zero());
    rj.spec.origin_rpy = s->vec3("origin_rpy", Vector3d::Zero(), true);
    rj.spec.lower = s->angle("lower");
    rj.spec.upper = s->angle("upper");
    raw.push_back(std::move(rj));
  }

  // Topological order: breadth-first from the unique root, children in file
  // order. Anything unreachable means a cycle or a second root.
  std::vector<int> parent_of(links.size(), -1);
  for (std::size_t j = 0; j < raw.size(); ++j) {
    int c = file_link[raw[j].child];
    if (parent_of[static_cast<std::size_t>(c)] != -1) {
      throw ValidationError("link '" + raw[j].child + "' has more than one parent joint");
    }
    parent_of[static_cast<std::size_t>(c)] = static_cast<int>(j);
  }
  std::vector<int> roots;
  for (std::size_t k = 0; k < links.size(); ++k) {
    if (parent_of[k] == -1) roots.push_back(static_cast<int>(k));
  }
  if (roots.size() != 1) {
    throw ValidationError("link graph must have exactly one root (found " +
                          std::to_string(roots.size()) + ")");
  }
  std::vector<int> order{roots[0]};
  for (std::size_t head = 0; head < order.size(); ++head) {
    for (std::size_t j = 0; j < raw.size(); ++j) {
      if (file_link[raw[j].parent] == order[head]) order.push_back(file_link[raw[j].child]);
    }
  }
  if (order.size() != links.size()) {
    throw ValidationError("link graph contains a cycle or unreachable links");
  }
  std::vector<int> new_index(links.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    new_index[static_cast<std::size_t>(order[i])] = static_cast<int>(i);
    model.links.push_back(links[static_cast<std::size_t>(order[i])]);
  }
  // Joints ordered by child link.
  for (std::size_t i = 1; i < order.size(); ++i) {
    RawJoint& rj = raw[static_cast<std::size_t>(parent_of[static_cast<std::size_t>(order[i])])];
    rj.spec.parent = new_index[static_cast<std::size_t>(file_link[rj.parent])];
    rj.spec.child = static_cast<int>(i);
    model.joints.push_back(rj.spec);
  }

  auto link_id = [&](const text::Section& s, const char* key) {
    std::string ln = s.string(key);
    auto it = file_link.find(ln);
    if (it == file_link.end()) {
      throw ValidationError("field '" + s.path(key) + "' names unknown link '" + ln + "'");
    }
    return new_index[static_cast<std::size_t>(it->second)];
  };

  for (const text::Section* s : doc.children("route")) {
    detail::check_keys(*s, {"f_min", "f_max", "ea", "free_length", "pulley_radius",
                            "torque_constant", "winding_sign", "rotor_inertia"});
    WireRoute r;
    r.name = detail::last_component(s->name());
    r.f_min = s->number("f_min", r.f_min);
    r.f_max = s->number("f_max", r.f_max);
    r.ea = s->number("ea", r.ea);
    r.free_length = s->number("free_length", r.free_length);
    r.motor.pulley_radius = s->number("pulley_radius", r.motor.pulley_radius);
    r.motor.torque_constant = s->number("torque_constant", r.motor.torque_constant);
    r.motor.winding_sign = static_cast<int>(s->number("winding_sign", 1.0));
    r.motor.rotor_inertia = s->number("rotor_inertia", 0.0);

    std::vector<std::pair<long, const text::Section*>> segs;
    for (const text::Section* ss : doc.children(s->name() + ".segment")) {
      std::string k = detail::last_component(ss->name());
      if (k.empty() || !std::all_of(k.begin(), k.end(), ::isdigit)) {
        throw ValidationError("segment index in [" + ss->name() + "] must be a non-negative integer");
      }
      segs.emplace_back(std::stol(k), ss);
    }
    std::stable_sort(segs.begin(), segs.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [k, ss] : segs) {
      std::string type = ss->string("type");
      if (type == "linear") {
        detail::check_keys(*ss, {"type", "from_link", "from_point", "to_link", "to_point"});
        LinearSpan ls;
        ls.from_link = link_id(*ss, "from_link");
        ls.from_point = ss->vec3("from_point");
        ls.to_link = link_id(*ss, "to_link");
        ls.to_point = ss->vec3("to_point");
        r.segments.emplace_back(ls);
      } else if (type == "circular") {
        detail::check_keys(*ss, {"type", "joint", "radius", "sign", "arc_offset"});
        CircularWrap cw;
        std::string jn = ss->string("joint");
        cw.joint = -1;
        for (int j = 0; j < model.dof(); ++j) {
          if (model.joints[static_cast<std::size_t>(j)].name == jn) cw.joint = j;
        }
        if (cw.joint < 0) {
          throw ValidationError("field '" + ss->path("joint") + "' names unknown joint '" + jn + "'");
        }
        cw.radius = ss->number("radius");
        cw.sign = ss->number("sign", 1.0);
        cw.arc_offset = ss->number("arc_offset", 0.0);
        r.segments.emplace_back(cw);
      } else {
        throw ValidationError("field '" + ss->path("type") + "' must be \"linear\" or \"circular\"");
      }
    }
    model.routes.push_back(std::move(r));
  }
  // Stray segment sections whose route was never declared.
  for (const auto& s : doc.sections()) {
    const std::string& n = s.name();
    if (n.rfind("route.", 0) == 0) {
      auto parts = std::count(n.begin(), n.end(), '.');
      if (parts != 1 && parts != 3) {
        throw ValidationError("unexpected section [" + n + "]");
      }
      if (parts == 3) {
        std::string route = n.substr(6, n.find('.', 6) - 6);
        if (n.find(".segment.") == std::string::npos || doc.find("route." + route) == nullptr) {
          throw ValidationError("section [" + n + "] does not belong to a declared route");
        }
      }
    } else if ((n.rfind("link.", 0) == 0 || n.rfind("joint.", 0) == 0) &&
               std::count(n.begin(), n.end(), '.') != 1) {
      throw ValidationError("unexpected section [" + n + "]");
    }
  }

  validate_model(model);
  return model;
}

inline RobotModel load_model(std::string_view text) { return model_from_document(text::parse(text)); }

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline RobotModel load_model_file(const std::string& path) { return load_model(read_text_file(path)); }

inline text::Document model_to_document(const RobotModel& model) {
  using text::Value;
  text::Document doc;
  doc.root().set("name", Value::String(model.name));
  doc.root().set("gravity", text::vector_value(model.gravity));
  doc.root().set("fully_actuated", Value::Bool(model.fully_actuated));
  doc.root().set("max_tension", Value::Number(model.max_tension));
  for (const auto& l : model.links) {
    auto& s = doc.add("link." + l.name);
    s.set("mass", Value::Number(l.mass));
    s.set("com", text::vector_value(l.center_of_mass));
    const Matrix3d& I = l.inertia;
    Eigen::Matrix<double, 6, 1> v;
    v << I(0, 0), I(1, 1), I(2, 2), I(0, 1), I(0, 2), I(1, 2);
    s.set("inertia", text::vector_value(v));
  }
  for (const auto& j : model.joints) {
    auto& s = doc.add("joint." + j.name);
    s.set("parent", Value::String(model.links[static_cast<std::size_t>(j.parent)].name));
    s.set("child", Value::String(model.links[static_cast<std::size_t>(j.child)].name));
    s.set("axis", text::vector_value(j.axis));
    s.set("origin_xyz", text::vector_value(j.origin_xyz));
    s.set("origin_rpy", text::vector_value(j.origin_rpy));
    s.set("lower", Value::Number(j.lower, text::Unit::kRad));
    s.set("upper", Value::Number(j.upper, text::Unit::kRad));
  }
  for (const auto& r : model.routes) {
    auto& s = doc.add("route." + r.name);
    s.set("f_min", Value::Number(r.f_min));
    s.set("f_max", Value::Number(r.f_max));
    s.set("ea", Value::Number(r.ea));
    s.set("free_length", Value::Number(r.free_length));
    s.set("pulley_radius", Value::Number(r.motor.pulley_radius));
    s.set("torque_constant", Value::Number(r.motor.torque_constant));
    s.set("winding_sign", Value::Number(r.motor.winding_sign));
    s.set("rotor_inertia", Value::Number(r.motor.rotor_inertia));
    for (std::size_t k = 0; k < r.segments.size(); ++k) {
      auto& ss = doc.add("route." + r.name + ".segment." + std::to_string(k));
      if (const auto* ls = std::get_if<LinearSpan>(&r.segments[k])) {
        ss.set("type", Value::String("linear"));
        ss.set("from_link", Value::String(model.links[static_cast<std::size_t>(ls->from_link)].name));
        ss.set("from_point", text::vector_value(ls->from_point));
        ss.set("to_link", Value::String(model.links[static_cast<std::size_t>(ls->to_link)].name));
        ss.set("to_point", text::vector_value(ls->to_point));
      } else {
        const auto& cw = std::get<CircularWrap>(r.segments[k]);
        ss.set("type", Value::String("circular"));
        ss.set("joint", Value::String(model.joints[static_cast<std::size_t>(cw.joint)].name));
        ss.set("radius", Value::Number(cw.radius));
        ss.set("sign", Value::Number(cw.sign));
        ss.set("arc_offset", Value::Number(cw.arc_offset));
      }
    }
  }
  return doc;
}

inline std::string serialize_model(const RobotModel& model) {
  return text::write(model_to_document(model));
}

}  // namespace tendonkit

#endif  // TENDONKIT_MODEL_HPP_
