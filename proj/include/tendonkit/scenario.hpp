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

// Scenario files. Same dialect as model files; sections are described in
// docs/scenario-format.md.

#ifndef TENDONKIT_SCENARIO_HPP_
#define TENDONKIT_SCENARIO_HPP_

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "tendonkit/controller.hpp"
#include "tendonkit/effective_mass.hpp"
#include "tendonkit/errors.hpp"
#include "tendonkit/model.hpp"
#include "tendonkit/sim.hpp"
#include "tendonkit/text_format.hpp"
#include "tendonkit/trajectory.hpp"

namespace tendonkit {

namespace detail {

inline MatrixXd gain_matrix(const text::Section& s, const char* key, const MatrixXd& fallback) {
  if (!s.has(key)) return fallback;
  const text::Value& v = s.required(key).value;
  const long n = fallback.rows();
  if (v.type == text::Value::Type::kNumber) return s.number(key) * MatrixXd::Identity(n, n);
  VectorXd d = s.vector(key);
  if (d.size() != n) {
    throw ValidationError("field '" + s.path(key) + "' must be a scalar or have " + std::to_string(n) + " entries");
  }
  return d.asDiagonal();
}

inline VectorXd bound_vector(const text::Section& s, const char* key, const VectorXd& fallback) {
  if (!s.has(key)) return fallback;
  if (s.required(key).value.type == text::Value::Type::kNumber) {
    return VectorXd::Constant(fallback.size(), s.number(key));
  }
  VectorXd v = s.vector(key);
  if (v.size() != fallback.size()) throw ValidationError("field '" + s.path(key) + "' has the wrong length");
  return v;
}

inline VectorXd joint_vector(const RobotModel& m, const text::Section& s, const char* key) {
  VectorXd v = s.vector(key, true);
  if (v.size() != m.dof()) {
    throw ValidationError("field '" + s.path(key) + "' needs " + std::to_string(m.dof()) + " entries");
  }
  return v;
}

inline void plane_axes(const std::string& plane, Vector3d& e1, Vector3d& e2) {
  const auto B = plane_basis(parse_plane(plane));
  e1 = B.col(0);
  e2 = B.col(1);
}

}  // namespace detail

inline Scenario scenario_from_document(const text::Document& doc, const std::filesystem::path& base_dir,
                                       const RobotModel* preloaded = nullptr) {
  static const text::Section kEmpty;
  auto section = [&](const char* name) -> const text::Section& {
    const text::Section* s = doc.find(name);
    return s ? *s : kEmpty;
  };
  for (const auto& s : doc.sections()) {
    const std::string& n = s.name();
    if (n.empty() || n == "scenario" || n == "controller" || n == "reference" || n == "transmission" ||
        n == "stops" || n == "contact" || n.rfind("event.", 0) == 0) {
      continue;
    }
    throw ValidationError("unknown section [" + n + "] (line " + std::to_string(s.line()) + ")");
  }
  const text::Section& ss = section("scenario");
  detail::check_keys(ss, {"name", "model", "mode", "integrator", "duration", "dt", "sample_rate", "tool_link",
                          "tool_point", "initial_q", "initial_qd", "controller_knows_payload",
                          "blowup_threshold"});
  Scenario sc;
  sc.name = ss.string("name", "scenario");
  if (preloaded) {
    sc.model = *preloaded;
  } else {
    std::filesystem::path mp = ss.string("model");
    if (mp.is_relative()) mp = base_dir / mp;
    sc.model = load_model_file(mp.string());
  }
  const RobotModel& m = sc.model;

  const std::string mode = ss.string("mode", "ideal_tension");
  if (mode == "ideal_tension") {
    sc.mode = ActuationMode::kIdealTension;
  } else if (mode == "elastic") {
    sc.mode = ActuationMode::kElastic;
  } else {
    throw ValidationError("scenario.mode must be \"ideal_tension\" or \"elastic\"");
  }
  const std::string integ = ss.string("integrator", "semi_implicit_euler");
  if (integ == "semi_implicit_euler") {
    sc.integrator = IntegratorKind::kSemiImplicitEuler;
  } else if (integ == "rk4") {
    sc.integrator = IntegratorKind::kRK4;
  } else {
    throw ValidationError("scenario.integrator must be \"semi_implicit_euler\" or \"rk4\"");
  }
  sc.duration = ss.number("duration");
  sc.dt = ss.number("dt", sc.mode == ActuationMode::kElastic ? 1e-4 : 5e-4);
  sc.sample_rate = ss.number("sample_rate", 100.0);
  sc.tool_link = ss.has("tool_link") ? m.link_index(ss.string("tool_link")) : m.num_links() - 1;
  sc.tool_point = ss.vec3("tool_point", Vector3d::Zero());
  if (ss.has("initial_q")) sc.initial_q = detail::joint_vector(m, ss, "initial_q");
  if (ss.has("initial_qd")) sc.initial_qd = detail::joint_vector(m, ss, "initial_qd");
  sc.controller_knows_payload = ss.boolean("controller_knows_payload", true);
  sc.blowup_threshold = ss.number("blowup_threshold", 1e9);

  const text::Section& cs = section("controller");
  detail::check_keys(cs, {"enabled", "preset", "kp", "kv", "lambda", "rate", "f_min", "f_max"});
  sc.controller_enabled = cs.boolean("enabled", true);
  sc.controller = ControllerConfig::defaults(m);
  const std::string preset = cs.string("preset", "default");
  if (preset == "low_gain") {
    sc.controller.apply_low_gain_preset();
  } else if (preset != "default") {
    throw ValidationError("controller.preset must be \"default\" or \"low_gain\"");
  }
  sc.controller.Kp = detail::gain_matrix(cs, "kp", sc.controller.Kp);
  sc.controller.Kv = detail::gain_matrix(cs, "kv", sc.controller.Kv);
  sc.controller.Lambda = detail::gain_matrix(cs, "lambda", sc.controller.Lambda);
  sc.controller.f_min = detail::bound_vector(cs, "f_min", sc.controller.f_min);
  sc.controller.f_max = detail::bound_vector(cs, "f_max", sc.controller.f_max);
  sc.controller.control_rate = cs.number("rate", 2000.0);
  if (sc.controller_enabled) validate(sc.controller, m);

  const text::Section& ts = section("transmission");
  detail::check_keys(ts, {"ea_scale", "damping_ratio", "motor_time_constant", "rotor_mass"});
  sc.transmission.ea_scale = ts.number("ea_scale", 1.0);
  sc.transmission.damping_ratio = ts.number("damping_ratio", 0.1);
  sc.transmission.motor_time_constant = ts.number("motor_time_constant", 0.002);
  sc.transmission.rotor_mass = ts.number("rotor_mass", 0.1);
  if (!(sc.transmission.ea_scale > 0.0) || !(sc.transmission.damping_ratio >= 0.0) ||
      !(sc.transmission.motor_time_constant > 0.0) || !(sc.transmission.rotor_mass > 0.0)) {
    throw ValidationError("transmission parameters must be positive");
  }

  const text::Section& st = section("stops");
  detail::check_keys(st, {"enabled", "frequency", "damping_ratio"});
  sc.stops.enabled = st.boolean("enabled", true);
  sc.stops.frequency = st.number("frequency", sc.stops.frequency);
  sc.stops.damping_ratio = st.number("damping_ratio", sc.stops.damping_ratio);
  if (!(sc.stops.frequency > 0.0) || !(sc.stops.damping_ratio >= 0.0)) {
    throw ValidationError("stops.frequency must be > 0 and stops.damping_ratio >= 0");
  }

  // Reference.
  const text::Section& rs = section("reference");
  detail::check_keys(rs, {"type", "q", "goal", "t_start", "duration", "diameter", "period", "plane", "ik_joints",
                          "phase", "center"});
  const std::string type = rs.string("type", "hold");
  const VectorXd q0 = rs.has("q") ? detail::joint_vector(m, rs, "q") : VectorXd::Zero(m.dof());
  const int tool_link = sc.tool_link;
  const Vector3d tool_point = sc.tool_point;
  if (type == "hold") {
    sc.make_reference = [q0, tool_link, tool_point](const RobotModel& model) -> std::unique_ptr<Trajectory> {
      return std::make_unique<HoldTrajectory>(model, q0, tool_link, tool_point);
    };
  } else if (type == "joint_ramp") {
    const VectorXd goal = detail::joint_vector(m, rs, "goal");
    const double t0 = rs.number("t_start", 0.0);
    const double T = rs.number("duration");
    sc.make_reference = [=](const RobotModel& model) -> std::unique_ptr<Trajectory> {
      return std::make_unique<JointRampTrajectory>(model, q0, goal, t0, T, tool_link, tool_point);
    };
  } else if (type == "circle") {
    CircleSpec cspec;
    cspec.base = q0;
    for (const auto& jn : rs.strings("ik_joints")) cspec.ik_joints.push_back(m.joint_index(jn));
    detail::plane_axes(rs.string("plane", "yz"), cspec.e1, cspec.e2);
    cspec.diameter = rs.number("diameter");
    cspec.period = rs.number("period");
    cspec.phase = rs.angle("phase", 0.0);
    if (rs.has("center")) {
      cspec.center = rs.vec3("center");
      cspec.center_from_base = false;
    }
    cspec.tool_link = tool_link;
    cspec.tool_point = tool_point;
    sc.make_reference = [cspec](const RobotModel& model) -> std::unique_ptr<Trajectory> {
      return std::make_unique<CircleTrajectory>(model, cspec);
    };
  } else {
    throw ValidationError("reference.type must be \"hold\", \"joint_ramp\" or \"circle\"");
  }

  // Events.
  for (const text::Section* es : doc.children("event")) {
    detail::check_keys(*es, {"time", "kind", "link", "point", "mass", "impulse"});
    SimEvent e;
    e.time = es->number("time");
    const std::string kind = es->string("kind");
    e.link = m.link_index(es->string("link"));
    e.point = es->vec3("point", Vector3d::Zero());
    if (kind == "attach_mass") {
      e.kind = SimEvent::Kind::kAttachMass;
      e.mass = es->number("mass");
    } else if (kind == "detach_mass") {
      e.kind = SimEvent::Kind::kDetachMass;
    } else if (kind == "impulse") {
      e.kind = SimEvent::Kind::kImpulse;
      e.impulse = es->vec3("impulse");
    } else {
      throw ValidationError("field '" + es->path("kind") + "' must be attach_mass, detach_mass or impulse");
    }
    sc.events.push_back(e);
  }

  // Contact plane.
  if (const text::Section* ps = doc.find("contact")) {
    detail::check_keys(*ps, {"enabled", "normal", "offset", "above_reference_min", "stiffness", "damping", "links",
                             "points"});
    sc.contact.enabled = ps->boolean("enabled", true);
    sc.contact.normal = ps->vec3("normal", Vector3d::UnitZ());
    if (!(sc.contact.normal.norm() > 0.0)) throw ValidationError("contact.normal must be non-zero");
    sc.contact.normal.normalize();
    sc.contact.stiffness = ps->number("stiffness", sc.contact.stiffness);
    sc.contact.damping = ps->number("damping", sc.contact.damping);
    if (!(sc.contact.stiffness > 0.0) || !(sc.contact.damping >= 0.0)) {
      throw ValidationError("contact stiffness must be > 0 and damping >= 0");
    }
    const auto links = ps->strings("links");
    const MatrixXd points = ps->matrix("points");
    if (static_cast<long>(links.size()) != points.rows() || points.cols() != 3) {
      throw ValidationError("contact.links and contact.points must pair up as 3-vectors");
    }
    for (std::size_t i = 0; i < links.size(); ++i) {
      sc.contact.candidates.emplace_back(m.link_index(links[i]), points.row(static_cast<long>(i)).transpose());
    }
    if (ps->has("offset")) {
      sc.contact.offset = ps->number("offset");
    } else if (ps->has("above_reference_min")) {
      // Surface placed a fixed distance above the lowest reference point.
      auto traj = sc.make_reference(sc.model);
      double low = std::numeric_limits<double>::infinity();
      const long n = std::max(2L, std::lround(sc.duration * 1000.0));
      for (long i = 0; i <= n; ++i) {
        low = std::min(low, sc.contact.normal.dot(traj->sample(sc.duration * static_cast<double>(i) / n).x));
      }
      sc.contact.offset = low + ps->number("above_reference_min");
    } else {
      throw ValidationError("contact needs 'offset' or 'above_reference_min'");
    }
  }
  validate(sc);
  return sc;
}

inline Scenario load_scenario(std::string_view text, const std::filesystem::path& base_dir,
                              const std::vector<std::string>& overrides = {}) {
  text::Document doc = text::parse(text);
  for (const auto& o : overrides) text::apply_override(doc, o);
  return scenario_from_document(doc, base_dir);
}

inline Scenario load_scenario_file(const std::string& path, const std::vector<std::string>& overrides = {}) {
  const std::filesystem::path p(path);
  return load_scenario(read_text_file(path), p.parent_path(), overrides);
}

}  // namespace tendonkit

#endif  // TENDONKIT_SCENARIO_HPP_
