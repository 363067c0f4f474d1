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

// Effective-mass maps over a posture grid. For each posture the largest
// in-plane effective mass is reported together with the point position
// projected onto the plane.

#ifndef TENDONKIT_EFFECTIVE_MASS_HPP_
#define TENDONKIT_EFFECTIVE_MASS_HPP_

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "tendonkit/dynamics.hpp"
#include "tendonkit/errors.hpp"
#include "tendonkit/kinematics.hpp"
#include "tendonkit/model.hpp"
#include "tendonkit/text_format.hpp"

namespace tendonkit {

enum class Plane { kXZ, kXY, kYZ };

inline Plane parse_plane(const std::string& s) {
  if (s == "xz") return Plane::kXZ;
  if (s == "xy") return Plane::kXY;
  if (s == "yz") return Plane::kYZ;
  throw ValidationError("plane must be one of xz, xy, yz (got '" + s + "')");
}

inline const char* plane_name(Plane p) {
  switch (p) {
    case Plane::kXZ: return "xz";
    case Plane::kXY: return "xy";
    case Plane::kYZ: return "yz";
  }
  return "?";
}

// Orthonormal in-plane basis (e1, e2) as the columns of a 3x2 matrix.
inline Eigen::Matrix<double, 3, 2> plane_basis(Plane p) {
  Eigen::Matrix<double, 3, 2> B = Eigen::Matrix<double, 3, 2>::Zero();
  switch (p) {
    case Plane::kXZ: B(0, 0) = 1.0; B(2, 1) = 1.0; break;
    case Plane::kXY: B(0, 0) = 1.0; B(1, 1) = 1.0; break;
    case Plane::kYZ: B(1, 0) = 1.0; B(2, 1) = 1.0; break;
  }
  return B;
}

struct FieldRow {
  double x = 0.0;  // first in-plane coordinate of the point
  double z = 0.0;  // second in-plane coordinate
  double m_u_max = 0.0;
  bool singular = false;  // some in-plane direction is immobile; m_u_max is over the rest, row excluded from max
};

struct FieldSpec {
  int link = 0;
  Vector3d point = Vector3d::Zero();
  Plane plane = Plane::kXZ;
  // 0 selects the closed form (smallest eigenvalue of the in-plane mobility
  // block); otherwise the maximum over this many evenly spaced directions.
  int resolution = 0;
  EffectiveMassOptions options;
  int threads = 1;
};

struct FieldResult {
  std::vector<FieldRow> rows;
  double max = 0.0;  // over non-singular rows
  int singular_count = 0;
};

// Relative eigenvalue floor below which a posture is flagged singular.
constexpr double kFieldSingularTol = 1e-9;

inline FieldRow effective_mass_row(const RobotModel& model, const Eigen::Ref<const VectorXd>& q,
                                   const FieldSpec& spec) {
  const Frames fr = forward_kinematics(model, q, LimitPolicy::kAllow);
  const Eigen::Matrix<double, 3, 2> B = plane_basis(spec.plane);
  const Vector3d p = fr.link[static_cast<std::size_t>(spec.link)].apply(spec.point);
  FieldRow row;
  row.x = B.col(0).dot(p);
  row.z = B.col(1).dot(p);
  const Matrix3d A = mobility_matrix(model, fr, spec.link, spec.point, spec.options);
  const Eigen::Matrix2d A2 = B.transpose() * A * B;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(A2);
  const double mu1 = es.eigenvalues()[0], mu2 = es.eigenvalues()[1];
  if (!(mu2 > 0.0)) {
    row.singular = true;
    row.m_u_max = std::numeric_limits<double>::infinity();
    return row;
  }
  // With one in-plane direction immobile the point moves along a single
  // line; report the mass along it. Sampling would blow up near the null
  // direction, so that case always uses the closed form.
  row.singular = mu1 <= kFieldSingularTol * mu2;
  if (row.singular || spec.resolution <= 0) {
    row.m_u_max = 1.0 / (row.singular ? mu2 : mu1);
  } else {
    double best = 0.0;
    for (int k = 0; k < spec.resolution; ++k) {
      const double th = 2.0 * std::numbers::pi * k / spec.resolution;
      const Vector3d u = std::cos(th) * B.col(0) + std::sin(th) * B.col(1);
      best = std::max(best, 1.0 / u.dot(A * u));
    }
    row.m_u_max = best;
  }
  return row;
}

// Worker count: the requested value, capped by TENDONKIT_THREADS when set.
inline int effective_threads(int requested) {
  int n = std::max(1, requested);
  if (const char* env = std::getenv("TENDONKIT_THREADS")) {
    int cap = std::atoi(env);
    if (cap >= 1) n = std::min(n, cap);
  }
  return n;
}

inline FieldResult effective_mass_field(const RobotModel& model, const std::vector<VectorXd>& postures,
                                        const FieldSpec& spec) {
  if (postures.empty()) throw InvalidArgument("posture grid is empty");
  check_link(model, spec.link);
  for (const auto& q : postures) check_joint_vector(model, q, LimitPolicy::kAllow);
  FieldResult out;
  out.rows.resize(postures.size());
  const int workers = std::min<int>(effective_threads(spec.threads), static_cast<int>(postures.size()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < postures.size(); ++i) out.rows[i] = effective_mass_row(model, postures[i], spec);
  } else {
    // Each worker writes only its own rows; results are order-independent.
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = next++; i < postures.size(); i = next++) {
            out.rows[i] = effective_mass_row(model, postures[i], spec);
          }
        } catch (...) {
          errors[static_cast<std::size_t>(w)] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  for (const auto& r : out.rows) {
    if (r.singular) {
      ++out.singular_count;
    } else {
      out.max = std::max(out.max, r.m_u_max);
    }
  }
  return out;
}

// Grid description: a base posture plus per-joint value lists. Postures are
// the Cartesian product, first axis varying slowest.
struct PostureGrid {
  VectorXd base;
  std::vector<int> joints;
  std::vector<std::vector<double>> values;

  std::vector<VectorXd> postures() const {
    std::vector<VectorXd> out;
    std::vector<std::size_t> idx(joints.size(), 0);
    for (const auto& v : values) {
      if (v.empty()) return out;
    }
    while (true) {
      VectorXd q = base;
      for (std::size_t a = 0; a < joints.size(); ++a) q[joints[a]] = values[a][idx[a]];
      out.push_back(q);
      std::size_t a = joints.size();
      while (a > 0) {
        --a;
        if (++idx[a] < values[a].size()) break;
        idx[a] = 0;
        if (a == 0) return out;
      }
      if (joints.empty()) return out;
    }
  }
};

struct FieldJob {
  PostureGrid grid;
  FieldSpec spec;
};

// Reads a grid file:
//   [grid] link, point, plane, resolution, base (angles), rotor_inertia (bool)
//   [grid.axis.<k>] joint, values = [...]  or  from, to, count
inline FieldJob load_field_job(const RobotModel& model, std::string_view text) {
  const text::Document doc = text::parse(text);
  const text::Section* g = doc.find("grid");
  if (!g) throw ValidationError("grid file needs a [grid] section");
  FieldJob job;
  job.spec.link = model.link_index(g->string("link"));
  job.spec.point = g->vec3("point", Vector3d::Zero());
  job.spec.plane = parse_plane(g->string("plane", "xz"));
  job.spec.resolution = static_cast<int>(g->number("resolution", 0.0));
  job.spec.options.include_rotor_inertia = g->boolean("rotor_inertia", false);
  job.grid.base = g->has("base") ? g->vector("base", true) : VectorXd::Zero(model.dof());
  require_size(job.grid.base.size(), model.dof(), "grid.base");
  std::vector<std::pair<long, const text::Section*>> axes;
  for (const text::Section* s : doc.children("grid.axis")) {
    std::string k = s->name().substr(s->name().rfind('.') + 1);
    axes.emplace_back(std::strtol(k.c_str(), nullptr, 10), s);
  }
  std::stable_sort(axes.begin(), axes.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [k, s] : axes) {
    job.grid.joints.push_back(model.joint_index(s->string("joint")));
    std::vector<double> vals;
    if (s->has("values")) {
      VectorXd v = s->vector("values", true);
      vals.assign(v.data(), v.data() + v.size());
    } else {
      const double from = s->angle("from"), to = s->angle("to");
      const int count = static_cast<int>(s->number("count"));
      if (count < 1) throw ValidationError("field '" + s->path("count") + "' must be >= 1");
      for (int i = 0; i < count; ++i) {
        vals.push_back(count == 1 ? from : from + (to - from) * i / (count - 1));
      }
    }
    job.grid.values.push_back(std::move(vals));
  }
  return job;
}

}  // namespace tendonkit

#endif  // TENDONKIT_EFFECTIVE_MASS_HPP_
