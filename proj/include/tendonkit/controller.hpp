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

// Controller pipeline:
//
//   tau_ref = M(q) (Kp (q_ref - q) + qdd_ref) + h(q, qd_ref) + g(q)
//   f_ref   = argmin of the tension QP for tau_ref
//   f_final = clamp(f_ref + Kv (ldot_ref - ldot), 0, f_max)
//
// There is no joint-velocity feedback: measured qdot never enters the law.
// Wire rates are take-up rates, positive while the motor winds wire in, so
// that Kv acts as damping. Along a joint trajectory the take-up rate is
// -G(q) qdot.

#ifndef TENDONKIT_CONTROLLER_HPP_
#define TENDONKIT_CONTROLLER_HPP_

#include <chrono>
#include <cmath>

#include <Eigen/Dense>

#include "tendonkit/dynamics.hpp"
#include "tendonkit/errors.hpp"
#include "tendonkit/kinematics.hpp"
#include "tendonkit/model.hpp"
#include "tendonkit/tension.hpp"

namespace tendonkit {

struct ControllerConfig {
  MatrixXd Kp;      // N x N, 1/s^2
  MatrixXd Kv;      // R x R, N s/m
  MatrixXd Lambda;  // N x N
  VectorXd f_min;
  VectorXd f_max;
  double control_rate = 2000.0;  // Hz

  static ControllerConfig defaults(const RobotModel& model, double kp = 400.0, double kv = 200.0,
                                   double lambda = 1e6) {
    ControllerConfig c;
    c.Kp = kp * MatrixXd::Identity(model.dof(), model.dof());
    c.Kv = kv * MatrixXd::Identity(model.num_routes(), model.num_routes());
    c.Lambda = lambda * MatrixXd::Identity(model.dof(), model.dof());
    c.f_min = model.f_min();
    c.f_max = model.f_max();
    return c;
  }

  // Both feedback gains divided by ten.
  void apply_low_gain_preset() {
    Kp /= 10.0;
    Kv /= 10.0;
  }
};

inline void validate(const ControllerConfig& c, const RobotModel& model) {
  const int n = model.dof(), r = model.num_routes();
  require_size(c.Kp.rows(), n, "Kp rows");
  require_size(c.Kp.cols(), n, "Kp cols");
  require_size(c.Kv.rows(), r, "Kv rows");
  require_size(c.Kv.cols(), r, "Kv cols");
  require_size(c.Lambda.rows(), n, "Lambda rows");
  require_size(c.Lambda.cols(), n, "Lambda cols");
  require_size(c.f_min.size(), r, "f_min");
  require_size(c.f_max.size(), r, "f_max");
  auto psd = [](const MatrixXd& m, const char* name) {
    const double s = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * s) {
      throw ValidationError(std::string("controller.") + name + " must be symmetric");
    }
    if (m.size() && Eigen::SelfAdjointEigenSolver<MatrixXd>(m).eigenvalues().minCoeff() < -1e-12 * s) {
      throw ValidationError(std::string("controller.") + name + " must be positive semidefinite");
    }
  };
  psd(c.Kp, "kp");
  psd(c.Kv, "kv");
  psd(c.Lambda, "lambda");
  for (int i = 0; i < r; ++i) {
    if (!(c.f_min[i] >= 0.0 && c.f_min[i] < c.f_max[i])) {
      throw ValidationError("controller tension bounds must satisfy 0 <= f_min < f_max");
    }
  }
  if (!(c.control_rate >= 500.0)) throw ValidationError("controller.rate must be >= 500 Hz");
}

struct Reference {
  VectorXd q_ref;
  VectorXd qd_ref;
  VectorXd qdd_ref;
  VectorXd ldot_ref;  // take-up rate, m/s
};

struct MeasuredState {
  VectorXd q;
  VectorXd qdot;  // carried for logging; the law ignores it
  VectorXd ldot;  // take-up rate, m/s
};

// Take-up rate of every wire for joint velocity qd.
inline VectorXd take_up_rate(const MatrixXd& G, const Eigen::Ref<const VectorXd>& qd) { return -(G * qd); }

inline Reference make_reference(const RobotModel& model, const Eigen::Ref<const VectorXd>& q_ref,
                                const Eigen::Ref<const VectorXd>& qd_ref,
                                const Eigen::Ref<const VectorXd>& qdd_ref) {
  require_size(qd_ref.size(), model.dof(), "qd_ref");
  require_size(qdd_ref.size(), model.dof(), "qdd_ref");
  const MatrixXd G = muscle_jacobian(model, q_ref, LimitPolicy::kAllow);
  return Reference{q_ref, qd_ref, qdd_ref, take_up_rate(G, qd_ref)};
}

inline VectorXd computed_torque(const RobotModel& model, const Frames& fr,
                                const Eigen::Ref<const VectorXd>& q, const Reference& ref,
                                const MatrixXd& Kp) {
  require_size(ref.q_ref.size(), model.dof(), "q_ref");
  require_size(ref.qdd_ref.size(), model.dof(), "qdd_ref");
  require_size(Kp.rows(), model.dof(), "Kp");
  const VectorXd a = Kp * (ref.q_ref - q) + ref.qdd_ref;
  VectorXd tau = inertia_matrix(model, fr) * a + gravity_vector(model, fr);
  if (ref.qd_ref.size() == model.dof()) tau += bias_forces(model, fr, ref.qd_ref);
  return tau;
}

inline VectorXd computed_torque(const RobotModel& model, const Eigen::Ref<const VectorXd>& q,
                                const Reference& ref, const MatrixXd& Kp) {
  return computed_torque(model, forward_kinematics(model, q, LimitPolicy::kAllow), q, ref, Kp);
}

// tau = -G^T f
inline VectorXd torque_from_tension(const MatrixXd& G, const Eigen::Ref<const VectorXd>& f) {
  require_size(f.size(), G.rows(), "f");
  return -(G.transpose() * f);
}

struct TensionCommand {
  VectorXd f_final;
  bool clamped = false;
};

inline TensionCommand tension_command(const Eigen::Ref<const VectorXd>& f_ref, const MatrixXd& Kv,
                                      const Eigen::Ref<const VectorXd>& ldot_ref,
                                      const Eigen::Ref<const VectorXd>& ldot,
                                      const Eigen::Ref<const VectorXd>& f_max) {
  const long r = f_ref.size();
  require_size(Kv.rows(), r, "Kv rows");
  require_size(Kv.cols(), r, "Kv cols");
  require_size(ldot_ref.size(), r, "ldot_ref");
  require_size(ldot.size(), r, "ldot");
  require_size(f_max.size(), r, "f_max");
  TensionCommand out;
  out.f_final = f_ref + Kv * (ldot_ref - ldot);
  for (long i = 0; i < r; ++i) {
    const double v = std::clamp(out.f_final[i], 0.0, f_max[i]);
    if (v != out.f_final[i]) out.clamped = true;
    out.f_final[i] = v;
  }
  return out;
}

struct ControlDiagnostics {
  VectorXd tau_ref;
  VectorXd f_ref;
  VectorXd torque_residual;
  double kkt_residual = 0.0;
  int qp_iterations = 0;
  TensionStatus qp_status = TensionStatus::kOptimal;
  bool clamped = false;
  double elapsed_seconds = 0.0;  // wall clock; never written to traces
};

struct ControlOutput {
  VectorXd f_final;
  ControlDiagnostics diag;
};

// One controller per robot; owns the QP warm start.
class Controller {
 public:
  Controller(const RobotModel& model, ControllerConfig config)
      : model_(&model), config_(std::move(config)) {
    validate(config_, model);
  }

  const ControllerConfig& config() const { return config_; }
  void set_model(const RobotModel& model) { model_ = &model; }
  void reset() { solver_.reset(); }

  ControlOutput step(const MeasuredState& state, const Reference& ref) {
    const auto t0 = std::chrono::steady_clock::now();
    const RobotModel& model = *model_;
    require_size(state.ldot.size(), model.num_routes(), "ldot");
    require_size(ref.ldot_ref.size(), model.num_routes(), "ldot_ref");
    const Frames fr = forward_kinematics(model, state.q, LimitPolicy::kAllow);
    ControlOutput out;
    out.diag.tau_ref = computed_torque(model, fr, state.q, ref, config_.Kp);
    TensionProblem problem{muscle_jacobian(model, fr), out.diag.tau_ref, config_.Lambda, config_.f_min,
                           config_.f_max};
    const TensionSolution sol = solver_.solve(problem);
    TensionCommand cmd = tension_command(sol.f_ref, config_.Kv, ref.ldot_ref, state.ldot, config_.f_max);
    out.f_final = std::move(cmd.f_final);
    out.diag.f_ref = sol.f_ref;
    out.diag.torque_residual = sol.torque_residual;
    out.diag.kkt_residual = sol.kkt_residual;
    out.diag.qp_iterations = sol.iterations;
    out.diag.qp_status = sol.status;
    out.diag.clamped = cmd.clamped;
    out.diag.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
  }

 private:
  const RobotModel* model_;
  ControllerConfig config_;
  TensionSolver solver_;
};

// Stateless single step.
inline ControlOutput control_step(const RobotModel& model, const MeasuredState& state,
                                  const Reference& ref, const ControllerConfig& config) {
  Controller c(model, config);
  return c.step(state, ref);
}

}  // namespace tendonkit

#endif  // TENDONKIT_CONTROLLER_HPP_
