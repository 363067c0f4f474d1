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

// Tension distribution as a box-constrained convex QP:
//
//   minimize   |f|^2 + (tau + G^T f)^T Lambda (tau + G^T f)
//   subject to f_min <= f <= f_max
//
// In standard form 1/2 f^T H f + c^T f with H = 2 (I + G Lambda G^T) and
// c = 2 G Lambda tau. H is positive definite for any PSD Lambda, so the
// minimizer is unique.
//
// The solver is a primal active-set method over bound constraints. Each
// equality-constrained subproblem is solved as the stacked least-squares
// problem  min |[I; U^T G_F^T] f_F - [0; -U^T r_A]|  with Lambda = U U^T,
// which keeps the conditioning at the square root of H's.

#ifndef TENDONKIT_TENSION_HPP_
#define TENDONKIT_TENSION_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "tendonkit/errors.hpp"

namespace tendonkit {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct TensionProblem {
  MatrixXd G;        // R x N
  VectorXd tau_ref;  // N
  MatrixXd Lambda;   // N x N, symmetric PSD
  VectorXd f_min;    // R
  VectorXd f_max;    // R
};

enum class TensionStatus { kOptimal, kMaxIter };

inline const char* status_name(TensionStatus s) {
  return s == TensionStatus::kOptimal ? "optimal" : "max_iter";
}

struct TensionSolution {
  VectorXd f_ref;
  VectorXd torque_residual;  // tau_ref + G^T f_ref
  double kkt_residual = 0.0;
  int iterations = 0;
  TensionStatus status = TensionStatus::kOptimal;
};

inline void validate(const TensionProblem& p) {
  const long R = p.G.rows(), N = p.G.cols();
  require_size(p.tau_ref.size(), N, "tau_ref");
  require_size(p.Lambda.rows(), N, "Lambda rows");
  require_size(p.Lambda.cols(), N, "Lambda cols");
  require_size(p.f_min.size(), R, "f_min");
  require_size(p.f_max.size(), R, "f_max");
  if (!p.G.allFinite() || !p.tau_ref.allFinite() || !p.Lambda.allFinite()) {
    throw InvalidArgument("tension problem contains non-finite values");
  }
  for (long i = 0; i < R; ++i) {
    if (!(p.f_min[i] <= p.f_max[i]) || !std::isfinite(p.f_min[i]) || !std::isfinite(p.f_max[i])) {
      throw InvalidArgument("tension bounds must satisfy f_min <= f_max (route " + std::to_string(i) + ")");
    }
  }
  const double scale = std::max(1.0, p.Lambda.cwiseAbs().maxCoeff());
  if ((p.Lambda - p.Lambda.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw InvalidArgument("Lambda must be symmetric");
  }
}

inline double tension_objective(const TensionProblem& p, const Eigen::Ref<const VectorXd>& f) {
  const VectorXd r = p.tau_ref + p.G.transpose() * f;
  return f.squaredNorm() + r.dot(p.Lambda * r);
}

inline VectorXd tension_gradient(const TensionProblem& p, const Eigen::Ref<const VectorXd>& f) {
  const VectorXd r = p.tau_ref + p.G.transpose() * f;
  return 2.0 * (f + p.G * (p.Lambda * r));
}

// Largest projected-gradient stationarity violation, divided by 1 + |c|_inf.
inline double kkt_residual(const TensionProblem& p, const Eigen::Ref<const VectorXd>& f) {
  require_size(f.size(), p.G.rows(), "f");
  const VectorXd g = tension_gradient(p, f);
  const VectorXd c = 2.0 * p.G * (p.Lambda * p.tau_ref);
  const double scale = 1.0 + (c.size() ? c.cwiseAbs().maxCoeff() : 0.0);
  double worst = 0.0;
  for (long i = 0; i < f.size(); ++i) {
    const double width = p.f_max[i] - p.f_min[i];
    const double tol = 1e-12 * std::max(1.0, std::abs(p.f_max[i]));
    const bool at_lo = f[i] <= p.f_min[i] + tol;
    const bool at_hi = f[i] >= p.f_max[i] - tol;
    double v;
    if (width == 0.0) {
      v = 0.0;
    } else if (at_lo) {
      v = std::max(0.0, -g[i]);
    } else if (at_hi) {
      v = std::max(0.0, g[i]);
    } else {
      v = std::abs(g[i]);
    }
    worst = std::max(worst, v);
  }
  return worst / scale;
}

// Stateful solver; keeps the final working set as the next warm start.
class TensionSolver {
 public:
  explicit TensionSolver(int max_iterations = 0) : max_iterations_(max_iterations) {}

  void reset() { working_.clear(); }

  TensionSolution solve(const TensionProblem& p) {
    validate(p);
    const int R = static_cast<int>(p.G.rows());
    update_factor(p.Lambda);
    if (static_cast<int>(working_.size()) != R) working_.assign(static_cast<std::size_t>(R), kLower);

    // Feasible start from the warm working set.
    VectorXd f(R);
    for (int i = 0; i < R; ++i) {
      if (p.f_min[i] == p.f_max[i]) working_[static_cast<std::size_t>(i)] = kLower;
      switch (working_[static_cast<std::size_t>(i)]) {
        case kLower: f[i] = p.f_min[i]; break;
        case kUpper: f[i] = p.f_max[i]; break;
        default: f[i] = 0.5 * (p.f_min[i] + p.f_max[i]); break;
      }
    }

    const int limit = max_iterations_ > 0 ? max_iterations_ : 10 * R + 50;
    const VectorXd c = 2.0 * p.G * (p.Lambda * p.tau_ref);
    const double gtol = 1e-13 * (1.0 + (R ? c.cwiseAbs().maxCoeff() : 0.0));
    TensionSolution sol;
    sol.status = TensionStatus::kMaxIter;
    int it = 0;
    for (; it < limit; ++it) {
      const VectorXd target = subproblem(p, f);
      // Step toward the subproblem minimizer, stopping at the first bound.
      double alpha = 1.0;
      int blocking = -1;
      for (int i = 0; i < R; ++i) {
        if (working_[static_cast<std::size_t>(i)] != kFree) continue;
        const double d = target[i] - f[i];
        if (d < 0.0 && target[i] < p.f_min[i]) {
          const double a = (p.f_min[i] - f[i]) / d;
          if (a < alpha) {
            alpha = a;
            blocking = i;
          }
        } else if (d > 0.0 && target[i] > p.f_max[i]) {
          const double a = (p.f_max[i] - f[i]) / d;
          if (a < alpha) {
            alpha = a;
            blocking = i;
          }
        }
      }
      if (blocking >= 0) {
        alpha = std::max(0.0, alpha);
        for (int i = 0; i < R; ++i) {
          if (working_[static_cast<std::size_t>(i)] == kFree) f[i] += alpha * (target[i] - f[i]);
        }
        const bool lower = target[blocking] < p.f_min[blocking];
        working_[static_cast<std::size_t>(blocking)] = lower ? kLower : kUpper;
        f[blocking] = lower ? p.f_min[blocking] : p.f_max[blocking];
        continue;
      }
      for (int i = 0; i < R; ++i) {
        if (working_[static_cast<std::size_t>(i)] == kFree) f[i] = std::clamp(target[i], p.f_min[i], p.f_max[i]);
      }
      // Release the bound with the most negative multiplier, if any.
      const VectorXd g = tension_gradient(p, f);
      int release = -1;
      double worst = gtol;
      for (int i = 0; i < R; ++i) {
        if (p.f_min[i] == p.f_max[i]) continue;
        const int8_t w = working_[static_cast<std::size_t>(i)];
        const double v = w == kLower ? -g[i] : (w == kUpper ? g[i] : 0.0);
        if (v > worst) {
          worst = v;
          release = i;
        }
      }
      if (release < 0) {
        sol.status = TensionStatus::kOptimal;
        ++it;
        break;
      }
      working_[static_cast<std::size_t>(release)] = kFree;
    }
    for (int i = 0; i < R; ++i) f[i] = std::clamp(f[i], p.f_min[i], p.f_max[i]);
    sol.f_ref = f;
    sol.torque_residual = p.tau_ref + p.G.transpose() * f;
    sol.kkt_residual = kkt_residual(p, f);
    sol.iterations = it;
    return sol;
  }

 private:
  static constexpr int8_t kFree = 0;
  static constexpr int8_t kLower = -1;
  static constexpr int8_t kUpper = 1;

  void update_factor(const MatrixXd& Lambda) {
    if (Lambda.rows() == lambda_.rows() && Lambda.cols() == lambda_.cols() && Lambda == lambda_) return;
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (Lambda + Lambda.transpose()));
    const VectorXd& ev = es.eigenvalues();
    const double top = ev.size() ? std::max(0.0, ev.maxCoeff()) : 0.0;
    if (ev.size() && ev.minCoeff() < -1e-12 * std::max(1.0, top)) {
      throw InvalidArgument("Lambda must be positive semidefinite");
    }
    // U^T with zero-eigenvalue directions dropped.
    std::vector<long> keep;
    for (long i = 0; i < ev.size(); ++i) {
      if (ev[i] > 0.0) keep.push_back(i);
    }
    Ut_.resize(static_cast<long>(keep.size()), Lambda.rows());
    for (std::size_t k = 0; k < keep.size(); ++k) {
      Ut_.row(static_cast<long>(k)) = std::sqrt(ev[keep[k]]) * es.eigenvectors().col(keep[k]).transpose();
    }
    lambda_ = Lambda;
  }

  // Minimizer over the free variables with the others held at their bounds.
  VectorXd subproblem(const TensionProblem& p, const VectorXd& f) {
    const int R = static_cast<int>(p.G.rows());
    std::vector<int> free_idx;
    VectorXd r = p.tau_ref;
    for (int i = 0; i < R; ++i) {
      if (working_[static_cast<std::size_t>(i)] == kFree) {
        free_idx.push_back(i);
      } else {
        r += p.G.row(i).transpose() * f[i];
      }
    }
    VectorXd out = f;
    const long nf = static_cast<long>(free_idx.size());
    if (nf == 0) return out;
    const long k = Ut_.rows();
    MatrixXd A = MatrixXd::Zero(nf + k, nf);
    VectorXd b = VectorXd::Zero(nf + k);
    A.topRows(nf).setIdentity();
    for (long j = 0; j < nf; ++j) A.bottomRows(k).col(j) = Ut_ * p.G.row(free_idx[static_cast<std::size_t>(j)]).transpose();
    b.tail(k) = -Ut_ * r;
    const VectorXd x = A.householderQr().solve(b);
    for (long j = 0; j < nf; ++j) out[free_idx[static_cast<std::size_t>(j)]] = x[j];
    return out;
  }

  int max_iterations_;
  std::vector<int8_t> working_;
  MatrixXd lambda_;
  MatrixXd Ut_;
};

// Stateless entry point, safe to call concurrently.
inline TensionSolution solve_tension(const TensionProblem& p, int max_iterations = 0) {
  TensionSolver solver(max_iterations);
  return solver.solve(p);
}

}  // namespace tendonkit

#endif  // TENDONKIT_TENSION_HPP_
