#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "setrend/control.hpp"
#include "setrend/convex.hpp"
#include "setrend/dynamics.hpp"
#include "setrend/errors.hpp"
#include "setrend/graph.hpp"

// Evaluation of the quantities the convergence analysis speaks about:
// law-specific Lyapunov functions, per-agent set distances, consensus error,
// safety margins, and the ultimate bound for approximate aggregation.

namespace setrend::metrics {

using dynamics::AgentState;

/// Per-sample metric record. dist_x0 entries are NaN when the intersection
/// distance is not computable (non-convex demo sets). Spread fields are only
/// populated for the switching law.
struct StepMetrics {
  double lyapunov = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> dist_own;
  std::vector<double> dist_x0;
  double consensus_error = 0.0;
  std::vector<double> speed;
  double min_pairwise = std::numeric_limits<double>::infinity();
  // Switching-law diagnostics.
  bool has_spread = false;
  Eigen::Vector2d hbar = Eigen::Vector2d::Zero();
  Eigen::Vector2d ell = Eigen::Vector2d::Zero();
  double max_delta = std::numeric_limits<double>::quiet_NaN();

  double max_dist_own() const {
    double v = 0.0;
    for (double d : dist_own) v = std::max(v, d);
    return v;
  }
  double max_dist_x0() const {
    double v = 0.0;
    for (double d : dist_x0) v = std::max(v, d);
    return v;
  }
  double max_speed() const {
    double v = 0.0;
    for (double d : speed) v = std::max(v, d);
    return v;
  }
};

/// V = 1/2 sum qdot^T M qdot + 1/4 sum_i sum_j a_ij ||q_i - q_j||^2
///     + 1/2 sum ||q_i - P_{X_i}(q_i)||^2.
inline double lyapunov_fixed(const std::vector<AgentState>& states,
                             const std::vector<convex::ConvexRegion>& regions,
                             const graph::WeightedGraph& g,
                             const std::vector<dynamics::ManipulatorParams>& params) {
  const int n = static_cast<int>(states.size());
  double v = 0.0;
  for (int i = 0; i < n; ++i) {
    const Eigen::Matrix2d m = dynamics::mass_matrix(params[i], states[i].q);
    v += 0.5 * states[i].qdot.dot(m * states[i].qdot);
    for (int j = 0; j < n; ++j) {
      const double a = g.weight(i, j);
      if (a > 0.0) v += 0.25 * a * (states[i].q - states[j].q).squaredNorm();
    }
    const double d = convex::distance(regions[i], states[i].q);
    v += 0.5 * d * d;
  }
  return v;
}

/// Lyapunov function of the feedback-linearized switching closed loop around
/// a fixed point q0 in the target intersection:
/// V = 1/2 sum ||qdot||^2 + sum (q - q0)^T qdot + k/2 sum ||q - q0||^2
///     + 1/2 sum ||q - P_{X_i}(q)||^2, positive definite for k > 1.
inline double lyapunov_switching(const std::vector<AgentState>& states,
                                 const std::vector<convex::ConvexRegion>& regions, double k,
                                 const Eigen::Vector2d& q0) {
  if (!(k > 1.0))
    throw ValidationError("lyapunov_switching: requires k > 1 for positive definiteness");
  double worst = 0.0;
  for (const auto& r : regions) worst = std::max(worst, convex::distance(r, q0));
  if (worst > 10.0 * convex::kFeasTol)
    throw ValidationError("lyapunov_switching: q0 is not in the target intersection");
  double v = 0.0;
  for (std::size_t i = 0; i < states.size(); ++i) {
    const Eigen::Vector2d e = states[i].q - q0;
    v += 0.5 * states[i].qdot.squaredNorm() + e.dot(states[i].qdot) +
         0.5 * k * e.squaredNorm();
    const double d = convex::distance(regions[i], states[i].q);
    v += 0.5 * d * d;
  }
  return v;
}

/// Fixed-graph Lyapunov value plus 1/2 sum_{i != j} V_ij.
inline double lyapunov_collision(const std::vector<AgentState>& states,
                                 const std::vector<convex::ConvexRegion>& regions,
                                 const graph::WeightedGraph& g,
                                 const std::vector<dynamics::ManipulatorParams>& params,
                                 const control::PotentialParams& pot) {
  double v = lyapunov_fixed(states, regions, g, params);
  const int n = static_cast<int>(states.size());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      v += 0.5 * control::potential(pot, (states[i].q - states[j].q).squaredNorm());
    }
  return v;
}

/// Ultimate bound on the distance to the target intersection under the
/// collision-avoiding law: B* = rho (sqrt(2) + 2 / sqrt(lambda_2)) sqrt(V0),
/// with lambda_2 the smallest nonzero Laplacian eigenvalue.
inline double ultimate_bound(double v0, const graph::WeightedGraph& g, double rho, int m) {
  if (m < 1) throw ValidationError("ultimate_bound: dimension must be positive");
  if (!(rho >= 1.0)) throw ValidationError("ultimate_bound: rho must be at least 1");
  if (v0 < 0.0) throw ValidationError("ultimate_bound: V0 must be nonnegative");
  const double lambda2 = graph::algebraic_connectivity(g);
  if (lambda2 <= 1e-9)
    throw ValidationError("ultimate_bound: graph must be connected (lambda_2 > 0)");
  return rho * (std::numbers::sqrt2 + 2.0 / std::sqrt(lambda2)) * std::sqrt(v0);
}

inline double consensus_error(const std::vector<AgentState>& states) {
  double worst = 0.0;
  for (std::size_t i = 0; i < states.size(); ++i)
    for (std::size_t j = i + 1; j < states.size(); ++j)
      worst = std::max(worst, (states[i].q - states[j].q).norm());
  return worst;
}

inline double min_pairwise_distance(const std::vector<AgentState>& states) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < states.size(); ++i)
    for (std::size_t j = i + 1; j < states.size(); ++j)
      best = std::min(best, (states[i].q - states[j].q).norm());
  return best;
}

}  // namespace setrend::metrics
