#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "setrend/convex.hpp"
#include "setrend/dynamics.hpp"
#include "setrend/errors.hpp"
#include "setrend/graph.hpp"

// The three set-tracking control laws and their supporting pieces: the
// pairwise avoidance potential, the damping-gain validator for the
// model-based switching law, and the max/min state-spread diagnostic.

namespace setrend::control {

using dynamics::AgentState;

enum class Law { FixedGraph, SwitchingFeedbackLinearized, CollisionAvoiding };

inline std::string law_name(Law law) {
  switch (law) {
    case Law::FixedGraph: return "fixed";
    case Law::SwitchingFeedbackLinearized: return "switching";
    case Law::CollisionAvoiding: return "collision";
  }
  return "?";
}

/// Avoidance potential shape: zero at and beyond the sensing radius,
/// unbounded as the distance falls to the safety radius.
struct PotentialParams {
  double sensing_radius;  // R
  double safety_radius;   // r

  static PotentialParams validated(double R, double r) {
    if (!(R > r && r > 0.0) || !std::isfinite(R))
      throw ValidationError("potential params: need sensing R > safety r > 0");
    return PotentialParams{R, r};
  }
};

struct ControllerSpec {
  Law law = Law::FixedGraph;
  double k = 1.0;
  std::optional<PotentialParams> avoidance;

  void validate() const {
    if (!(k > 0.0) || !std::isfinite(k))
      throw ValidationError("controller: damping gain k must be positive");
    if ((law == Law::CollisionAvoiding) != avoidance.has_value())
      throw ValidationError(
          "controller: avoidance radii are required for the collision law and "
          "forbidden otherwise");
  }
};

namespace detail {

inline Eigen::Vector2d projection_error(const convex::ConvexRegion& region,
                                        const Eigen::Vector2d& q) {
  const auto proj = convex::project(region, q);
  return q - Eigen::Vector2d(proj.point);
}

inline Eigen::Vector2d consensus_term(int i, const std::vector<AgentState>& states,
                                      const graph::WeightedGraph& g) {
  Eigen::Vector2d sum = Eigen::Vector2d::Zero();
  for (int j = 0; j < static_cast<int>(states.size()); ++j) {
    const double a = g.weight(i, j);
    if (a > 0.0) sum += a * (states[i].q - states[j].q);
  }
  return sum;
}

}  // namespace detail

/// tau_i = -k qdot_i - (q_i - P_{X_i}(q_i)) - sum_j a_ij (q_i - q_j).
inline Eigen::Vector2d control_fixed(int i, const std::vector<AgentState>& states,
                                     const convex::ConvexRegion& region_i,
                                     const graph::WeightedGraph& g, double k) {
  return -k * states[i].qdot - detail::projection_error(region_i, states[i].q) -
         detail::consensus_term(i, states, g);
}

/// Model-based law for switching graphs:
/// tau_i = C qdot_i - M [k qdot_i + (q_i - P_{X_i}(q_i)) + sum_j a_ij(t)(q_i - q_j)],
/// which feedback-linearizes the plant to
/// qddot_i = -k qdot_i - (q_i - P_{X_i}(q_i)) - sum_j a_ij(t)(q_i - q_j).
inline Eigen::Vector2d control_switching(int i, const std::vector<AgentState>& states,
                                         const convex::ConvexRegion& region_i,
                                         const graph::WeightedGraph& g_t, double k,
                                         const dynamics::ManipulatorParams& params_i) {
  const Eigen::Vector2d bracket = k * states[i].qdot +
                                  detail::projection_error(region_i, states[i].q) +
                                  detail::consensus_term(i, states, g_t);
  return dynamics::coriolis_matrix(params_i, states[i].q, states[i].qdot) * states[i].qdot -
         dynamics::mass_matrix(params_i, states[i].q) * bracket;
}

/// Pairwise potential as a function of the squared distance d2:
/// zero for d2 >= R^2, ((d2 - R^2)/(d2 - r^2))^2 in between.
inline double potential(const PotentialParams& p, double d2) {
  const double r2 = p.safety_radius * p.safety_radius;
  const double R2 = p.sensing_radius * p.sensing_radius;
  if (d2 <= r2)
    throw SafetyViolation("potential: pair at or inside the safety radius",
                          std::sqrt(std::max(d2, 0.0)));
  if (d2 >= R2) return 0.0;
  const double ratio = (d2 - R2) / (d2 - r2);
  return ratio * ratio;
}

/// Gradient of the potential with respect to q_i:
/// 4 (R^2 - r^2)(d^2 - R^2) / (d^2 - r^2)^3 * (q_i - q_j) inside the sensing
/// band, zero beyond it. Antisymmetric under swapping the pair.
inline Eigen::Vector2d potential_gradient(const PotentialParams& p, const Eigen::Vector2d& qi,
                                          const Eigen::Vector2d& qj) {
  const Eigen::Vector2d diff = qi - qj;
  const double d2 = diff.squaredNorm();
  const double r2 = p.safety_radius * p.safety_radius;
  const double R2 = p.sensing_radius * p.sensing_radius;
  if (d2 <= r2)
    throw SafetyViolation("potential_gradient: pair at or inside the safety radius",
                          std::sqrt(d2));
  if (d2 >= R2) return Eigen::Vector2d::Zero();
  const double denom = d2 - r2;
  const double factor = 4.0 * (R2 - r2) * (d2 - R2) / (denom * denom * denom);
  return factor * diff;
}

/// Fixed-graph law plus the avoidance term. The avoidance sum runs over all
/// agents within the sensing radius, not only graph neighbors.
inline Eigen::Vector2d control_collision(int i, const std::vector<AgentState>& states,
                                         const convex::ConvexRegion& region_i,
                                         const graph::WeightedGraph& g, double k,
                                         const PotentialParams& pot) {
  Eigen::Vector2d tau = control_fixed(i, states, region_i, g, k);
  for (int j = 0; j < static_cast<int>(states.size()); ++j) {
    if (j == i) continue;
    try {
      tau -= potential_gradient(pot, states[i].q, states[j].q);
    } catch (SafetyViolation& violation) {
      violation.agent_i = i;
      violation.agent_j = j;
      throw;
    }
  }
  return tau;
}

struct GainCheck {
  bool ok;
  double threshold;         // 2 + max_p lambda_max(L_p) / 4
  double coarse_threshold;  // 2 + (n - 1) a^* / 2
};

/// Damping-gain condition for the switching law. `ok` uses the exact
/// eigenvalue threshold; the coarse bound is reported alongside it.
inline GainCheck gain_condition(const graph::GraphSchedule& schedule, double k) {
  const double lambda_max = graph::max_laplacian_eigenvalue(schedule);
  const double threshold = 2.0 + 0.25 * lambda_max;
  const double a_star = schedule.weight_bounds().second;
  const double coarse = 2.0 + 0.5 * (schedule.node_count() - 1) * a_star;
  return GainCheck{k > threshold, threshold, coarse};
}

struct SpreadDiagnostic {
  Eigen::Vector2d hbar;  // per-coordinate max of {q_i, q_i + (2/k) qdot_i}
  Eigen::Vector2d ell;   // per-coordinate min of the same values
  double max_delta;      // max_i || (4/k^2) sum_j a_ij (qdot_i - qdot_j) - (2/k)(q_i - P_i(q_i)) ||
};

/// Diagnostic for the transformed switching-law coordinates: the per-axis
/// spread of the 2n values {q_i, q_i + (2/k) qdot_i} and the disturbance bound
/// that caps the spread's growth rate.
inline SpreadDiagnostic spread_diagnostic(const std::vector<AgentState>& states,
                                          const std::vector<convex::ConvexRegion>& regions,
                                          const graph::WeightedGraph& g_t, double k) {
  if (!(k > 0.0)) throw ValidationError("spread_diagnostic: k must be positive");
  if (states.empty() || states.size() != regions.size())
    throw ValidationError("spread_diagnostic: states/regions mismatch");
  SpreadDiagnostic out;
  out.hbar = Eigen::Vector2d::Constant(-std::numeric_limits<double>::infinity());
  out.ell = Eigen::Vector2d::Constant(std::numeric_limits<double>::infinity());
  out.max_delta = 0.0;
  const int n = static_cast<int>(states.size());
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector2d shifted = states[i].q + (2.0 / k) * states[i].qdot;
    out.hbar = out.hbar.cwiseMax(states[i].q).cwiseMax(shifted);
    out.ell = out.ell.cwiseMin(states[i].q).cwiseMin(shifted);

    Eigen::Vector2d coupling = Eigen::Vector2d::Zero();
    for (int j = 0; j < n; ++j) {
      const double a = g_t.weight(i, j);
      if (a > 0.0) coupling += a * (states[i].qdot - states[j].qdot);
    }
    const Eigen::Vector2d delta = (4.0 / (k * k)) * coupling -
                                  (2.0 / k) * detail::projection_error(regions[i], states[i].q);
    out.max_delta = std::max(out.max_delta, delta.norm());
  }
  return out;
}

}  // namespace setrend::control
