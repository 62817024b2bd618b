#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <string>

#include "setrend/errors.hpp"

// Planar two-link manipulator plant: M(q) qddot + C(q, qdot) qdot = tau.
// There is no gravity term; the model is exactly the inertia + Coriolis
// structure above.

namespace setrend::dynamics {

/// Inertia parameters of one agent's two-link arm. Construct through
/// validated() so that M(q) is guaranteed positive definite for all q.
struct ManipulatorParams {
  double theta1;
  double theta2;
  double theta3;

  static ManipulatorParams validated(double t1, double t2, double t3) {
    if (!(std::isfinite(t1) && std::isfinite(t2) && std::isfinite(t3)))
      throw ValidationError("manipulator params must be finite");
    if (!(t3 > 0.0)) throw ValidationError("manipulator params: theta3 must be positive");
    if (t2 < 0.0) throw ValidationError("manipulator params: theta2 must be nonnegative");
    if (!(t1 > 2.0 * t2 + 1e-9))
      throw ValidationError("manipulator params: need theta1 > 2*theta2 for M > 0");
    // det M(q) depends on q only through cos(q_y); scan a grid and demand a
    // positive margin.
    for (int i = 0; i <= 256; ++i) {
      const double qy = 2.0 * std::numbers::pi * i / 256.0;
      const double c = std::cos(qy);
      const double det = (t1 + 2.0 * t2 * c) * t3 - (t3 + t2 * c) * (t3 + t2 * c);
      if (!(det > 1e-9))
        throw ValidationError("manipulator params: M(q) not positive definite (det(M(" +
                              std::to_string(qy) + ")) = " + std::to_string(det) + ")");
    }
    return ManipulatorParams{t1, t2, t3};
  }

  static ManipulatorParams standard() { return validated(1.301, 0.256, 0.096); }
};

/// Generalized coordinates and their derivatives for one agent (m = 2).
struct AgentState {
  Eigen::Vector2d q;
  Eigen::Vector2d qdot;

  bool finite() const { return q.allFinite() && qdot.allFinite(); }
};

inline Eigen::Matrix2d mass_matrix(const ManipulatorParams& p, const Eigen::Vector2d& q) {
  const double c = std::cos(q.y());
  Eigen::Matrix2d m;
  m << p.theta1 + 2.0 * p.theta2 * c, p.theta3 + p.theta2 * c,
       p.theta3 + p.theta2 * c,       p.theta3;
  return m;
}

inline Eigen::Matrix2d coriolis_matrix(const ManipulatorParams& p, const Eigen::Vector2d& q,
                                       const Eigen::Vector2d& qdot) {
  const double s = std::sin(q.y());
  Eigen::Matrix2d c;
  c << -p.theta2 * s * qdot.y(), -p.theta2 * s * (qdot.x() + qdot.y()),
        p.theta2 * s * qdot.x(),  0.0;
  return c;
}

/// Analytic time derivative of M along the flow (q_y evolves at qdot_y).
inline Eigen::Matrix2d mass_matrix_rate(const ManipulatorParams& p, const Eigen::Vector2d& q,
                                        const Eigen::Vector2d& qdot) {
  const double s = std::sin(q.y());
  const double rate = -p.theta2 * s * qdot.y();
  Eigen::Matrix2d md;
  md << 2.0 * rate, rate,
        rate,       0.0;
  return md;
}

/// qddot = M(q)^{-1} (tau - C(q, qdot) qdot), inverse by adjugate.
inline Eigen::Vector2d forward_dynamics(const ManipulatorParams& p, const AgentState& state,
                                        const Eigen::Vector2d& tau) {
  const Eigen::Matrix2d m = mass_matrix(p, state.q);
  const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  if (std::abs(det) < 1e-12)
    throw NumericFailure("forward_dynamics: inertia matrix is numerically singular", -1.0);
  const Eigen::Vector2d rhs = tau - coriolis_matrix(p, state.q, state.qdot) * state.qdot;
  Eigen::Vector2d qddot;
  qddot.x() = (m(1, 1) * rhs.x() - m(0, 1) * rhs.y()) / det;
  qddot.y() = (-m(1, 0) * rhs.x() + m(0, 0) * rhs.y()) / det;
  return qddot;
}

/// Max-entry norm of (Mdot - 2C) + (Mdot - 2C)^T; zero up to roundoff for
/// this plant.
inline double check_skew_symmetry(const ManipulatorParams& p, const Eigen::Vector2d& q,
                                  const Eigen::Vector2d& qdot) {
  const Eigen::Matrix2d a =
      mass_matrix_rate(p, q, qdot) - 2.0 * coriolis_matrix(p, q, qdot);
  return (a + a.transpose()).cwiseAbs().maxCoeff();
}

}  // namespace setrend::dynamics
