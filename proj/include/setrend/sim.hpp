#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "setrend/control.hpp"
#include "setrend/convex.hpp"
#include "setrend/dynamics.hpp"
#include "setrend/errors.hpp"
#include "setrend/graph.hpp"
#include "setrend/metrics.hpp"

// Deterministic fixed-step integration of the n-agent closed loop. One run is
// single-threaded and bitwise reproducible for a fixed scenario and build.

namespace setrend::sim {

using dynamics::AgentState;

struct Tolerances {
  double dist = 1e-2;       // per-agent distance to the target intersection
  double consensus = 1e-2;  // max pairwise coordinate gap
  double velocity = 1e-3;   // per-agent speed
};

struct Scenario {
  std::string name;
  int n = 0;
  int m = 2;
  std::vector<dynamics::ManipulatorParams> params;  // one per agent
  std::vector<convex::ConvexRegion> regions;        // one per agent
  graph::GraphSchedule schedule = graph::GraphSchedule::constant(graph::WeightedGraph::empty(1));
  control::ControllerSpec controller;
  std::vector<AgentState> initial;
  double dt = 1e-3;
  double t_end = 100.0;
  int record_every = 100;
  std::uint64_t seed = 1;
  Tolerances tolerances;
  bool nonconvex_demo = false;

  int step_count() const { return static_cast<int>(std::llround(t_end / dt)); }

  /// Load-time checks; throws ValidationError naming the violated invariant.
  void validate() const {
    if (n < 1) throw ValidationError("scenario: needs at least one agent");
    if (m != 2) throw ValidationError("scenario: coordinate dimension must be 2");
    if (static_cast<int>(regions.size()) != n ||
        static_cast<int>(initial.size()) != n ||
        static_cast<int>(params.size()) != n)
      throw ValidationError("scenario: regions, params and initial states must all have n entries");
    if (!(dt > 0.0) || !(t_end > 0.0)) throw ValidationError("scenario: dt and t_end must be positive");
    if (record_every < 1) throw ValidationError("scenario: record_every must be >= 1");
    const double steps = t_end / dt;
    if (std::abs(steps - std::llround(steps)) > 1e-6)
      throw ValidationError("scenario: t_end must be an integer number of steps");
    for (const auto& s : initial)
      if (!s.finite()) throw ValidationError("scenario: initial states must be finite");
    for (const auto& r : regions) {
      if (r.dim() != m) throw ValidationError("scenario: region dimension mismatch");
      if (!r.is_convex() && !nonconvex_demo)
        throw ValidationError(
            "scenario: union-of-convex sets require the non-convex demo mode");
    }
    if (nonconvex_demo && controller.law != control::Law::FixedGraph)
      throw ValidationError("scenario: non-convex demo mode supports the fixed-graph law only");
    if (schedule.node_count() != n)
      throw ValidationError("scenario: graph node count must equal the agent count");

    // Switch instants must land on integration-step boundaries.
    if (!schedule.is_constant()) {
      for (double b : schedule.boundaries_in(schedule.start_time(), t_end)) {
        const double ratio = (b - schedule.start_time()) / dt;
        if (std::abs(ratio - std::llround(ratio)) > 1e-6)
          throw ValidationError("scenario: switch time " + std::to_string(b) +
                                " does not fall on a step boundary");
      }
      if (schedule.is_cyclic()) {
        const double ratio = schedule.period() / dt;
        if (std::abs(ratio - std::llround(ratio)) > 1e-6)
          throw ValidationError("scenario: schedule period is not a multiple of dt");
      }
    }

    // The gain check runs first for the switching law so that any bad k is
    // rejected with the threshold cited.
    if (controller.law == control::Law::SwitchingFeedbackLinearized) {
      const auto gain = control::gain_condition(schedule, controller.k);
      if (!gain.ok)
        throw ValidationError(
            "scenario: switching law requires k > " + std::to_string(gain.threshold) +
            " (coarse bound " + std::to_string(gain.coarse_threshold) + "), got k = " +
            std::to_string(controller.k));
    }
    controller.validate();
    if (controller.law == control::Law::CollisionAvoiding) {
      const double r = controller.avoidance->safety_radius;
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
          if ((initial[i].q - initial[j].q).norm() <= r)
            throw ValidationError("scenario: agents " + std::to_string(i + 1) + " and " +
                                  std::to_string(j + 1) +
                                  " start at or inside the safety radius");
    }
    // Assumption check: the target intersection must be reachable by the
    // projection machinery (nonempty) outside the demo mode.
    if (!nonconvex_demo) {
      const auto x0 = convex::project_intersection(regions, Eigen::VectorXd::Zero(m));
      if (!x0.converged)
        throw ValidationError("scenario: could not certify a nonempty target intersection");
    }
  }
};

enum class Termination { Completed, SafetyViolation, NumericFailure };

inline std::string termination_name(Termination t) {
  switch (t) {
    case Termination::Completed: return "completed";
    case Termination::SafetyViolation: return "safety_violation";
    case Termination::NumericFailure: return "numeric_failure";
  }
  return "?";
}

struct Sample {
  double t = 0.0;
  std::vector<AgentState> states;
  std::vector<Eigen::Vector2d> controls;
  metrics::StepMetrics metrics;
};

struct Trajectory {
  std::vector<Sample> samples;
  Termination termination = Termination::Completed;
  double termination_time = 0.0;
  std::string termination_detail;
};

namespace detail {

inline std::vector<Eigen::Vector2d> controls_at(const Scenario& sc,
                                                const std::vector<AgentState>& states,
                                                double t) {
  const graph::WeightedGraph& g = sc.schedule.active(t);
  std::vector<Eigen::Vector2d> taus(sc.n);
  for (int i = 0; i < sc.n; ++i) {
    switch (sc.controller.law) {
      case control::Law::FixedGraph:
        taus[i] = control::control_fixed(i, states, sc.regions[i], g, sc.controller.k);
        break;
      case control::Law::SwitchingFeedbackLinearized:
        taus[i] = control::control_switching(i, states, sc.regions[i], g, sc.controller.k,
                                             sc.params[i]);
        break;
      case control::Law::CollisionAvoiding:
        taus[i] = control::control_collision(i, states, sc.regions[i], g, sc.controller.k,
                                             *sc.controller.avoidance);
        break;
    }
  }
  return taus;
}

struct Derivative {
  std::vector<Eigen::Vector2d> dq;
  std::vector<Eigen::Vector2d> dqdot;
};

inline Derivative derivative_at(const Scenario& sc, const std::vector<AgentState>& states,
                                double t) {
  Derivative d;
  d.dq.resize(sc.n);
  d.dqdot.resize(sc.n);
  const auto taus = controls_at(sc, states, t);
  for (int i = 0; i < sc.n; ++i) {
    d.dq[i] = states[i].qdot;
    d.dqdot[i] = dynamics::forward_dynamics(sc.params[i], states[i], taus[i]);
  }
  return d;
}

inline std::vector<AgentState> advanced(const std::vector<AgentState>& states,
                                        const Derivative& d, double h) {
  std::vector<AgentState> out(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    out[i].q = states[i].q + h * d.dq[i];
    out[i].qdot = states[i].qdot + h * d.dqdot[i];
  }
  return out;
}

}  // namespace detail

/// One classic 4-stage Runge-Kutta step of the coupled closed loop. The
/// control — and with it the active graph — is re-evaluated at each stage
/// time. Throws SafetyViolation / NumericFailure with the offending time.
inline std::vector<AgentState> step(const Scenario& sc, const std::vector<AgentState>& states,
                                    double t, double dt) {
  using detail::advanced;
  try {
    const auto k1 = detail::derivative_at(sc, states, t);
    const auto k2 = detail::derivative_at(sc, advanced(states, k1, 0.5 * dt), t + 0.5 * dt);
    const auto k3 = detail::derivative_at(sc, advanced(states, k2, 0.5 * dt), t + 0.5 * dt);
    const auto k4 = detail::derivative_at(sc, advanced(states, k3, dt), t + dt);

    std::vector<AgentState> next(states.size());
    for (std::size_t i = 0; i < states.size(); ++i) {
      next[i].q = states[i].q + (dt / 6.0) * (k1.dq[i] + 2.0 * k2.dq[i] + 2.0 * k3.dq[i] + k4.dq[i]);
      next[i].qdot = states[i].qdot +
                     (dt / 6.0) * (k1.dqdot[i] + 2.0 * k2.dqdot[i] + 2.0 * k3.dqdot[i] + k4.dqdot[i]);
    }

    for (const auto& s : next)
      if (!s.finite()) throw NumericFailure("step: state became non-finite", t + dt);
    if (sc.controller.law == control::Law::CollisionAvoiding) {
      const double r = sc.controller.avoidance->safety_radius;
      for (std::size_t i = 0; i < next.size(); ++i)
        for (std::size_t j = i + 1; j < next.size(); ++j) {
          const double d = (next[i].q - next[j].q).norm();
          if (d <= r)
            throw SafetyViolation("step: safety radius violated", d, static_cast<int>(i),
                                  static_cast<int>(j), t + dt);
        }
    }
    return next;
  } catch (SafetyViolation& v) {
    if (v.time < 0.0) v.time = t;
    throw;
  } catch (NumericFailure& f) {
    if (f.time < 0.0) f.time = t;
    throw;
  }
}

namespace detail {

inline metrics::StepMetrics metrics_at(const Scenario& sc, const std::vector<AgentState>& states,
                                       double t, const std::optional<Eigen::Vector2d>& q0) {
  metrics::StepMetrics out;
  out.dist_own.resize(sc.n);
  out.dist_x0.resize(sc.n);
  out.speed.resize(sc.n);
  const graph::WeightedGraph& g = sc.schedule.active(t);
  for (int i = 0; i < sc.n; ++i) {
    out.dist_own[i] = convex::distance(sc.regions[i], states[i].q);
    out.dist_x0[i] = sc.nonconvex_demo
                         ? std::numeric_limits<double>::quiet_NaN()
                         : convex::project_intersection(sc.regions, states[i].q).distance;
    out.speed[i] = states[i].qdot.norm();
  }
  out.consensus_error = metrics::consensus_error(states);
  out.min_pairwise = metrics::min_pairwise_distance(states);
  switch (sc.controller.law) {
    case control::Law::FixedGraph:
      out.lyapunov = metrics::lyapunov_fixed(states, sc.regions, g, sc.params);
      break;
    case control::Law::SwitchingFeedbackLinearized: {
      out.lyapunov = metrics::lyapunov_switching(states, sc.regions, sc.controller.k, *q0);
      const auto spread = control::spread_diagnostic(states, sc.regions, g, sc.controller.k);
      out.has_spread = true;
      out.hbar = spread.hbar;
      out.ell = spread.ell;
      out.max_delta = spread.max_delta;
      break;
    }
    case control::Law::CollisionAvoiding:
      out.lyapunov = metrics::lyapunov_collision(states, sc.regions, g, sc.params,
                                                 *sc.controller.avoidance);
      break;
  }
  return out;
}

}  // namespace detail

/// Runs the scenario to t_end, sampling every record_every steps (plus the
/// final state). Safety violations and numeric failures terminate the run and
/// are recorded on the trajectory rather than thrown.
inline Trajectory run(const Scenario& sc) {
  sc.validate();

  std::optional<Eigen::Vector2d> q0;
  if (sc.controller.law == control::Law::SwitchingFeedbackLinearized)
    q0 = Eigen::Vector2d(
        convex::project_intersection(sc.regions, Eigen::VectorXd::Zero(sc.m)).point);

  Trajectory traj;
  std::vector<AgentState> states = sc.initial;
  const int steps = sc.step_count();
  auto record = [&](int step_index) {
    const double t = step_index * sc.dt;
    Sample s;
    s.t = t;
    s.states = states;
    s.controls = detail::controls_at(sc, states, t);
    s.metrics = detail::metrics_at(sc, states, t, q0);
    traj.samples.push_back(std::move(s));
  };

  record(0);
  for (int sidx = 0; sidx < steps; ++sidx) {
    const double t = sidx * sc.dt;
    try {
      states = step(sc, states, t, sc.dt);
    } catch (const SafetyViolation& v) {
      traj.termination = Termination::SafetyViolation;
      traj.termination_time = v.time;
      traj.termination_detail = std::string(v.what()) + " (agents " +
                                std::to_string(v.agent_i + 1) + "," +
                                std::to_string(v.agent_j + 1) + ", distance " +
                                std::to_string(v.distance) + ")";
      return traj;
    } catch (const NumericFailure& f) {
      traj.termination = Termination::NumericFailure;
      traj.termination_time = f.time;
      traj.termination_detail = f.what();
      return traj;
    }
    const int done = sidx + 1;
    if (done % sc.record_every == 0 || done == steps) record(done);
  }
  traj.termination = Termination::Completed;
  traj.termination_time = steps * sc.dt;
  return traj;
}

}  // namespace setrend::sim
