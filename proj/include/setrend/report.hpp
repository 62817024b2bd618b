#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "setrend/convex.hpp"
#include "setrend/metrics.hpp"
#include "setrend/sim.hpp"

// Post-run summary: the aggregation verdict clauses, Lyapunov monotonicity,
// and (for the collision-avoiding law on a fixed connected graph) the
// ultimate-bound certificate.

namespace setrend::report {

/// Per-step slack allowed on the Lyapunov decrease, as a fraction of V(0),
/// absorbing integration error.
inline constexpr double kLyapunovSlack = 1e-6;
/// Window and speed threshold used to flag sustained oscillation.
inline constexpr double kFinalWindowSeconds = 20.0;
inline constexpr double kOscillationSpeed = 1e-2;

struct UltimateBoundCheck {
  double v0 = 0.0;
  double lambda2 = 0.0;
  double rho_hat = 1.0;
  int rho_samples = 0;
  std::uint64_t rho_seed = 0;
  Eigen::Vector2d sample_lo = Eigen::Vector2d::Zero();
  Eigen::Vector2d sample_hi = Eigen::Vector2d::Zero();
  double b_star = 0.0;
  double final_max_dist_x0 = 0.0;
  bool dist_within_bound = false;
  double pairwise_bound = 0.0;  // 2 sqrt(V0 / lambda2)
  bool consensus_within_pairwise_bound = false;
  double safety_radius = 0.0;
  double min_pairwise_over_run = 0.0;
  bool safety_held = false;
};

struct AggregationReport {
  std::string scenario;
  std::string law;
  int n = 0;
  std::string termination;
  double termination_time = 0.0;
  std::string termination_detail;
  double t_final = 0.0;

  metrics::StepMetrics final_metrics;
  bool x0_distance_available = true;

  sim::Tolerances tolerances;
  bool dist_ok = false;
  bool consensus_ok = false;
  bool velocity_ok = false;
  bool aggregation_achieved = false;

  double v0 = 0.0;
  double v_final = 0.0;
  bool lyapunov_monotone = false;
  double lyapunov_step_tolerance = 0.0;

  double final_window_seconds = kFinalWindowSeconds;
  double final_window_max_speed = 0.0;
  bool oscillating = false;

  double min_pairwise_over_run = std::numeric_limits<double>::infinity();

  std::optional<UltimateBoundCheck> ultimate;

  nlohmann::json to_json() const;
};

namespace detail {

/// Axis-aligned bounds of a region, when the shape provides them.
inline bool accumulate_bounds(const convex::ConvexRegion& region, Eigen::Vector2d& lo,
                              Eigen::Vector2d& hi) {
  using namespace convex;
  return std::visit(
      [&](const auto& s) -> bool {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Ball>) {
          lo = lo.cwiseMin(Eigen::Vector2d(s.center) - Eigen::Vector2d::Constant(s.radius));
          hi = hi.cwiseMax(Eigen::Vector2d(s.center) + Eigen::Vector2d::Constant(s.radius));
          return true;
        } else if constexpr (std::is_same_v<T, Box>) {
          lo = lo.cwiseMin(Eigen::Vector2d(s.lo));
          hi = hi.cwiseMax(Eigen::Vector2d(s.hi));
          return true;
        } else if constexpr (std::is_same_v<T, UnionOfConvex>) {
          for (const auto& m : s.members)
            if (!accumulate_bounds(m, lo, hi)) return false;
          return true;
        } else {
          return false;  // halfspace intersections may be unbounded
        }
      },
      region.value());
}

}  // namespace detail

/// Deterministic sampling box for the regularity estimate: the hull of the
/// target sets and the initial agent positions, padded outward.
inline convex::Box regularity_sample_box(const sim::Scenario& sc, double pad = 2.0) {
  Eigen::Vector2d lo = Eigen::Vector2d::Constant(std::numeric_limits<double>::infinity());
  Eigen::Vector2d hi = Eigen::Vector2d::Constant(-std::numeric_limits<double>::infinity());
  for (const auto& s : sc.initial) {
    lo = lo.cwiseMin(s.q);
    hi = hi.cwiseMax(s.q);
  }
  for (const auto& r : sc.regions) detail::accumulate_bounds(r, lo, hi);
  lo.array() -= pad;
  hi.array() += pad;
  return convex::Box{lo, hi};
}

inline AggregationReport summarize(const sim::Scenario& sc, const sim::Trajectory& traj) {
  if (traj.samples.empty()) throw ValidationError("summarize: empty trajectory");
  AggregationReport rep;
  rep.scenario = sc.name;
  rep.law = control::law_name(sc.controller.law);
  rep.n = sc.n;
  rep.termination = sim::termination_name(traj.termination);
  rep.termination_time = traj.termination_time;
  rep.termination_detail = traj.termination_detail;

  const sim::Sample& last = traj.samples.back();
  rep.t_final = last.t;
  rep.final_metrics = last.metrics;
  rep.x0_distance_available = !sc.nonconvex_demo;

  rep.tolerances = sc.tolerances;
  // Without a computable intersection distance (non-convex demo) the sound
  // substitute is each agent's own-set distance: X0 is contained in every X_i,
  // so failing the own-set clause certifies failing the intersection clause.
  const double dist_metric = rep.x0_distance_available ? last.metrics.max_dist_x0()
                                                       : last.metrics.max_dist_own();
  rep.dist_ok = dist_metric <= sc.tolerances.dist;
  rep.consensus_ok = last.metrics.consensus_error <= sc.tolerances.consensus;
  rep.velocity_ok = last.metrics.max_speed() <= sc.tolerances.velocity;
  rep.aggregation_achieved = rep.dist_ok && rep.consensus_ok && rep.velocity_ok &&
                             traj.termination == sim::Termination::Completed;

  rep.v0 = traj.samples.front().metrics.lyapunov;
  rep.v_final = last.metrics.lyapunov;
  rep.lyapunov_step_tolerance = kLyapunovSlack * std::max(rep.v0, 1e-12);
  rep.lyapunov_monotone = true;
  for (std::size_t s = 0; s + 1 < traj.samples.size(); ++s)
    if (traj.samples[s + 1].metrics.lyapunov >
        traj.samples[s].metrics.lyapunov + rep.lyapunov_step_tolerance) {
      rep.lyapunov_monotone = false;
      break;
    }

  rep.final_window_max_speed = 0.0;
  for (const auto& s : traj.samples) {
    rep.min_pairwise_over_run = std::min(rep.min_pairwise_over_run, s.metrics.min_pairwise);
    if (s.t >= rep.t_final - kFinalWindowSeconds)
      rep.final_window_max_speed = std::max(rep.final_window_max_speed, s.metrics.max_speed());
  }
  rep.oscillating = rep.final_window_max_speed > kOscillationSpeed;

  const bool ultimate_applies = sc.controller.law == control::Law::CollisionAvoiding &&
                                sc.schedule.is_constant() && !sc.nonconvex_demo &&
                                graph::is_connected(sc.schedule.graphs().front());
  if (ultimate_applies) {
    UltimateBoundCheck ub;
    const auto& g = sc.schedule.graphs().front();
    ub.v0 = rep.v0;
    ub.lambda2 = graph::algebraic_connectivity(g);
    const convex::Box box = regularity_sample_box(sc);
    ub.sample_lo = Eigen::Vector2d(box.lo);
    ub.sample_hi = Eigen::Vector2d(box.hi);
    ub.rho_samples = 2000;
    ub.rho_seed = sc.seed;
    ub.rho_hat = std::max(
        1.0, convex::estimate_linear_regularity(sc.regions, box, ub.rho_samples, ub.rho_seed));
    ub.b_star = metrics::ultimate_bound(ub.v0, g, ub.rho_hat, sc.m);
    ub.final_max_dist_x0 = last.metrics.max_dist_x0();
    ub.dist_within_bound = ub.final_max_dist_x0 <= ub.b_star;
    ub.pairwise_bound = 2.0 * std::sqrt(ub.v0 / ub.lambda2);
    ub.consensus_within_pairwise_bound = last.metrics.consensus_error <= ub.pairwise_bound;
    ub.safety_radius = sc.controller.avoidance->safety_radius;
    ub.min_pairwise_over_run = rep.min_pairwise_over_run;
    ub.safety_held = traj.termination != sim::Termination::SafetyViolation &&
                     rep.min_pairwise_over_run > ub.safety_radius;
    rep.ultimate = ub;
  }
  return rep;
}

inline nlohmann::json AggregationReport::to_json() const {
  auto finite_or_null = [](double v) -> nlohmann::json {
    if (std::isnan(v)) return nullptr;
    return v;
  };
  nlohmann::json j;
  j["scenario"] = scenario;
  j["law"] = law;
  j["n"] = n;
  j["termination"] = termination;
  j["termination_time"] = termination_time;
  if (!termination_detail.empty()) j["termination_detail"] = termination_detail;
  j["t_final"] = t_final;
  j["final"] = {
      {"lyapunov", final_metrics.lyapunov},
      {"max_dist_own", final_metrics.max_dist_own()},
      {"max_dist_X0", finite_or_null(x0_distance_available
                                         ? final_metrics.max_dist_x0()
                                         : std::numeric_limits<double>::quiet_NaN())},
      {"consensus_error", final_metrics.consensus_error},
      {"max_speed", final_metrics.max_speed()},
      {"min_pairwise", final_metrics.min_pairwise},
  };
  if (final_metrics.has_spread) {
    j["final"]["spread"] = {final_metrics.hbar.x() - final_metrics.ell.x(),
                            final_metrics.hbar.y() - final_metrics.ell.y()};
    j["final"]["max_delta"] = final_metrics.max_delta;
  }
  j["aggregation"] = {
      {"tolerances",
       {{"dist", tolerances.dist},
        {"consensus", tolerances.consensus},
        {"velocity", tolerances.velocity}}},
      {"x0_distance_available", x0_distance_available},
      {"dist_ok", dist_ok},
      {"consensus_ok", consensus_ok},
      {"velocity_ok", velocity_ok},
      {"achieved", aggregation_achieved},
  };
  j["lyapunov"] = {
      {"V0", v0},
      {"V_final", v_final},
      {"monotone", lyapunov_monotone},
      {"per_step_tolerance", lyapunov_step_tolerance},
  };
  j["final_window"] = {
      {"seconds", final_window_seconds},
      {"max_speed", final_window_max_speed},
      {"oscillating", oscillating},
  };
  j["min_pairwise_over_run"] = min_pairwise_over_run;
  if (ultimate) {
    j["ultimate_bound"] = {
        {"certificate", "lower-bound (sampled rho)"},
        {"V0", ultimate->v0},
        {"lambda2", ultimate->lambda2},
        {"rho_hat", ultimate->rho_hat},
        {"rho_samples", ultimate->rho_samples},
        {"rho_seed", ultimate->rho_seed},
        {"sample_box",
         {{ultimate->sample_lo.x(), ultimate->sample_lo.y()},
          {ultimate->sample_hi.x(), ultimate->sample_hi.y()}}},
        {"B_star", ultimate->b_star},
        {"final_max_dist_X0", ultimate->final_max_dist_x0},
        {"final_dist_le_B_star", ultimate->dist_within_bound},
        {"pairwise_bound", ultimate->pairwise_bound},
        {"final_consensus_le_pairwise_bound", ultimate->consensus_within_pairwise_bound},
        {"safety_radius", ultimate->safety_radius},
        {"min_pairwise_over_run", ultimate->min_pairwise_over_run},
        {"safety_held", ultimate->safety_held},
    };
  }
  return j;
}

}  // namespace setrend::report
