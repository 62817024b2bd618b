#pragma once

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "setrend/artifacts.hpp"
#include "setrend/report.hpp"
#include "setrend/scenario_json.hpp"
#include "setrend/sim.hpp"

// Command implementations behind the setrend executable. Exit codes:
//   0 completed, 1 replication check failed, 2 safety violation,
//   3 validation or parse failure, 4 numeric failure.

namespace setrend::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitReplicationFail = 1;
inline constexpr int kExitSafety = 2;
inline constexpr int kExitValidation = 3;
inline constexpr int kExitNumeric = 4;

inline int termination_exit_code(sim::Termination t) {
  switch (t) {
    case sim::Termination::Completed: return kExitOk;
    case sim::Termination::SafetyViolation: return kExitSafety;
    case sim::Termination::NumericFailure: return kExitNumeric;
  }
  return kExitNumeric;
}

inline int cmd_run(const std::string& scenario_path, const std::string& out_dir,
                   scenario::Overrides overrides = {}) {
  try {
    if (!overrides.placement_seed) overrides.placement_seed = scenario::env_seed_override();
    const sim::Scenario sc = scenario::load_file(scenario_path, overrides);
    const sim::Trajectory traj = sim::run(sc);
    const report::AggregationReport rep = report::summarize(sc, traj);
    const auto files = artifacts::write_run_artifacts(sc, traj, rep, out_dir);
    std::printf("scenario %s: %s at t=%g\n", sc.name.c_str(), rep.termination.c_str(),
                rep.termination_time);
    std::printf("  aggregation achieved: %s (dist %s, consensus %s, velocity %s)\n",
                rep.aggregation_achieved ? "yes" : "no", rep.dist_ok ? "ok" : "FAIL",
                rep.consensus_ok ? "ok" : "FAIL", rep.velocity_ok ? "ok" : "FAIL");
    std::printf("  wrote %s\n", files.trajectory_csv.string().c_str());
    std::printf("  wrote %s\n", files.report_json.string().c_str());
    for (const auto& p : files.plots) std::printf("  wrote %s\n", p.string().c_str());
    if (!rep.termination_detail.empty())
      std::printf("  detail: %s\n", rep.termination_detail.c_str());
    return termination_exit_code(traj.termination);
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "validation error: %s\n", e.what());
    return kExitValidation;
  }
}

inline int cmd_check_graph(const std::string& scenario_path, double window) {
  try {
    const sim::Scenario sc = scenario::load_file(scenario_path);
    const auto& schedule = sc.schedule;
    std::printf("scenario %s: %zu graph(s), %s schedule\n", sc.name.c_str(),
                schedule.graphs().size(),
                schedule.is_constant() ? "constant" : (schedule.is_cyclic() ? "cyclic" : "timed"));
    for (std::size_t p = 0; p < schedule.graphs().size(); ++p) {
      const auto& g = schedule.graphs()[p];
      std::printf("  graph %zu: connected=%s lambda_max=%.10g\n", p,
                  graph::is_connected(g) ? "true" : "false", graph::max_laplacian_eigenvalue(g));
    }
    if (!schedule.is_constant()) {
      const bool ujc = graph::is_uniformly_jointly_connected(schedule, sc.t_end, window);
      std::printf("  uniformly jointly connected (window %g over [0,%g]): %s\n", window,
                  sc.t_end, ujc ? "true" : "false");
    }
    const auto gain = control::gain_condition(schedule, sc.controller.k);
    std::printf("  gain threshold (exact) = %.10g, coarse bound = %.10g, k = %g -> %s\n",
                gain.threshold, gain.coarse_threshold, sc.controller.k,
                gain.ok ? "passes" : "fails");
    return kExitOk;
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "validation error: %s\n", e.what());
    return kExitValidation;
  }
}

namespace detail {

struct Check {
  std::string label;
  bool pass;
};

inline void print_checks(const std::string& heading, const std::vector<Check>& checks) {
  std::printf("%s\n", heading.c_str());
  for (const auto& c : checks)
    std::printf("  [%s] %s\n", c.pass ? "PASS" : "FAIL", c.label.c_str());
}

inline bool all_pass(const std::vector<Check>& checks) {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

struct RunOutput {
  sim::Scenario sc;
  sim::Trajectory traj;
  report::AggregationReport rep;
};

inline RunOutput run_embedded(const std::string& name, const std::filesystem::path& out_dir,
                              scenario::Overrides overrides = {}, std::string rename = "") {
  if (!overrides.placement_seed) overrides.placement_seed = scenario::env_seed_override();
  sim::Scenario sc = scenario::load_embedded(name, overrides);
  if (!rename.empty()) sc.name = rename;
  sim::Trajectory traj = sim::run(sc);
  report::AggregationReport rep = report::summarize(sc, traj);
  artifacts::write_run_artifacts(sc, traj, rep, out_dir);
  return {std::move(sc), std::move(traj), std::move(rep)};
}

/// Forward-difference growth of the per-axis spread max against the
/// disturbance bound, checked at every recorded sample pair.
inline bool spread_growth_bounded(const sim::Trajectory& traj, double slack = 1e-3) {
  for (std::size_t s = 0; s + 1 < traj.samples.size(); ++s) {
    const auto& a = traj.samples[s];
    const auto& b = traj.samples[s + 1];
    if (!a.metrics.has_spread || !b.metrics.has_spread) return false;
    const double h = b.t - a.t;
    for (int c = 0; c < 2; ++c)
      if ((b.metrics.hbar[c] - a.metrics.hbar[c]) / h > a.metrics.max_delta + slack)
        return false;
  }
  return true;
}

inline int replicate_one(const std::string& which, const std::filesystem::path& out_dir);

}  // namespace detail

inline const std::vector<std::string>& replicate_names() {
  static const std::vector<std::string> names{"4c1", "4c2", "4c3",
                                              "5b-star", "5b-complete", "5c"};
  return names;
}

inline int cmd_replicate(const std::string& which, const std::string& out_dir) {
  try {
    if (which == "all") {
      int worst = kExitOk;
      for (const auto& name : replicate_names())
        worst = std::max(worst, detail::replicate_one(name, out_dir));
      return worst;
    }
    return detail::replicate_one(which, out_dir);
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "validation error: %s\n", e.what());
    return kExitValidation;
  }
}

namespace detail {

inline int replicate_one(const std::string& which, const std::filesystem::path& out_dir) {
  std::vector<Check> checks;
  std::string heading = "replicate " + which;
  std::string footnote;

  if (which == "4c1") {
    const auto out = run_embedded("paper_4c1_circles", out_dir);
    checks.push_back({"run completed", out.traj.termination == sim::Termination::Completed});
    checks.push_back({"every |q_i|_X0 < 1e-2 at t=100",
                      out.rep.x0_distance_available &&
                          out.rep.final_metrics.max_dist_x0() < 1e-2});
    checks.push_back({"max consensus error < 1e-2",
                      out.rep.final_metrics.consensus_error < 1e-2});
    checks.push_back({"every |qdot_i| < 1e-3", out.rep.final_metrics.max_speed() < 1e-3});
    checks.push_back({"Lyapunov non-increasing (tol 1e-6*V0 per sample)",
                      out.rep.lyapunov_monotone});
  } else if (which == "4c2") {
    scenario::Overrides k6;
    k6.k = 6.0;
    const auto gated =
        run_embedded("paper_4c2_switching", out_dir, k6, "paper_4c2_switching_k6");
    const auto published = run_embedded("paper_4c2_switching", out_dir);
    const bool ujc = graph::is_uniformly_jointly_connected(gated.sc.schedule,
                                                           gated.sc.t_end, 10.0);
    checks.push_back({"uniformly jointly connected at window T=10", ujc});
    checks.push_back({"k=6 run completed",
                      gated.traj.termination == sim::Termination::Completed});
    checks.push_back({"k=6: every |q_i|_X0 < 1e-2 at t=200",
                      gated.rep.final_metrics.max_dist_x0() < 1e-2});
    checks.push_back({"k=6: max consensus error < 1e-2",
                      gated.rep.final_metrics.consensus_error < 1e-2});
    checks.push_back({"k=6: every |qdot_i| < 1e-3", gated.rep.final_metrics.max_speed() < 1e-3});
    checks.push_back({"k=6: spread growth bounded by max |delta_i| + 1e-3",
                      spread_growth_bounded(gated.traj)});
    checks.push_back({"k=5 (as published): spread growth bounded by max |delta_i| + 1e-3",
                      spread_growth_bounded(published.traj)});
    const auto gain = control::gain_condition(published.sc.schedule, 5.0);
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "  note: k=5 (as published) aggregation achieved: %s (reported, not "
                  "gated; exact gain threshold %.6g, coarse bound %.6g)\n",
                  published.rep.aggregation_achieved ? "yes" : "no", gain.threshold,
                  gain.coarse_threshold);
    footnote = buf;
  } else if (which == "4c3") {
    const auto out = run_embedded("paper_4c3_nonconvex", out_dir);
    checks.push_back({"run completed", out.traj.termination == sim::Termination::Completed});
    checks.push_back({"aggregation NOT achieved (consensus or set distance above tolerance)",
                      !out.rep.aggregation_achieved &&
                          (!out.rep.dist_ok || !out.rep.consensus_ok)});
  } else if (which == "5b-star" || which == "5b-complete") {
    const std::string scenario_name =
        which == "5b-star" ? "paper_5b_star" : "paper_5b_complete";
    const auto out = run_embedded(scenario_name, out_dir);
    checks.push_back({"run completed (no safety violation)",
                      out.traj.termination == sim::Termination::Completed});
    checks.push_back({"min pairwise distance > r=0.2 throughout",
                      out.rep.min_pairwise_over_run > 0.2});
    checks.push_back({"final velocities < 1e-3", out.rep.final_metrics.max_speed() < 1e-3});
    checks.push_back({"final max |q_i|_X0 <= B* (lower-bound certificate)",
                      out.rep.ultimate && out.rep.ultimate->dist_within_bound});
    if (which == "5b-complete") {
      const auto star = run_embedded("paper_5b_star", out_dir / "comparison");
      checks.push_back(
          {"complete-graph final spread < star-graph final spread",
           out.rep.final_metrics.consensus_error < star.rep.final_metrics.consensus_error});
    }
  } else if (which == "5c") {
    const auto out = run_embedded("paper_5c_switching_collision", out_dir);
    checks.push_back({"safety margin held throughout",
                      out.traj.termination == sim::Termination::Completed &&
                          out.rep.min_pairwise_over_run > 0.2});
    checks.push_back({"oscillation: max |qdot_i| over final 20 s > 1e-2",
                      out.rep.oscillating});
  } else {
    std::fprintf(stderr, "unknown replication name '%s' (use one of:", which.c_str());
    for (const auto& n : replicate_names()) std::fprintf(stderr, " %s", n.c_str());
    std::fprintf(stderr, " | all)\n");
    return kExitValidation;
  }

  print_checks(heading, checks);
  if (!footnote.empty()) std::printf("%s", footnote.c_str());
  const bool pass = all_pass(checks);
  std::printf("replicate %s: %s\n", which.c_str(), pass ? "PASS" : "FAIL");
  return pass ? kExitOk : kExitReplicationFail;
}

}  // namespace detail

}  // namespace setrend::cli
