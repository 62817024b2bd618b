#pragma once

#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "setrend/errors.hpp"
#include "setrend/rng.hpp"
#include "setrend/scenario_data.hpp"
#include "setrend/sim.hpp"

// Scenario files: JSON documents describing the agents, target sets,
// communication graph or schedule, controller, and integration settings.
// Node ids in edge lists are 1-based to match the usual agent numbering.

namespace setrend::scenario {

struct Overrides {
  std::optional<double> k;
  std::optional<double> dt;
  std::optional<double> t_end;
  std::optional<std::uint64_t> placement_seed;
};

namespace detail {

using nlohmann::json;

inline Eigen::VectorXd parse_vector(const json& j, const char* what) {
  if (!j.is_array() || j.empty()) throw ValidationError(std::string(what) + ": expected an array");
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[i] = j[i].get<double>();
  return v;
}

inline convex::ConvexRegion parse_region(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "ball")
    return convex::ConvexRegion::ball(parse_vector(j.at("center"), "ball center"),
                                      j.at("radius").get<double>());
  if (type == "box")
    return convex::ConvexRegion::box(parse_vector(j.at("lo"), "box lo"),
                                     parse_vector(j.at("hi"), "box hi"));
  if (type == "polytope") {
    std::vector<convex::Halfspace> hs;
    for (const auto& h : j.at("halfspaces"))
      hs.push_back({parse_vector(h.at("normal"), "halfspace normal"),
                    h.at("offset").get<double>()});
    return convex::ConvexRegion::polytope(std::move(hs));
  }
  if (type == "union") {
    std::vector<convex::ConvexRegion> members;
    for (const auto& m : j.at("members")) members.push_back(parse_region(m));
    return convex::ConvexRegion::union_of(std::move(members));
  }
  throw ValidationError("region: unknown type '" + type + "'");
}

inline graph::WeightedGraph parse_graph(const json& j) {
  const int n = j.at("nodes").get<int>();
  std::vector<std::tuple<int, int, double>> edges;
  for (const auto& e : j.at("edges")) {
    if (!e.is_array() || (e.size() != 2 && e.size() != 3))
      throw ValidationError("graph: edges must be [i, j] or [i, j, w]");
    const double w = e.size() == 3 ? e[2].get<double>() : 1.0;
    edges.emplace_back(e[0].get<int>() - 1, e[1].get<int>() - 1, w);  // 1-based ids
  }
  return graph::WeightedGraph::from_edges(n, edges);
}

inline graph::GraphSchedule parse_schedule(const json& j) {
  std::vector<graph::WeightedGraph> graphs;
  for (const auto& g : j.at("graphs")) graphs.push_back(parse_graph(g));
  std::optional<double> dwell;
  if (j.contains("dwell")) dwell = j.at("dwell").get<double>();
  std::vector<int> indices;
  if (j.contains("indices"))
    for (const auto& i : j.at("indices")) indices.push_back(i.get<int>());
  if (j.contains("period")) {
    std::vector<double> durations;
    for (const auto& d : j.at("period")) durations.push_back(d.get<double>());
    if (indices.empty())
      for (std::size_t l = 0; l < durations.size(); ++l)
        indices.push_back(static_cast<int>(l % graphs.size()));
    return graph::GraphSchedule::cyclic(std::move(graphs), indices, durations, 0.0, dwell);
  }
  if (j.contains("switch_times")) {
    std::vector<double> times;
    for (const auto& t : j.at("switch_times")) times.push_back(t.get<double>());
    if (indices.empty())
      for (std::size_t l = 0; l < times.size(); ++l)
        indices.push_back(static_cast<int>(l % graphs.size()));
    return graph::GraphSchedule::timed(std::move(graphs), times, indices, dwell);
  }
  throw ValidationError("schedule: needs either 'period' or 'switch_times'");
}

/// Deterministic 16-agent style placement: a rows x cols grid with seeded
/// jitter and seeded velocity components. The paper-fixed initial-state lists
/// never go through this path.
inline std::vector<dynamics::AgentState> resolve_placement(const json& p, int n,
                                                           std::uint64_t seed) {
  const std::string type = p.at("type").get<std::string>();
  if (type != "grid") throw ValidationError("placement: unknown type '" + type + "'");
  const int rows = p.at("rows").get<int>();
  const int cols = p.at("cols").get<int>();
  if (rows * cols != n) throw ValidationError("placement: rows*cols must equal n");
  const double spacing = p.at("spacing").get<double>();
  const double jitter = p.value("jitter", 0.0);
  const double vel_range = p.value("vel_range", 0.0);
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  if (p.contains("center")) center = Eigen::Vector2d(parse_vector(p.at("center"), "center"));

  SplitMix64 rng(seed);
  std::vector<dynamics::AgentState> states(n);
  int idx = 0;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c, ++idx) {
      Eigen::Vector2d q(center.x() + (c - 0.5 * (cols - 1)) * spacing,
                        center.y() + (r - 0.5 * (rows - 1)) * spacing);
      q.x() += rng.uniform(-jitter, jitter);
      q.y() += rng.uniform(-jitter, jitter);
      Eigen::Vector2d qdot(rng.uniform(-vel_range, vel_range),
                           rng.uniform(-vel_range, vel_range));
      states[idx] = {q, qdot};
    }
  return states;
}

}  // namespace detail

/// Builds and validates a Scenario from its JSON document. `overrides` hosts
/// the CLI's -k/--dt/--t-end sweep flags and the placement-seed override
/// (which never touches explicitly listed initial states).
inline sim::Scenario from_json(const nlohmann::json& j, const Overrides& overrides = {}) {
  using detail::json;
  sim::Scenario sc;
  try {
    sc.name = j.value("name", "scenario");
    sc.n = j.at("n").get<int>();
    sc.m = j.value("m", 2);

    const auto& dyn = j.at("dynamics").at("theta");
    if (!dyn.is_array() || dyn.empty()) throw ValidationError("dynamics.theta: expected an array");
    if (dyn[0].is_array()) {
      for (const auto& row : dyn)
        sc.params.push_back(dynamics::ManipulatorParams::validated(
            row.at(0).get<double>(), row.at(1).get<double>(), row.at(2).get<double>()));
      if (static_cast<int>(sc.params.size()) != sc.n)
        throw ValidationError("dynamics.theta: per-agent list must have n rows");
    } else {
      const auto p = dynamics::ManipulatorParams::validated(
          dyn.at(0).get<double>(), dyn.at(1).get<double>(), dyn.at(2).get<double>());
      sc.params.assign(sc.n, p);
    }

    for (const auto& r : j.at("regions")) sc.regions.push_back(detail::parse_region(r));

    if (j.contains("graph") == j.contains("schedule"))
      throw ValidationError("scenario: exactly one of 'graph' or 'schedule' is required");
    if (j.contains("graph"))
      sc.schedule = graph::GraphSchedule::constant(detail::parse_graph(j.at("graph")));
    else
      sc.schedule = detail::parse_schedule(j.at("schedule"));

    const auto& ctl = j.at("controller");
    const std::string law = ctl.at("law").get<std::string>();
    if (law == "fixed") sc.controller.law = control::Law::FixedGraph;
    else if (law == "switching") sc.controller.law = control::Law::SwitchingFeedbackLinearized;
    else if (law == "collision") sc.controller.law = control::Law::CollisionAvoiding;
    else throw ValidationError("controller: unknown law '" + law + "'");
    sc.controller.k = overrides.k.value_or(ctl.at("k").get<double>());
    if (ctl.contains("R") || ctl.contains("r"))
      sc.controller.avoidance = control::PotentialParams::validated(
          ctl.at("R").get<double>(), ctl.at("r").get<double>());

    sc.seed = j.value("seed", 1ULL);
    const auto& init = j.at("initial");
    if (init.contains("placement")) {
      std::uint64_t seed = overrides.placement_seed.value_or(sc.seed);
      sc.initial = detail::resolve_placement(init.at("placement"), sc.n, seed);
    } else {
      const auto& q = init.at("q");
      const auto& qdot = init.at("qdot");
      if (q.size() != qdot.size())
        throw ValidationError("initial: q and qdot lists must have equal length");
      for (std::size_t i = 0; i < q.size(); ++i)
        sc.initial.push_back({Eigen::Vector2d(detail::parse_vector(q[i], "initial q")),
                              Eigen::Vector2d(detail::parse_vector(qdot[i], "initial qdot"))});
    }

    sc.dt = overrides.dt.value_or(j.value("dt", 1e-3));
    sc.t_end = overrides.t_end.value_or(j.value("t_end", 100.0));
    sc.record_every = j.value("record_every", 100);
    sc.nonconvex_demo = j.value("nonconvex_demo", false);
    if (j.contains("tolerances")) {
      const auto& tol = j.at("tolerances");
      sc.tolerances.dist = tol.value("dist", sc.tolerances.dist);
      sc.tolerances.consensus = tol.value("consensus", sc.tolerances.consensus);
      sc.tolerances.velocity = tol.value("velocity", sc.tolerances.velocity);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("scenario parse error: ") + e.what());
  }
  sc.validate();
  return sc;
}

/// Placement-seed override from the environment (SETREND_SEED), if set.
inline std::optional<std::uint64_t> env_seed_override() {
  if (const char* env = std::getenv("SETREND_SEED")) {
    try {
      return std::stoull(env);
    } catch (...) {
      throw ValidationError("SETREND_SEED must be an unsigned integer");
    }
  }
  return std::nullopt;
}

inline sim::Scenario load_string(const std::string& text, Overrides overrides = {}) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("scenario JSON parse error: ") + e.what());
  }
  return from_json(j, overrides);
}

inline sim::Scenario load_file(const std::string& path, Overrides overrides = {}) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open scenario file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return load_string(buf.str(), overrides);
}

/// Names of the bundled scenarios (file stems under scenarios/).
inline std::vector<std::string> embedded_names() {
  std::vector<std::string> names;
  for (const auto& [name, text] : scenario_data::kScenarios)
    names.emplace_back(name);
  return names;
}

inline sim::Scenario load_embedded(const std::string& name, Overrides overrides = {}) {
  for (const auto& [key, text] : scenario_data::kScenarios)
    if (key == name) return load_string(std::string(text), overrides);
  throw ValidationError("unknown bundled scenario: " + name);
}

}  // namespace setrend::scenario
