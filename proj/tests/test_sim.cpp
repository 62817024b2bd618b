#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>

#include "setrend/artifacts.hpp"
#include "setrend/report.hpp"
#include "setrend/scenario_json.hpp"
#include "setrend/sim.hpp"
#include "support/oracles.hpp"

using namespace setrend;
using control::PotentialParams;
using convex::ConvexRegion;
using dynamics::AgentState;
using dynamics::ManipulatorParams;
using Eigen::Vector2d;
using Eigen::VectorXd;
using graph::GraphSchedule;
using graph::WeightedGraph;

namespace {

VectorXd vec2(double x, double y) {
  VectorXd v(2);
  v << x, y;
  return v;
}

sim::Scenario two_agent_fixed() {
  sim::Scenario sc;
  sc.name = "two_agent_fixed";
  sc.n = 2;
  sc.params.assign(2, ManipulatorParams::standard());
  sc.regions.push_back(ConvexRegion::ball(vec2(0.5, 0), 1.0));
  sc.regions.push_back(ConvexRegion::ball(vec2(-0.5, 0), 1.0));
  sc.schedule = GraphSchedule::constant(WeightedGraph::from_edges(2, {{0, 1, 1}}));
  sc.controller.law = control::Law::FixedGraph;
  sc.controller.k = 1.0;
  sc.initial = {{Vector2d(2, 1), Vector2d::Zero()}, {Vector2d(-2, -1), Vector2d::Zero()}};
  sc.dt = 1e-3;
  sc.t_end = 1.0;
  sc.record_every = 100;
  return sc;
}

}  // namespace

TEST_CASE("equilibrium states are bitwise fixed points of the step") {
  sim::Scenario sc = two_agent_fixed();
  // Consensus at rest inside both sets.
  sc.initial = {{Vector2d(0.1, 0), Vector2d::Zero()}, {Vector2d(0.1, 0), Vector2d::Zero()}};
  const auto next = sim::step(sc, sc.initial, 0.0, sc.dt);
  for (int i = 0; i < 2; ++i) {
    CHECK(next[i].q == sc.initial[i].q);
    CHECK(next[i].qdot == sc.initial[i].qdot);
  }
}

TEST_CASE("one step matches the closed-form damped-spring solution to O(dt^5)") {
  // Single agent under the feedback-linearized law, radial approach to a
  // ball: the closed loop restricted to the x-axis is a damped spring around
  // the boundary point.
  sim::Scenario sc;
  sc.name = "single_switching";
  sc.n = 1;
  sc.params.assign(1, ManipulatorParams::standard());
  sc.regions.push_back(ConvexRegion::ball(vec2(0, 0), 1.0));
  sc.schedule = GraphSchedule::constant(WeightedGraph::empty(1));
  sc.controller.law = control::Law::SwitchingFeedbackLinearized;
  sc.controller.k = 5.0;
  sc.initial = {{Vector2d(3.0, 0.0), Vector2d(-0.5, 0.0)}};
  sc.t_end = 1.0;

  auto one_step_error = [&](double dt) {
    const auto next = sim::step(sc, sc.initial, 0.0, dt);
    double s_exact, v_exact;
    oracles::damped_spring_exact(5.0, 1.0, 3.0, -0.5, dt, s_exact, v_exact);
    return std::abs(next[0].q.x() - s_exact) + std::abs(next[0].qdot.x() - v_exact);
  };
  const double e1 = one_step_error(0.02);
  const double e2 = one_step_error(0.01);
  CHECK(e2 < 1e-7);
  CHECK(e1 / e2 >= 20.0);  // fifth-order local error: ratio around 32
}

TEST_CASE("global RK4 order: halving dt shrinks the error at least 15-fold") {
  const auto sc = scenario::load_embedded("paper_4c1_circles");
  auto final_state = [&](double dt, double t_end) {
    sim::Scenario run = sc;
    run.dt = dt;
    run.t_end = t_end;
    run.record_every = static_cast<int>(std::llround(t_end / dt));
    const auto traj = sim::run(run);
    REQUIRE(traj.termination == sim::Termination::Completed);
    Eigen::VectorXd flat(4 * run.n);
    const auto& last = traj.samples.back();
    for (int i = 0; i < run.n; ++i)
      flat.segment<4>(4 * i) << last.states[i].q, last.states[i].qdot;
    return flat;
  };
  const double T = 1.0;
  const Eigen::VectorXd ref = final_state(1e-3, T);
  const double e1 = (final_state(8e-3, T) - ref).norm();
  const double e2 = (final_state(4e-3, T) - ref).norm();
  CHECK(e1 / e2 >= 15.0);
}

TEST_CASE("fixed-law Lyapunov decreases and its decrement matches the dissipation") {
  auto sc = scenario::load_embedded("paper_4c1_circles");
  sc.t_end = 2.0;
  sc.record_every = 1;  // per-step samples for the decrement identity
  const auto traj = sim::run(sc);
  REQUIRE(traj.termination == sim::Termination::Completed);

  const double v0 = traj.samples.front().metrics.lyapunov;
  double worst_rise = -1e300;
  double worst_mismatch = 0.0;
  for (std::size_t s = 0; s + 1 < traj.samples.size(); ++s) {
    const auto& a = traj.samples[s];
    const auto& b = traj.samples[s + 1];
    worst_rise = std::max(worst_rise, b.metrics.lyapunov - a.metrics.lyapunov);

    auto dissipation = [&](const sim::Sample& smp) {
      double total = 0.0;
      for (double v : smp.metrics.speed) total += v * v;
      return sc.controller.k * total;
    };
    const double predicted = -0.5 * (dissipation(a) + dissipation(b)) * sc.dt;
    if (std::abs(predicted) > 1e-9)
      worst_mismatch = std::max(
          worst_mismatch,
          std::abs((b.metrics.lyapunov - a.metrics.lyapunov) - predicted) / std::abs(predicted));
  }
  CHECK(worst_rise <= 1e-6 * v0);
  CHECK(worst_mismatch < 0.05);
}

TEST_CASE("recorded 4c1 state and control satisfy the plant equation against an oracle") {
  auto sc = scenario::load_embedded("paper_4c1_circles");
  sc.t_end = 2.0;
  const auto traj = sim::run(sc);
  const auto& mid = traj.samples[traj.samples.size() / 2];
  for (int i = 0; i < sc.n; ++i) {
    const Vector2d ours = dynamics::forward_dynamics(sc.params[i], mid.states[i], mid.controls[i]);
    const Vector2d rhs = mid.controls[i] - dynamics::coriolis_matrix(sc.params[i], mid.states[i].q,
                                                                     mid.states[i].qdot) *
                                               mid.states[i].qdot;
    const Vector2d oracle =
        oracles::gaussian_solve_2x2(dynamics::mass_matrix(sc.params[i], mid.states[i].q), rhs);
    CHECK((ours - oracle).norm() < 1e-12);
  }
}

TEST_CASE("collision law keeps the safety margin along a run") {
  sim::Scenario sc;
  sc.name = "three_agent_collision";
  sc.n = 3;
  sc.params.assign(3, ManipulatorParams::standard());
  for (int i = 0; i < 3; ++i) sc.regions.push_back(ConvexRegion::ball(vec2(0, 0), 1.0));
  sc.schedule = GraphSchedule::constant(WeightedGraph::complete(3));
  sc.controller.law = control::Law::CollisionAvoiding;
  sc.controller.k = 1.0;
  sc.controller.avoidance = PotentialParams::validated(2.0, 0.2);
  sc.initial = {{Vector2d(4, 0), Vector2d(-1, 0)},
                {Vector2d(-4, 0.1), Vector2d(1, 0)},
                {Vector2d(0, 4), Vector2d(0, -1)}};
  sc.dt = 1e-3;
  sc.t_end = 20.0;
  sc.record_every = 10;
  const auto traj = sim::run(sc);
  REQUIRE(traj.termination == sim::Termination::Completed);
  double min_pairwise = 1e300;
  for (const auto& s : traj.samples)
    min_pairwise = std::min(min_pairwise, s.metrics.min_pairwise);
  CHECK(min_pairwise > 0.2);
}

TEST_CASE("per-sample metric invariants hold along a run") {
  auto sc = scenario::load_embedded("paper_4c1_circles");
  sc.t_end = 5.0;
  const auto traj = sim::run(sc);
  for (const auto& s : traj.samples) {
    double max_own = 0.0;
    for (double d : s.metrics.dist_own) max_own = std::max(max_own, d);
    for (int i = 0; i < sc.n; ++i) {
      // X0 is contained in every X_i, so its distance dominates each agent's
      // own-set distance (up to the Dykstra tolerance).
      CHECK(s.metrics.dist_x0[i] >= s.metrics.dist_own[i] - 1e-7);
      CHECK(s.metrics.dist_x0[i] >= 0.0);
    }
    CHECK(s.metrics.consensus_error >= 0.0);
    CHECK(s.metrics.min_pairwise >= 0.0);
  }
}

TEST_CASE("scenario validation rejections") {
  SECTION("zero agents") {
    sim::Scenario sc;
    sc.n = 0;
    CHECK_THROWS_AS(sc.validate(), ValidationError);
  }
  SECTION("agents starting inside the safety radius") {
    auto sc = two_agent_fixed();
    sc.controller.law = control::Law::CollisionAvoiding;
    sc.controller.avoidance = PotentialParams::validated(2.0, 0.2);
    sc.initial = {{Vector2d(0.05, 0), Vector2d::Zero()}, {Vector2d(-0.05, 0), Vector2d::Zero()}};
    CHECK_THROWS_MATCHES(sc.validate(), ValidationError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("safety radius")));
  }
  SECTION("switching gain below the threshold is rejected with the threshold cited") {
    auto sc = two_agent_fixed();
    sc.controller.law = control::Law::SwitchingFeedbackLinearized;
    sc.controller.k = 0.5;  // threshold is 2 + lambda_max/4 = 2.5
    CHECK_THROWS_MATCHES(
        sc.validate(), ValidationError,
        Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("2.5")));
    sc.controller.k = 0.0;  // even a degenerate gain cites the threshold
    CHECK_THROWS_MATCHES(
        sc.validate(), ValidationError,
        Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("2.5")));
  }
  SECTION("switch times must land on step boundaries") {
    auto sc = two_agent_fixed();
    sc.schedule = GraphSchedule::cyclic(
        {WeightedGraph::from_edges(2, {{0, 1, 1}}), WeightedGraph::empty(2)}, {0, 1},
        {5.0, 5.0});
    sc.dt = 3e-3;
    sc.t_end = 30.0;  // integer number of steps, but switches at 5 s are not
    CHECK_THROWS_AS(sc.validate(), ValidationError);
  }
  SECTION("union regions require the demo flag") {
    auto sc = two_agent_fixed();
    std::vector<ConvexRegion> members;
    members.push_back(ConvexRegion::ball(vec2(3, 0), 1.0));
    members.push_back(ConvexRegion::ball(vec2(-3, 0), 1.0));
    sc.regions[0] = ConvexRegion::union_of(std::move(members));
    CHECK_THROWS_AS(sc.validate(), ValidationError);
    sc.nonconvex_demo = true;
    CHECK_NOTHROW(sc.validate());
  }
}

TEST_CASE("collision-law proof inequalities hold along a shortened run") {
  auto sc = scenario::load_embedded("paper_5b_star");
  sc.t_end = 12.0;
  const auto traj = sim::run(sc);
  REQUIRE(traj.termination == sim::Termination::Completed);

  const auto& g = sc.schedule.graphs().front();
  const double v0 = traj.samples.front().metrics.lyapunov;
  const double lambda2 = graph::algebraic_connectivity(g);
  const double rho_hat = convex::estimate_linear_regularity(
      sc.regions, report::regularity_sample_box(sc), 2000, sc.seed);
  CHECK(rho_hat >= 1.0 - 1e-9);

  for (const auto& s : traj.samples) {
    // Dispersion bound: sum_i |q_i - q_c|^2 <= 2 V(t0) / lambda_2.
    Vector2d centroid = Vector2d::Zero();
    for (const auto& st : s.states) centroid += st.q;
    centroid /= static_cast<double>(sc.n);
    double dispersion = 0.0;
    for (const auto& st : s.states) dispersion += (st.q - centroid).squaredNorm();
    CHECK(dispersion <= 2.0 * v0 / lambda2 + 1e-6);

    // Sampled regularity constant covers the states the run visits.
    for (int i = 0; i < sc.n; ++i) {
      double max_own = 0.0;
      for (const auto& r : sc.regions)
        max_own = std::max(max_own, convex::distance(r, VectorXd(s.states[i].q)));
      CHECK(rho_hat * max_own >= s.metrics.dist_x0[i] - 1e-6);
    }
  }
}

TEST_CASE("two identical runs produce byte-identical CSV") {
  auto sc = two_agent_fixed();
  sc.t_end = 3.0;
  const auto csv1 = artifacts::trajectory_csv(sim::run(sc));
  const auto csv2 = artifacts::trajectory_csv(sim::run(sc));
  CHECK(csv1 == csv2);
  CHECK(csv1.rfind("t,agent,qx,qy,qdotx,qdoty,taux,tauy,dist_own,dist_X0,speed,"
                   "lyapunov,consensus_err,min_pairwise\n", 0) == 0);
}
