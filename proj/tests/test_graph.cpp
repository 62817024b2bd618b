#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>

#include "setrend/graph.hpp"
#include "setrend/rng.hpp"
#include "support/oracles.hpp"

using namespace setrend;
using graph::GraphSchedule;
using graph::WeightedGraph;

namespace {

// Ring-with-chords communication graph used by the fixed-graph experiment.
WeightedGraph fig2_graph() {
  return WeightedGraph::from_edges(8, {{0, 1, 1}, {1, 2, 1}, {2, 3, 1}, {0, 7, 1},
                                       {1, 6, 1}, {2, 5, 1}, {3, 4, 1}, {7, 6, 1},
                                       {6, 5, 1}, {5, 4, 1}});
}

// Two disjoint 4-node paths (top and bottom rows).
WeightedGraph rows_graph() {
  return WeightedGraph::from_edges(8, {{0, 1, 1}, {1, 2, 1}, {3, 2, 1},
                                       {7, 6, 1}, {6, 5, 1}, {5, 4, 1}});
}

// Four disjoint column rungs.
WeightedGraph columns_graph() {
  return WeightedGraph::from_edges(8, {{0, 7, 1}, {1, 6, 1}, {2, 5, 1}, {3, 4, 1}});
}

GraphSchedule alternating_schedule() {
  return GraphSchedule::cyclic({rows_graph(), columns_graph()}, {0, 1}, {5.0, 5.0}, 0.0, 5.0);
}

}  // namespace

TEST_CASE("laplacian definition and spectrum basics") {
  CHECK(graph::laplacian(WeightedGraph::empty(4)).isZero(0.0));

  const auto pair = WeightedGraph::from_edges(2, {{0, 1, 1}});
  Eigen::MatrixXd expected(2, 2);
  expected << 1, -1, -1, 1;
  CHECK(graph::laplacian(pair) == expected);

  const auto l = graph::laplacian(fig2_graph());
  CHECK(l.rowwise().sum().cwiseAbs().maxCoeff() < 1e-14);
  const auto evs = oracles::jacobi_eigenvalues(l);
  CHECK(std::abs(evs.front()) < 1e-10);  // lambda_min = 0
}

TEST_CASE("laplacian is PSD: Rayleigh quotients over random vectors") {
  SplitMix64 rng(3);
  for (const auto& g : {fig2_graph(), rows_graph(), columns_graph(),
                        WeightedGraph::star(8), WeightedGraph::complete(8)}) {
    const Eigen::MatrixXd l = graph::laplacian(g);
    for (int s = 0; s < 200; ++s) {
      Eigen::VectorXd v(g.size());
      for (int i = 0; i < g.size(); ++i) v[i] = rng.uniform(-1, 1);
      CHECK(v.dot(l * v) >= -1e-12);
    }
  }
}

TEST_CASE("connectivity checks") {
  CHECK(graph::is_connected(fig2_graph()));
  CHECK_FALSE(graph::is_connected(rows_graph()));
  CHECK_FALSE(graph::is_connected(columns_graph()));
  const auto rows = rows_graph();
  const auto cols = columns_graph();
  CHECK(graph::is_connected(graph::union_graph({&rows, &cols})));
}

TEST_CASE("zero eigenvalue multiplicity equals the component count") {
  for (const auto& g : {fig2_graph(), rows_graph(), columns_graph(), WeightedGraph::empty(5),
                        WeightedGraph::star(6)}) {
    const auto evs = oracles::jacobi_eigenvalues(graph::laplacian(g));
    int zeros = 0;
    for (double e : evs)
      if (std::abs(e) < 1e-9) ++zeros;
    CHECK(zeros == graph::component_count(g));
  }
}

TEST_CASE("active graph over the alternating schedule") {
  const auto schedule = alternating_schedule();
  CHECK(&schedule.active(2.0) == &schedule.graphs()[0]);
  CHECK(&schedule.active(5.0) == &schedule.graphs()[1]);  // right-continuous switch
  CHECK(&schedule.active(9.999) == &schedule.graphs()[1]);
  CHECK(&schedule.active(10.0) == &schedule.graphs()[0]);  // cycle repeats
  CHECK(&schedule.active(120.0 + 2.5) == &schedule.graphs()[0]);
  CHECK(&schedule.active(125.0 + 2.5) == &schedule.graphs()[1]);
  CHECK_THROWS_AS(schedule.active(-1.0), ValidationError);

  const auto constant = GraphSchedule::constant(fig2_graph());
  CHECK(&constant.active(0.0) == &constant.graphs()[0]);
  CHECK(&constant.active(1234.5) == &constant.graphs()[0]);
}

TEST_CASE("uniform joint connectivity") {
  const auto schedule = alternating_schedule();
  CHECK(graph::is_uniformly_jointly_connected(schedule, 200.0, 10.0));
  // A window that fits inside one segment sees a disconnected graph.
  CHECK_FALSE(graph::is_uniformly_jointly_connected(schedule, 200.0, 4.0));

  // Isolating a node in every graph kills joint connectivity.
  const auto isolated = GraphSchedule::cyclic(
      {WeightedGraph::from_edges(8, {{0, 1, 1}, {1, 2, 1}, {2, 3, 1}, {5, 6, 1}, {6, 7, 1}}),
       WeightedGraph::from_edges(8, {{0, 7, 1}, {1, 6, 1}, {2, 5, 1}})},
      {0, 1}, {5.0, 5.0});
  CHECK_FALSE(graph::is_uniformly_jointly_connected(isolated, 100.0, 20.0));

  CHECK(graph::is_uniformly_jointly_connected(GraphSchedule::constant(fig2_graph()), 100.0,
                                              1.0));
  CHECK(graph::is_uniformly_jointly_connected(GraphSchedule::constant(fig2_graph()), 100.0,
                                              50.0));
}

TEST_CASE("joint connectivity is monotone in the window length") {
  const auto schedule = alternating_schedule();
  SplitMix64 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const double t_small = rng.uniform(0.5, 30.0);
    const double t_large = t_small + rng.uniform(0.0, 30.0);
    const bool small_ok = graph::is_uniformly_jointly_connected(schedule, 120.0, t_small);
    const bool large_ok = graph::is_uniformly_jointly_connected(schedule, 120.0, t_large);
    if (small_ok) CHECK(large_ok);
  }
}

TEST_CASE("max Laplacian eigenvalue by power method") {
  CHECK(graph::max_laplacian_eigenvalue(WeightedGraph::from_edges(2, {{0, 1, 1}}))
        == Catch::Approx(2.0).margin(1e-10));
  CHECK(graph::max_laplacian_eigenvalue(WeightedGraph::complete(8))
        == Catch::Approx(8.0).margin(1e-9));
  CHECK(graph::max_laplacian_eigenvalue(WeightedGraph::empty(4)) == 0.0);

  // Alternating pair: the path-graph component spectrum tops out at 2 + sqrt(2).
  const double lmax = graph::max_laplacian_eigenvalue(alternating_schedule());
  CHECK(lmax == Catch::Approx(2.0 + std::sqrt(2.0)).margin(1e-9));
  // Cross-check each graph against the Jacobi oracle.
  for (const auto& g : {rows_graph(), columns_graph(), fig2_graph()}) {
    const auto evs = oracles::jacobi_eigenvalues(graph::laplacian(g));
    CHECK(graph::max_laplacian_eigenvalue(g) == Catch::Approx(evs.back()).margin(1e-9));
  }
}

TEST_CASE("algebraic connectivity") {
  CHECK(graph::algebraic_connectivity(WeightedGraph::star(16))
        == Catch::Approx(1.0).margin(1e-10));
  CHECK(graph::algebraic_connectivity(WeightedGraph::complete(16))
        == Catch::Approx(16.0).margin(1e-9));
  CHECK(graph::algebraic_connectivity(rows_graph()) < 1e-10);  // disconnected
}

TEST_CASE("graph and schedule validation") {
  Eigen::MatrixXd bad(2, 2);
  bad << 0, 1, 2, 0;
  CHECK_THROWS_AS(WeightedGraph(2, bad), ValidationError);
  CHECK_THROWS_AS(WeightedGraph::from_edges(3, {{0, 0, 1}}), ValidationError);
  CHECK_THROWS_AS(WeightedGraph::from_edges(3, {{0, 5, 1}}), ValidationError);
  CHECK_THROWS_AS(GraphSchedule::cyclic({fig2_graph()}, {0}, {5.0}, 0.0, 7.0),
                  ValidationError);  // dwell longer than every interval
  CHECK_THROWS_AS(GraphSchedule::timed({fig2_graph()}, {0.0, 0.0}, {0, 0}),
                  ValidationError);  // non-increasing switch times
}
