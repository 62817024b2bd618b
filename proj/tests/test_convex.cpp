#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>

#include "setrend/convex.hpp"
#include "setrend/rng.hpp"
#include "support/oracles.hpp"

using namespace setrend;
using convex::ConvexRegion;
using Eigen::Vector2d;
using Eigen::VectorXd;

namespace {

VectorXd vec2(double x, double y) {
  VectorXd v(2);
  v << x, y;
  return v;
}

ConvexRegion unit_square_polytope() {
  // x >= 0, y >= 0, x <= 1, y <= 1 as four halfspaces.
  std::vector<convex::Halfspace> hs;
  hs.push_back({vec2(-1, 0), 0.0});
  hs.push_back({vec2(0, -1), 0.0});
  hs.push_back({vec2(1, 0), 1.0});
  hs.push_back({vec2(0, 1), 1.0});
  return ConvexRegion::polytope(std::move(hs));
}

/// Random polytope with a guaranteed interior point (offsets get positive
/// slack around an anchor).
ConvexRegion random_polytope(SplitMix64& rng) {
  const int m = 3 + static_cast<int>(rng.next() % 4);
  const Vector2d anchor(rng.uniform(-1, 1), rng.uniform(-1, 1));
  std::vector<convex::Halfspace> hs;
  for (int i = 0; i < m; ++i) {
    const double angle = rng.uniform(0, 2 * M_PI);
    VectorXd n = vec2(std::cos(angle), std::sin(angle));
    hs.push_back({n, n.dot(anchor) + rng.uniform(0.2, 2.0)});
  }
  return ConvexRegion::polytope(std::move(hs));
}

}  // namespace

TEST_CASE("ball projection: radial pull and interior fixed point") {
  const auto ball = ConvexRegion::ball(vec2(0, 0), 3.0);
  const auto out = convex::project(ball, vec2(4, 0));
  CHECK(out.point.isApprox(vec2(3, 0), 1e-12));
  CHECK(out.distance == Catch::Approx(1.0).margin(1e-12));
  CHECK(out.iterations == 0);

  const auto paper_ball = ConvexRegion::ball(vec2(1.5, 1.5), 3.0);
  const auto inside = convex::project(paper_ball, vec2(1.5, 1.5));
  CHECK(inside.point == vec2(1.5, 1.5));
  CHECK(inside.distance == 0.0);
}

TEST_CASE("polytope projection matches a brute-force grid search") {
  const auto square = unit_square_polytope();
  const auto out = convex::project(square, vec2(2, 2));
  CHECK(out.converged);
  CHECK(out.point.isApprox(vec2(1, 1), 1e-9));
  CHECK(out.distance == Catch::Approx(std::sqrt(2.0)).margin(1e-9));

  const auto grid = oracles::grid_search_projection(
      Vector2d(2, 2), Vector2d(0, 0), Vector2d(1, 1), 1e-4,
      [](const Vector2d&) { return true; });
  CHECK((Vector2d(out.point) - grid.point).norm() < 2e-4);
  CHECK(std::abs(out.distance - grid.distance) < 2e-4);
}

TEST_CASE("project_intersection: containment, single-set reduction, lens distance") {
  std::vector<ConvexRegion> balls;
  balls.push_back(ConvexRegion::ball(vec2(1.5, 1.5), 3.0));
  balls.push_back(ConvexRegion::ball(vec2(-1.5, -1.5), 3.0));

  const auto at_origin = convex::project_intersection(balls, vec2(0, 0));
  CHECK(at_origin.distance == Catch::Approx(0.0).margin(1e-9));
  CHECK(Vector2d(at_origin.point).norm() < 1e-9);

  std::vector<ConvexRegion> single;
  single.push_back(ConvexRegion::ball(vec2(0, 0), 1.0));
  const auto reduced = convex::project_intersection(single, vec2(2, 0));
  const auto direct = convex::project(single.front(), vec2(2, 0));
  CHECK(reduced.point.isApprox(direct.point, 1e-12));
  CHECK(reduced.distance == Catch::Approx(direct.distance).margin(1e-12));

  // Projection of (5,5) onto the lens-shaped intersection, against a grid.
  const auto out = convex::project_intersection(balls, vec2(5, 5), 1e-8, 20000);
  CHECK(out.converged);
  const auto grid = oracles::grid_search_projection(
      Vector2d(5, 5), Vector2d(-4.5, -4.5), Vector2d(4.5, 4.5), 1e-3,
      [&](const Vector2d& p) {
        return (p - Vector2d(1.5, 1.5)).norm() <= 3.0 &&
               (p - Vector2d(-1.5, -1.5)).norm() <= 3.0;
      });
  CHECK(std::abs(out.distance - grid.distance) < 3e-3);
}

TEST_CASE("project_intersection detects an empty intersection with a certificate") {
  std::vector<ConvexRegion> disjoint;
  disjoint.push_back(ConvexRegion::ball(vec2(-5, 0), 1.0));
  disjoint.push_back(ConvexRegion::ball(vec2(5, 0), 1.0));
  CHECK_THROWS_MATCHES(convex::project_intersection(disjoint, vec2(0, 3)), ValidationError,
                       Catch::Matchers::MessageMatches(
                           Catch::Matchers::ContainsSubstring("certificate pair")));
}

TEST_CASE("union projection picks the nearest member, ties to the lowest index") {
  std::vector<ConvexRegion> members;
  members.push_back(ConvexRegion::ball(vec2(-2, 0), 1.0));
  members.push_back(ConvexRegion::ball(vec2(2, 0), 1.0));
  const auto u = ConvexRegion::union_of(std::move(members));
  CHECK_FALSE(u.is_convex());

  const auto near_left = convex::project(u, vec2(-1.5, 0));
  CHECK(near_left.distance == Catch::Approx(0.0));
  // Equidistant point: both members are 1 away; the first wins.
  const auto tie = convex::project(u, vec2(0, 0));
  CHECK(tie.point.isApprox(vec2(-1, 0), 1e-12));
}

TEST_CASE("linear regularity estimate") {
  SECTION("duplicate set gives exactly 1") {
    std::vector<ConvexRegion> twice;
    twice.push_back(ConvexRegion::ball(vec2(0, 0), 1.0));
    twice.push_back(ConvexRegion::ball(vec2(0, 0), 1.0));
    const convex::Box box{vec2(2, 2), vec2(4, 4)};  // entirely outside the ball
    CHECK(convex::estimate_linear_regularity(twice, box, 64, 9)
          == Catch::Approx(1.0).margin(1e-9));
  }
  SECTION("overlapping paper balls give at least 1") {
    std::vector<ConvexRegion> balls;
    balls.push_back(ConvexRegion::ball(vec2(1.5, 1.5), 3.0));
    balls.push_back(ConvexRegion::ball(vec2(-1.5, -1.5), 3.0));
    const convex::Box box{vec2(-8, -8), vec2(8, 8)};
    CHECK(convex::estimate_linear_regularity(balls, box, 256, 5) >= 1.0 - 1e-9);
  }
  SECTION("orthogonal halfplanes at (-1,-1) give sqrt(2)") {
    std::vector<ConvexRegion> quads;
    quads.push_back(ConvexRegion::polytope({{vec2(-1, 0), 0.0}}));  // x >= 0
    quads.push_back(ConvexRegion::polytope({{vec2(0, -1), 0.0}}));  // y >= 0
    // Degenerate sample box pins the single sample at (-1,-1).
    const convex::Box box{vec2(-1, -1), vec2(-1, -1)};
    CHECK(convex::estimate_linear_regularity(quads, box, 1, 3)
          == Catch::Approx(std::sqrt(2.0)).margin(1e-7));
  }
  SECTION("all samples inside every set is an error") {
    std::vector<ConvexRegion> balls;
    balls.push_back(ConvexRegion::ball(vec2(0, 0), 10.0));
    const convex::Box box{vec2(-1, -1), vec2(1, 1)};
    CHECK_THROWS_AS(convex::estimate_linear_regularity(balls, box, 16, 11), ValidationError);
  }
}

TEST_CASE("projection variational inequality") {
  const auto ball = ConvexRegion::ball(vec2(0, 0), 1.0);
  CHECK(convex::check_projection_inequality(ball, vec2(0.5, 0), vec2(0, 0))
        == Catch::Approx(0.0).margin(1e-12));  // interior x: P(x) = x
  CHECK(convex::check_projection_inequality(ball, vec2(2, 0), vec2(0, 0))
        == Catch::Approx(-1.0).margin(1e-12));
  CHECK_THROWS_AS(convex::check_projection_inequality(ball, vec2(2, 0), vec2(5, 5)),
                  ValidationError);
}

TEST_CASE("projection properties over seeded samples") {
  SplitMix64 rng(2024);
  std::vector<ConvexRegion> regions;
  regions.push_back(ConvexRegion::ball(vec2(0.3, -0.2), 1.7));
  regions.push_back(ConvexRegion::box(vec2(-1.5, -0.5), vec2(0.5, 2.0)));
  regions.push_back(unit_square_polytope());
  for (int i = 0; i < 3; ++i) regions.push_back(random_polytope(rng));

  double worst_idem = 0.0, worst_expansion = 0.0, worst_ineq = -1e300, worst_grad = 0.0;
  const int samples_per_region = 1700;  // > 1e4 total across regions
  for (const auto& region : regions) {
    for (int s = 0; s < samples_per_region; ++s) {
      const VectorXd x = vec2(rng.uniform(-6, 6), rng.uniform(-6, 6));
      const VectorXd y = vec2(rng.uniform(-6, 6), rng.uniform(-6, 6));
      const auto px = convex::project(region, x);
      const auto py = convex::project(region, y);

      // Idempotence.
      const auto pp = convex::project(region, px.point);
      worst_idem = std::max(worst_idem, (pp.point - px.point).norm());
      // Nonexpansiveness.
      worst_expansion =
          std::max(worst_expansion, (px.point - py.point).norm() - (x - y).norm());
      // Variational inequality with y drawn from the region.
      worst_ineq = std::max(worst_ineq,
                            convex::check_projection_inequality(region, x, py.point));
      // Gradient identity for the squared set distance (only informative
      // outside the set).
      if (px.distance > 1e-3 && s % 17 == 0) {
        for (int c = 0; c < 2; ++c) {
          const double fd = oracles::central_difference(
              [&](const Vector2d& p) {
                const double d = convex::distance(region, VectorXd(p));
                return d * d;
              },
              Vector2d(x), c, 1e-6);
          const double analytic = 2.0 * (x[c] - px.point[c]);
          worst_grad = std::max(worst_grad, std::abs(fd - analytic));
        }
      }
    }
  }
  CHECK(worst_idem < 1e-10);
  CHECK(worst_expansion < 1e-9);
  CHECK(worst_ineq < 1e-9);
  CHECK(worst_grad < 1e-5);
}

TEST_CASE("region validation errors") {
  CHECK_THROWS_AS(ConvexRegion::ball(vec2(0, 0), 0.0), ValidationError);
  CHECK_THROWS_AS(ConvexRegion::box(vec2(1, 0), vec2(0, 1)), ValidationError);
  // x <= -1 and x >= 1 simultaneously: infeasible.
  CHECK_THROWS_AS(ConvexRegion::polytope({{vec2(1, 0), -1.0}, {vec2(-1, 0), -1.0}}),
                  ValidationError);
  CHECK_THROWS_AS(ConvexRegion::union_of({}), ValidationError);
}
