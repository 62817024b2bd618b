#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "setrend/errors.hpp"
#include "setrend/rng.hpp"

// Target sets and projection operators. Supported shapes: balls and boxes
// (closed-form nearest point), halfspace intersections (Dykstra), and
// unions of convex members for the non-convex demonstrations. Distances to
// set intersections are computed by Dykstra's alternating projections.

namespace setrend::convex {

using Vec = Eigen::VectorXd;

/// Absolute feasibility tolerance: a point within this distance of a set
/// counts as a member.
inline constexpr double kFeasTol = 1e-8;
/// Dykstra stopping tolerance on the per-cycle iterate change.
inline constexpr double kDykstraTol = 1e-10;
inline constexpr int kDykstraMaxIter = 10000;

struct Ball {
  Vec center;
  double radius;
};

struct Box {
  Vec lo;
  Vec hi;
};

/// Closed halfspace {x : normal.dot(x) <= offset}. Normals are unit length
/// after construction (normalized, offset rescaled accordingly).
struct Halfspace {
  Vec normal;
  double offset;
};

struct Polytope {
  std::vector<Halfspace> halfspaces;
};

class ConvexRegion;

struct UnionOfConvex {
  std::vector<ConvexRegion> members;
};

struct ProjectionResult {
  Vec point;
  double distance = 0.0;
  int iterations = 0;   // 0 for closed-form variants
  bool converged = true;
};

namespace detail {

inline Vec project_halfspace(const Halfspace& h, const Vec& x) {
  const double excess = h.normal.dot(x) - h.offset;
  if (excess <= 0.0) return x;
  return x - excess * h.normal;
}

inline double halfspace_violation(const Polytope& p, const Vec& x) {
  double v = 0.0;
  for (const auto& h : p.halfspaces) v = std::max(v, h.normal.dot(x) - h.offset);
  return v;
}

}  // namespace detail

/// A projectable target set. Construct through the named factories, which
/// validate the shape invariants and throw ValidationError on bad input.
class ConvexRegion {
 public:
  using Variant = std::variant<Ball, Box, Polytope, UnionOfConvex>;

  static ConvexRegion ball(Vec center, double radius) {
    if (center.size() == 0 || !center.allFinite())
      throw ValidationError("ball: center must be finite and non-empty");
    if (!(radius > 0.0) || !std::isfinite(radius))
      throw ValidationError("ball: radius must be positive");
    return ConvexRegion(Ball{std::move(center), radius});
  }

  static ConvexRegion box(Vec lo, Vec hi) {
    if (lo.size() == 0 || lo.size() != hi.size() || !lo.allFinite() || !hi.allFinite())
      throw ValidationError("box: lo/hi must be finite vectors of equal size");
    for (Eigen::Index d = 0; d < lo.size(); ++d)
      if (lo[d] > hi[d]) throw ValidationError("box: requires lo <= hi componentwise");
    return ConvexRegion(Box{std::move(lo), std::move(hi)});
  }

  static ConvexRegion polytope(std::vector<Halfspace> halfspaces);

  static ConvexRegion union_of(std::vector<ConvexRegion> members) {
    if (members.empty()) throw ValidationError("union: needs at least one member");
    const int d = members.front().dim();
    for (const auto& m : members) {
      if (!m.is_convex())
        throw ValidationError("union: members must themselves be convex");
      if (m.dim() != d) throw ValidationError("union: member dimensions differ");
    }
    return ConvexRegion(UnionOfConvex{std::move(members)});
  }

  int dim() const {
    return static_cast<int>(std::visit(
        [](const auto& s) -> Eigen::Index {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, Ball>) return s.center.size();
          if constexpr (std::is_same_v<T, Box>) return s.lo.size();
          if constexpr (std::is_same_v<T, Polytope>) return s.halfspaces.front().normal.size();
          if constexpr (std::is_same_v<T, UnionOfConvex>) return s.members.front().dim();
        },
        v_));
  }

  bool is_convex() const { return !std::holds_alternative<UnionOfConvex>(v_); }

  const Variant& value() const { return v_; }

 private:
  explicit ConvexRegion(Variant v) : v_(std::move(v)) {}
  Variant v_;
};

ProjectionResult project(const ConvexRegion& region, const Vec& x);

namespace detail {

inline ProjectionResult project_ball(const Ball& b, const Vec& x) {
  const Vec d = x - b.center;
  const double dist = d.norm();
  if (dist <= b.radius) return {x, 0.0, 0, true};
  Vec p = b.center + (b.radius / dist) * d;
  return {std::move(p), dist - b.radius, 0, true};
}

inline ProjectionResult project_box(const Box& b, const Vec& x) {
  Vec p = x.cwiseMax(b.lo).cwiseMin(b.hi);
  return {p, (x - p).norm(), 0, true};
}

/// Dykstra over the halfspace list. Exact for intersections of halfspaces;
/// finishes with plain alternating-projection sweeps so the returned point is
/// feasible to well below kFeasTol, which makes re-projection a no-op.
inline ProjectionResult project_polytope(const Polytope& poly, const Vec& x) {
  if (halfspace_violation(poly, x) <= 1e-12) return {x, 0.0, 0, true};
  const std::size_t m = poly.halfspaces.size();
  Vec y = x;
  std::vector<Vec> increments(m, Vec::Zero(x.size()));
  bool converged = false;
  int cycles = 0;
  for (; cycles < kDykstraMaxIter; ++cycles) {
    // Convergence is judged on the full Dykstra state (iterate and dual
    // increments): a fixed point of the whole cycle is exactly the KKT point,
    // whereas y alone can stall early while the increments still move.
    double change = 0.0;
    const Vec y_before = y;
    for (std::size_t kk = 0; kk < m; ++kk) {
      const Vec z = y + increments[kk];
      y = project_halfspace(poly.halfspaces[kk], z);
      const Vec increment = z - y;
      change = std::max(change, (increment - increments[kk]).lpNorm<Eigen::Infinity>());
      increments[kk] = increment;
    }
    change = std::max(change, (y - y_before).lpNorm<Eigen::Infinity>());
    if (change < kDykstraTol) {
      converged = true;
      ++cycles;
      break;
    }
  }
  for (int polish = 0; polish < 100 && halfspace_violation(poly, y) > 1e-13; ++polish)
    for (const auto& h : poly.halfspaces) y = project_halfspace(h, y);
  return {y, (x - y).norm(), cycles, converged};
}

inline ProjectionResult project_union(const UnionOfConvex& u, const Vec& x) {
  ProjectionResult best;
  bool first = true;
  for (const auto& member : u.members) {
    ProjectionResult r = project(member, x);
    if (first || r.distance < best.distance) {  // ties keep the lowest index
      best = std::move(r);
      first = false;
    }
  }
  return best;
}

}  // namespace detail

inline ConvexRegion ConvexRegion::polytope(std::vector<Halfspace> halfspaces) {
  if (halfspaces.empty()) throw ValidationError("polytope: needs at least one halfspace");
  const Eigen::Index d = halfspaces.front().normal.size();
  for (auto& h : halfspaces) {
    if (h.normal.size() != d || !h.normal.allFinite() || !std::isfinite(h.offset))
      throw ValidationError("polytope: halfspaces must be finite and of equal dimension");
    const double n = h.normal.norm();
    if (n < 1e-12) throw ValidationError("polytope: zero normal");
    h.normal /= n;
    h.offset /= n;
  }
  // Nonemptiness check: alternating projections from the origin must reach a
  // feasible point.
  Polytope p{halfspaces};
  Vec y = Vec::Zero(d);
  for (int it = 0; it < kDykstraMaxIter && detail::halfspace_violation(p, y) > kFeasTol; ++it)
    for (const auto& h : p.halfspaces) y = detail::project_halfspace(h, y);
  if (detail::halfspace_violation(p, y) > kFeasTol)
    throw ValidationError("polytope: no feasible point found (empty or ill-conditioned)");
  return ConvexRegion(Variant{std::move(p)});
}

/// Nearest point of `region` to `x`. For unions this is the nearest member's
/// projection (possibly non-unique; ties go to the lowest member index).
inline ProjectionResult project(const ConvexRegion& region, const Vec& x) {
  if (x.size() != region.dim())
    throw ValidationError("project: point dimension does not match region");
  return std::visit(
      [&x](const auto& s) -> ProjectionResult {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Ball>) return detail::project_ball(s, x);
        if constexpr (std::is_same_v<T, Box>) return detail::project_box(s, x);
        if constexpr (std::is_same_v<T, Polytope>) return detail::project_polytope(s, x);
        if constexpr (std::is_same_v<T, UnionOfConvex>) return detail::project_union(s, x);
      },
      region.value());
}

inline double distance(const ConvexRegion& region, const Vec& x) {
  return project(region, x).distance;
}

inline bool contains(const ConvexRegion& region, const Vec& x, double tol = kFeasTol) {
  return distance(region, x) <= tol;
}

/// Projection onto the intersection of convex regions by Dykstra's
/// alternating projections. The returned point is within kFeasTol of every
/// region and within `tol` of the true projection in distance. Throws
/// ValidationError naming a certificate pair of sets when the feasibility
/// residual stalls above zero (empty intersection).
inline ProjectionResult project_intersection(const std::vector<ConvexRegion>& regions,
                                             const Vec& x, double tol = kFeasTol,
                                             int max_iter = kDykstraMaxIter) {
  if (regions.empty()) throw ValidationError("project_intersection: no regions");
  for (const auto& r : regions)
    if (!r.is_convex())
      throw ValidationError("project_intersection: requires convex regions");
  if (regions.size() == 1) return project(regions.front(), x);

  const std::size_t m = regions.size();
  auto residual = [&](const Vec& y) {
    double v = 0.0;
    for (const auto& r : regions) v = std::max(v, distance(r, y));
    return v;
  };

  Vec y = x;
  std::vector<Vec> increments(m, Vec::Zero(x.size()));
  const double step_tol = std::max(1e-12, 0.01 * tol);
  double res = residual(y);
  double res_checkpoint = res;
  int cycles = 0;
  bool converged = false;
  for (; cycles < max_iter; ++cycles) {
    double change = 0.0;
    const Vec y_before = y;
    for (std::size_t kk = 0; kk < m; ++kk) {
      const Vec z = y + increments[kk];
      y = project(regions[kk], z).point;
      const Vec increment = z - y;
      change = std::max(change, (increment - increments[kk]).lpNorm<Eigen::Infinity>());
      increments[kk] = increment;
    }
    change = std::max(change, (y - y_before).lpNorm<Eigen::Infinity>());
    if (change < step_tol && residual(y) <= kFeasTol) {
      converged = true;
      ++cycles;
      break;
    }
    if ((cycles + 1) % 100 == 0) {
      res = residual(y);
      // A residual that is far from zero and no longer shrinking certifies an
      // empty intersection; report the most separated pair of sets.
      if (res > 100 * kFeasTol && res > 0.99 * res_checkpoint) {
        int ci = 0, cj = 1;
        double worst = -1.0;
        for (std::size_t a = 0; a + 1 < m; ++a)
          for (std::size_t b = a + 1; b < m; ++b) {
            const double gap =
                (project(regions[a], y).point - project(regions[b], y).point).norm();
            if (gap > worst) {
              worst = gap;
              ci = static_cast<int>(a);
              cj = static_cast<int>(b);
            }
          }
        throw ValidationError(
            "project_intersection: feasibility residual stalled at " +
            std::to_string(res) + "; intersection appears empty (certificate pair: sets " +
            std::to_string(ci) + " and " + std::to_string(cj) + ")");
      }
      res_checkpoint = res;
    }
  }
  return {y, (x - y).norm(), cycles, converged};
}

/// Sampled lower bound on the linear-regularity constant of the collection:
/// the max over deterministic pseudo-random samples of
/// dist(x, X0) / max_i dist(x, X_i). Samples inside every set are skipped.
inline double estimate_linear_regularity(const std::vector<ConvexRegion>& regions,
                                         const Box& sample_box, int n_samples,
                                         std::uint64_t seed) {
  if (regions.empty()) throw ValidationError("estimate_linear_regularity: no regions");
  for (const auto& r : regions)
    if (!r.is_convex())
      throw ValidationError("estimate_linear_regularity: requires convex regions");
  if (n_samples < 1) throw ValidationError("estimate_linear_regularity: n_samples < 1");
  if (!sample_box.lo.allFinite() || !sample_box.hi.allFinite())
    throw ValidationError("estimate_linear_regularity: sample box must be bounded");

  SplitMix64 rng(seed);
  const Eigen::Index d = sample_box.lo.size();
  double best = -1.0;
  for (int s = 0; s < n_samples; ++s) {
    Vec x(d);
    for (Eigen::Index c = 0; c < d; ++c) x[c] = rng.uniform(sample_box.lo[c], sample_box.hi[c]);
    double dmax = 0.0;
    for (const auto& r : regions) dmax = std::max(dmax, distance(r, x));
    if (dmax <= kFeasTol) continue;  // inside every set: 0/0, uninformative
    const double d0 = project_intersection(regions, x).distance;
    best = std::max(best, d0 / dmax);
  }
  if (best < 0.0)
    throw ValidationError("estimate_linear_regularity: no informative samples");
  return best;
}

/// Evaluates (P(x)-x)^T (P(x)-y) for y in the region; nonpositive for every
/// convex set by the projection variational inequality.
inline double check_projection_inequality(const ConvexRegion& region, const Vec& x,
                                          const Vec& y) {
  if (!region.is_convex())
    throw ValidationError("check_projection_inequality: requires a convex region");
  if (distance(region, y) > kFeasTol)
    throw ValidationError("check_projection_inequality: y lies outside the region");
  const Vec p = project(region, x).point;
  return (p - x).dot(p - y);
}

}  // namespace setrend::convex
