#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "setrend/errors.hpp"
#include "setrend/rng.hpp"

// Undirected weighted communication graphs, Laplacians, piecewise-constant
// switching schedules with dwell time, and connectivity analysis.

namespace setrend::graph {

class WeightedGraph {
 public:
  /// Validates symmetry, zero diagonal, and nonnegative finite weights.
  WeightedGraph(int n, Eigen::MatrixXd adjacency) : n_(n), adj_(std::move(adjacency)) {
    if (n_ < 1) throw ValidationError("graph: needs at least one node");
    if (adj_.rows() != n_ || adj_.cols() != n_)
      throw ValidationError("graph: adjacency must be n x n");
    for (int i = 0; i < n_; ++i) {
      if (adj_(i, i) != 0.0) throw ValidationError("graph: diagonal must be zero");
      for (int j = 0; j < n_; ++j) {
        if (!std::isfinite(adj_(i, j)) || adj_(i, j) < 0.0)
          throw ValidationError("graph: weights must be finite and nonnegative");
        if (adj_(i, j) != adj_(j, i))
          throw ValidationError("graph: adjacency must be symmetric (a_ij = a_ji)");
      }
    }
  }

  /// Undirected edge list (0-based node ids).
  static WeightedGraph from_edges(int n,
                                  const std::vector<std::tuple<int, int, double>>& edges) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (const auto& [i, j, w] : edges) {
      if (i < 0 || j < 0 || i >= n || j >= n)
        throw ValidationError("graph: edge endpoint out of range");
      if (i == j) throw ValidationError("graph: self-loops are not allowed");
      if (!(w > 0.0)) throw ValidationError("graph: edge weights must be positive");
      a(i, j) = w;
      a(j, i) = w;
    }
    return WeightedGraph(n, std::move(a));
  }

  static WeightedGraph empty(int n) { return WeightedGraph(n, Eigen::MatrixXd::Zero(n, n)); }

  static WeightedGraph complete(int n, double w = 1.0) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Constant(n, n, w);
    a.diagonal().setZero();
    return WeightedGraph(n, std::move(a));
  }

  static WeightedGraph star(int n, int center = 0, double w = 1.0) {
    std::vector<std::tuple<int, int, double>> edges;
    for (int j = 0; j < n; ++j)
      if (j != center) edges.emplace_back(center, j, w);
    return from_edges(n, edges);
  }

  int size() const { return n_; }
  const Eigen::MatrixXd& adjacency() const { return adj_; }
  double weight(int i, int j) const { return adj_(i, j); }

  /// Smallest and largest positive weight; zeros when the graph has no edges.
  std::pair<double, double> weight_bounds() const {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (int i = 0; i < n_; ++i)
      for (int j = i + 1; j < n_; ++j)
        if (adj_(i, j) > 0.0) {
          lo = std::min(lo, adj_(i, j));
          hi = std::max(hi, adj_(i, j));
        }
    if (hi == 0.0) return {0.0, 0.0};
    return {lo, hi};
  }

 private:
  int n_;
  Eigen::MatrixXd adj_;
};

/// L = D - A: l_ii = sum_j a_ij, l_ij = -a_ij. Symmetric PSD, zero row sums.
inline Eigen::MatrixXd laplacian(const WeightedGraph& g) {
  Eigen::MatrixXd l = -g.adjacency();
  for (int i = 0; i < g.size(); ++i) l(i, i) = g.adjacency().row(i).sum();
  return l;
}

inline int component_count(const WeightedGraph& g) {
  const int n = g.size();
  std::vector<int> label(n, -1);
  int components = 0;
  std::vector<int> stack;
  for (int s = 0; s < n; ++s) {
    if (label[s] >= 0) continue;
    label[s] = components;
    stack.push_back(s);
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int v = 0; v < n; ++v)
        if (g.weight(u, v) > 0.0 && label[v] < 0) {
          label[v] = components;
          stack.push_back(v);
        }
    }
    ++components;
  }
  return components;
}

inline bool is_connected(const WeightedGraph& g) { return component_count(g) == 1; }

/// Union graph over positive-weight arcs (max weight per arc).
inline WeightedGraph union_graph(const std::vector<const WeightedGraph*>& graphs) {
  if (graphs.empty()) throw ValidationError("union_graph: no graphs");
  const int n = graphs.front()->size();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (const auto* g : graphs) {
    if (g->size() != n) throw ValidationError("union_graph: node counts differ");
    a = a.cwiseMax(g->adjacency());
  }
  return WeightedGraph(n, std::move(a));
}

/// Largest Laplacian eigenvalue by power iteration with Rayleigh-quotient
/// refinement (L is PSD, so the dominant eigenvalue in magnitude is lambda_max).
inline double max_laplacian_eigenvalue(const WeightedGraph& g) {
  const Eigen::MatrixXd l = laplacian(g);
  const int n = g.size();
  SplitMix64 rng(0x5E7Au ^ static_cast<std::uint64_t>(n));
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.uniform(-1.0, 1.0);
  v.normalize();
  double rayleigh = 0.0;
  for (int it = 0; it < 200000; ++it) {
    Eigen::VectorXd w = l * v;
    const double norm = w.norm();
    if (norm < 1e-300) return 0.0;  // empty graph: L v = 0 for every v
    v = w / norm;
    const double r = v.dot(l * v);
    if (std::abs(r - rayleigh) < 1e-13 * std::max(1.0, std::abs(r)) &&
        (l * v - r * v).norm() <= 1e-10 * std::max(1.0, std::abs(r)))
      return r;
    rayleigh = r;
  }
  return rayleigh;
}

/// Smallest nonzero Laplacian eigenvalue (algebraic connectivity); 0 when the
/// graph is disconnected.
inline double algebraic_connectivity(const WeightedGraph& g) {
  if (g.size() < 2) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(laplacian(g));
  if (solver.info() != Eigen::Success)
    throw NumericFailure("algebraic_connectivity: eigensolver failed", -1.0);
  return solver.eigenvalues()[1];
}

/// Piecewise-constant graph schedule sigma(t). Segment l is active on
/// [t_l, t_{l+1}); a cyclic schedule repeats its listed pattern forever, a
/// timed one holds the last graph after the final switch.
class GraphSchedule {
 public:
  static GraphSchedule constant(WeightedGraph g) {
    GraphSchedule s;
    s.graphs_.push_back(std::move(g));
    s.boundaries_ = {0.0};
    s.indices_ = {0};
    s.cyclic_ = false;
    s.dwell_ = std::numeric_limits<double>::infinity();
    return s;
  }

  /// `durations[l]` is the length of pattern segment l; the pattern repeats
  /// with period sum(durations) starting at t0.
  static GraphSchedule cyclic(std::vector<WeightedGraph> graphs, std::vector<int> indices,
                              std::vector<double> durations, double t0 = 0.0,
                              std::optional<double> dwell = std::nullopt) {
    GraphSchedule s;
    s.graphs_ = std::move(graphs);
    s.cyclic_ = true;
    if (indices.empty() || indices.size() != durations.size())
      throw ValidationError("schedule: indices and durations must align and be non-empty");
    double t = t0;
    for (std::size_t l = 0; l < indices.size(); ++l) {
      s.boundaries_.push_back(t);
      s.indices_.push_back(indices[l]);
      if (!(durations[l] > 0.0)) throw ValidationError("schedule: durations must be positive");
      t += durations[l];
    }
    s.period_ = t - t0;
    s.finish(dwell);
    return s;
  }

  static GraphSchedule timed(std::vector<WeightedGraph> graphs,
                             std::vector<double> switch_times, std::vector<int> indices,
                             std::optional<double> dwell = std::nullopt) {
    GraphSchedule s;
    s.graphs_ = std::move(graphs);
    s.cyclic_ = false;
    if (switch_times.empty() || switch_times.size() != indices.size())
      throw ValidationError("schedule: switch_times and indices must align and be non-empty");
    s.boundaries_ = std::move(switch_times);
    s.indices_ = std::move(indices);
    s.finish(dwell);
    return s;
  }

  int node_count() const { return graphs_.front().size(); }
  const std::vector<WeightedGraph>& graphs() const { return graphs_; }
  double start_time() const { return boundaries_.front(); }
  bool is_cyclic() const { return cyclic_; }
  double period() const { return period_; }
  double dwell() const { return dwell_; }
  bool is_constant() const { return graphs_.size() == 1 && indices_.size() == 1; }

  const WeightedGraph& active(double t) const {
    return graphs_[indices_[segment_at(t)]];
  }

  /// Segment boundaries falling inside [begin, end], in increasing order
  /// (cyclic schedules are unrolled).
  std::vector<double> boundaries_in(double begin, double end) const {
    std::vector<double> out;
    if (!cyclic_) {
      for (double b : boundaries_)
        if (b >= begin - kSnap && b <= end + kSnap) out.push_back(b);
      return out;
    }
    const double t0 = boundaries_.front();
    double base = t0 + std::floor((begin - t0) / period_) * period_;
    for (double cycle = base - period_; cycle <= end + period_; cycle += period_)
      for (double b : boundaries_) {
        const double t = cycle + (b - t0);
        if (t >= begin - kSnap && t <= end + kSnap) out.push_back(t);
      }
    std::sort(out.begin(), out.end());
    return out;
  }

  /// Bounds a_* <= a_ij(t) <= a^* over all active arcs of the schedule.
  std::pair<double, double> weight_bounds() const {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& g : graphs_) {
      const auto [l, h] = g.weight_bounds();
      if (h > 0.0) {
        lo = std::min(lo, l);
        hi = std::max(hi, h);
      }
    }
    if (hi == 0.0) return {0.0, 0.0};
    return {lo, hi};
  }

 private:
  static constexpr double kSnap = 1e-9;  // right-continuity snap at boundaries

  void finish(std::optional<double> dwell) {
    if (graphs_.empty()) throw ValidationError("schedule: needs at least one graph");
    const int n = graphs_.front().size();
    for (const auto& g : graphs_)
      if (g.size() != n) throw ValidationError("schedule: all graphs must share node count");
    for (int idx : indices_)
      if (idx < 0 || idx >= static_cast<int>(graphs_.size()))
        throw ValidationError("schedule: graph index out of range");
    double min_len = std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l + 1 < boundaries_.size(); ++l) {
      const double len = boundaries_[l + 1] - boundaries_[l];
      if (!(len > 0.0)) throw ValidationError("schedule: switch times must strictly increase");
      min_len = std::min(min_len, len);
    }
    if (cyclic_) min_len = std::min(min_len, period_ - (boundaries_.back() - boundaries_.front()));
    dwell_ = dwell.value_or(min_len);
    if (!(dwell_ > 0.0)) throw ValidationError("schedule: dwell time must be positive");
    if (min_len < dwell_ - kSnap)
      throw ValidationError("schedule: an interval is shorter than the dwell time");
  }

  std::size_t segment_at(double t) const {
    const double t0 = boundaries_.front();
    if (t < t0 - kSnap)
      throw ValidationError("schedule: time " + std::to_string(t) + " precedes schedule start");
    double tau = t;
    if (cyclic_) {
      tau = std::fmod(t - t0, period_);
      if (tau < 0.0) tau += period_;
      if (period_ - tau < kSnap) tau = 0.0;  // snap to the next cycle start
      tau += t0;
    }
    auto it = std::upper_bound(boundaries_.begin(), boundaries_.end(), tau + kSnap);
    return static_cast<std::size_t>(std::distance(boundaries_.begin(), it) - 1);
  }

  std::vector<WeightedGraph> graphs_;
  std::vector<double> boundaries_;
  std::vector<int> indices_;
  bool cyclic_ = false;
  double period_ = 0.0;
  double dwell_ = 0.0;
};

inline const WeightedGraph& active_graph(const GraphSchedule& schedule, double t) {
  return schedule.active(t);
}

/// True iff the union graph over every length-`window` interval inside
/// [start, horizon] is connected. Unions are constant between switches, so it
/// suffices to scan window starts on the switch-time lattice.
inline bool is_uniformly_jointly_connected(const GraphSchedule& schedule, double horizon,
                                           double window) {
  if (!(window > 0.0)) throw ValidationError("joint connectivity: window must be positive");
  const double t0 = schedule.start_time();
  std::vector<double> starts{t0};
  if (horizon - window > t0)
    for (double b : schedule.boundaries_in(t0, horizon - window))
      if (b > t0) starts.push_back(b);
  for (double s : starts) {
    std::vector<double> probes{s};
    for (double b : schedule.boundaries_in(s, s + window))
      if (b > s && b < s + window - 1e-12) probes.push_back(b);
    std::vector<const WeightedGraph*> active;
    for (double p : probes) active.push_back(&schedule.active(p));
    if (!is_connected(union_graph(active))) return false;
  }
  return true;
}

inline double max_laplacian_eigenvalue(const GraphSchedule& schedule) {
  double best = 0.0;
  for (const auto& g : schedule.graphs())
    best = std::max(best, max_laplacian_eigenvalue(g));
  return best;
}

}  // namespace setrend::graph
