#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "setrend/errors.hpp"
#include "setrend/report.hpp"
#include "setrend/sim.hpp"

// Run outputs: trajectory CSV, report JSON, and static SVG plots. Files are
// written atomically (temp + rename) and are byte-identical across re-runs of
// the same scenario.

namespace setrend::artifacts {

namespace detail {

/// Shortest round-trip decimal representation (stable bytes across runs).
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace detail

inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write " + tmp.string());
    out << content;
    if (!out.good()) throw ValidationError("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

/// CSV schema: one row per (sample, agent) with the per-sample global columns
/// repeated on each row:
/// t,agent,qx,qy,qdotx,qdoty,taux,tauy,dist_own,dist_X0,speed,lyapunov,consensus_err,min_pairwise
inline std::string trajectory_csv(const sim::Trajectory& traj) {
  using detail::format_double;
  std::string csv =
      "t,agent,qx,qy,qdotx,qdoty,taux,tauy,dist_own,dist_X0,speed,"
      "lyapunov,consensus_err,min_pairwise\n";
  for (const auto& s : traj.samples) {
    for (std::size_t i = 0; i < s.states.size(); ++i) {
      csv += format_double(s.t);
      csv += ',';
      csv += std::to_string(i + 1);
      csv += ',';
      csv += format_double(s.states[i].q.x());
      csv += ',';
      csv += format_double(s.states[i].q.y());
      csv += ',';
      csv += format_double(s.states[i].qdot.x());
      csv += ',';
      csv += format_double(s.states[i].qdot.y());
      csv += ',';
      csv += format_double(s.controls[i].x());
      csv += ',';
      csv += format_double(s.controls[i].y());
      csv += ',';
      csv += format_double(s.metrics.dist_own[i]);
      csv += ',';
      csv += format_double(s.metrics.dist_x0[i]);
      csv += ',';
      csv += format_double(s.metrics.speed[i]);
      csv += ',';
      csv += format_double(s.metrics.lyapunov);
      csv += ',';
      csv += format_double(s.metrics.consensus_error);
      csv += ',';
      csv += format_double(s.metrics.min_pairwise);
      csv += '\n';
    }
  }
  return csv;
}

// ---------------------------------------------------------------------------
// Minimal SVG plotting.

namespace detail {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

inline const char* palette(std::size_t i) {
  static const char* kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                  "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                                  "#bcbd22", "#17becf", "#aec7e8", "#ffbb78",
                                  "#98df8a", "#ff9896", "#c5b0d5", "#c49c94"};
  return kColors[i % 16];
}

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

struct Frame {
  double x0, x1, y0, y1;           // data range
  double px0, px1, py0, py1;       // pixel box
  double sx(double x) const { return px0 + (x - x0) / (x1 - x0) * (px1 - px0); }
  double sy(double y) const { return py1 - (y - y0) / (y1 - y0) * (py1 - py0); }
};

inline void expand(double& lo, double& hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi)) {
    lo = 0.0;
    hi = 1.0;
  }
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;
}

inline std::string svg_header(int w, int h, const std::string& title) {
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(w) +
                  "\" height=\"" + std::to_string(h) + "\" viewBox=\"0 0 " + std::to_string(w) +
                  " " + std::to_string(h) + "\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + std::to_string(w / 2) +
       "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">" +
       title + "</text>\n";
  return s;
}

inline std::string axes(const Frame& f, const std::string& xlabel, const std::string& ylabel) {
  std::string s;
  s += "<rect x=\"" + num(f.px0) + "\" y=\"" + num(f.py0) + "\" width=\"" + num(f.px1 - f.px0) +
       "\" height=\"" + num(f.py1 - f.py0) + "\" fill=\"none\" stroke=\"#333\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = f.x0 + (f.x1 - f.x0) * i / 4.0;
    const double yv = f.y0 + (f.y1 - f.y0) * i / 4.0;
    s += "<text x=\"" + num(f.sx(xv)) + "\" y=\"" + num(f.py1 + 18) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" + num(xv) +
         "</text>\n";
    s += "<text x=\"" + num(f.px0 - 6) + "\" y=\"" + num(f.sy(yv) + 4) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + num(yv) +
         "</text>\n";
  }
  s += "<text x=\"" + num((f.px0 + f.px1) / 2) + "\" y=\"" + num(f.py1 + 36) +
       "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" + xlabel +
       "</text>\n";
  s += "<text x=\"16\" y=\"" + num((f.py0 + f.py1) / 2) +
       "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 16 " +
       num((f.py0 + f.py1) / 2) + ")\">" + ylabel + "</text>\n";
  return s;
}

inline std::string polyline(const Frame& f, const std::vector<double>& x,
                            const std::vector<double>& y, const char* color) {
  std::string s = "<polyline fill=\"none\" stroke=\"";
  s += color;
  s += "\" stroke-width=\"1.2\" points=\"";
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(y[i])) continue;
    s += num(f.sx(x[i])) + "," + num(f.sy(y[i])) + " ";
  }
  s += "\"/>\n";
  return s;
}

inline std::string timeseries_svg(const std::string& title, const std::string& xlabel,
                                  const std::string& ylabel, const std::vector<Series>& series,
                                  std::optional<double> hline = std::nullopt) {
  const int w = 820, h = 560;
  Frame f{0, 1, 0, 1, 70, w - 20.0, 44, h - 56.0};
  f.x0 = std::numeric_limits<double>::infinity();
  f.x1 = -f.x0;
  f.y0 = f.x0;
  f.y1 = -f.x0;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.y[i])) continue;
      f.x0 = std::min(f.x0, s.x[i]);
      f.x1 = std::max(f.x1, s.x[i]);
      f.y0 = std::min(f.y0, s.y[i]);
      f.y1 = std::max(f.y1, s.y[i]);
    }
  if (hline) {
    f.y0 = std::min(f.y0, *hline);
    f.y1 = std::max(f.y1, *hline);
  }
  expand(f.x0, f.x1);
  expand(f.y0, f.y1);
  std::string svg = svg_header(w, h, title);
  svg += axes(f, xlabel, ylabel);
  if (hline)
    svg += "<line x1=\"" + num(f.px0) + "\" y1=\"" + num(f.sy(*hline)) + "\" x2=\"" +
           num(f.px1) + "\" y2=\"" + num(f.sy(*hline)) +
           "\" stroke=\"#d62728\" stroke-dasharray=\"6 4\"/>\n";
  for (std::size_t i = 0; i < series.size(); ++i)
    svg += polyline(f, series[i].x, series[i].y, palette(i));
  svg += "</svg>\n";
  return svg;
}

inline void region_outline(std::string& svg, const Frame& f, const convex::ConvexRegion& region) {
  using namespace convex;
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Ball>) {
          const double rx = std::abs(f.sx(s.center[0] + s.radius) - f.sx(s.center[0]));
          const double ry = std::abs(f.sy(s.center[1] + s.radius) - f.sy(s.center[1]));
          svg += "<ellipse cx=\"" + num(f.sx(s.center[0])) + "\" cy=\"" + num(f.sy(s.center[1])) +
                 "\" rx=\"" + num(rx) + "\" ry=\"" + num(ry) +
                 "\" fill=\"none\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n";
        } else if constexpr (std::is_same_v<T, Box>) {
          svg += "<rect x=\"" + num(f.sx(s.lo[0])) + "\" y=\"" + num(f.sy(s.hi[1])) +
                 "\" width=\"" + num(f.sx(s.hi[0]) - f.sx(s.lo[0])) + "\" height=\"" +
                 num(f.sy(s.lo[1]) - f.sy(s.hi[1])) +
                 "\" fill=\"none\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n";
        } else if constexpr (std::is_same_v<T, UnionOfConvex>) {
          for (const auto& m : s.members) region_outline(svg, f, m);
        }
        // Halfspace intersections are left undrawn.
      },
      region.value());
}

}  // namespace detail

/// 2-D coordinate trails with the target-set outlines and final positions.
inline std::string trails_svg(const sim::Scenario& sc, const sim::Trajectory& traj) {
  using namespace detail;
  const int w = 760, h = 760;
  Frame f{0, 1, 0, 1, 70, w - 30.0, 44, h - 56.0};
  f.x0 = std::numeric_limits<double>::infinity();
  f.x1 = -f.x0;
  f.y0 = f.x0;
  f.y1 = -f.x0;
  for (const auto& s : traj.samples)
    for (const auto& st : s.states) {
      f.x0 = std::min(f.x0, st.q.x());
      f.x1 = std::max(f.x1, st.q.x());
      f.y0 = std::min(f.y0, st.q.y());
      f.y1 = std::max(f.y1, st.q.y());
    }
  Eigen::Vector2d lo(f.x0, f.y0), hi(f.x1, f.y1);
  for (const auto& r : sc.regions) report::detail::accumulate_bounds(r, lo, hi);
  f.x0 = lo.x();
  f.y0 = lo.y();
  f.x1 = hi.x();
  f.y1 = hi.y();
  expand(f.x0, f.x1);
  expand(f.y0, f.y1);

  std::string svg = svg_header(w, h, sc.name + ": coordinate trails");
  svg += axes(f, "q_x", "q_y");
  for (const auto& r : sc.regions) region_outline(svg, f, r);
  for (int i = 0; i < sc.n; ++i) {
    std::vector<double> xs, ys;
    xs.reserve(traj.samples.size());
    ys.reserve(traj.samples.size());
    for (const auto& s : traj.samples) {
      xs.push_back(s.states[i].q.x());
      ys.push_back(s.states[i].q.y());
    }
    svg += polyline(f, xs, ys, palette(i));
    if (!traj.samples.empty()) {
      const auto& last = traj.samples.back().states[i].q;
      svg += "<circle cx=\"" + num(f.sx(last.x())) + "\" cy=\"" + num(f.sy(last.y())) +
             "\" r=\"4\" fill=\"" + palette(i) + "\"/>\n";
    }
  }
  svg += "</svg>\n";
  return svg;
}

struct RunArtifacts {
  std::filesystem::path trajectory_csv;
  std::filesystem::path report_json;
  std::vector<std::filesystem::path> plots;
};

inline RunArtifacts write_run_artifacts(const sim::Scenario& sc, const sim::Trajectory& traj,
                                        const report::AggregationReport& rep,
                                        const std::filesystem::path& out_dir) {
  using detail::Series;
  RunArtifacts out;
  std::filesystem::create_directories(out_dir);

  out.trajectory_csv = out_dir / (sc.name + "_trajectory.csv");
  write_atomic(out.trajectory_csv, trajectory_csv(traj));

  out.report_json = out_dir / (sc.name + "_report.json");
  write_atomic(out.report_json, rep.to_json().dump(2) + "\n");

  std::vector<double> times;
  times.reserve(traj.samples.size());
  for (const auto& s : traj.samples) times.push_back(s.t);

  std::vector<Series> speeds;
  for (int i = 0; i < sc.n; ++i) {
    Series srs;
    srs.label = "agent " + std::to_string(i + 1);
    srs.x = times;
    for (const auto& s : traj.samples) srs.y.push_back(s.metrics.speed[i]);
    speeds.push_back(std::move(srs));
  }
  Series minpair{"min pairwise", times, {}};
  Series lyap{"V", times, {}};
  for (const auto& s : traj.samples) {
    minpair.y.push_back(s.metrics.min_pairwise);
    lyap.y.push_back(s.metrics.lyapunov);
  }

  const auto plot = [&](const std::string& stem, const std::string& svg) {
    const auto path = out_dir / (sc.name + "_" + stem + ".svg");
    write_atomic(path, svg);
    out.plots.push_back(path);
  };
  plot("trails", trails_svg(sc, traj));
  plot("speeds", detail::timeseries_svg(sc.name + ": generalized coordinate derivative norms",
                                        "t", "|qdot_i|", speeds));
  std::optional<double> safety;
  if (sc.controller.avoidance) safety = sc.controller.avoidance->safety_radius;
  plot("min_pairwise", detail::timeseries_svg(sc.name + ": minimum pairwise distance", "t",
                                              "min |q_i - q_j|", {minpair}, safety));
  plot("lyapunov",
       detail::timeseries_svg(sc.name + ": Lyapunov value", "t", "V(t)", {lyap}));
  return out;
}

}  // namespace setrend::artifacts
