#include "stlplan/plansim/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "stlplan/error.hpp"
#include "stlplan/io/csv.hpp"
#include "stlplan/stl/parse.hpp"

namespace stlplan::plansim {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  out << text;
  if (!out) throw IoError(path.string() + ": write failed");
}

json collisions_json(const ExecutedTrace& e, double dt) {
  json out = json::array();
  for (const auto& c : e.collisions) {
    out.push_back({{"obstacle", c.obstacle}, {"step", c.step}, {"t", e.start_time + static_cast<double>(c.step) * dt}});
  }
  return out;
}

bool goal_reached(const reproduce::Trajectory& traj, const constraints::Scenario& s) {
  if (traj.states.empty()) return false;
  const auto& end = traj.states.back();
  return std::hypot(end.x - s.goal.x, end.y - s.goal.y) <= s.goal.radius;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

// Axis-aligned plotting canvas: data coordinates map onto a fixed pixel frame.
class Canvas {
 public:
  Canvas(double x0, double x1, double y0, double y1, double width = 720, double height = 480, bool equal = false)
      : x0_(x0), x1_(x1), y0_(y0), y1_(y1), w_(width), h_(height) {
    if (!(x1_ > x0_)) x1_ = x0_ + 1.0;
    if (!(y1_ > y0_)) y1_ = y0_ + 1.0;
    sx_ = (w_ - 2 * kPad) / (x1_ - x0_);
    sy_ = (h_ - 2 * kPad) / (y1_ - y0_);
    if (equal) {
      sx_ = sy_ = std::min(sx_, sy_);
      h_ = 2 * kPad + sy_ * (y1_ - y0_);
      w_ = 2 * kPad + sx_ * (x1_ - x0_);
    }
  }

  double px(double x) const { return kPad + (x - x0_) * sx_; }
  double py(double y) const { return h_ - kPad - (y - y0_) * sy_; }

  void rect(const Box& b, const std::string& style) {
    body_ << "<rect x=\"" << fmt(px(b.x_lb)) << "\" y=\"" << fmt(py(b.y_ub)) << "\" width=\""
          << fmt((b.x_ub - b.x_lb) * sx_) << "\" height=\"" << fmt((b.y_ub - b.y_lb) * sy_) << "\" " << style
          << "/>\n";
  }

  void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& style) {
    body_ << "<polyline fill=\"none\" " << style << " points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      body_ << (i ? " " : "") << fmt(px(pts[i].first)) << "," << fmt(py(pts[i].second));
    }
    body_ << "\"/>\n";
  }

  void circle(double x, double y, double r_px, const std::string& style) {
    body_ << "<circle cx=\"" << fmt(px(x)) << "\" cy=\"" << fmt(py(y)) << "\" r=\"" << fmt(r_px) << "\" " << style
          << "/>\n";
  }

  void text(double x_px, double y_px, const std::string& s, const std::string& anchor = "start") {
    body_ << "<text x=\"" << fmt(x_px) << "\" y=\"" << fmt(y_px) << "\" font-size=\"12\" font-family=\"sans-serif\""
          << " text-anchor=\"" << anchor << "\">" << escape(s) << "</text>\n";
  }

  void label_at(double x, double y, const std::string& s) { text(px(x) + 3, py(y) - 3, s); }

  void axes(const std::string& xlabel, const std::string& ylabel, const std::string& title) {
    body_ << "<rect x=\"" << fmt(kPad) << "\" y=\"" << fmt(kPad) << "\" width=\"" << fmt(w_ - 2 * kPad)
          << "\" height=\"" << fmt(h_ - 2 * kPad) << "\" fill=\"none\" stroke=\"#444\"/>\n";
    for (int i = 0; i <= 4; ++i) {
      const double xv = x0_ + (x1_ - x0_) * i / 4.0;
      const double yv = y0_ + (y1_ - y0_) * i / 4.0;
      text(px(xv), h_ - kPad + 16, fmt(xv), "middle");
      text(kPad - 6, py(yv) + 4, fmt(yv), "end");
    }
    text(w_ / 2, h_ - 8, xlabel, "middle");
    text(12, kPad - 10, ylabel);
    text(w_ / 2, 18, title, "middle");
  }

  void legend(const std::vector<std::pair<std::string, std::string>>& entries) {
    double y = kPad + 16;
    for (const auto& [label, color] : entries) {
      body_ << "<line x1=\"" << fmt(w_ - kPad - 150) << "\" y1=\"" << fmt(y - 4) << "\" x2=\"" << fmt(w_ - kPad - 130)
            << "\" y2=\"" << fmt(y - 4) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
      text(w_ - kPad - 124, y, label);
      y += 16;
    }
  }

  std::string str() const {
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(w_) << "\" height=\"" << fmt(h_)
        << "\" viewBox=\"0 0 " << fmt(w_) << " " << fmt(h_) << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << body_.str() << "</svg>\n";
    return out.str();
  }

 private:
  static constexpr double kPad = 50.0;
  double x0_, x1_, y0_, y1_, w_, h_, sx_ = 1.0, sy_ = 1.0;
  std::ostringstream body_;
};

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

}  // namespace

void write_trajectory_csv(const std::filesystem::path& path, const reproduce::Trajectory& traj, double t0) {
  io::CsvWriter w(path, {"t", "x", "y", "alpha", "v", "omega"});
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    const auto& s = traj.states[k];
    const bool has_u = k < traj.controls.size();
    w.row({t0 + static_cast<double>(k) * traj.dt, s.x, s.y, s.alpha, has_u ? traj.controls[k].v : kNaN,
           has_u ? traj.controls[k].omega : kNaN});
  }
}

void write_history_csv(const std::filesystem::path& path, const opt::OptResult& res, const OutputOptions& opts) {
  io::CsvWriter w(path, {"iter", "value", "wall_time_s"});
  for (const auto& h : res.history) {
    w.row({static_cast<double>(h.iteration), h.value, opts.record_timing ? h.wall_time_s : 0.0});
  }
}

void write_cycles_csv(const std::filesystem::path& path, const std::vector<CycleReport>& reports,
                      const OutputOptions& opts) {
  io::CsvWriter w(path, {"cycle", "initial_robustness", "optimized_robustness", "optimization_time_s",
                         "simulation_time_s", "deadline_met"});
  auto cell = [](const std::optional<double>& v) { return v ? io::format_cell(*v) : std::string(); };
  for (const auto& r : timeline_rows(reports)) {
    std::optional<double> opt_time = r.optimization_time;
    if (opt_time && !opts.record_timing) opt_time = 0.0;
    w.row_text({std::to_string(r.row), cell(r.initial_robustness), cell(r.optimized_robustness), cell(opt_time),
                cell(r.simulation_time), r.deadline_met ? (*r.deadline_met ? "true" : "false") : ""});
  }
}

void write_distances_csv(const std::filesystem::path& path, const ExecutedTrace& executed) {
  std::vector<std::string> header{"step", "t"};
  for (const auto& [id, d] : executed.distances) header.push_back(id);
  io::CsvWriter w(path, header);
  std::vector<double> row(header.size());
  for (std::size_t k = 0; k < executed.trace.length(); ++k) {
    row[0] = static_cast<double>(k);
    row[1] = executed.start_time + static_cast<double>(k) * executed.trace.dt();
    std::size_t c = 2;
    for (const auto& [id, d] : executed.distances) row[c++] = d[k];
    w.row(row);
  }
}

std::map<std::string, double> min_distances(const ExecutedTrace& executed) {
  std::map<std::string, double> out;
  for (const auto& [id, d] : executed.distances) {
    out[id] = d.empty() ? kNaN : *std::min_element(d.begin(), d.end());
  }
  return out;
}

std::string plan_result_json(const PlanResult& r, const constraints::Scenario& s, const OutputOptions& opts) {
  json j;
  j["mode"] = "plan";
  j["satisfied"] = std::isfinite(r.executed.final_robustness) && r.executed.final_robustness > 0.0;
  j["final_robustness"] = finite_or_null(r.executed.final_robustness);
  j["initial_final_robustness"] = finite_or_null(r.initial_executed.final_robustness);
  j["initial_robustness"] = finite_or_null(r.opt.initial_value);
  j["optimized_robustness"] = finite_or_null(r.opt.best_value);
  j["evaluations"] = r.opt.history.size() + static_cast<std::size_t>(r.opt.discarded);
  j["discarded_evaluations"] = r.opt.discarded;
  j["optimization_time_s"] = opts.record_timing ? r.opt.wall_time_total : 0.0;
  j["deadline_hit"] = r.opt.deadline_hit;
  j["collisions"] = collisions_json(r.executed, s.dt);
  j["initial_collisions"] = collisions_json(r.initial_executed, s.dt);
  json md = json::object();
  for (const auto& [id, d] : min_distances(r.executed)) md[id] = finite_or_null(d);
  j["min_distance"] = md;
  j["goal_reached"] = goal_reached(r.trajectory, s);
  j["spec"] = stl::format_formula(r.spec);
  return j.dump(2) + "\n";
}

std::string run_result_json(const ContinuousResult& r, const constraints::Scenario& s, const OutputOptions& opts) {
  json j;
  j["mode"] = "run";
  j["satisfied"] = std::isfinite(r.executed.final_robustness) && r.executed.final_robustness > 0.0;
  j["final_robustness"] = finite_or_null(r.executed.final_robustness);
  j["collisions"] = collisions_json(r.executed, s.dt);
  bool all_met = true;
  bool all_positive = true;
  json cycles = json::array();
  for (const auto& c : r.reports) {
    all_met = all_met && c.deadline_met;
    all_positive = all_positive && c.optimized_robustness > 0.0;
    cycles.push_back({{"cycle", c.cycle_index},
                      {"start_time", c.start_time},
                      {"initial_robustness", finite_or_null(c.initial_robustness)},
                      {"optimized_robustness", finite_or_null(c.optimized_robustness)},
                      {"optimization_time_s", opts.record_timing ? c.optimization_time : 0.0},
                      {"simulation_time_s", c.simulation_time},
                      {"deadline_met", c.deadline_met},
                      {"evaluations", c.evaluations},
                      {"spec", c.spec_text}});
  }
  j["all_deadlines_met"] = all_met;
  j["all_cycles_positive"] = all_positive;
  j["cycles"] = cycles;
  json md = json::object();
  for (const auto& [id, d] : min_distances(r.executed)) md[id] = finite_or_null(d);
  j["min_distance"] = md;
  j["goal_reached"] = goal_reached(r.trajectory, s);
  return j.dump(2) + "\n";
}

void write_map_svg(const std::filesystem::path& path, const constraints::Scenario& s,
                   const std::vector<PathLayer>& paths) {
  const Box& m = s.map_bounds;
  Canvas c(m.x_lb, m.x_ub, m.y_lb, m.y_ub, 900, 600, true);
  c.axes("x [m]", "y [m]", "trajectory");
  for (const auto& r : s.road_rule_regions) c.rect(r, "fill=\"#f2c94c\" fill-opacity=\"0.35\" stroke=\"#b8860b\"");
  for (std::size_t i = 0; i < s.traffic_lights.size(); ++i) {
    const auto& tl = s.traffic_lights[i];
    c.rect(tl.avoid, "fill=\"#eb5757\" fill-opacity=\"0.25\" stroke=\"#eb5757\"");
    c.rect(tl.stay, "fill=\"#27ae60\" fill-opacity=\"0.25\" stroke=\"#27ae60\"");
    c.label_at(tl.avoid.x_lb, tl.avoid.y_ub, "avoid" + std::to_string(i));
    c.label_at(tl.stay.x_lb, tl.stay.y_ub, "stay" + std::to_string(i));
  }
  for (const auto& o : s.obstacles) {
    c.rect(o.box_at(0.0), "fill=\"#555\" fill-opacity=\"0.5\" stroke=\"#222\"");
    if (!o.is_static()) {
      c.rect(o.box_at(s.horizon_t), "fill=\"none\" stroke=\"#222\" stroke-dasharray=\"4 3\"");
      const Point2 a = o.box_at(0.0).center();
      const Point2 b = o.box_at(s.horizon_t).center();
      c.polyline({{a.x, a.y}, {b.x, b.y}}, "stroke=\"#222\" stroke-dasharray=\"2 2\"");
    }
    const Box b = o.box_at(0.0);
    c.label_at(b.x_lb, b.y_ub, o.id);
  }
  c.circle(s.goal.x, s.goal.y, 5, "fill=\"none\" stroke=\"#000\" stroke-width=\"2\"");
  c.circle(s.start.x, s.start.y, 4, "fill=\"#000\"");
  std::vector<std::pair<std::string, std::string>> legend;
  for (const auto& p : paths) {
    if (!p.trajectory) continue;
    std::vector<std::pair<double, double>> pts;
    for (const auto& st : p.trajectory->states) pts.emplace_back(st.x, st.y);
    c.polyline(pts, "stroke=\"" + p.color + "\" stroke-width=\"2\"");
    legend.emplace_back(p.label, p.color);
  }
  c.legend(legend);
  write_text(path, c.str());
}

void write_distance_svg(const std::filesystem::path& path, const ExecutedTrace& executed,
                        const constraints::Scenario& s) {
  const double t0 = executed.start_time;
  const double t1 = t0 + static_cast<double>(executed.trace.length() - 1) * executed.trace.dt();
  double dmax = 2.0;
  for (const auto& [id, d] : executed.distances) {
    for (double v : d) dmax = std::max(dmax, v);
  }
  Canvas c(t0, t1, 0.0, dmax * 1.05);
  c.axes("t [s]", "distance [m]", "distance to obstacles");
  for (const auto& sd : s.safety_distances) {
    c.polyline({{sd.window.lo(), sd.bound}, {sd.window.hi(), sd.bound}}, "stroke=\"#888\" stroke-dasharray=\"6 4\"");
    c.label_at(sd.window.lo(), sd.bound, fmt(sd.bound) + " m (" + sd.obstacle + ")");
  }
  std::vector<std::pair<std::string, std::string>> legend;
  std::size_t i = 0;
  for (const auto& [id, d] : executed.distances) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t k = 0; k < d.size(); ++k) pts.emplace_back(t0 + static_cast<double>(k) * executed.trace.dt(), d[k]);
    const std::string color = kPalette[i++ % std::size(kPalette)];
    c.polyline(pts, "stroke=\"" + color + "\" stroke-width=\"1.5\"");
    legend.emplace_back(id, color);
  }
  c.legend(legend);
  write_text(path, c.str());
}

void write_history_svg(const std::filesystem::path& path, const opt::OptResult& res) {
  if (res.history.empty()) {
    write_text(path, Canvas(0, 1, 0, 1).str());
    return;
  }
  double lo = res.history.front().value;
  double hi = lo;
  for (const auto& h : res.history) {
    lo = std::min(lo, h.value);
    hi = std::max(hi, h.value);
  }
  const double pad = 0.05 * std::max(hi - lo, 1e-6);
  Canvas c(1.0, std::max<double>(2.0, res.history.back().iteration), lo - pad, hi + pad);
  c.axes("evaluation", "robustness", "optimization history");
  std::vector<std::pair<double, double>> values, best;
  double running = -std::numeric_limits<double>::infinity();
  for (const auto& h : res.history) {
    running = std::max(running, h.value);
    values.emplace_back(h.iteration, h.value);
    best.emplace_back(h.iteration, running);
  }
  for (const auto& [x, y] : values) c.circle(x, y, 2, "fill=\"#1f77b4\"");
  c.polyline(best, "stroke=\"#d62728\" stroke-width=\"2\"");
  c.polyline({{1.0, res.initial_value}, {values.back().first, res.initial_value}},
             "stroke=\"#888\" stroke-dasharray=\"6 4\"");
  if (lo < 0.0 && hi > 0.0) c.polyline({{1.0, 0.0}, {values.back().first, 0.0}}, "stroke=\"#000\"");
  c.legend({{"evaluations", "#1f77b4"}, {"best so far", "#d62728"}, {"initial", "#888"}});
  write_text(path, c.str());
}

void write_cycles_svg(const std::filesystem::path& path, const std::vector<CycleReport>& reports) {
  double lo = 0.0;
  double hi = 0.0;
  for (const auto& r : reports) {
    for (double v : {r.initial_robustness, r.optimized_robustness}) {
      if (std::isfinite(v)) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
  }
  const double pad = 0.05 * std::max(hi - lo, 1e-6);
  Canvas c(0.5, static_cast<double>(reports.size()) + 0.5, lo - pad, hi + pad);
  c.axes("cycle", "robustness", "per-cycle robustness");
  std::vector<std::pair<double, double>> before, after;
  for (const auto& r : reports) {
    before.emplace_back(r.cycle_index, r.initial_robustness);
    after.emplace_back(r.cycle_index, r.optimized_robustness);
    c.circle(r.cycle_index, r.initial_robustness, 3, "fill=\"#888\"");
    c.circle(r.cycle_index, r.optimized_robustness, 3, "fill=\"#2ca02c\"");
  }
  c.polyline(before, "stroke=\"#888\"");
  c.polyline(after, "stroke=\"#2ca02c\" stroke-width=\"2\"");
  c.polyline({{0.5, 0.0}, {static_cast<double>(reports.size()) + 0.5, 0.0}}, "stroke=\"#000\"");
  c.legend({{"initial", "#888"}, {"optimized", "#2ca02c"}});
  write_text(path, c.str());
}

}  // namespace stlplan::plansim
