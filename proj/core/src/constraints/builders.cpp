#include "stlplan/constraints/builders.hpp"

#include <algorithm>
#include <set>

#include "stlplan/error.hpp"

namespace stlplan::constraints {

using stl::BoxAtom;
using stl::CmpAtom;
using stl::Formula;
using stl::Interval;

namespace {

Formula ego_in_box(stl::BoundSource xl, stl::BoundSource xu, stl::BoundSource yl, stl::BoundSource yu) {
  return Formula::atom(BoxAtom{"ego_x", "ego_y", std::move(xl), std::move(xu), std::move(yl), std::move(yu)});
}

Formula ego_in_box(const Box& b) { return ego_in_box(b.x_lb, b.x_ub, b.y_lb, b.y_ub); }

}  // namespace

ChannelMap obstacle_channels(const ObstacleSpec& o, int horizon_steps, double dt, double t0) {
  if (horizon_steps < 1) throw ModelError("horizon must be at least one step");
  const auto n = static_cast<std::size_t>(horizon_steps) + 1;
  std::vector<double> xlb(n), xub(n), ylb(n), yub(n), xc(n), yc(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Box b = o.box_at(t0 + static_cast<double>(k) * dt);
    xlb[k] = b.x_lb;
    xub[k] = b.x_ub;
    ylb[k] = b.y_lb;
    yub[k] = b.y_ub;
    const Point2 c = b.center();
    xc[k] = c.x;
    yc[k] = c.y;
  }
  ChannelMap out;
  out[o.id + "_xlb"] = std::move(xlb);
  out[o.id + "_xub"] = std::move(xub);
  out[o.id + "_ylb"] = std::move(ylb);
  out[o.id + "_yub"] = std::move(yub);
  out[o.id + "_xc"] = std::move(xc);
  out[o.id + "_yc"] = std::move(yc);
  return out;
}

ChannelMap light_channels(const TrafficLightSpec& tl, std::size_t index, int horizon_steps, double dt, double t0) {
  const auto n = static_cast<std::size_t>(horizon_steps) + 1;
  std::vector<double> green(n);
  for (std::size_t k = 0; k < n; ++k) green[k] = tl.is_red(t0 + static_cast<double>(k) * dt) ? -1.0 : 1.0;
  return {{light_channel(index), std::move(green)}};
}

Formula build_obstacle_formula(const std::vector<ObstacleSpec>& obstacles, const Interval& window) {
  if (obstacles.empty()) throw ModelError("obstacle formula needs at least one obstacle");
  std::vector<Formula> terms;
  terms.reserve(obstacles.size());
  for (const auto& o : obstacles) {
    terms.push_back(Formula::globally(
        window, Formula::negate(ego_in_box(o.id + "_xlb", o.id + "_xub", o.id + "_ylb", o.id + "_yub"))));
  }
  return Formula::conj_all(terms);
}

Formula build_road_rule_formula(const std::vector<Box>& regions, const Interval& window) {
  std::vector<Formula> terms;
  terms.reserve(regions.size());
  for (const auto& r : regions) terms.push_back(Formula::globally(window, Formula::negate(ego_in_box(r))));
  return Formula::conj_all(terms);
}

Formula build_safety_distance_formula(const SafetyDistance& sd, const std::vector<ObstacleSpec>& obstacles) {
  const bool known = std::any_of(obstacles.begin(), obstacles.end(), [&](const auto& o) { return o.id == sd.obstacle; });
  if (!known) throw ModelError("safety distance references unknown obstacle '" + sd.obstacle + "'");
  const bool x = sd.axis == Axis::kX;
  CmpAtom atom;
  atom.expr.terms = {{1.0, sd.obstacle + (x ? "_xc" : "_yc")}, {-1.0, x ? "ego_x" : "ego_y"}};
  atom.op = sd.relation == Relation::kLess ? stl::CmpOp::kLess : stl::CmpOp::kGreater;
  atom.bound = sd.bound;
  return Formula::eventually(sd.window, Formula::atom(std::move(atom)));
}

Formula build_traffic_light_formula(const TrafficLightSpec& tl, std::size_t index, const Interval& window) {
  CmpAtom green;
  green.expr.terms = {{1.0, light_channel(index)}};
  green.op = stl::CmpOp::kGreater;
  green.bound = 0.0;
  const Formula avoid = Formula::negate(ego_in_box(tl.avoid));
  const Formula stay = Formula::conj(ego_in_box(tl.stay), Formula::atom(std::move(green)));
  return Formula::until(window, avoid, stay);
}

Formula build_traffic_light_formula(const TrafficLightSpec& tl, std::size_t index) {
  return build_traffic_light_formula(tl, index, Interval(tl.red_start, tl.red_end));
}

Formula compose_scenario_spec(const Scenario& s) {
  s.validate();
  const Interval whole(0.0, s.horizon_t);
  std::vector<Formula> parts;
  if (!s.obstacles.empty()) parts.push_back(build_obstacle_formula(s.obstacles, whole));
  if (!s.road_rule_regions.empty()) parts.push_back(build_road_rule_formula(s.road_rule_regions, whole));
  for (const auto& sd : s.safety_distances) parts.push_back(build_safety_distance_formula(sd, s.obstacles));
  for (std::size_t i = 0; i < s.traffic_lights.size(); ++i) {
    parts.push_back(build_traffic_light_formula(s.traffic_lights[i], i));
  }
  return Formula::conj_all(parts);
}

ChannelMap scenario_channels(const Scenario& s, int horizon_steps, double t0) {
  ChannelMap out;
  for (const auto& o : s.obstacles) out.merge(obstacle_channels(o, horizon_steps, s.dt, t0));
  for (std::size_t i = 0; i < s.traffic_lights.size(); ++i) {
    out.merge(light_channels(s.traffic_lights[i], i, horizon_steps, s.dt, t0));
  }
  return out;
}

std::vector<std::string> missing_channels(const Formula& f, const ChannelMap& channels) {
  static const std::set<std::string> kEgo = {"ego_x", "ego_y", "ego_alpha"};
  std::vector<std::string> out;
  for (const auto& name : f.channels()) {
    if (kEgo.count(name) == 0 && channels.count(name) == 0) out.push_back(name);
  }
  return out;
}

}  // namespace stlplan::constraints
