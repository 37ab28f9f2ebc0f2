#pragma once

#include <map>
#include <string>
#include <vector>

#include "stlplan/constraints/scenario.hpp"
#include "stlplan/stl/formula.hpp"

namespace stlplan::constraints {

using ChannelMap = std::map<std::string, std::vector<double>>;

/// `{id}_xlb, {id}_xub, {id}_ylb, {id}_yub` (inflated) and centres `{id}_xc, {id}_yc`
/// over horizon_steps + 1 samples. `t0` shifts the time origin of the motion.
ChannelMap obstacle_channels(const ObstacleSpec& o, int horizon_steps, double dt, double t0 = 0.0);

/// `{light}_green` channel: +1 while green, -1 while red; sample k is at time t0 + k dt.
ChannelMap light_channels(const TrafficLightSpec& tl, std::size_t index, int horizon_steps, double dt, double t0 = 0.0);

/// Conjunction over obstacles of G_window !in_box(ego, channel bounds).
/// Throws ModelError on an empty list.
stl::Formula build_obstacle_formula(const std::vector<ObstacleSpec>& obstacles, const stl::Interval& window);

/// Conjunction of G_window !in_box(ego, constant bounds); the neutral formula if empty.
stl::Formula build_road_rule_formula(const std::vector<Box>& regions, const stl::Interval& window);

/// F_window over the centre-relative distance atom. Throws ModelError for unknown ids.
stl::Formula build_safety_distance_formula(const SafetyDistance& sd, const std::vector<ObstacleSpec>& obstacles);

/// (!in_box(avoid)) U_[red] (in_box(stay) & green > 0), with the window given explicitly.
stl::Formula build_traffic_light_formula(const TrafficLightSpec& tl, std::size_t index, const stl::Interval& window);
stl::Formula build_traffic_light_formula(const TrafficLightSpec& tl, std::size_t index = 0);

/// Conjunction of every obstacle, road-rule, safety-distance and traffic-light
/// formula over [0, horizon_t].
stl::Formula compose_scenario_spec(const Scenario& s);

/// All world channels for a window of horizon_steps + 1 samples starting at t0.
ChannelMap scenario_channels(const Scenario& s, int horizon_steps, double t0 = 0.0);

/// Names referenced by `f` that are neither ego channels nor present in `channels`.
std::vector<std::string> missing_channels(const stl::Formula& f, const ChannelMap& channels);

}  // namespace stlplan::constraints
