#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "stlplan/geometry.hpp"
#include "stlplan/stl/formula.hpp"

namespace stlplan::constraints {

/// An obstacle footprint at t = 0 moving with constant velocity.
struct ObstacleSpec {
  std::string id;
  Box box0;
  double vx = 0.0;
  double vy = 0.0;
  /// Grows the box on every side; absorbs the ego's half-width.
  double inflation = 0.0;

  bool is_static() const { return vx == 0.0 && vy == 0.0; }
  /// Inflated footprint at time t.
  Box box_at(double t) const { return box0.translated(vx * t, vy * t).inflated(inflation); }
};

/// The ego must stay out of `avoid` until it is inside `stay` while the light is green.
struct TrafficLightSpec {
  Box avoid;
  Box stay;
  double red_start = 0.0;
  double red_end = 0.0;

  /// Red on [red_start, red_end), green otherwise.
  bool is_red(double t) const { return t >= red_start && t < red_end; }
};

enum class Axis { kX, kY };
enum class Relation { kLess, kGreater };

/// F_window(obstacle_center_axis - ego_axis  <relation>  bound).
struct SafetyDistance {
  std::string obstacle;
  Axis axis = Axis::kX;
  double bound = 1.5;
  stl::Interval window{0.0, 0.0};
  Relation relation = Relation::kLess;
};

struct Goal {
  double x = 0.0;
  double y = 0.0;
  double radius = 0.5;
};

struct Scenario {
  Box map_bounds;
  Pose start;
  Goal goal;
  double horizon_t = 20.0;
  double dt = 0.1;
  std::vector<ObstacleSpec> obstacles;
  std::vector<Box> road_rule_regions;
  std::vector<TrafficLightSpec> traffic_lights;
  std::vector<SafetyDistance> safety_distances;

  int horizon_steps() const;
  const ObstacleSpec& obstacle(const std::string& id) const;
  /// Throws ModelError when an invariant is broken.
  void validate() const;
};

/// Scenario JSON (snake_case keys, SI units). Unknown keys are rejected with IoError.
Scenario scenario_from_json(const std::string& text);
std::string scenario_to_json(const Scenario& s);
Scenario read_scenario(const std::filesystem::path& path);

/// Collisions are checked only at samples. One message per obstacle whose relative motion per step
/// (its own speed plus ego_speed_max, times dt) reaches its thinnest inflated side.
std::vector<std::string> sampling_warnings(const Scenario& s, double ego_speed_max);

/// Channel name for a traffic light's phase (+1 green, -1 red).
std::string light_channel(std::size_t index);

}  // namespace stlplan::constraints
