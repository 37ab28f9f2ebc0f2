#pragma once

#include <map>
#include <string>
#include <vector>

#include "stlplan/constraints/scenario.hpp"
#include "stlplan/reproduce/tracking.hpp"
#include "stlplan/stl/trace.hpp"

namespace stlplan::plansim {

/// Scenario state at a given clock. Obstacle positions are recomputed from the
/// clock, never integrated, so replays are bit-identical.
struct World {
  constraints::Scenario scenario;
  double clock = 0.0;

  explicit World(constraints::Scenario s, double t = 0.0) : scenario(std::move(s)), clock(t) {}

  /// Inflated footprint of obstacle i at the current clock.
  Box obstacle_box(std::size_t i) const { return scenario.obstacles[i].box_at(clock); }
  bool light_red(std::size_t i) const { return scenario.traffic_lights[i].is_red(clock); }
};

struct VisibleLight {
  std::size_t index = 0;
  bool red = false;
  /// Seconds of red left at the snapshot time; zero when green.
  double red_remaining = 0.0;
};

/// What the ego knows at `taken_at`. Each visible obstacle is re-based so that
/// its box0 is the (uninflated) box at the snapshot time; extrapolation from
/// there assumes constant velocity.
struct PerceptionSnapshot {
  double taken_at = 0.0;
  std::vector<constraints::ObstacleSpec> visible_obstacles;
  std::vector<VisibleLight> visible_lights;
};

/// Obstacles whose inflated box lies within `sensing_range` of the ego (closed
/// comparison), and lights whose avoid or stay region does.
PerceptionSnapshot snapshot_perception(const World& world, Point2 ego, double sensing_range);

struct Collision {
  std::string obstacle;
  std::size_t step = 0;

  friend bool operator==(const Collision&, const Collision&) = default;
};

struct ExecutedTrace {
  stl::Trace trace{1.0, 1};
  /// Per-step distance from the ego to each obstacle's true inflated box.
  std::map<std::string, std::vector<double>> distances;
  /// (obstacle, step) wherever the distance is exactly zero.
  std::vector<Collision> collisions;
  /// Classical robustness of the composed scenario spec at t = 0. NaN when the
  /// trace does not start at clock 0 or is shorter than the horizon.
  double final_robustness = 0.0;
  double start_time = 0.0;
};

/// Steps the world alongside `traj` starting from world.clock, using true
/// obstacle positions. Throws ModelError when traj.dt differs from the scenario dt.
ExecutedTrace simulate_execution(const World& world, const reproduce::Trajectory& traj);

}  // namespace stlplan::plansim
