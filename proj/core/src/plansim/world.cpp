#include "stlplan/plansim/world.hpp"

#include <cmath>
#include <limits>

#include "stlplan/constraints/builders.hpp"
#include "stlplan/error.hpp"
#include "stlplan/stl/semantics.hpp"

namespace stlplan::plansim {

PerceptionSnapshot snapshot_perception(const World& world, Point2 ego, double sensing_range) {
  if (!(sensing_range > 0.0)) throw ModelError("sensing range must be positive");
  const auto& s = world.scenario;
  PerceptionSnapshot snap;
  snap.taken_at = world.clock;
  for (const auto& o : s.obstacles) {
    if (distance_to_box(ego, o.box_at(world.clock)) > sensing_range) continue;
    constraints::ObstacleSpec seen = o;
    seen.box0 = o.box0.translated(o.vx * world.clock, o.vy * world.clock);
    snap.visible_obstacles.push_back(std::move(seen));
  }
  for (std::size_t i = 0; i < s.traffic_lights.size(); ++i) {
    const auto& tl = s.traffic_lights[i];
    if (std::min(distance_to_box(ego, tl.avoid), distance_to_box(ego, tl.stay)) > sensing_range) continue;
    const bool red = tl.is_red(world.clock);
    snap.visible_lights.push_back({i, red, red ? tl.red_end - world.clock : 0.0});
  }
  return snap;
}

ExecutedTrace simulate_execution(const World& world, const reproduce::Trajectory& traj) {
  const auto& s = world.scenario;
  if (std::fabs(traj.dt - s.dt) > 1e-12) throw ModelError("trajectory dt differs from the scenario dt");
  if (traj.states.empty()) throw ModelError("cannot execute an empty trajectory");
  const std::size_t n = traj.states.size();
  const int steps = static_cast<int>(n) - 1;

  ExecutedTrace out;
  out.start_time = world.clock;
  constraints::ChannelMap channels;
  if (steps >= 1) channels = constraints::scenario_channels(s, steps, world.clock);
  for (const auto& o : s.obstacles) {
    std::vector<double> d(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double t = world.clock + static_cast<double>(k) * s.dt;
      d[k] = distance_to_box({traj.states[k].x, traj.states[k].y}, o.box_at(t));
      if (d[k] == 0.0) out.collisions.push_back({o.id, k});
    }
    out.distances[o.id] = std::move(d);
  }
  out.trace = reproduce::trajectory_to_trace(traj, channels);

  out.final_robustness = std::numeric_limits<double>::quiet_NaN();
  if (world.clock == 0.0 && steps >= s.horizon_steps()) {
    out.final_robustness = stl::robustness(constraints::compose_scenario_spec(s), out.trace, 0);
  }
  return out;
}

}  // namespace stlplan::plansim
