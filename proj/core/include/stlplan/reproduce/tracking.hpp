#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "stlplan/geometry.hpp"
#include "stlplan/lfd/hsmm.hpp"
#include "stlplan/stl/trace.hpp"

namespace stlplan::reproduce {

using UnicycleState = Pose;

struct ControlInput {
  double v = 0.0;      // m/s
  double omega = 0.0;  // rad/s

  friend bool operator==(const ControlInput&, const ControlInput&) = default;
};

struct KinematicLimits {
  double v_max = 2.0;
  double omega_max = 1.5;

  ControlInput clamp(ControlInput u) const;
};

/// Per-step pose targets; points[k] is the target for the state reached after k+1 steps.
struct ReferencePath {
  double dt = 0.1;
  std::vector<Pose> points;
};

/// states[k+1] == step_unicycle(states[k], controls[k], dt) for every k.
struct Trajectory {
  double dt = 0.1;
  std::vector<UnicycleState> states;
  std::vector<ControlInput> controls;
};

enum class ReferenceMode {
  kStepwise,      // hold each component mean for its whole segment
  kInterpolated,  // move linearly from one mean to the next across a segment
};

/// Expands the component plan into per-step targets.
ReferencePath build_reference(const lfd::HsmmModel& model, const UnicycleState& start, int horizon_steps,
                              ReferenceMode mode = ReferenceMode::kStepwise);

/// x+ = x + v cos(a) dt, y+ = y + v sin(a) dt, a+ = wrap(a + w dt), with u clamped first.
UnicycleState step_unicycle(const UnicycleState& s, ControlInput u, double dt,
                            const KinematicLimits& limits = KinematicLimits{});

struct TrackerConfig {
  KinematicLimits limits;
  Eigen::Vector3d q_diag{1.0, 1.0, 0.1};
  Eigen::Vector2d r_diag{0.05, 0.05};
  double terminal_scale = 10.0;
  int iters = 50;
  double rel_tol = 1e-6;
};

struct TrackDiagnostics {
  /// Cost of the initial rollout followed by the cost after every accepted iteration.
  std::vector<double> cost_history;
  int iterations = 0;
};

/// Tracks a reference with iterative LQR on the unicycle model.
/// Throws ModelError if the cost becomes non-finite.
Trajectory ilqr_track(const ReferencePath& ref, const UnicycleState& start, const TrackerConfig& cfg,
                      TrackDiagnostics* diag = nullptr);

/// Quadratic tracking cost of a trajectory against a reference.
double tracking_cost(const Trajectory& traj, const ReferencePath& ref, const TrackerConfig& cfg);

/// For each segment of the component plan from `start`, the smallest planar
/// distance between the component mean and the trajectory states reached
/// during that segment. States past the end of traj repeat its last state.
std::vector<double> waypoint_errors(const lfd::HsmmModel& model, const Trajectory& traj, const UnicycleState& start,
                                    int horizon_steps);

/// Trace with ego_x, ego_y, ego_alpha plus the given world channels.
/// Throws ModelError when a world channel's length differs from the trajectory's.
stl::Trace trajectory_to_trace(const Trajectory& traj, const std::map<std::string, std::vector<double>>& world_channels);

}  // namespace stlplan::reproduce
