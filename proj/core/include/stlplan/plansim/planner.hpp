#pragma once

#include <optional>
#include <vector>

#include "stlplan/constraints/builders.hpp"
#include "stlplan/lfd/theta.hpp"
#include "stlplan/optimize/optimizer.hpp"
#include "stlplan/plansim/world.hpp"
#include "stlplan/reproduce/tracking.hpp"
#include "stlplan/stl/semantics.hpp"

namespace stlplan::plansim {

struct PlannerConfig {
  reproduce::TrackerConfig tracker;
  reproduce::ReferenceMode reference = reproduce::ReferenceMode::kStepwise;
  /// Semantics maximized by the optimizer; executed traces are always checked classically.
  stl::RobustnessConfig robustness;
  opt::OptimizerConfig optimizer;
  /// map_bounds is filled from the scenario when unset.
  lfd::ThetaBoundsConfig theta;
  /// Replaces the composed scenario spec in single-shot planning.
  std::optional<stl::Formula> spec_override;

  int cycles = 4;
  /// Zero picks 1.5 x the farthest point of the next cycle's initial reference.
  double sensing_range = 0.0;
  /// Optimizer deadline as a fraction of the cycle duration; the remainder absorbs
  /// the one evaluation that may overrun.
  double deadline_fraction = 0.9;
};

/// theta -> model -> reference -> iLQR -> trace -> robustness at t = 0.
class ThetaObjective {
 public:
  ThetaObjective(lfd::HsmmModel base, lfd::ParamVector theta0, Pose start, int horizon_steps, stl::Formula spec,
                 constraints::ChannelMap channels, const PlannerConfig& cfg);

  /// Returns -inf when the tracker diverges.
  double operator()(std::span<const double> values) const;
  reproduce::Trajectory trajectory(std::span<const double> values) const;
  lfd::HsmmModel model(std::span<const double> values) const;
  opt::Objective objective() const;

  const lfd::ParamVector& theta0() const { return theta0_; }
  const stl::Formula& spec() const { return spec_; }

 private:
  lfd::HsmmModel base_;
  lfd::ParamVector theta0_;
  Pose start_;
  int horizon_;
  stl::Formula spec_;
  constraints::ChannelMap channels_;
  reproduce::TrackerConfig tracker_;
  reproduce::ReferenceMode reference_;
  stl::RobustnessConfig robustness_;
};

struct PlanResult {
  stl::Formula spec;
  opt::OptResult opt;
  lfd::ParamVector best_theta;
  lfd::HsmmModel best_model;
  reproduce::Trajectory initial_trajectory;
  reproduce::Trajectory trajectory;
  ExecutedTrace initial_executed;
  ExecutedTrace executed;
};

/// Optimizes the whole horizon at once against the composed scenario spec
/// (or cfg.spec_override) with obstacles extrapolated from t = 0.
PlanResult plan_single(const lfd::HsmmModel& model, const constraints::Scenario& scenario, const PlannerConfig& cfg);

struct CycleReport {
  int cycle_index = 0;
  double initial_robustness = 0.0;
  double optimized_robustness = 0.0;
  double optimization_time = 0.0;
  /// Simulated seconds spent executing this cycle.
  double simulation_time = 0.0;
  /// optimization_time < cycle duration.
  bool deadline_met = false;
  double start_time = 0.0;
  std::string spec_text;
  int evaluations = 0;
};

/// One row of the cycle table. Row i carries the optimization time of cycle i
/// and the robustness and execution of cycle i - 1, so there are M + 1 rows.
struct TimelineRow {
  int row = 0;
  std::optional<double> initial_robustness;
  std::optional<double> optimized_robustness;
  std::optional<double> optimization_time;
  std::optional<double> simulation_time;
  std::optional<bool> deadline_met;
};

std::vector<TimelineRow> timeline_rows(const std::vector<CycleReport>& reports);

struct ContinuousResult {
  std::vector<CycleReport> reports;
  /// Per-cycle models; all but the last end with the next cycle's first component, frozen.
  std::vector<lfd::HsmmModel> sub_models;
  std::vector<reproduce::Trajectory> cycle_trajectories;
  reproduce::Trajectory trajectory;
  ExecutedTrace executed;
};

/// Component partition: component j goes to the cycle containing its median
/// demonstration time. A cycle left empty borrows the component whose time is
/// nearest to the cycle midpoint.
std::vector<std::vector<int>> partition_components(const lfd::HsmmModel& model, int cycles, double cycle_duration);

/// Restriction of `model` to `components`, transitions renormalized within the
/// subset (rows with no remaining mass become absorbing).
lfd::HsmmModel sub_model(const lfd::HsmmModel& model, const std::vector<int>& components);

/// Spec for one cycle in cycle-relative time, from what the snapshot shows.
stl::Formula cycle_spec(const constraints::Scenario& scenario, const PerceptionSnapshot& snap, double cycle_start,
                        double cycle_duration);
constraints::ChannelMap cycle_channels(const PerceptionSnapshot& snap, const constraints::Scenario& scenario,
                                       int steps, double cycle_start);

/// Receding-horizon planning over M cycles. Cycle m + 1 is optimized from a
/// snapshot taken at the start of cycle m, starting at cycle m's planned end
/// state; with exact execution that equals the executed end state.
ContinuousResult plan_continuous(const lfd::HsmmModel& model, const World& world, const PlannerConfig& cfg);

}  // namespace stlplan::plansim
