#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "stlplan/plansim/planner.hpp"

namespace stlplan::plansim {

/// With record_timing off every wall-clock field is written as 0 so that
/// repeated runs produce byte-identical files.
struct OutputOptions {
  bool record_timing = true;
};

/// `t,x,y,alpha,v,omega`; the final row has empty controls.
void write_trajectory_csv(const std::filesystem::path& path, const reproduce::Trajectory& traj, double t0 = 0.0);
/// `iter,value,wall_time_s`.
void write_history_csv(const std::filesystem::path& path, const opt::OptResult& res, const OutputOptions& opts = {});
/// Table columns in order, one row per timeline slot, blanks where a slot has no entry.
void write_cycles_csv(const std::filesystem::path& path, const std::vector<CycleReport>& reports,
                      const OutputOptions& opts = {});
/// `step,t,<obstacle ids...>`.
void write_distances_csv(const std::filesystem::path& path, const ExecutedTrace& executed);

/// Minimum over steps of each obstacle's distance.
std::map<std::string, double> min_distances(const ExecutedTrace& executed);

std::string plan_result_json(const PlanResult& r, const constraints::Scenario& s, const OutputOptions& opts = {});
std::string run_result_json(const ContinuousResult& r, const constraints::Scenario& s, const OutputOptions& opts = {});

/// Map with regions, obstacles (start and end footprints) and trajectories.
struct PathLayer {
  std::string label;
  const reproduce::Trajectory* trajectory = nullptr;
  std::string color;
};
void write_map_svg(const std::filesystem::path& path, const constraints::Scenario& s, const std::vector<PathLayer>& paths);
/// Distance to every obstacle over time, with a dashed line per safety-distance bound.
void write_distance_svg(const std::filesystem::path& path, const ExecutedTrace& executed,
                        const constraints::Scenario& s);
/// Objective value per evaluation with the running best and the initial value.
void write_history_svg(const std::filesystem::path& path, const opt::OptResult& res);
/// Initial vs optimized robustness per cycle.
void write_cycles_svg(const std::filesystem::path& path, const std::vector<CycleReport>& reports);

}  // namespace stlplan::plansim
