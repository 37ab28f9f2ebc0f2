#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stlplan/lfd/hsmm.hpp"
#include "stlplan/plansim/planner.hpp"
#include "stlplan/plansim/report.hpp"

namespace stlplan::cli {

struct Paths {
  std::filesystem::path demos;
  std::filesystem::path scenario;
  std::filesystem::path spec;
  std::filesystem::path model;
  std::filesystem::path output;
};

/// Every section of the run configuration file. Relative paths resolve against
/// the directory holding the config file.
struct RunConfig {
  Paths paths;
  lfd::FitOptions lfd;
  plansim::PlannerConfig planner;
  plansim::OutputOptions output;
  /// Waypoint attainment tolerance [m] reported by `plan`.
  double eps_wp = 0.5;
};

/// The configuration as JSON with every default filled in.
nlohmann::json default_config_json();

/// Merges `overrides` (dotted `section.key=value`; values parsed as JSON,
/// falling back to a string) into `doc`. Unknown sections or keys are errors.
void apply_overrides(nlohmann::json& doc, const std::vector<std::string>& overrides);

/// Parses a fully merged document. `base_dir` anchors relative paths.
/// Throws IoError on unknown keys, bad values, or nu <= 0.
RunConfig config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir);

/// Loads `path` (empty means defaults only), applies overrides, then the
/// PLANNER_SEED environment variable, which replaces every seed.
RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides);

}  // namespace stlplan::cli
