#pragma once

#include <filesystem>
#include <ostream>
#include <string>

#include "config.hpp"

namespace stlplan::cli {

/// Exit codes: 0 success, 1 error. monitor adds 2 for a violated (or marginal) trace.
int cmd_fit(const RunConfig& cfg, std::ostream& out);
int cmd_plan(const RunConfig& cfg, std::ostream& out);
int cmd_run(const RunConfig& cfg, std::ostream& out);

struct MonitorOptions {
  std::filesystem::path trace;
  std::filesystem::path spec;
  double nu = 5.0;
  /// Which robustness decides the verdict: "classical" or "smooth".
  std::string semantics = "classical";
  std::size_t t = 0;
};
int cmd_monitor(const MonitorOptions& opts, std::ostream& out);

/// Full command line, including argv[0]. Errors go to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace stlplan::cli
