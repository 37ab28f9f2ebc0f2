#include "commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "stlplan/constraints/scenario.hpp"
#include "stlplan/error.hpp"
#include "stlplan/lfd/io.hpp"
#include "stlplan/stl/parse.hpp"
#include "stlplan/stl/semantics.hpp"
#include "stlplan/stl/trace_io.hpp"

namespace stlplan::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string() + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  out << text;
}

fs::path require(const fs::path& p, const char* what) {
  if (p.empty()) throw IoError(std::string("no ") + what + " given (set paths." + what + " or pass a flag)");
  return p;
}

fs::path model_path(const RunConfig& cfg) {
  return cfg.paths.model.empty() ? cfg.paths.output / "model.json" : cfg.paths.model;
}

json segments_json(const lfd::StateSeq& labels) {
  json out = json::array();
  std::size_t start = 0;
  for (std::size_t i = 1; i <= labels.size(); ++i) {
    if (i == labels.size() || labels[i] != labels[start]) {
      out.push_back({{"component", labels[start]}, {"start_step", start}, {"steps", i - start}});
      start = i;
    }
  }
  return out;
}

lfd::HsmmModel fit_and_report(const RunConfig& cfg, std::ostream& out) {
  const auto demos = lfd::read_demonstration_dir(require(cfg.paths.demos, "demos"));
  lfd::FitReport report;
  const lfd::HsmmModel model = lfd::fit_hsmm(demos, cfg.lfd, &report);
  fs::create_directories(cfg.paths.output);
  const fs::path mpath = model_path(cfg);
  if (mpath.has_parent_path()) fs::create_directories(mpath.parent_path());
  lfd::write_model(mpath, model);

  json rep;
  rep["K"] = model.K;
  rep["demos"] = demos.size();
  rep["iterations"] = report.iterations;
  rep["log_likelihood"] = report.log_likelihood;
  json decoded = json::array();
  for (const auto& d : demos) decoded.push_back(segments_json(lfd::decode_states(model, d)));
  rep["decoded_segments"] = decoded;
  write_text(cfg.paths.output / "fit_report.json", rep.dump(2) + "\n");

  out << "model=" << mpath.string() << "\n"
      << "K=" << model.K << "\n"
      << "demos=" << demos.size() << "\n"
      << "iterations=" << report.iterations << "\n"
      << "log_likelihood=" << stl::format_number(report.log_likelihood.back()) << "\n";
  return model;
}

constraints::Scenario load_scenario(const RunConfig& cfg) {
  auto scenario = constraints::read_scenario(require(cfg.paths.scenario, "scenario"));
  for (const auto& w : constraints::sampling_warnings(scenario, cfg.planner.tracker.limits.v_max))
    std::cerr << "warning: " << w << "\n";
  return scenario;
}

lfd::HsmmModel load_or_fit(const RunConfig& cfg) {
  const fs::path mpath = model_path(cfg);
  if (fs::exists(mpath)) return lfd::read_model(mpath);
  if (cfg.paths.demos.empty()) throw IoError(mpath.string() + ": model not found and no demos to fit one");
  std::cerr << "no model at " << mpath.string() << "; fitting from " << cfg.paths.demos.string() << "\n";
  std::ostringstream sink;
  return fit_and_report(cfg, sink);
}

// Fraction of planned segments whose mean the trajectory passes within eps.
double waypoint_attainment(const lfd::HsmmModel& model, const reproduce::Trajectory& traj, const Pose& start,
                           int horizon, double eps) {
  const auto errors = reproduce::waypoint_errors(model, traj, start, horizon);
  const auto hit = std::count_if(errors.begin(), errors.end(), [&](double e) { return e <= eps; });
  return errors.empty() ? 1.0 : static_cast<double>(hit) / static_cast<double>(errors.size());
}

}  // namespace

int cmd_fit(const RunConfig& cfg, std::ostream& out) {
  fit_and_report(cfg, out);
  return 0;
}

int cmd_plan(const RunConfig& cfg, std::ostream& out) {
  const auto scenario = load_scenario(cfg);
  const auto model = load_or_fit(cfg);
  plansim::PlannerConfig pc = cfg.planner;
  if (!cfg.paths.spec.empty()) pc.spec_override = stl::parse_formula(read_text(cfg.paths.spec));

  const auto result = plansim::plan_single(model, scenario, pc);
  const fs::path dir = cfg.paths.output;
  fs::create_directories(dir);
  plansim::write_trajectory_csv(dir / "trajectory.csv", result.trajectory);
  plansim::write_trajectory_csv(dir / "initial_trajectory.csv", result.initial_trajectory);
  plansim::write_history_csv(dir / "history.csv", result.opt, cfg.output);
  stl::write_trace_csv(dir / "trace.csv", result.executed.trace);
  plansim::write_distances_csv(dir / "distances.csv", result.executed);

  json res = json::parse(plansim::plan_result_json(result, scenario, cfg.output));
  const double attained = waypoint_attainment(result.best_model, result.trajectory, scenario.start,
                                              scenario.horizon_steps(), cfg.eps_wp);
  res["waypoint_attainment"] = attained;
  write_text(dir / "result.json", res.dump(2) + "\n");

  plansim::write_map_svg(dir / "map.svg", scenario,
                         {{"initial", &result.initial_trajectory, "#888888"}, {"optimized", &result.trajectory, "#1f77b4"}});
  plansim::write_distance_svg(dir / "distances.svg", result.executed, scenario);
  plansim::write_history_svg(dir / "history.svg", result.opt);

  const auto fmt = [](double v) { return std::isfinite(v) ? stl::format_number(v) : std::string("nan"); };
  out << "satisfied=" << (res["satisfied"].get<bool>() ? "true" : "false") << "\n"
      << "final_robustness=" << fmt(result.executed.final_robustness) << "\n"
      << "initial_final_robustness=" << fmt(result.initial_executed.final_robustness) << "\n"
      << "initial_robustness=" << fmt(result.opt.initial_value) << "\n"
      << "optimized_robustness=" << fmt(result.opt.best_value) << "\n"
      << "collisions=" << result.executed.collisions.size() << "\n"
      << "evaluations=" << result.opt.history.size() + static_cast<std::size_t>(result.opt.discarded) << "\n"
      << "output=" << dir.string() << "\n";
  return 0;
}

int cmd_run(const RunConfig& cfg, std::ostream& out) {
  const auto scenario = load_scenario(cfg);
  const auto model = load_or_fit(cfg);
  const auto result = plansim::plan_continuous(model, plansim::World(scenario), cfg.planner);

  const fs::path dir = cfg.paths.output;
  fs::create_directories(dir);
  plansim::write_cycles_csv(dir / "cycles.csv", result.reports, cfg.output);
  plansim::write_trajectory_csv(dir / "trajectory.csv", result.trajectory);
  stl::write_trace_csv(dir / "trace.csv", result.executed.trace);
  plansim::write_distances_csv(dir / "distances.csv", result.executed);
  write_text(dir / "result.json", plansim::run_result_json(result, scenario, cfg.output));
  plansim::write_map_svg(dir / "map.svg", scenario, {{"executed", &result.trajectory, "#1f77b4"}});
  plansim::write_distance_svg(dir / "distances.svg", result.executed, scenario);
  plansim::write_cycles_svg(dir / "cycles.svg", result.reports);

  out << "cycle,initial_robustness,optimized_robustness,optimization_time_s,simulation_time_s,deadline_met\n";
  const auto cell = [](const std::optional<double>& v) { return v ? stl::format_number(*v) : std::string("-"); };
  for (const auto& r : plansim::timeline_rows(result.reports)) {
    const std::optional<double> opt_time =
        r.optimization_time && !cfg.output.record_timing ? std::optional<double>(0.0) : r.optimization_time;
    out << r.row << "," << cell(r.initial_robustness) << "," << cell(r.optimized_robustness) << "," << cell(opt_time)
        << "," << cell(r.simulation_time) << "," << (r.deadline_met ? (*r.deadline_met ? "true" : "false") : "-")
        << "\n";
  }
  out << "final_robustness="
      << (std::isfinite(result.executed.final_robustness) ? stl::format_number(result.executed.final_robustness)
                                                           : std::string("nan"))
      << "\ncollisions=" << result.executed.collisions.size() << "\noutput=" << dir.string() << "\n";
  return 0;
}

int cmd_monitor(const MonitorOptions& opts, std::ostream& out) {
  if (!(opts.nu > 0.0)) throw IoError("--nu must be positive");
  if (opts.semantics != "classical" && opts.semantics != "smooth") {
    throw IoError("--semantics must be classical or smooth");
  }
  const stl::Trace trace = stl::read_trace_csv(opts.trace);
  const stl::Formula spec = stl::parse_formula(read_text(opts.spec));
  const bool verdict = stl::eval_bool(spec, trace, opts.t);
  const double classical = stl::robustness(spec, trace, opts.t);
  const double smooth = stl::smooth_robustness(spec, trace, opts.t, opts.nu);
  const double deciding = opts.semantics == "smooth" ? smooth : classical;
  const bool marginal = deciding == 0.0;
  const bool satisfied = deciding > 0.0;
  out << "satisfied=" << (satisfied ? "true" : "false") << "\n"
      << "boolean=" << (verdict ? "true" : "false") << "\n"
      << "classical_robustness=" << stl::format_number(classical) << "\n"
      << "smooth_robustness=" << stl::format_number(smooth) << "\n"
      << "nu=" << stl::format_number(opts.nu) << "\n"
      << "marginal=" << (marginal ? "true" : "false") << "\n";
  return satisfied ? 0 : 2;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Trajectory planning with learned motion models and temporal-logic safety specs"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::string demos, scenario, spec, model, output;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "Run configuration (JSON)");
    sub->add_option("--set", overrides, "Override a config key: section.key=value")->take_all();
    sub->add_option("--demos", demos, "Directory of demonstration CSV files");
    sub->add_option("--model", model, "Model JSON path");
    sub->add_option("-o,--out", output, "Output directory");
  };

  auto* fit = app.add_subcommand("fit", "Fit the motion model to demonstrations");
  add_common(fit);
  auto* plan = app.add_subcommand("plan", "Optimize one trajectory for the whole horizon");
  add_common(plan);
  plan->add_option("--scenario", scenario, "Scenario JSON");
  plan->add_option("--spec", spec, "Spec file replacing the composed scenario spec");
  auto* run = app.add_subcommand("run", "Continuous multi-cycle planning");
  add_common(run);
  run->add_option("--scenario", scenario, "Scenario JSON");

  MonitorOptions mon;
  auto* monitor = app.add_subcommand("monitor", "Evaluate a spec on a recorded trace");
  monitor->add_option("--trace", mon.trace, "Trace CSV (t plus one column per channel)")->required();
  monitor->add_option("--spec", mon.spec, "Spec file")->required();
  monitor->add_option("--nu", mon.nu, "Smooth-robustness sharpness");
  monitor->add_option("--semantics", mon.semantics, "Robustness deciding the verdict: classical|smooth");
  monitor->add_option("--t", mon.t, "Evaluation time index");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 1;
  }

  try {
    if (monitor->parsed()) return cmd_monitor(mon, out);
    RunConfig cfg = load_config(config_path, overrides);
    if (!demos.empty()) cfg.paths.demos = demos;
    if (!scenario.empty()) cfg.paths.scenario = scenario;
    if (!spec.empty()) cfg.paths.spec = spec;
    if (!model.empty()) cfg.paths.model = model;
    if (!output.empty()) cfg.paths.output = output;
    if (fit->parsed()) return cmd_fit(cfg, out);
    if (plan->parsed()) return cmd_plan(cfg, out);
    return cmd_run(cfg, out);
  } catch (const ParseError& e) {
    err << "error: spec: " << e.what() << "\n";
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
  }
  return 1;
}

}  // namespace stlplan::cli
