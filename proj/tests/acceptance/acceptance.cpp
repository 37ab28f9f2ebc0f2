// Runs every acceptance criterion and prints one PASS/FAIL line per criterion.
// Exits nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "config.hpp"
#include "generators.hpp"
#include "stlplan/constraints/builders.hpp"
#include "stlplan/error.hpp"
#include "stlplan/lfd/hsmm.hpp"
#include "stlplan/lfd/io.hpp"
#include "stlplan/optimize/optimizer.hpp"
#include "stlplan/plansim/planner.hpp"
#include "stlplan/plansim/report.hpp"
#include "stlplan/reproduce/tracking.hpp"
#include "stlplan/stl/parse.hpp"
#include "stlplan/stl/semantics.hpp"

namespace fs = std::filesystem;
using namespace stlplan;
using Clock = std::chrono::steady_clock;

namespace {

const fs::path kData = STLPLAN_DATA_DIR;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string num(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

// 1. Robustness sign agrees with the boolean verdict on random pairs.
Outcome semantics_soundness() {
  const auto t0 = Clock::now();
  testing::Rng rng(20240101);
  testing::FormulaShape shape;
  int checked = 0, disagree = 0, near_zero = 0, empty_window = 0;
  while (checked < 1000) {
    const auto f = testing::random_formula(rng, shape);
    const std::size_t len = std::uniform_int_distribution<std::size_t>(1, 50)(rng);
    const auto tr = testing::random_trace(rng, shape, len);
    double rho = 0.0;
    bool sat = false;
    try {
      rho = stl::robustness(f, tr, 0);
      sat = stl::eval_bool(f, tr, 0);
    } catch (const EmptyWindowError&) {
      ++empty_window;
      continue;
    }
    if (std::fabs(rho) <= 1e-6) {
      ++near_zero;
      continue;
    }
    ++checked;
    if ((rho > 0.0) != sat) ++disagree;
  }
  const double secs = seconds_since(t0);
  return {disagree == 0 && secs < 30.0,
          std::to_string(checked) + " pairs, " + std::to_string(disagree) + " disagreements (" +
              std::to_string(near_zero) + " near-zero and " + std::to_string(empty_window) +
              " empty-window draws skipped), " + num(secs) + " s"};
}

// 2. Smooth conjunction: sign, bounds, zero, convergence at large nu, spot values.
Outcome smooth_metric() {
  testing::Rng rng(77);
  std::uniform_int_distribution<int> len_dist(1, 8);
  std::uniform_real_distribution<double> val(-10.0, 10.0);
  std::uniform_int_distribution<int> coin(0, 9);
  int sign_bad = 0, bound_bad = 0, zero_bad = 0, limit_cases = 0, limit_bad = 0;
  double worst_limit = 0.0;
  for (int i = 0; i < 10000; ++i) {
    std::vector<double> v(static_cast<std::size_t>(len_dist(rng)));
    for (auto& x : v) x = val(rng);
    // Some vectors contain an exact zero, some are strictly positive.
    if (coin(rng) == 0) v[0] = 0.0;
    if (coin(rng) == 1) {
      for (auto& x : v) x = std::fabs(x) + 1e-3;
    }
    const double lo = *std::min_element(v.begin(), v.end());
    const double hi = *std::max_element(v.begin(), v.end());
    for (double nu : {0.5, 5.0, 50.0}) {
      const double s = stl::smooth_and(v, nu);
      if (lo != 0.0 && (s > 0.0) != (lo > 0.0)) ++sign_bad;
      if (!(lo <= s && s <= hi)) ++bound_bad;
      if (lo == 0.0 && s != 0.0) ++zero_bad;
      if (nu == 50.0 && lo > 0.0) {
        ++limit_cases;
        const double dev = std::fabs(s - lo);
        worst_limit = std::max(worst_limit, dev);
        if (!(dev < 1e-3)) ++limit_bad;
      }
    }
  }
  const double a = stl::smooth_and(std::vector<double>{1, 2, 3}, 5.0);
  const double b = stl::smooth_and(std::vector<double>{-1, 1}, 5.0);
  const bool spots = std::fabs(a - 1.00678) <= 1e-4 && std::fabs(b + 0.99996) <= 1e-4;
  const bool default_nu = stl::RobustnessConfig{}.nu == 5.0;
  const bool pass = sign_bad == 0 && bound_bad == 0 && zero_bad == 0 && limit_bad == 0 && spots && default_nu;
  return {pass, "sign " + std::to_string(sign_bad) + ", bounds " + std::to_string(bound_bad) + ", zero " +
                    std::to_string(zero_bad) + " violations; nu=50 limit failed on " + std::to_string(limit_bad) +
                    "/" + std::to_string(limit_cases) + " positive vectors (worst |diff| " + num(worst_limit) +
                    "); [1,2,3] -> " + num(a) + ", [-1,1] -> " + num(b) + ", default nu " +
                    (default_nu ? "5" : "wrong")};
}

// 3. Channel-encoded moving obstacles equal the per-step expansion bit for bit.
Outcome dynamic_encoding() {
  testing::Rng rng(303);
  std::uniform_int_distribution<int> steps(1, 40);
  int mismatches = 0;
  for (int i = 0; i < 100; ++i) {
    const auto c = testing::random_dynamic_case(rng, steps(rng));
    const auto f = constraints::build_obstacle_formula(c.scenario.obstacles, stl::Interval(0, c.scenario.horizon_t));
    const double rho = stl::robustness(f, c.trace, 0);
    const double direct = testing::expanded_obstacle_robustness(c.scenario, c.trace);
    const double expanded = stl::robustness(testing::expanded_obstacle_formula(c.scenario), c.trace, 0);
    if (rho != direct || rho != expanded) ++mismatches;
  }
  return {mismatches == 0, "100 cases, " + std::to_string(mismatches) + " mismatches"};
}

// 4. Lane scenario with a crossing pedestrian and the parked-vehicle safety distances.
Outcome scenario_a() {
  const auto t0 = Clock::now();
  const auto cfg = cli::load_config(kData / "scenario_a" / "config.json", {});
  const auto scenario = constraints::read_scenario(cfg.paths.scenario);
  const auto model = lfd::read_model(cfg.paths.model);
  const auto demos = lfd::read_demonstration_dir(cfg.paths.demos);
  int dynamic = 0;
  for (const auto& o : scenario.obstacles) dynamic += o.is_static() ? 0 : 1;
  const bool setup = scenario.obstacles.size() == 5 && dynamic == 1 && !scenario.road_rule_regions.empty() &&
                     scenario.safety_distances.size() == 2 && demos.size() == 4 &&
                     std::all_of(demos.begin(), demos.end(),
                                 [](const auto& d) { return std::fabs((d.states.size() - 1) * d.dt - 20.0) < 1e-9; }) &&
                     cfg.planner.optimizer.budget <= 200;

  const auto r = plansim::plan_single(model, scenario, cfg.planner);
  bool safety = true;
  std::string safety_text;
  for (const auto& sd : scenario.safety_distances) {
    const double rho = stl::robustness(constraints::build_safety_distance_formula(sd, scenario.obstacles),
                                       r.executed.trace, 0);
    safety = safety && rho > 0.0;
    // Closest longitudinal gap to the parked vehicle inside the window.
    const auto& o = scenario.obstacle(sd.obstacle);
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < r.trajectory.states.size(); ++k) {
      const double t = static_cast<double>(k) * scenario.dt;
      if (t < sd.window.lo() - 1e-9 || t > sd.window.hi() + 1e-9) continue;
      const auto& st = r.trajectory.states[k];
      const double axis_gap = sd.axis == constraints::Axis::kX ? o.box_at(t).center().x - st.x
                                                               : o.box_at(t).center().y - st.y;
      gap = std::min(gap, std::fabs(axis_gap));
    }
    safety_text += " " + sd.obstacle + " atom " + num(rho) + " (closest gap " + num(gap) + " m)";
  }
  const double secs = seconds_since(t0);
  const bool pass = setup && r.executed.final_robustness > 0.0 && r.executed.collisions.empty() && safety &&
                    r.initial_executed.final_robustness < 0.0 && secs < 300.0;
  return {pass, std::string(setup ? "" : "setup mismatch; ") + "initial " + num(r.initial_executed.final_robustness) +
                    " -> final " + num(r.executed.final_robustness) + ", collisions " +
                    std::to_string(r.executed.collisions.size()) + ";" + safety_text + "; " + num(secs) + " s"};
}

// First step at which the trajectory is inside `b`, or -1.
long first_entry(const reproduce::Trajectory& tr, const Box& b) {
  for (std::size_t k = 0; k < tr.states.size(); ++k) {
    if (b.contains({tr.states[k].x, tr.states[k].y})) return static_cast<long>(k);
  }
  return -1;
}

// 5. Traffic light: wait behind the junction while red, cross after green.
Outcome scenario_b() {
  const auto t0 = Clock::now();
  const auto cfg = cli::load_config(kData / "scenario_b" / "config.json", {});
  const auto scenario = constraints::read_scenario(cfg.paths.scenario);
  const auto model = lfd::read_model(cfg.paths.model);
  if (scenario.traffic_lights.size() != 1) return {false, "expected exactly one traffic light"};
  const auto& tl = scenario.traffic_lights[0];
  const bool setup = tl.red_start == 0.0 && tl.red_end == 4.0;

  const auto r = plansim::plan_single(model, scenario, cfg.planner);
  const long entry = first_entry(r.trajectory, tl.avoid);
  const long initial_entry = first_entry(r.initial_trajectory, tl.avoid);
  const double entry_t = entry < 0 ? NAN : entry * scenario.dt;
  const double initial_t = initial_entry < 0 ? NAN : initial_entry * scenario.dt;
  // The stay region must be occupied before the junction is entered.
  bool stayed = false;
  for (long k = 0; k < entry; ++k) {
    const auto& st = r.trajectory.states[static_cast<std::size_t>(k)];
    stayed = stayed || tl.stay.contains({st.x, st.y});
  }
  const double secs = seconds_since(t0);
  const bool pass = setup && entry >= 0 && !tl.is_red(entry_t) && entry_t >= tl.red_end && stayed &&
                    initial_entry >= 0 && tl.is_red(initial_t) && secs < 300.0;
  return {pass, "initial trace enters the junction at " + num(initial_t) + " s, optimized at " + num(entry_t) +
                    " s (red until " + num(tl.red_end) + " s), stay region " + (stayed ? "visited" : "skipped") +
                    " first; final robustness " + num(r.executed.final_robustness) + "; " + num(secs) + " s"};
}

// 6. Four-cycle continuous run on the lane scenario.
Outcome continuous_run() {
  const auto cfg = cli::load_config(kData / "scenario_a" / "run_config.json", {});
  const auto scenario = constraints::read_scenario(cfg.paths.scenario);
  const auto model = lfd::read_model(cfg.paths.model);
  const int M = cfg.planner.cycles;
  const double Tm = scenario.horizon_t / M;
  const auto r = plansim::plan_continuous(model, plansim::World(scenario), cfg.planner);

  const fs::path dir = fs::temp_directory_path() / "stlplan_acceptance_cycles";
  fs::create_directories(dir);
  plansim::write_cycles_csv(dir / "cycles.csv", r.reports, cfg.output);
  std::size_t rows = 0;
  {
    std::ifstream in(dir / "cycles.csv");
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) rows += line.empty() ? 0 : 1;
  }
  fs::remove_all(dir);

  bool improved = true, positive = true, deadlines = true;
  std::string table;
  for (const auto& c : r.reports) {
    improved = improved && c.optimized_robustness >= c.initial_robustness;
    positive = positive && c.optimized_robustness > 0.0;
    deadlines = deadlines && c.deadline_met && c.optimization_time < Tm;
    table += " [" + std::to_string(c.cycle_index) + ": " + num(c.initial_robustness) + " -> " +
             num(c.optimized_robustness) + ", " + num(c.optimization_time) + " s]";
  }
  const bool pass = M == 4 && std::fabs(Tm - 5.0) < 1e-9 && rows == static_cast<std::size_t>(M + 1) && improved &&
                    positive && deadlines;
  return {pass, "M=" + std::to_string(M) + ", T_m=" + num(Tm) + " s, " + std::to_string(rows) + " table rows;" + table +
                    "; executed robustness " + num(r.executed.final_robustness)};
}

// 7. Model fitting recovers a synthetic left-to-right chain.
Outcome hsmm_recovery() {
  testing::ChainGenerator gen;
  gen.means = {{0.0, 0.0, 0.0}, {4.0, 1.0, 0.3}, {8.0, 0.0, -0.2}};
  gen.dur_mean = {20, 30, 25};
  gen.dur_sd = {2, 3, 2};
  testing::Rng rng(7);
  const auto demos = testing::sample_demos(gen, 6, rng);
  lfd::FitReport rep;
  const auto m = lfd::fit_hsmm(demos, {.K = 3, .seed = 7}, &rep);

  std::vector<int> order(3);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return m.means[a](0) < m.means[b](0); });
  double worst_mean = 0.0;
  for (int j = 0; j < 3; ++j) {
    const auto& mu = m.means[order[j]];
    worst_mean = std::max({worst_mean, std::fabs(mu(0) - gen.means[j].x), std::fabs(mu(1) - gen.means[j].y),
                           std::fabs(mu(2) - gen.means[j].alpha)});
  }
  double worst_row = 0.0;
  for (int j = 0; j < m.K; ++j) worst_row = std::max(worst_row, std::fabs(m.trans.row(j).sum() - 1.0));
  int decreases = 0;
  for (std::size_t i = 1; i < rep.log_likelihood.size(); ++i) decreases += rep.log_likelihood[i] < rep.log_likelihood[i - 1];
  const bool pass = worst_mean < 0.1 && worst_row <= 1e-9 && decreases == 0;
  return {pass, "worst mean error " + num(worst_mean) + ", worst row-sum error " + num(worst_row) + ", " +
                    std::to_string(decreases) + " likelihood decreases over " +
                    std::to_string(rep.log_likelihood.size()) + " iterations"};
}

// 8. The tracker follows reachable references within the limits.
Outcome tracker_feasibility() {
  testing::Rng rng(808);
  reproduce::TrackerConfig cfg;
  std::uniform_int_distribution<int> comps(2, 5);
  int resim_bad = 0, limit_bad = 0, waypoint_bad = 0, cost_bad = 0;
  double worst_resim = 0.0, worst_waypoint = 0.0;
  for (int i = 0; i < 50; ++i) {
    const auto model = testing::random_reachable_model(rng, cfg.limits, comps(rng));
    int horizon = 0;
    for (double d : model.dur_mean) horizon += static_cast<int>(std::lround(d));
    const Pose start{0, 0, 0};
    const auto ref = reproduce::build_reference(model, start, horizon);
    reproduce::TrackDiagnostics diag;
    const auto tr = reproduce::ilqr_track(ref, start, cfg, &diag);

    auto s = tr.states.front();
    double resim = 0.0;
    bool limits = true;
    for (std::size_t k = 0; k < tr.controls.size(); ++k) {
      const auto& u = tr.controls[k];
      limits = limits && std::fabs(u.v) <= cfg.limits.v_max && std::fabs(u.omega) <= cfg.limits.omega_max;
      s = reproduce::step_unicycle(s, u, tr.dt, cfg.limits);
      resim = std::max({resim, std::fabs(s.x - tr.states[k + 1].x), std::fabs(s.y - tr.states[k + 1].y),
                        std::fabs(s.alpha - tr.states[k + 1].alpha)});
    }
    worst_resim = std::max(worst_resim, resim);
    resim_bad += resim > 1e-9;
    limit_bad += !limits;
    const auto errors = reproduce::waypoint_errors(model, tr, start, horizon);
    const double worst = errors.empty() ? 0.0 : *std::max_element(errors.begin(), errors.end());
    worst_waypoint = std::max(worst_waypoint, worst);
    waypoint_bad += worst > 0.5;
    for (std::size_t k = 1; k < diag.cost_history.size(); ++k) cost_bad += diag.cost_history[k] > diag.cost_history[k - 1];
  }
  const bool pass = resim_bad + limit_bad + waypoint_bad + cost_bad == 0;
  return {pass, "50 references: resimulation worst " + num(worst_resim) + ", limit violations " +
                    std::to_string(limit_bad) + ", waypoint misses " + std::to_string(waypoint_bad) + " (worst " +
                    num(worst_waypoint) + " m), cost increases " + std::to_string(cost_bad)};
}

// 9. Optimizer: quadratic optimum, surrogate beats random search, anytime contract.
Outcome optimizer_sanity() {
  opt::Objective quad{[](std::span<const double> x) { return -(x[0] - 0.5) * (x[0] - 0.5); }, {0.0}, {1.0},
                      std::nullopt};
  opt::OptimizerConfig cfg;
  cfg.budget = 50;
  cfg.seed = 1;
  const auto best = opt::optimize(quad, cfg);
  const double argmax_err = std::fabs(best.best_x[0] - 0.5);

  std::vector<double> bayes, random;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    opt::OptimizerConfig c;
    c.budget = 30;
    c.seed = seed;
    bayes.push_back(opt::optimize(quad, c).best_value);
    c.method = opt::Method::kRandom;
    random.push_back(opt::optimize(quad, c).best_value);
  }
  const auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
  };
  const double mb = median(bayes), mr = median(random);

  opt::Objective slow = quad;
  slow.evaluate = [](std::span<const double> x) {
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
    return -(x[0] - 0.5) * (x[0] - 0.5);
  };
  opt::OptimizerConfig dl;
  dl.budget = 100;
  dl.deadline_s = 0.001;
  const auto t0 = Clock::now();
  const auto any = opt::optimize(slow, dl);
  const double secs = seconds_since(t0);
  const bool anytime = !any.history.empty() && any.history.size() < 100 && any.deadline_hit &&
                       any.best_x.size() == 1 && any.best_x[0] >= 0.0 && any.best_x[0] <= 1.0 &&
                       std::isfinite(any.best_value) && secs < 1.0;

  const bool pass = argmax_err < 0.05 && mb > mr && anytime;
  return {pass, "|argmax - 0.5| = " + num(argmax_err) + "; median best at 30 evals: bayesian " + num(mb) +
                    ", random " + num(mr) + "; 1 ms deadline returned after " + std::to_string(any.history.size()) +
                    " evaluation(s) in " + num(secs) + " s"};
}

// 10. parse(format(parse(text))) == parse(text) over a mixed corpus.
Outcome parser_round_trip() {
  std::vector<std::string> corpus;
  for (const char* name : {"scenario_a", "scenario_b"}) {
    const auto s = constraints::read_scenario(kData / name / "scenario.json");
    corpus.push_back(stl::format_formula(constraints::compose_scenario_spec(s)));
    for (const auto& sd : s.safety_distances) {
      corpus.push_back(stl::format_formula(constraints::build_safety_distance_formula(sd, s.obstacles)));
    }
    for (std::size_t i = 0; i < s.traffic_lights.size(); ++i) {
      corpus.push_back(stl::format_formula(constraints::build_traffic_light_formula(s.traffic_lights[i], i)));
    }
  }
  // Hand-written shapes of the lane and junction specs.
  corpus.push_back("G[0,20](!in_box(ego_x, ego_y, obs1_xlb, obs1_xub, obs1_ylb, obs1_yub)) & "
                   "F[16,20](obs4_x - ego_x < 1.5) & F[16,20](ego_x - obs5_x < 1.5)");
  corpus.push_back("(!in_box(ego_x, ego_y, 12, 18, -0.3, 5.8)) U[0,4] (in_box(ego_x, ego_y, 8.5, 11.8, 0.5, 4.5) & "
                   "tl0_green > 0)");
  corpus.push_back("G[0,20](!in_box(ego_x, ego_y, 0, 40, 5.8, 8) & !in_box(ego_x, ego_y, 0, 40, -4, -0.3))");
  corpus.push_back("F[0.5,1.25](2*ego_x - 0.5*ego_y + 3 > -1e-7) | !(ego_alpha < 3.14159) U[0,1.5] G[0.1,0.2] c0 > 0");

  testing::Rng rng(1010);
  testing::FormulaShape shape;
  while (corpus.size() < 200) corpus.push_back(stl::format_formula(testing::random_formula(rng, shape)));

  int failures = 0;
  std::string first_failure;
  for (const auto& text : corpus) {
    try {
      const auto f1 = stl::parse_formula(text);
      const auto printed = stl::format_formula(f1);
      const auto f2 = stl::parse_formula(printed);
      if (!(f1 == f2) || stl::format_formula(f2) != printed) {
        ++failures;
        if (first_failure.empty()) first_failure = text;
      }
    } catch (const std::exception& e) {
      ++failures;
      if (first_failure.empty()) first_failure = text + " (" + e.what() + ")";
    }
  }
  return {failures == 0, std::to_string(corpus.size()) + " formulas, " + std::to_string(failures) + " failures" +
                             (first_failure.empty() ? "" : "; first: " + first_failure)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"semantics soundness", semantics_soundness},
      {"smooth-metric properties", smooth_metric},
      {"dynamic-obstacle encoding equivalence", dynamic_encoding},
      {"lane scenario with pedestrian and parked vehicles", scenario_a},
      {"traffic-light scenario", scenario_b},
      {"continuous multi-cycle run", continuous_run},
      {"model recovery", hsmm_recovery},
      {"tracker feasibility", tracker_feasibility},
      {"optimizer sanity", optimizer_sanity},
      {"parser round-trip", parser_round_trip},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << (i + 1) << " " << criteria[i].first << ": " << o.detail
              << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " acceptance criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
