#include "stlplan/plansim/planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "stlplan/error.hpp"
#include "stlplan/stl/parse.hpp"

namespace stlplan::plansim {

namespace {

void check_channels(const stl::Formula& spec, const constraints::ChannelMap& channels) {
  const auto missing = constraints::missing_channels(spec, channels);
  if (missing.empty()) return;
  std::string names;
  for (const auto& m : missing) names += (names.empty() ? "" : ", ") + m;
  throw ModelError("spec references channels the world does not provide: " + names);
}

lfd::ThetaBoundsConfig theta_bounds(const PlannerConfig& cfg, const constraints::Scenario& s) {
  lfd::ThetaBoundsConfig t = cfg.theta;
  if (!t.map_bounds) t.map_bounds = s.map_bounds;
  return t;
}

// Pins every parameter owned by component a: its outgoing logits, mean and duration.
void freeze_component(lfd::ParamVector& theta, int a) {
  const auto& L = theta.layout;
  const auto pin = [&](std::size_t i) { theta.bounds[i] = {theta.values[i], theta.values[i]}; };
  for (int b = 0; b < L.K; ++b) pin(L.trans_offset() + static_cast<std::size_t>(a) * L.K + b);
  pin(L.means_offset() + 2 * static_cast<std::size_t>(a));
  pin(L.means_offset() + 2 * static_cast<std::size_t>(a) + 1);
  pin(L.dur_offset() + static_cast<std::size_t>(a));
}

// Positive-length overlap of [lo, hi] with [start, start + len], shifted to cycle time.
std::optional<stl::Interval> relative_window(double lo, double hi, double start, double len) {
  const double a = std::max(lo - start, 0.0);
  const double b = std::min(hi - start, len);
  if (!(b > a)) return std::nullopt;
  return stl::Interval(a, b);
}

}  // namespace

ThetaObjective::ThetaObjective(lfd::HsmmModel base, lfd::ParamVector theta0, Pose start, int horizon_steps,
                               stl::Formula spec, constraints::ChannelMap channels, const PlannerConfig& cfg)
    : base_(std::move(base)),
      theta0_(std::move(theta0)),
      start_(start),
      horizon_(horizon_steps),
      spec_(std::move(spec)),
      channels_(std::move(channels)),
      tracker_(cfg.tracker),
      reference_(cfg.reference),
      robustness_(cfg.robustness) {
  if (horizon_ < 1) throw ModelError("planning horizon must be at least one step");
  check_channels(spec_, channels_);
}

lfd::HsmmModel ThetaObjective::model(std::span<const double> values) const {
  return lfd::apply_theta(base_, theta0_.layout, values);
}

reproduce::Trajectory ThetaObjective::trajectory(std::span<const double> values) const {
  const auto ref = reproduce::build_reference(model(values), start_, horizon_, reference_);
  return reproduce::ilqr_track(ref, start_, tracker_);
}

double ThetaObjective::operator()(std::span<const double> values) const {
  try {
    const auto trace = reproduce::trajectory_to_trace(trajectory(values), channels_);
    return stl::evaluate(spec_, trace, 0, robustness_);
  } catch (const ModelError&) {
    return -std::numeric_limits<double>::infinity();
  }
}

opt::Objective ThetaObjective::objective() const {
  opt::Objective o;
  o.evaluate = [this](std::span<const double> v) { return (*this)(v); };
  for (const auto& [lo, hi] : theta0_.bounds) {
    o.lo.push_back(lo);
    o.hi.push_back(hi);
  }
  o.initial = theta0_.values;
  return o;
}

PlanResult plan_single(const lfd::HsmmModel& model, const constraints::Scenario& scenario, const PlannerConfig& cfg) {
  scenario.validate();
  if (std::fabs(model.dt - scenario.dt) > 1e-12) throw ModelError("model dt differs from the scenario dt");
  const int horizon = scenario.horizon_steps();

  stl::Formula spec = cfg.spec_override ? *cfg.spec_override : constraints::compose_scenario_spec(scenario);
  auto channels = constraints::scenario_channels(scenario, horizon, 0.0);
  const lfd::ParamVector theta0 = lfd::extract_theta(model, theta_bounds(cfg, scenario));
  const ThetaObjective objective(model, theta0, scenario.start, horizon, spec, std::move(channels), cfg);

  PlanResult out{.spec = spec, .opt = opt::optimize(objective.objective(), cfg.optimizer), .best_theta = theta0,
                 .best_model = model, .initial_trajectory = {}, .trajectory = {}, .initial_executed = {},
                 .executed = {}};
  out.best_theta.values = out.opt.best_x;
  out.best_model = objective.model(out.best_theta.values);
  out.initial_trajectory = objective.trajectory(theta0.values);
  out.trajectory = objective.trajectory(out.best_theta.values);

  const World world(scenario);
  out.initial_executed = simulate_execution(world, out.initial_trajectory);
  out.executed = simulate_execution(world, out.trajectory);
  if (cfg.spec_override) {
    out.initial_executed.final_robustness = stl::robustness(spec, out.initial_executed.trace, 0);
    out.executed.final_robustness = stl::robustness(spec, out.executed.trace, 0);
  }
  return out;
}

std::vector<TimelineRow> timeline_rows(const std::vector<CycleReport>& reports) {
  std::vector<TimelineRow> rows(reports.size() + 1);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].row = static_cast<int>(i) + 1;
    if (i < reports.size()) {
      rows[i].optimization_time = reports[i].optimization_time;
      rows[i].deadline_met = reports[i].deadline_met;
    }
    if (i > 0) {
      const auto& prev = reports[i - 1];
      rows[i].initial_robustness = prev.initial_robustness;
      rows[i].optimized_robustness = prev.optimized_robustness;
      rows[i].simulation_time = prev.simulation_time;
    }
  }
  return rows;
}

std::vector<std::vector<int>> partition_components(const lfd::HsmmModel& model, int cycles, double cycle_duration) {
  if (cycles < 1) throw ModelError("need at least one cycle");
  const int K = model.K;
  std::vector<double> times(static_cast<std::size_t>(K), std::numeric_limits<double>::quiet_NaN());
  if (model.component_times.size() == static_cast<std::size_t>(K)) {
    times = model.component_times;
  } else {
    // Without fitted times, spread components over the horizon in index order.
    for (int j = 0; j < K; ++j) times[j] = (j + 0.5) * cycles * cycle_duration / K;
  }
  std::vector<std::vector<int>> parts(static_cast<std::size_t>(cycles));
  for (int j = 0; j < K; ++j) {
    if (!std::isfinite(times[j])) continue;
    const int c = std::clamp(static_cast<int>(std::floor(times[j] / cycle_duration)), 0, cycles - 1);
    parts[c].push_back(j);
  }
  for (int c = 0; c < cycles; ++c) {
    if (!parts[c].empty()) continue;
    const double mid = (c + 0.5) * cycle_duration;
    int nearest = -1;
    for (int j = 0; j < K; ++j) {
      if (!std::isfinite(times[j])) continue;
      if (nearest < 0 || std::fabs(times[j] - mid) < std::fabs(times[nearest] - mid)) nearest = j;
    }
    if (nearest < 0) nearest = std::min(c * K / cycles, K - 1);
    parts[c].push_back(nearest);
  }
  return parts;
}

lfd::HsmmModel sub_model(const lfd::HsmmModel& model, const std::vector<int>& components) {
  if (components.empty()) throw ModelError("sub-model needs at least one component");
  const int n = static_cast<int>(components.size());
  lfd::HsmmModel out;
  out.K = n;
  out.dt = model.dt;
  out.trans = Eigen::MatrixXd::Zero(n, n);
  for (int a = 0; a < n; ++a) {
    const int i = components[a];
    if (i < 0 || i >= model.K) throw ModelError("sub-model component index out of range");
    for (int b = 0; b < n; ++b) out.trans(a, b) = model.trans(i, components[b]);
    const double sum = out.trans.row(a).sum();
    if (sum > 0.0) {
      out.trans.row(a) /= sum;
    } else {
      out.trans(a, a) = 1.0;
    }
    out.means.push_back(model.means[i]);
    out.covs.push_back(model.covs[i]);
    out.dur_mean.push_back(model.dur_mean[i]);
    out.dur_var.push_back(model.dur_var[i]);
    if (model.component_times.size() == static_cast<std::size_t>(model.K)) {
      out.component_times.push_back(model.component_times[i]);
    }
  }
  out.validate();
  return out;
}

stl::Formula cycle_spec(const constraints::Scenario& scenario, const PerceptionSnapshot& snap, double cycle_start,
                        double cycle_duration) {
  const stl::Interval whole(0.0, cycle_duration);
  std::vector<stl::Formula> parts;
  if (!snap.visible_obstacles.empty()) {
    parts.push_back(constraints::build_obstacle_formula(snap.visible_obstacles, whole));
  }
  if (!scenario.road_rule_regions.empty()) {
    parts.push_back(constraints::build_road_rule_formula(scenario.road_rule_regions, whole));
  }
  for (const auto& sd : scenario.safety_distances) {
    const auto window = relative_window(sd.window.lo(), sd.window.hi(), cycle_start, cycle_duration);
    if (!window) continue;
    const bool seen = std::any_of(snap.visible_obstacles.begin(), snap.visible_obstacles.end(),
                                  [&](const auto& o) { return o.id == sd.obstacle; });
    if (!seen) continue;
    constraints::SafetyDistance local = sd;
    local.window = *window;
    parts.push_back(constraints::build_safety_distance_formula(local, snap.visible_obstacles));
  }
  for (const auto& light : snap.visible_lights) {
    const auto& tl = scenario.traffic_lights[light.index];
    const auto window = relative_window(tl.red_start, tl.red_end, cycle_start, cycle_duration);
    if (!window) continue;
    parts.push_back(constraints::build_traffic_light_formula(tl, light.index, *window));
  }
  return stl::Formula::conj_all(parts);
}

constraints::ChannelMap cycle_channels(const PerceptionSnapshot& snap, const constraints::Scenario& scenario,
                                       int steps, double cycle_start) {
  constraints::ChannelMap out;
  for (const auto& o : snap.visible_obstacles) {
    out.merge(constraints::obstacle_channels(o, steps, scenario.dt, cycle_start - snap.taken_at));
  }
  for (const auto& light : snap.visible_lights) {
    out.merge(constraints::light_channels(scenario.traffic_lights[light.index], light.index, steps, scenario.dt,
                                          cycle_start));
  }
  return out;
}

ContinuousResult plan_continuous(const lfd::HsmmModel& model, const World& world, const PlannerConfig& cfg) {
  using Clock = std::chrono::steady_clock;
  const auto& s = world.scenario;
  s.validate();
  if (std::fabs(model.dt - s.dt) > 1e-12) throw ModelError("model dt differs from the scenario dt");
  const int M = cfg.cycles;
  const int horizon = s.horizon_steps();
  if (M < 1 || horizon % M != 0) {
    throw ModelError("horizon of " + std::to_string(horizon) + " steps does not split into " + std::to_string(M) +
                     " equal cycles");
  }
  const int n = horizon / M;
  const double Tm = n * s.dt;
  const double budget = cfg.optimizer.deadline_s ? std::min(*cfg.optimizer.deadline_s, Tm) : Tm;

  ContinuousResult out;
  const auto parts = partition_components(model, M, Tm);
  std::vector<bool> has_handoff;
  for (int c = 0; c < M; ++c) {
    // The next cycle's first component trails each sub-model as a frozen
    // target, so the reference keeps moving instead of parking at the last
    // own component before the hand-off.
    std::vector<int> comps = parts[c];
    const bool handoff = c + 1 < M && std::find(comps.begin(), comps.end(), parts[c + 1].front()) == comps.end();
    if (handoff) comps.push_back(parts[c + 1].front());
    has_handoff.push_back(handoff);
    out.sub_models.push_back(sub_model(model, comps));
  }

  Pose start = s.start;
  Pose cycle_begin_pose = s.start;  // ego pose when the snapshot for the next cycle is taken
  for (int c = 0; c < M; ++c) {
    const auto t_start = Clock::now();
    const double cycle_start = world.clock + c * Tm;
    const double snap_time = world.clock + std::max(c - 1, 0) * Tm;
    const lfd::HsmmModel& sub = out.sub_models[c];

    double range = cfg.sensing_range;
    if (!(range > 0.0)) {
      const auto ref = reproduce::build_reference(sub, start, n, cfg.reference);
      double far = 0.0;
      for (const auto& p : ref.points) far = std::max(far, std::hypot(p.x - cycle_begin_pose.x, p.y - cycle_begin_pose.y));
      range = std::max(1.5 * far, 1.0);
    }
    const World at_snapshot(s, snap_time);
    const auto snap = snapshot_perception(at_snapshot, {cycle_begin_pose.x, cycle_begin_pose.y}, range);
    const stl::Formula spec = cycle_spec(s, snap, cycle_start, Tm);
    lfd::ParamVector theta0 = lfd::extract_theta(sub, theta_bounds(cfg, s));
    if (has_handoff[c]) freeze_component(theta0, sub.K - 1);
    const ThetaObjective objective(sub, theta0, start, n, spec, cycle_channels(snap, s, n, cycle_start), cfg);

    opt::OptimizerConfig ocfg = cfg.optimizer;
    ocfg.deadline_s = cfg.deadline_fraction * budget;
    ocfg.seed = cfg.optimizer.seed + static_cast<std::uint64_t>(c);
    const opt::OptResult res = opt::optimize(objective.objective(), ocfg);
    auto traj = objective.trajectory(res.best_x);
    const double elapsed = std::chrono::duration<double>(Clock::now() - t_start).count();

    CycleReport r;
    r.cycle_index = c + 1;
    r.initial_robustness = res.initial_value;
    r.optimized_robustness = res.best_value;
    r.optimization_time = elapsed;
    r.simulation_time = Tm;
    r.deadline_met = elapsed < budget;
    r.start_time = cycle_start;
    r.spec_text = stl::format_formula(spec);
    r.evaluations = static_cast<int>(res.history.size()) + res.discarded;
    out.reports.push_back(std::move(r));

    if (c == 0) {
      out.trajectory = traj;
    } else {
      out.trajectory.states.insert(out.trajectory.states.end(), traj.states.begin() + 1, traj.states.end());
      out.trajectory.controls.insert(out.trajectory.controls.end(), traj.controls.begin(), traj.controls.end());
    }
    // Cycle c + 1 is optimized while cycle c runs, so its snapshot is taken where cycle c begins.
    cycle_begin_pose = start;
    start = traj.states.back();
    out.cycle_trajectories.push_back(std::move(traj));
  }
  out.executed = simulate_execution(world, out.trajectory);
  return out;
}

}  // namespace stlplan::plansim
