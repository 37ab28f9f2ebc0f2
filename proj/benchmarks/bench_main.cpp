#include <benchmark/benchmark.h>

#include <filesystem>
#include <random>

#include "stlplan/constraints/builders.hpp"
#include "stlplan/constraints/scenario.hpp"
#include "stlplan/lfd/io.hpp"
#include "stlplan/lfd/theta.hpp"
#include "stlplan/optimize/gp.hpp"
#include "stlplan/plansim/planner.hpp"
#include "stlplan/reproduce/tracking.hpp"
#include "stlplan/stl/semantics.hpp"

namespace {

using namespace stlplan;
namespace fs = std::filesystem;

const fs::path kData = STLPLAN_DATA_DIR;

// Lane scenario, its fitted model and the trace of the model's own reference.
struct LaneFixture {
  constraints::Scenario scenario = constraints::read_scenario(kData / "scenario_a" / "scenario.json");
  lfd::HsmmModel model = lfd::read_model(kData / "scenario_a" / "model.json");
  stl::Formula spec = constraints::compose_scenario_spec(scenario);
  reproduce::ReferencePath ref = reproduce::build_reference(model, scenario.start, scenario.horizon_steps());
  reproduce::Trajectory traj = reproduce::ilqr_track(ref, scenario.start, reproduce::TrackerConfig{});
  stl::Trace trace =
      reproduce::trajectory_to_trace(traj, constraints::scenario_channels(scenario, scenario.horizon_steps()));

  static const LaneFixture& get() {
    static const LaneFixture f;
    return f;
  }
};

void BM_RobustnessClassical(benchmark::State& state) {
  const auto& f = LaneFixture::get();
  for (auto _ : state) benchmark::DoNotOptimize(stl::robustness(f.spec, f.trace, 0));
}
BENCHMARK(BM_RobustnessClassical);

void BM_RobustnessSmooth(benchmark::State& state) {
  const auto& f = LaneFixture::get();
  for (auto _ : state) benchmark::DoNotOptimize(stl::smooth_robustness(f.spec, f.trace, 0, 5.0));
}
BENCHMARK(BM_RobustnessSmooth);

void BM_SmoothAnd(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::vector<double> v(static_cast<std::size_t>(state.range(0)));
  for (auto& x : v) x = u(rng);
  for (auto _ : state) benchmark::DoNotOptimize(stl::smooth_and(v, 5.0));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SmoothAnd)->RangeMultiplier(4)->Range(4, 4096)->Complexity(benchmark::oN);

void BM_IlqrTrack(benchmark::State& state) {
  const auto& f = LaneFixture::get();
  const reproduce::TrackerConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(reproduce::ilqr_track(f.ref, f.scenario.start, cfg));
}
BENCHMARK(BM_IlqrTrack)->Unit(benchmark::kMillisecond);

void BM_GpFit(benchmark::State& state) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int n = static_cast<int>(state.range(0));
  std::vector<Eigen::VectorXd> pts;
  std::vector<double> vals;
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd x(8);
    for (int d = 0; d < 8; ++d) x(d) = u(rng);
    vals.push_back(-x.squaredNorm());
    pts.push_back(std::move(x));
  }
  for (auto _ : state) benchmark::DoNotOptimize(opt::gp_fit(pts, vals));
}
BENCHMARK(BM_GpFit)->RangeMultiplier(2)->Range(16, 128)->Unit(benchmark::kMillisecond);

void BM_ObjectiveEvaluation(benchmark::State& state) {
  const auto& f = LaneFixture::get();
  plansim::PlannerConfig cfg;
  const auto theta0 = lfd::extract_theta(f.model, cfg.theta);
  const plansim::ThetaObjective obj(f.model, theta0, f.scenario.start, f.scenario.horizon_steps(), f.spec,
                                    constraints::scenario_channels(f.scenario, f.scenario.horizon_steps()), cfg);
  for (auto _ : state) benchmark::DoNotOptimize(obj(theta0.values));
}
BENCHMARK(BM_ObjectiveEvaluation)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
