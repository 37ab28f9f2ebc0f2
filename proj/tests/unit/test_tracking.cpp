#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "generators.hpp"
#include "stlplan/error.hpp"
#include "stlplan/reproduce/tracking.hpp"

namespace stlplan::reproduce {
namespace {

lfd::HsmmModel chain(std::vector<Eigen::Vector3d> means, std::vector<double> durations) {
  const int K = static_cast<int>(means.size());
  lfd::HsmmModel m;
  m.K = K;
  m.means = std::move(means);
  m.covs.assign(static_cast<std::size_t>(K), Eigen::Matrix3d::Identity() * 0.1);
  m.dur_mean = std::move(durations);
  m.dur_var.assign(static_cast<std::size_t>(K), 1.0);
  m.trans = Eigen::MatrixXd::Zero(K, K);
  for (int j = 0; j < K; ++j) m.trans(j, std::min(j + 1, K - 1)) = 1.0;
  return m;
}

void expect_resimulates(const Trajectory& tr, const KinematicLimits& limits) {
  ASSERT_EQ(tr.states.size(), tr.controls.size() + 1);
  UnicycleState s = tr.states.front();
  for (std::size_t k = 0; k < tr.controls.size(); ++k) {
    const auto& u = tr.controls[k];
    EXPECT_LE(std::fabs(u.v), limits.v_max);
    EXPECT_LE(std::fabs(u.omega), limits.omega_max);
    s = step_unicycle(s, u, tr.dt, limits);
    EXPECT_NEAR(s.x, tr.states[k + 1].x, 1e-9);
    EXPECT_NEAR(s.y, tr.states[k + 1].y, 1e-9);
    EXPECT_NEAR(s.alpha, tr.states[k + 1].alpha, 1e-9);
  }
}

TEST(Reference, SingleComponentRepeatsItsMean) {
  const auto ref = build_reference(chain({{1, 2, 0}}, {3}), {1, 2, 0}, 5);
  ASSERT_EQ(ref.points.size(), 5u);
  for (const auto& p : ref.points) EXPECT_EQ(p, (Pose{1, 2, 0}));
}

TEST(Reference, StepwiseFollowsDurations) {
  const auto ref = build_reference(chain({{0, 0, 0}, {4, 0, 0}}, {2, 3}), {0, 0, 0}, 5);
  ASSERT_EQ(ref.points.size(), 5u);
  EXPECT_EQ(ref.points[1].x, 0.0);
  EXPECT_EQ(ref.points[2].x, 4.0);
  EXPECT_EQ(ref.points[4].x, 4.0);
}

TEST(Reference, SkippedComponentNeverAppears) {
  auto m = chain({{0, 0, 0}, {4, 0, 0}, {8, 0, 0}}, {2, 2, 2});
  m.trans.row(0) << 0.0, 0.2, 0.8;
  for (const auto& p : build_reference(m, {0, 0, 0}, 6).points) EXPECT_NE(p.x, 4.0);
}

TEST(Reference, InterpolatedEndsSegmentsOnTheMean) {
  const auto ref =
      build_reference(chain({{0, 0, 0}, {4, 0, 0}}, {2, 4}), {0, 0, 0}, 6, ReferenceMode::kInterpolated);
  EXPECT_DOUBLE_EQ(ref.points[2].x, 1.0);
  EXPECT_DOUBLE_EQ(ref.points[5].x, 4.0);
}

TEST(Unicycle, Examples) {
  EXPECT_EQ(step_unicycle({0, 0, 0}, {1, 0}, 0.1), (Pose{0.1, 0, 0}));
  const Pose up = step_unicycle({0, 0, std::numbers::pi / 2}, {1, 0}, 0.1);
  EXPECT_NEAR(up.x, 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(up.y, 0.1);
  EXPECT_DOUBLE_EQ(up.alpha, std::numbers::pi / 2);
  const KinematicLimits wide{2.0, 4.0};
  const Pose wrapped = step_unicycle({0, 0, std::numbers::pi / 2}, {0, std::numbers::pi}, 1.0, wide);
  EXPECT_GT(wrapped.alpha, -std::numbers::pi);
  EXPECT_LE(wrapped.alpha, std::numbers::pi);
  EXPECT_NEAR(wrapped.alpha, -std::numbers::pi / 2, 1e-12);
}

TEST(Unicycle, ControlsAreClampedFirst) {
  const KinematicLimits lim{1.0, 0.5};
  EXPECT_EQ(step_unicycle({0, 0, 0}, {5.0, 0.0}, 1.0, lim), step_unicycle({0, 0, 0}, {1.0, 0.0}, 1.0, lim));
  EXPECT_EQ(lim.clamp({-3.0, -2.0}), (ControlInput{-1.0, -0.5}));
}

TEST(Ilqr, FixedPointNeedsNoControl) {
  ReferencePath ref;
  ref.points.assign(30, Pose{1.0, 1.0, 0.3});
  TrackDiagnostics diag;
  const auto tr = ilqr_track(ref, {1.0, 1.0, 0.3}, TrackerConfig{}, &diag);
  for (const auto& u : tr.controls) {
    EXPECT_NEAR(u.v, 0.0, 1e-9);
    EXPECT_NEAR(u.omega, 0.0, 1e-9);
  }
  EXPECT_LT(diag.cost_history.back(), 1e-6);
}

TEST(Ilqr, StraightLineTracking) {
  ReferencePath ref;
  for (int k = 1; k <= 50; ++k) ref.points.push_back({0.1 * k, 0.0, 0.0});
  const auto tr = ilqr_track(ref, {0, 0, 0}, TrackerConfig{});
  for (std::size_t k = 1; k < tr.states.size(); ++k) {
    EXPECT_GE(tr.states[k].x, tr.states[k - 1].x);
    EXPECT_LE(std::fabs(tr.states[k].y), 1e-3);
  }
  EXPECT_NEAR(tr.states.back().x, 5.0, 0.2);
}

TEST(Ilqr, CostNeverIncreases) {
  testing::Rng rng(3);
  TrackerConfig cfg;
  const auto model = testing::random_reachable_model(rng, cfg.limits, 4);
  const auto ref = build_reference(model, {0, 0, 0}, 120);
  TrackDiagnostics diag;
  const auto tr = ilqr_track(ref, {0, 0, 0}, cfg, &diag);
  ASSERT_GE(diag.cost_history.size(), 2u);
  for (std::size_t i = 1; i < diag.cost_history.size(); ++i) {
    EXPECT_LE(diag.cost_history[i], diag.cost_history[i - 1]);
  }
  EXPECT_DOUBLE_EQ(tracking_cost(tr, ref, cfg), diag.cost_history.back());
  expect_resimulates(tr, cfg.limits);
}

TEST(Ilqr, IsDeterministic) {
  testing::Rng rng(4);
  TrackerConfig cfg;
  const auto model = testing::random_reachable_model(rng, cfg.limits, 3);
  const auto ref = build_reference(model, {0, 0, 0}, 90);
  const auto a = ilqr_track(ref, {0, 0, 0}, cfg);
  const auto b = ilqr_track(ref, {0, 0, 0}, cfg);
  EXPECT_EQ(a.states, b.states);
  EXPECT_EQ(a.controls, b.controls);
}

TEST(Ilqr, RespectsTighterLimits) {
  ReferencePath ref;
  ref.points.assign(40, Pose{10.0, 5.0, 1.0});
  TrackerConfig cfg;
  cfg.limits = {0.7, 0.4};
  expect_resimulates(ilqr_track(ref, {0, 0, 0}, cfg), cfg.limits);
}

TEST(Ilqr, RejectsDegenerateInput) {
  EXPECT_THROW(ilqr_track(ReferencePath{}, {0, 0, 0}, TrackerConfig{}), ModelError);
  ReferencePath ref;
  ref.points.assign(3, Pose{});
  TrackerConfig cfg;
  cfg.iters = 0;
  EXPECT_THROW(ilqr_track(ref, {0, 0, 0}, cfg), ModelError);
}

TEST(TraceBuild, EgoAndWorldChannels) {
  Trajectory tr;
  tr.states = {{0, 0, 0}, {0.1, 0, 0}};
  tr.controls = {{1, 0}};
  const auto trace = trajectory_to_trace(tr, {{"obs_xlb", {1.0, 1.0}}});
  EXPECT_EQ(trace.length(), 2u);
  EXPECT_EQ(trace.channel("ego_x")[1], 0.1);
  EXPECT_EQ(trace.channel("obs_xlb")[0], 1.0);
  EXPECT_TRUE(trace.has_channel("ego_alpha"));
  EXPECT_THROW(trajectory_to_trace(tr, {{"bad", {1.0}}}), ModelError);
}

}  // namespace
}  // namespace stlplan::reproduce
