#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <numbers>

#include "generators.hpp"
#include "stlplan/error.hpp"
#include "stlplan/lfd/hsmm.hpp"
#include "stlplan/lfd/io.hpp"

namespace stlplan::lfd {
namespace {

testing::ChainGenerator three_step_chain() {
  testing::ChainGenerator g;
  g.means = {{0.0, 0.0, 0.0}, {4.0, 1.0, 0.3}, {8.0, 0.0, -0.2}};
  g.dur_mean = {20, 30, 25};
  g.dur_sd = {2, 3, 2};
  return g;
}

HsmmModel chain_model(std::vector<double> durations) {
  const int K = static_cast<int>(durations.size());
  HsmmModel m;
  m.K = K;
  m.trans = Eigen::MatrixXd::Zero(K, K);
  for (int j = 0; j < K; ++j) {
    m.means.emplace_back(3.0 * j, 0.0, 0.0);
    m.covs.push_back(Eigen::Matrix3d::Identity() * 0.1);
    m.dur_mean.push_back(durations[j]);
    m.dur_var.push_back(1.0);
    if (j + 1 < K) {
      m.trans(j, j + 1) = 1.0;
    } else {
      m.trans(j, j) = 1.0;
    }
  }
  return m;
}

void expect_rows_stochastic(const HsmmModel& m) {
  for (int i = 0; i < m.K; ++i) EXPECT_NEAR(m.trans.row(i).sum(), 1.0, 1e-9);
  EXPECT_GE(m.trans.minCoeff(), 0.0);
}

TEST(Fit, SingleComponentOnConstantDemo) {
  Demonstration d;
  d.states.assign(30, Pose{1.0, 2.0, 0.0});
  const std::vector<Demonstration> demos{d};
  const HsmmModel m = fit_hsmm(demos, {.K = 1});
  EXPECT_NEAR(m.means[0](0), 1.0, 1e-12);
  EXPECT_NEAR(m.means[0](1), 2.0, 1e-12);
  EXPECT_NEAR(m.means[0](2), 0.0, 1e-12);
  EXPECT_EQ(m.trans(0, 0), 1.0);
  EXPECT_EQ(m.dur_mean[0], 30.0);
}

TEST(Fit, RecoversSyntheticChain) {
  testing::Rng rng(1);
  const auto gen = three_step_chain();
  const auto demos = testing::sample_demos(gen, 6, rng);
  FitReport rep;
  const HsmmModel m = fit_hsmm(demos, {.K = 3, .seed = 1}, &rep);
  std::vector<int> order{0, 1, 2};
  std::sort(order.begin(), order.end(), [&](int a, int b) { return m.means[a](0) < m.means[b](0); });
  for (int j = 0; j < 3; ++j) {
    EXPECT_NEAR(m.means[order[j]](0), gen.means[j].x, 0.1);
    EXPECT_NEAR(m.means[order[j]](1), gen.means[j].y, 0.1);
  }
  expect_rows_stochastic(m);
  EXPECT_NEAR(m.trans(order[0], order[1]), 1.0, 1e-12);
  EXPECT_NEAR(m.trans(order[1], order[2]), 1.0, 1e-12);
  EXPECT_NEAR(m.trans(order[2], order[2]), 1.0, 1e-12);
  EXPECT_NEAR(m.dur_mean[order[1]], 30.0, 3.0);
}

TEST(Fit, LogLikelihoodIsNonDecreasing) {
  testing::Rng rng(2);
  auto gen = three_step_chain();
  gen.pos_sd = 0.8;  // overlapping components make EM take several steps
  const auto demos = testing::sample_demos(gen, 4, rng);
  FitReport rep;
  fit_hsmm(demos, {.K = 4, .max_iters = 200, .tol = 1e-12}, &rep);
  ASSERT_GE(rep.log_likelihood.size(), 3u);
  for (std::size_t i = 1; i < rep.log_likelihood.size(); ++i) {
    EXPECT_GE(rep.log_likelihood[i], rep.log_likelihood[i - 1] - 1e-9) << "iteration " << i;
  }
}

TEST(Fit, IsDeterministic) {
  testing::Rng rng(3);
  const auto demos = testing::sample_demos(three_step_chain(), 3, rng);
  const FitOptions opts{.K = 3, .seed = 9, .init_jitter = 0.2};
  const HsmmModel a = fit_hsmm(demos, opts);
  const HsmmModel b = fit_hsmm(demos, opts);
  EXPECT_EQ(model_to_json(a), model_to_json(b));
}

TEST(Fit, DuplicatedDemoGivesSameModel) {
  testing::Rng rng(4);
  const auto one = testing::sample_demos(three_step_chain(), 1, rng);
  const std::vector<Demonstration> two{one[0], one[0]};
  const HsmmModel a = fit_hsmm(one, {.K = 3});
  const HsmmModel b = fit_hsmm(two, {.K = 3});
  for (int j = 0; j < 3; ++j) {
    EXPECT_NEAR((a.means[j] - b.means[j]).norm(), 0.0, 1e-9);
    EXPECT_NEAR((a.covs[j] - b.covs[j]).norm(), 0.0, 1e-9);
    EXPECT_EQ(a.dur_mean[j], b.dur_mean[j]);
  }
  EXPECT_NEAR((a.trans - b.trans).norm(), 0.0, 1e-12);
}

TEST(Fit, RejectsBadInput) {
  Demonstration d;
  d.states.assign(5, Pose{});
  EXPECT_THROW(fit_hsmm(std::vector<Demonstration>{d}, {.K = 6}), ModelError);
  Demonstration e = d;
  e.dt = 0.2;
  EXPECT_THROW(fit_hsmm(std::vector<Demonstration>{d, e}, {.K = 1}), ModelError);
  EXPECT_THROW(fit_hsmm(std::vector<Demonstration>{}, {.K = 1}), ModelError);
}

TEST(Decode, SingleComponentLabelsEverything) {
  testing::Rng rng(5);
  const auto demos = testing::sample_demos(three_step_chain(), 2, rng);
  const HsmmModel m = fit_hsmm(demos, {.K = 1});
  const StateSeq z = decode_states(m, demos[1]);
  EXPECT_TRUE(std::all_of(z.begin(), z.end(), [](int v) { return v == 0; }));
}

TEST(Decode, TrainingDemoGivesThreeOrderedRuns) {
  testing::Rng rng(6);
  const auto demos = testing::sample_demos(three_step_chain(), 6, rng);
  const HsmmModel m = fit_hsmm(demos, {.K = 3});
  const StateSeq z = decode_states(m, demos[0]);
  std::vector<int> runs{z.front()};
  for (std::size_t t = 1; t < z.size(); ++t) {
    if (z[t] != z[t - 1]) runs.push_back(z[t]);
  }
  ASSERT_EQ(runs.size(), 3u);
  EXPECT_LT(m.means[runs[0]](0), m.means[runs[1]](0));
  EXPECT_LT(m.means[runs[1]](0), m.means[runs[2]](0));
}

TEST(Decode, LeftToRightLabelsNeverDecrease) {
  const HsmmModel m = chain_model({10, 10, 10, 10});
  Demonstration d;
  for (int t = 0; t < 60; ++t) d.states.push_back({0.25 * t, 0.3 * std::sin(t * 0.7), 0.0});
  const StateSeq z = decode_states(m, d);
  EXPECT_TRUE(std::is_sorted(z.begin(), z.end()));
}

TEST(Sequence, SingleComponentFillsHorizon) {
  const auto plan = component_sequence(chain_model({5}), Pose{}, 17);
  EXPECT_EQ(plan, (std::vector<Segment>{{0, 17}}));
}

TEST(Sequence, LeftToRightChain) {
  const auto plan = component_sequence(chain_model({5, 5, 5}), Pose{}, 15);
  EXPECT_EQ(plan, (std::vector<Segment>{{0, 5}, {1, 5}, {2, 5}}));
}

TEST(Sequence, StrongerJumpSkipsAComponent) {
  HsmmModel m = chain_model({5, 5, 5});
  m.trans.row(0) << 0.0, 0.3, 0.7;
  const auto plan = component_sequence(m, Pose{}, 15);
  EXPECT_EQ(plan, (std::vector<Segment>{{0, 5}, {2, 10}}));
}

TEST(Sequence, TiesGoToLowestIndex) {
  HsmmModel m = chain_model({5, 5, 5});
  m.trans.row(0) << 0.0, 0.5, 0.5;
  EXPECT_EQ(component_sequence(m, Pose{}, 12)[1].component, 1);
}

TEST(Sequence, StartsAtMostLikelyComponentAndSumsToHorizon) {
  const HsmmModel m = chain_model({4, 7, 3, 9});
  for (int h : {1, 3, 11, 40}) {
    const auto plan = component_sequence(m, Pose{6.1, 0.0, 0.0}, h);
    EXPECT_EQ(plan.front().component, 2);
    int total = 0;
    for (const auto& s : plan) total += s.steps;
    EXPECT_EQ(total, h);
  }
  EXPECT_THROW(component_sequence(m, Pose{}, 0), ModelError);
}

TEST(Model, ValidateCatchesBrokenInvariants) {
  HsmmModel m = chain_model({5, 5});
  EXPECT_NO_THROW(m.validate());
  HsmmModel bad = m;
  bad.trans(0, 1) = 0.9;
  EXPECT_THROW(bad.validate(), ModelError);
  bad = m;
  bad.covs[1](0, 0) = -1.0;
  EXPECT_THROW(bad.validate(), ModelError);
  bad = m;
  bad.dur_mean[0] = 0.5;
  EXPECT_THROW(bad.validate(), ModelError);
}

TEST(Model, AngleDifferenceIsWrapped) {
  HsmmModel m = chain_model({5});
  m.means[0](2) = std::numbers::pi - 0.05;
  EXPECT_NEAR(component_log_density(m, 0, Pose{0.0, 0.0, -std::numbers::pi + 0.05}),
              component_log_density(m, 0, Pose{0.0, 0.0, std::numbers::pi - 0.15}), 1e-9);
}

TEST(ModelIo, JsonRoundTrip) {
  testing::Rng rng(7);
  const auto demos = testing::sample_demos(three_step_chain(), 3, rng);
  const HsmmModel m = fit_hsmm(demos, {.K = 3});
  const HsmmModel back = model_from_json(model_to_json(m));
  ASSERT_EQ(back.K, m.K);
  for (int j = 0; j < m.K; ++j) {
    EXPECT_NEAR((back.means[j] - m.means[j]).norm(), 0.0, 1e-12 * m.means[j].norm());
    EXPECT_NEAR((back.covs[j] - m.covs[j]).norm(), 0.0, 1e-12 * m.covs[j].norm());
    EXPECT_DOUBLE_EQ(back.dur_mean[j], m.dur_mean[j]);
    EXPECT_DOUBLE_EQ(back.component_times[j], m.component_times[j]);
  }
  EXPECT_EQ(back.trans, m.trans);
  EXPECT_THROW(model_from_json("{\"K\": 1}"), Error);
}

TEST(DemoIo, CsvRoundTrip) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "stlplan_demo_io";
  fs::remove_all(dir);
  fs::create_directories(dir);
  Demonstration d;
  d.dt = 0.1;
  for (int t = 0; t < 5; ++t) d.states.push_back({0.1 * t, 1.0 / 3.0, -0.25 * t});
  write_demonstration_csv(dir / "b.csv", d);
  write_demonstration_csv(dir / "a.csv", d);
  const auto all = read_demonstration_dir(dir);
  ASSERT_EQ(all.size(), 2u);
  EXPECT_NEAR(all[0].dt, 0.1, 1e-12);
  EXPECT_EQ(all[0].states, d.states);
}

}  // namespace
}  // namespace stlplan::lfd
