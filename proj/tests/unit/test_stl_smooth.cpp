#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "stlplan/error.hpp"
#include "stlplan/stl/parse.hpp"
#include "stlplan/stl/semantics.hpp"

namespace stlplan::stl {
namespace {

// Unshifted three-case aggregate, used where the exponents stay small.
double naive_and(const std::vector<double>& r, double nu) {
  const double rmin = *std::min_element(r.begin(), r.end());
  if (rmin == 0.0) return 0.0;
  double num = 0.0;
  double den = 0.0;
  for (double ri : r) {
    const double rt = (ri - rmin) / rmin;
    if (rmin < 0.0) {
      num += rmin * std::exp(rt) * std::exp(nu * rt);
      den += std::exp(nu * rt);
    } else {
      num += ri * std::exp(-nu * rt);
      den += std::exp(-nu * rt);
    }
  }
  return num / den;
}

TEST(SmoothAnd, SpotValues) {
  const std::vector<double> a{1, 2, 3};
  EXPECT_NEAR(smooth_and(a, 5.0), 1.00678, 1e-4);
  const std::vector<double> b{-1, 1};
  EXPECT_NEAR(smooth_and(b, 5.0), -0.99996, 1e-4);
}

TEST(SmoothAnd, EqualOperandsReturnTheirValue) {
  for (double nu : {0.5, 5.0, 50.0}) {
    const std::vector<double> v{2, 2, 2, 2};
    EXPECT_DOUBLE_EQ(smooth_and(v, nu), 2.0);
  }
}

TEST(SmoothAnd, ZeroMinimumGivesZero) {
  const std::vector<double> v{0.0, 3.0, 7.0};
  EXPECT_EQ(smooth_and(v, 5.0), 0.0);
}

TEST(SmoothAnd, RejectsBadArguments) {
  const std::vector<double> v{1.0};
  EXPECT_THROW(smooth_and(v, 0.0), ModelError);
  EXPECT_THROW(smooth_and(v, -1.0), ModelError);
  EXPECT_THROW(smooth_and(std::vector<double>{}, 5.0), ModelError);
}

TEST(SmoothAnd, StableFormMatchesNaiveForm) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  for (int i = 0; i < 2000; ++i) {
    std::vector<double> v(1 + i % 6);
    for (auto& x : v) x = u(rng);
    for (double nu : {0.5, 5.0}) {
      const double expect = naive_and(v, nu);
      if (!std::isfinite(expect)) continue;
      EXPECT_NEAR(smooth_and(v, nu), expect, 1e-9 * std::max(1.0, std::fabs(expect)));
    }
  }
}

TEST(SmoothAnd, SignBoundsProperty) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int i = 0; i < 5000; ++i) {
    std::vector<double> v(1 + i % 8);
    for (auto& x : v) x = u(rng);
    const double lo = *std::min_element(v.begin(), v.end());
    const double hi = *std::max_element(v.begin(), v.end());
    for (double nu : {0.5, 5.0, 50.0}) {
      const double r = smooth_and(v, nu);
      EXPECT_EQ(r > 0.0, lo > 0.0);
      EXPECT_LE(lo, r);
      EXPECT_LE(r, hi);
    }
  }
}

TEST(SmoothOr, IsDualOfSmoothAnd) {
  const std::vector<double> v{-0.5, 1.0, 2.5};
  const std::vector<double> neg{0.5, -1.0, -2.5};
  EXPECT_EQ(smooth_or(v, 5.0), -smooth_and(neg, 5.0));
  EXPECT_GE(smooth_or(v, 5.0), 0.0);
}

Trace abc_trace() {
  Trace tr(1.0, 4);
  tr.set_channel("a", {1.0, 2.0, -0.5, 3.0});
  tr.set_channel("b", {0.5, -1.0, 2.0, 1.0});
  tr.set_channel("c", {2.0, 2.0, 2.0, 2.0});
  return tr;
}

TEST(SmoothRobustness, NestedConjunctionsAreFlattened) {
  const auto tr = abc_trace();
  const double three = smooth_robustness(parse_formula("(a > 0 & b > 0) & c > 0"), tr, 0, 5.0);
  const std::vector<double> ops{1.0, 0.5, 2.0};
  EXPECT_DOUBLE_EQ(three, smooth_and(ops, 5.0));
  EXPECT_DOUBLE_EQ(smooth_robustness(parse_formula("a > 0 & (b > 0 & c > 0)"), tr, 0, 5.0), three);
}

TEST(SmoothRobustness, GloballyAggregatesItsWindow) {
  const auto tr = abc_trace();
  const std::vector<double> window{1.0, 2.0, -0.5, 3.0};
  EXPECT_DOUBLE_EQ(smooth_robustness(parse_formula("G[0,3](a > 0)"), tr, 0, 5.0), smooth_and(window, 5.0));
  EXPECT_DOUBLE_EQ(smooth_robustness(parse_formula("F[0,3](a > 0)"), tr, 0, 5.0), smooth_or(window, 5.0));
}

TEST(SmoothRobustness, NegationFlipsSign) {
  const auto tr = abc_trace();
  const Formula f = parse_formula("G[0,3](a > 0 | b > 0)");
  EXPECT_DOUBLE_EQ(smooth_robustness(Formula::negate(f), tr, 0, 5.0), -smooth_robustness(f, tr, 0, 5.0));
}

TEST(SmoothRobustness, UntilUsesSmoothMinAndMax) {
  const auto tr = abc_trace();
  // Witnesses k = 0, 1, 2 with prefixes {}, {a0}, {a0, a1} over b.
  const double k0 = 0.5;
  const double k1 = smooth_and(std::vector<double>{-1.0, 1.0}, 5.0);
  const double k2 = smooth_and(std::vector<double>{2.0, 1.0, 2.0}, 5.0);
  const double expect = smooth_or(std::vector<double>{k0, k1, k2}, 5.0);
  EXPECT_NEAR(smooth_robustness(parse_formula("(a > 0) U[0,2] (b > 0)"), tr, 0, 5.0), expect, 1e-12);
}

TEST(SmoothRobustness, ApproachesClassicalForLargeNu) {
  const auto tr = abc_trace();
  const Formula f = parse_formula("G[0,3](c > 0) & F[0,1](a > 0)");
  EXPECT_NEAR(smooth_robustness(f, tr, 0, 1e4), robustness(f, tr, 0), 1e-3);
}

TEST(SmoothRobustness, DispatchFollowsConfig) {
  const auto tr = abc_trace();
  const Formula f = parse_formula("G[0,3](a > 0)");
  EXPECT_EQ(evaluate(f, tr, 0, {5.0, Semantics::kClassical}), robustness(f, tr, 0));
  EXPECT_EQ(evaluate(f, tr, 0, {5.0, Semantics::kSmooth}), smooth_robustness(f, tr, 0, 5.0));
  EXPECT_THROW(smooth_robustness(f, tr, 0, 0.0), ModelError);
}

}  // namespace
}  // namespace stlplan::stl
