#include "obswin/window.hpp"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "obswin/error.hpp"
#include "obswin/example_cases.hpp"

namespace obswin {
namespace {

Vector v1(double x) { return Vector::Constant(1, x); }

SystemSpec with_omega(SystemSpec s, std::vector<Interval> omega) {
  s.omega = Box(std::move(omega));
  return s;
}

TEST(DistinguishingTime, ExampleTwoMatchesClosedForm) {
  const auto ex = load_example("example2-kink");
  const DistinguishResult r = distinguishing_time(ex.spec, v1(0.0), v1(0.1), 5.0, 1e-3);
  ASSERT_EQ(r.verdict, Distinction::Distinguished);
  EXPECT_NEAR(r.time, std::log(1.001 / 0.1), 1e-6);
}

TEST(DistinguishingTime, SeparatedAtStart) {
  const auto lc = load_example("linear-contraction");
  const DistinguishResult r = distinguishing_time(lc.spec, v1(1.0), v1(0.0), 5.0, 0.5);
  ASSERT_EQ(r.verdict, Distinction::Distinguished);
  EXPECT_EQ(r.time, 0.0);
}

TEST(DistinguishingTime, NotDistinguishedBeforeHorizon) {
  const auto ex = load_example("example2-kink");
  const DistinguishResult r = distinguishing_time(ex.spec, v1(0.0), v1(0.1), 2.0, 1e-3);
  EXPECT_EQ(r.verdict, Distinction::NotDistinguished);
  EXPECT_EQ(r.horizon, 2.0);
}

TEST(DistinguishingTime, TruncatedByEscape) {
  // h is constant, so nothing separates the pair before x1 blows up at t = 2.
  const DistinguishResult never = distinguishing_time(
      parse_system("system s\ndim 1\noutputs 1\nf1 = x1^3\nh1 = 0\nomega [0, 1]\n"), v1(0.5),
      v1(0.25), 5.0, 1e-3);
  EXPECT_EQ(never.verdict, Distinction::Truncated);
  EXPECT_NEAR(never.horizon, 2.0, 1e-3);
}

TEST(DistinguishingTime, Preconditions) {
  const auto lc = load_example("linear-contraction");
  EXPECT_THROW(distinguishing_time(lc.spec, v1(0.2), v1(0.2), 1.0, 1e-3), PreconditionError);
  EXPECT_THROW(distinguishing_time(lc.spec, v1(0.2), v1(0.3), 1.0, 0.0), PreconditionError);
}

TEST(DistinguishingTime, SymmetricAndBracketed) {
  const auto ex = load_example("example2-kink");
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 0.5);
  const double eps = 1e-3;
  for (int k = 0; k < 50; ++k) {
    const Vector a = v1(u(rng)), b = v1(u(rng));
    const DistinguishResult ab = distinguishing_time(ex.spec, a, b, 6.0, eps);
    const DistinguishResult ba = distinguishing_time(ex.spec, b, a, 6.0, eps);
    EXPECT_EQ(ab.verdict, ba.verdict);
    EXPECT_EQ(ab.time, ba.time);
    if (ab.verdict != Distinction::Distinguished) continue;
    EXPECT_LE(ab.time, 6.0);
    const auto oracle = ex.oracles.distinguishing_time(a, b, eps);
    ASSERT_TRUE(oracle.has_value());
    EXPECT_NEAR(ab.time, *oracle, 1e-6);
    if (ab.time > 1e-5) {
      auto gap = [&](double t) {
        return std::abs(ex.oracles.output(a, t)[0] - ex.oracles.output(b, t)[0]);
      };
      EXPECT_LT(gap(ab.time - 1e-5), eps);
      EXPECT_GE(gap(ab.time) + 1e-9, eps);
    }
  }
}

TEST(DistinguishingTime, DoubleIntegratorOracle) {
  const auto ex = load_example("double-integrator");
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int k = 0; k < 30; ++k) {
    Vector a = (Vector(2) << u(rng), u(rng)).finished();
    Vector b = a;
    b[1] += 0.1 * u(rng);
    b[0] += 1e-5 * u(rng);
    const double eps = 1e-3;
    const DistinguishResult r = distinguishing_time(ex.spec, a, b, 10.0, eps);
    const auto oracle = ex.oracles.distinguishing_time(a, b, eps);
    if (!oracle || *oracle > 10.0) {
      EXPECT_EQ(r.verdict, Distinction::NotDistinguished);
    } else {
      ASSERT_EQ(r.verdict, Distinction::Distinguished);
      EXPECT_NEAR(r.time, *oracle, 1e-6);
    }
  }
}

TEST(SamplePairs, RespectsPlanInvariant) {
  const Box omega({{-1, 1}, {0, 2}});
  for (auto strategy : {PairSamplingPlan::Strategy::Grid, PairSamplingPlan::Strategy::LowDiscrepancy,
                        PairSamplingPlan::Strategy::BoundaryBiased}) {
    PairSamplingPlan plan;
    plan.strategy = strategy;
    plan.r_min = 0.3;
    plan.count = 100;
    plan.points_per_axis = 5;
    plan.anchor_distances = {0.5};
    const auto pairs = sample_pairs(omega, plan);
    EXPECT_FALSE(pairs.empty());
    for (const auto& [a, b] : pairs) {
      EXPECT_TRUE(omega.contains(a));
      EXPECT_TRUE(omega.contains(b));
      EXPECT_GE((a - b).norm(), 0.3 * (1 - 1e-12));
    }
  }
}

TEST(SamplePairs, BoundaryBiasedIncludesCornerPairs) {
  PairSamplingPlan plan;
  plan.r_min = 0.1;
  plan.count = 10;
  const auto pairs = sample_pairs(Box({{0, 0.5}}), plan);
  ASSERT_FALSE(pairs.empty());
  EXPECT_EQ(pairs[0].first[0], 0.0);
  EXPECT_EQ(pairs[0].second[0], 0.5);
}

TEST(SamplePairs, ExplicitPairsAreChecked) {
  PairSamplingPlan plan;
  plan.strategy = PairSamplingPlan::Strategy::Explicit;
  plan.pairs = {{v1(0.2), v1(0.2)}};
  EXPECT_THROW(sample_pairs(Box({{0, 1}}), plan), PreconditionError);
  plan.pairs = {{v1(0.2), v1(1.5)}};
  EXPECT_THROW(sample_pairs(Box({{0, 1}}), plan), PreconditionError);
  plan.r_min = 0.0;
  EXPECT_THROW(sample_pairs(Box({{0, 1}}), plan), PreconditionError);
}

TEST(ProbeIndistinguishable, ExampleOneInjectiveOutput) {
  PairSamplingPlan plan;
  plan.r_min = 0.1;
  plan.count = 64;
  WindowOptions opts;
  opts.t_max = 0.2;
  const WindowReport r = probe_indistinguishable(load_example("example1").spec, plan, opts);
  EXPECT_TRUE(r.d_observable_on_samples());
  EXPECT_TRUE(r.truncated.empty());
  EXPECT_EQ(r.t_hat, 0.0);
}

TEST(ProbeIndistinguishable, ExampleTwoShortWindowLeavesSmallPairs) {
  PairSamplingPlan plan;
  plan.strategy = PairSamplingPlan::Strategy::Explicit;
  plan.pairs = {{v1(0.0), v1(0.3)}, {v1(0.0), v1(0.5)}};
  WindowOptions opts;
  opts.t_max = 0.5;
  opts.eps_sep = 1e-3;
  const WindowReport r = probe_indistinguishable(load_example("example2-kink").spec, plan, opts);
  EXPECT_FALSE(r.d_observable_on_samples());
  EXPECT_EQ(r.undistinguished, (std::vector<std::size_t>{0, 1}));
  EXPECT_TRUE(r.t_hat_lower_bound);
}

TEST(EstimateWindow, ExampleTwoGrowsAsRShrinks) {
  PairSamplingPlan plan;
  plan.r_min = 0.01;
  plan.count = 64;
  WindowOptions opts;
  opts.t_max = 5.0;
  opts.eps_sep = 1e-3;
  const WindowReport r =
      estimate_window(load_example("example2-kink").spec, plan, opts, {0.5, 0.1, 0.01});
  ASSERT_EQ(r.curve.size(), 3u);
  const double expected[] = {std::log(1.001 / 0.5), std::log(1.001 / 0.1), std::log(1.001 / 0.01)};
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(r.curve[i].t_hat, expected[i], 1e-6) << r.curve[i].r;
    EXPECT_FALSE(r.curve[i].lower_bound);
  }
  EXPECT_EQ(r.t_hat, r.curve.back().t_hat);
}

TEST(EstimateWindow, ContractionSeparatesImmediately) {
  PairSamplingPlan plan;
  plan.r_min = 0.05;
  plan.count = 32;
  WindowOptions opts;
  opts.t_max = 3.0;
  opts.eps_sep = 0.05;
  const WindowReport r =
      estimate_window(load_example("linear-contraction").spec, plan, opts, {1.0, 0.5});
  EXPECT_EQ(r.t_hat, 0.0);
  EXPECT_TRUE(r.d_observable_on_samples());
}

TEST(EstimateWindow, ExampleOneFiniteWithoutTruncation) {
  PairSamplingPlan plan;
  plan.r_min = 0.05;
  plan.count = 64;
  WindowOptions opts;
  opts.t_max = 0.2;
  const WindowReport r = estimate_window(
      with_omega(load_example("example1").spec, {{0.5, 1.0}}), plan, opts, {0.25, 0.1});
  EXPECT_TRUE(r.truncated.empty());
  EXPECT_TRUE(std::isfinite(r.t_hat));
  EXPECT_LE(r.t_hat, 0.2);
}

TEST(EstimateWindow, CurveMonotoneInRAndEps) {
  const SystemSpec s = load_example("example2-kink").spec;
  PairSamplingPlan plan;
  plan.strategy = PairSamplingPlan::Strategy::LowDiscrepancy;
  plan.r_min = 0.02;
  plan.count = 80;
  plan.seed = 3;
  const std::vector<double> ladder{0.4, 0.2, 0.1, 0.05};
  std::vector<double> previous;
  for (double eps : {1e-4, 1e-3, 1e-2}) {
    WindowOptions opts;
    opts.t_max = 6.0;
    opts.eps_sep = eps;
    const WindowReport r = estimate_window(s, plan, opts, ladder);
    for (std::size_t i = 1; i < r.curve.size(); ++i)
      EXPECT_GE(r.curve[i].t_hat, r.curve[i - 1].t_hat);  // r decreasing
    if (!previous.empty())
      for (std::size_t i = 0; i < r.curve.size(); ++i) EXPECT_GE(r.curve[i].t_hat, previous[i]);
    previous.clear();
    for (const auto& c : r.curve) previous.push_back(c.t_hat);
  }
}

TEST(EstimateWindow, EveryPairAccountedForOnce) {
  PairSamplingPlan plan;
  plan.r_min = 0.05;
  plan.count = 40;
  WindowOptions opts;
  opts.t_max = 1.0;
  opts.eps_sep = 1e-3;
  const WindowReport r = estimate_window(load_example("example2-kink").spec, plan, opts, {});
  std::size_t distinguished = 0;
  for (const PairRecord& p : r.pairs)
    if (p.result.verdict == Distinction::Distinguished) {
      ++distinguished;
      EXPECT_LE(p.result.time, r.t_hat);
    }
  EXPECT_EQ(distinguished + r.undistinguished.size() + r.truncated.size(), r.pairs.size());
  EXPECT_LE(r.t_hat, opts.t_max);
  EXPECT_THROW(estimate_window(load_example("example2-kink").spec,
                               PairSamplingPlan{.r_min = 0.0}, opts, {}),
               PreconditionError);
}

}  // namespace
}  // namespace obswin
