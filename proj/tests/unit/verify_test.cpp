#include <gtest/gtest.h>

#include "n2m/verify.hpp"
#include "support.hpp"

using namespace n2m;
using n2m::test::expect_error;
using n2m::test::gated;

TEST(VerifyDrift, ExactOnGatedRun) {
    const auto traj = run(gated(10, 0, 12, 0.5, 11, 10000));
    const auto r = verify_drift(traj, 0.5, 10);
    EXPECT_TRUE(r.passed);
    EXPECT_EQ(r.t0, 0U);
    EXPECT_EQ(r.per_step_violations, 0U);
    EXPECT_EQ(r.cumulative_violations, 0U);
    EXPECT_EQ(r.drift_bound, 5.0);
    for (std::size_t k = 0; k <= 10000; ++k) ASSERT_GE(traj.norm_at(k), 11.0 + 5.0 * static_cast<double>(k));
}

TEST(VerifyDrift, DetectsAShortfall) {
    // gain 8 above the gate falls short of delta*Gamma = 10
    const auto traj = run(gated(10, 0, 8, 1, 11, 100));
    const auto r = verify_drift(traj, 1, 10);
    EXPECT_FALSE(r.passed);
    EXPECT_EQ(r.per_step_violations, 100U);
}

TEST(VerifyDrift, MaskedMeanWithinFiveSigma) {
    auto cfg = gated(10, 0, 10, 1, 11, 10000, 7);
    cfg.channel.mask_rate = EpsilonSchedule::constant(0.5);
    const auto r = verify_drift(run(cfg), 1, 10, 0.5);
    EXPECT_TRUE(r.passed);
    EXPECT_EQ(r.drift_bound, 5.0);
    EXPECT_GT(r.masked_steps, 0U);
    EXPECT_NEAR(r.mean_drift, 5.0, 5 * r.standard_error);
}

TEST(VerifyDrift, NoCrossing) {
    expect_error([] { verify_drift(run(gated(10, 0, 12, 1, 3, 50)), 1, 10); }, ErrorCode::NoCrossing);
}

TEST(VerifyBounded, Examples) {
    const auto zero = run(gated(10, 0, 12, 1, 0, 1000));
    EXPECT_EQ(verify_bounded(zero, 10).max_norm, 0.0);

    auto cfg = gated(10, 5, 12, 1, 5, 100000, 3);
    cfg.update.kind = UpdateKind::Overwrite;
    cfg.channel.mask_rate = EpsilonSchedule::constant(0.2);
    const auto r = verify_bounded(run(cfg), 10);
    EXPECT_TRUE(r.passed);
    EXPECT_EQ(r.lyapunov_nonzero, 0U);
    EXPECT_LE(r.max_norm, 10.0);

    cfg.initial = ContextState::abstract(11);
    expect_error([&] { verify_bounded(run(cfg), 10); }, ErrorCode::PreconditionViolated);
}

TEST(GammaStar, RecoversTheGate) {
    auto cfg = gated(50, 0, 5, 1, 0, 1);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto e = estimate_gamma_star(cfg, 1, 100, 20, 16, seed);
        EXPECT_NEAR(e.estimate, 50.0, 2.5);
        EXPECT_NEAR(e.estimate, 50.0, e.resolution);
    }
}

TEST(GammaStar, CollapsesToLowerEndWhenGainNeverVanishes) {
    const auto e = estimate_gamma_star(gated(50, 1, 5, 1, 0, 1), 1, 100, 20, 16, 1);
    EXPECT_EQ(e.estimate, 1.0);
}

TEST(GammaStar, StableUnderMoreSamples) {
    const auto cfg = gated(50, 0, 5, 1, 0, 1);
    const auto a = estimate_gamma_star(cfg, 1, 100, 20, 16, 2);
    const auto b = estimate_gamma_star(cfg, 1, 100, 20, 32, 2);
    EXPECT_LE(std::abs(a.estimate - b.estimate), a.resolution);
}

TEST(GammaStar, BracketErrors) {
    const auto cfg = gated(50, 0, 5, 1, 0, 1);
    expect_error([&] { estimate_gamma_star(cfg, 10, 5, 20, 16, 1); }, ErrorCode::SearchBracketInvalid);
    expect_error([&] { estimate_gamma_star(cfg, 1, 40, 20, 16, 1); }, ErrorCode::SearchBracketInvalid);
}

TEST(DivergenceTimeBound, Examples) {
    EXPECT_EQ(divergence_time_bound(5, 12, 100, 1, 0, 10), 14U);
    EXPECT_EQ(divergence_time_bound(5, 12, 100, 1, 0.5, 10), 23U);
    EXPECT_EQ(divergence_time_bound(5, 12, 12 + 0.3 * 7, 0.3, 0, 7), 6U);
    expect_error([] { divergence_time_bound(5, 12, 10, 1, 0, 10); }, ErrorCode::InvalidArgument);
}

TEST(DivergenceTimeBound, PrintedNumeratorAsTarget) {
    // the original numerator ||C(t*)|| - Gamma corresponds to B = 2||C(t*)|| - Gamma
    EXPECT_EQ(divergence_time_bound(5, 12, 2 * 12 - 10, 1, 0, 10), 5U + 1U);
}

TEST(CrossingBound, ObservedWithinBound) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto traj = run(gated(10, 2, 11, 1, 2, 40, seed));
        const auto c = check_crossing_bound(traj, 100, 1, 0, 10);
        ASSERT_TRUE(c.passed);
        EXPECT_EQ(c.t_star, 5U);
        EXPECT_EQ(c.norm_at_star, 12.0);
        EXPECT_EQ(c.bound, 14U);
        ASSERT_TRUE(c.observed.has_value());
        EXPECT_LE(*c.observed, 14U);
    }
}

TEST(Bursts, WindowedRun) {
    auto cfg = gated(10, 1, 10, 1, 0, 100000);
    cfg.update.kind = UpdateKind::Windowed;
    cfg.update.window = 100;
    cfg.update.retain = 50;
    const auto r = burst_stats(run(cfg), 100);
    EXPECT_TRUE(r.passed);
    EXPECT_GE(r.bursts, 100U);
    EXPECT_EQ(r.max_norm, 100.0);
    EXPECT_EQ(r.gap_bound, 5U);
    EXPECT_LE(r.max_gap, r.gap_bound);
    EXPECT_EQ(r.gap_violations, 0U);
}

TEST(Bursts, UnreachableCapAndMismatch) {
    auto cfg = gated(10, 1, 10, 1, 0, 100);
    cfg.update.kind = UpdateKind::Windowed;
    cfg.update.window = 1000000;
    EXPECT_EQ(burst_stats(run(cfg), 1000000).bursts, 0U);
    expect_error([] { burst_stats(run(gated(10, 1, 10, 1, 0, 10)), 100); }, ErrorCode::RuleMismatch);
}

TEST(EpsilonStar, Examples) {
    EXPECT_NEAR(epsilon_star(0.5, 4, 10).value, 0.9, 1e-15);
    EXPECT_EQ(epsilon_star(2, 10, 10).value, 0.0);
    EXPECT_TRUE(epsilon_star(4, 10, 10).clamped);
}

TEST(EpsilonStar, CollapseRegimeStaysBounded) {
    auto cfg = gated(4, 4, 10, 0.5, 0, 100000, 9);
    cfg.update.kind = UpdateKind::Overwrite;
    cfg.channel.mask_rate = EpsilonSchedule::constant(0.95);
    EXPECT_TRUE(verify_bounded(run(cfg), 4).passed);
}

TEST(FixedPoint, Examples) {
    RunConfig cfg;
    cfg.channel.psi = PsiKind::Constant;
    cfg.channel.constant_meaning = Meaning::parse("1");
    cfg.update.kind = UpdateKind::Overwrite;
    cfg.initial = ContextState::concrete({0});
    cfg.horizon = 100;
    const auto fp = detect_fixed_point(run(cfg));
    ASSERT_TRUE(fp.has_value());
    EXPECT_LE(*fp, 1U);

    cfg.channel.psi = PsiKind::Identity;
    cfg.channel.temperature = 0;
    EXPECT_TRUE(detect_fixed_point(run(cfg)).has_value());

    cfg.channel.temperature = 1;
    cfg.horizon = 10000;
    EXPECT_FALSE(detect_fixed_point(run(cfg)).has_value());

    expect_error([] { detect_fixed_point(run(gated(10, 1, 2, 1, 0, 10))); }, ErrorCode::AbstractModeUnsupported);
}

TEST(Classify, DivergentAndConverged) {
    EXPECT_EQ(classify_run(run(gated(10, 0, 12, 1, 11, 100))).kind, RunClass::Divergent);
    EXPECT_EQ(classify_run(run(gated(10, 0, 12, 1, 5, 100))).kind, RunClass::Bounded);
    RunConfig cfg;
    cfg.channel.psi = PsiKind::Identity;
    cfg.channel.temperature = 0;
    cfg.update.kind = UpdateKind::Overwrite;
    cfg.initial = ContextState::concrete();
    cfg.horizon = 50;
    EXPECT_EQ(classify_run(run(cfg)).kind, RunClass::Converged);
}

TEST(ComputeProfile, Slopes) {
    auto cfg = gated(10, 0, 12, 0.5, 11, 10000);
    auto p = cumulative_compute(run(cfg), CostModel{});
    EXPECT_NEAR(p.loglog.slope, 2.0, 0.1);
    EXPECT_EQ(p.growth, GrowthClass::Quadratic);

    CostModel low;
    low.variant = CostVariant::LowRank;
    low.rank = 8;
    p = cumulative_compute(run(cfg), low);
    EXPECT_NEAR(p.loglog.slope, 1.0, 0.1);

    const auto flat = cumulative_compute(run(gated(10, 0, 12, 1, 5, 1000)), CostModel{});
    EXPECT_NEAR(flat.loglog.slope, 0.0, 1e-12);
    EXPECT_NEAR(flat.cumulative.back(), 1000 * flops_at(5, CostModel{}), 1e-6);
}
