#include <gtest/gtest.h>

#include <functional>

#include "n2m/engine.hpp"
#include "n2m/verify.hpp"
#include "support.hpp"

using namespace n2m;
using n2m::test::expect_error;
using n2m::test::gated;

namespace {

RunConfig onebit(std::uint64_t seed) {
    RunConfig cfg;
    cfg.channel.psi = PsiKind::Identity;
    cfg.channel.noise_len = 1;
    cfg.channel.seed = seed;
    cfg.update.kind = UpdateKind::Overwrite;
    cfg.initial = ContextState::concrete({0});
    cfg.gamma = 1;
    cfg.horizon = 64;
    return cfg;
}

// The prototype listing, one statement per line, with randint(0, 1) read from
// the shared bit stream.
std::vector<long long> listing(std::size_t T, double Gamma, std::uint64_t seed) {
    Stream random(seed);
    auto psi = [](long long n, long long) { return n; };
    auto U = [](long long, long long m) { return m; };
    long long c = 0;
    std::vector<long long> history;
    for (std::size_t t = 0; t < T; ++t) {
        long long n = random.bit();
        long long m = psi(n, c);
        c = c <= Gamma ? U(c, m) : U(c, m) + 1;
        history.push_back(c);
    }
    return history;
}

}  // namespace

TEST(Engine, OneBitLoopCopiesThePreviousNoise) {
    const auto cfg = onebit(3);
    LoopState s = initial_state(cfg);
    for (std::uint64_t t = 0; t < 64; ++t) {
        const auto noise = draw_self_noise(s.previous, t, cfg.channel);
        step(s, t, cfg);
        ASSERT_EQ(s.context.symbols, noise.symbols) << t;
        ASSERT_EQ(s.context.norm, 1.0);
    }
}

TEST(Engine, DeltaMonotoneAddsOmega) {
    RunConfig cfg;
    cfg.channel.psi = PsiKind::Identity;
    cfg.channel.noise_len = 5;
    cfg.update.kind = UpdateKind::DeltaMonotone;
    cfg.update.delta = 1;
    cfg.initial = ContextState::abstract(7);
    cfg.horizon = 1;
    const auto traj = run(cfg);
    ASSERT_EQ(traj.records.size(), 1U);
    EXPECT_EQ(traj.records[0].omega, 5.0);
    EXPECT_EQ(traj.final_norm, 12.0);
    EXPECT_EQ(traj.records[0].delta, 5.0);
}

TEST(Engine, HorizonZeroIsRejected) {
    auto cfg = onebit(1);
    cfg.horizon = 0;
    expect_error([&] { run(cfg); }, ErrorCode::ValidationError);
}

TEST(Engine, ConstantChannelIsDeterministic) {
    RunConfig cfg;
    cfg.channel.psi = PsiKind::Constant;
    cfg.channel.constant_meaning = Meaning::parse("101");
    cfg.update.kind = UpdateKind::Append;
    cfg.initial = ContextState::concrete();
    cfg.horizon = 50;
    auto other = cfg;
    other.channel.seed = 999;
    EXPECT_EQ(run(cfg).records, run(other).records);
}

TEST(Engine, DeltaIdentityHolds) {
    const auto traj = run(gated(10, 1, 12, 0.5, 0, 500));
    const auto n = traj.norms();
    for (std::size_t t = 0; t < traj.records.size(); ++t) ASSERT_EQ(n[t] + traj.records[t].delta, n[t + 1]);
}

TEST(Engine, GatedDivergenceIsStrictlyIncreasingAfterCrossing) {
    const auto traj = run(gated(10, 0, 12, 0.5, 11, 2000));
    const auto n = traj.norms();
    for (std::size_t t = 1; t < n.size(); ++t) ASSERT_GT(n[t], n[t - 1]);
}

TEST(Engine, DeterministicChannelSettlesByStepTwo) {
    RunConfig cfg;
    cfg.channel.psi = PsiKind::Identity;
    cfg.channel.temperature = 0;
    cfg.update.kind = UpdateKind::Overwrite;
    cfg.initial = ContextState::concrete({1, 1, 0});
    cfg.horizon = 100;
    const auto traj = run(cfg);
    const auto n = traj.norms();
    for (std::size_t t = 2; t < traj.records.size(); ++t) {
        ASSERT_TRUE(traj.records[t].has(kFixedPoint)) << t;
        ASSERT_EQ(n[t], n[2]);
    }
}

TEST(Engine, ConcreteBufferTracksFloorOfNorm) {
    RunConfig cfg = gated(3, 1, 4, 0.7, 0, 300);
    cfg.initial = ContextState::concrete();
    LoopState s = initial_state(cfg);
    for (std::uint64_t t = 0; t < cfg.horizon; ++t) {
        step(s, t, cfg);
        ASSERT_EQ(static_cast<double>(s.context.symbols.size()), std::floor(s.context.norm));
    }
}

TEST(Engine, WindowCapIsNeverExceeded) {
    RunConfig cfg = gated(10, 1, 10, 1, 0, 5000);
    cfg.update.kind = UpdateKind::Windowed;
    cfg.update.window = 100;
    const auto traj = run(cfg);
    double top = 0;
    std::size_t hits = 0;
    for (const auto& r : traj.records) {
        ASSERT_LE(r.norm, 100.0);
        top = std::max(top, r.norm);
        hits += r.has(kBurstHitW);
    }
    EXPECT_EQ(top, 100.0);
    EXPECT_GT(hits, 0U);
}

TEST(Engine, BudgetGateStopsGrowth) {
    RunConfig cfg = gated(10, 0, 12, 1, 11, 200);
    cfg.budget_gate = BudgetGate{std::nullopt, 100.0};
    const auto traj = run(cfg);
    EXPECT_GE(traj.final_norm, 100.0);
    EXPECT_LT(traj.final_norm, 100.0 + 12.0);
    EXPECT_TRUE(traj.records.back().has(kBudgetGated));
}

TEST(Engine, MaskedStepsAddNothing) {
    RunConfig cfg = gated(10, 0, 10, 1, 11, 2000);
    cfg.channel.mask_rate = EpsilonSchedule::constant(0.5);
    const auto traj = run(cfg);
    std::size_t masked = 0;
    for (const auto& r : traj.records) {
        if (r.has(kMasked)) {
            ++masked;
            ASSERT_EQ(r.delta, 0.0);
            ASSERT_EQ(r.omega, 0.0);
        } else {
            ASSERT_EQ(r.delta, 10.0);
        }
    }
    EXPECT_NEAR(static_cast<double>(masked), 1000.0, 5 * std::sqrt(2000 * 0.25));
}

TEST(Engine, AppendSkipRepeatsPlateausOnGreedyChannel) {
    RunConfig cfg;
    cfg.channel.psi = PsiKind::Identity;
    cfg.channel.temperature = 0;
    cfg.update.kind = UpdateKind::Append;
    cfg.update.skip_repeats = true;
    cfg.initial = ContextState::concrete();
    cfg.horizon = 50;
    const auto traj = run(cfg);
    EXPECT_EQ(traj.final_norm, 8.0);
    ASSERT_TRUE(detect_fixed_point(traj).has_value());
    EXPECT_LE(*detect_fixed_point(traj), 2U);
}

TEST(Engine, SameSeedSameTrajectory) {
    const auto a = run(onebit(5));
    const auto b = run(onebit(5));
    EXPECT_EQ(a.records, b.records);
    EXPECT_NE(a.records, run(onebit(6)).records);
}

TEST(Prototype, VerbatimMatchesListing) {
    for (std::uint64_t seed : {0ULL, 1ULL, 42ULL, 12345ULL}) {
        EXPECT_EQ(run_appendix_c(PrototypeMode::Verbatim, 200, 10, seed), listing(200, 10, seed));
        EXPECT_EQ(run_appendix_c(PrototypeMode::Verbatim, 200, 0, seed), listing(200, 0, seed));
    }
}

TEST(Prototype, VerbatimStaysInZeroOne) {
    for (double gamma : {1.0, 10.0}) {
        for (long long v : run_appendix_c(PrototypeMode::Verbatim, 5000, gamma, 3)) ASSERT_TRUE(v == 0 || v == 1);
    }
}

TEST(Prototype, CumulativeGrowsFasterAboveThreshold) {
    const auto h = run_appendix_c(PrototypeMode::Cumulative, 20000, 10, 4);
    for (std::size_t i = 1; i < h.size(); ++i) ASSERT_GE(h[i], h[i - 1]);
    std::size_t first = 0;
    while (h[first] <= 10) ++first;
    for (std::size_t i = first + 1; i < h.size(); ++i) ASSERT_GE(h[i] - h[i - 1], 1);
    const double n = static_cast<double>(h.size() - 1 - first);
    const double mean = static_cast<double>(h.back() - h[first]) / n;
    EXPECT_NEAR(mean, 1.5, 5 * std::sqrt(0.25 / n));
}

TEST(Prototype, SingleStep) {
    EXPECT_EQ(run_appendix_c(PrototypeMode::Verbatim, 1, 10, 1).size(), 1U);
    expect_error([] { run_appendix_c(PrototypeMode::Verbatim, 0, 10, 1); }, ErrorCode::InvalidArgument);
}
