#include <gtest/gtest.h>

#include <filesystem>

#include "n2m/builtin.hpp"
#include "n2m/runner.hpp"
#include "support.hpp"

using namespace n2m;
namespace fs = std::filesystem;

namespace {

class RunnerTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("n2m_runner_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    RunOptions options(const std::string& sub, std::size_t jobs = 1) const { return {dir_ / sub, jobs, true}; }

    static const Verdict& verdict(const ScenarioSummary& s, const std::string& check) {
        for (const auto& v : s.verdicts)
            if (v.check == check) return v;
        throw std::runtime_error("no verdict " + check);
    }

    static Scenario builtin(const std::string& name) { return find_scenario(builtin_scenarios(), name); }

    fs::path dir_;
};

}  // namespace

TEST_F(RunnerTest, OneBitTraceCopiesNoise) {
    const auto s = builtin("onebit");
    run_scenario(s, options("a"));
    const std::string csv = read_file(dir_ / "a" / "onebit" / "base" / "seed_1.csv");
    EXPECT_EQ(csv.rfind(std::string(kTrajectoryCsvHeader) + "\n", 0), 0U);
    RunConfig cfg = s.run;
    cfg.channel.seed = s.seed;
    LoopState st = initial_state(cfg);
    for (std::uint64_t t = 0; t < cfg.horizon; ++t) {
        const auto noise = draw_self_noise(st.previous, t, cfg.channel);
        step(st, t, cfg);
        ASSERT_EQ(st.context.symbols, noise.symbols);
    }
}

TEST_F(RunnerTest, TokensContrast) {
    const auto sum = run_scenario(builtin("tokens"), options("t"));
    EXPECT_EQ(verdict(sum, "classify").status, VerdictStatus::Pass) << verdict(sum, "classify").detail;
    EXPECT_EQ(verdict(sum, "fixed_point_dichotomy").status, VerdictStatus::Pass);
    const auto& runs = sum.json.at("runs");
    ASSERT_EQ(runs.size(), 2U);
    for (const auto& r : runs) {
        const auto cls = r.at("classification").get<std::string>();
        if (r.at("point") == "temperature=1")
            EXPECT_EQ(cls, "DIVERGENT");
        else
            EXPECT_EQ(cls, "CONVERGED");
    }
}

TEST_F(RunnerTest, PrototypeShape) {
    const auto sum = run_scenario(builtin("appendixC"), options("c"));
    EXPECT_EQ(verdict(sum, "prototype_shape").status, VerdictStatus::Pass);
}

TEST_F(RunnerTest, FailingCheckFailsTheReport) {
    auto all = parse_scenarios_text(
        "schema_version = 1\n[short]\nkind = single\npsi = gated\ngate_threshold = 10\ngain_lo = 0\ngain_hi = 8\n"
        "update = delta_monotone\ndelta = 1\ngamma = 10\ninitial_norm = 11\nhorizon = 50\nchecks = drift\n");
    const auto sum = run_scenario(all[0], options("f"));
    EXPECT_EQ(verdict(sum, "drift").status, VerdictStatus::Fail);
    EXPECT_FALSE(sum.passed());
    const auto rep = build_report(load_summaries(dir_ / "f"));
    EXPECT_FALSE(rep.passed());
    EXPECT_EQ(rep.json.at("failing"), nlohmann::json::array({"short/drift"}));
    const auto table = format_report_table(rep);
    EXPECT_NE(table.find("HARD CHECK FAILURES"), std::string::npos);
}

TEST_F(RunnerTest, DocumentedCounterexampleDoesNotFail) {
    const auto sum = run_scenario(builtin("audit_cg"), options("d"));
    EXPECT_EQ(verdict(sum, "compression_floor").status, VerdictStatus::Documented);
    EXPECT_EQ(verdict(sum, "o1_clean").status, VerdictStatus::Pass);
    const auto rep = build_report(load_summaries(dir_ / "d"));
    EXPECT_TRUE(rep.passed());
    const auto table = format_report_table(rep);
    EXPECT_NE(table.find("COUNTEREXAMPLE FOUND (documented)"), std::string::npos);
    EXPECT_NE(table.find("ALL HARD CHECKS PASSED"), std::string::npos);
    EXPECT_EQ(table.find("-0"), std::string::npos);
}

TEST_F(RunnerTest, ReRunIsByteIdentical) {
    auto s = builtin("masked_drift");
    s.run.horizon = 2000;
    s.repeat = 2;
    s.outputs = {true, true, true};
    run_scenario(s, options("x"));
    run_scenario(s, options("y"));
    std::size_t files = 0;
    for (const auto& e : fs::recursive_directory_iterator(dir_ / "x")) {
        if (!e.is_regular_file()) continue;
        const auto rel = fs::relative(e.path(), dir_ / "x");
        ASSERT_EQ(read_file(e.path()), read_file(dir_ / "y" / rel)) << rel;
        ++files;
    }
    EXPECT_GE(files, 5U);
}

TEST_F(RunnerTest, ParallelJobsMatchSerial) {
    auto s = builtin("crossing");
    s.repeat = 12;
    s.outputs.csv = true;
    run_scenario(s, options("serial", 1));
    run_scenario(s, options("parallel", 4));
    for (const auto& e : fs::recursive_directory_iterator(dir_ / "serial")) {
        if (!e.is_regular_file()) continue;
        const auto rel = fs::relative(e.path(), dir_ / "serial");
        ASSERT_EQ(read_file(e.path()), read_file(dir_ / "parallel" / rel)) << rel;
    }
}

TEST_F(RunnerTest, SwarmArtifacts) {
    auto s = builtin("swarm_sync");
    s.run.horizon = 50;
    s.swarm.agent.horizon = 50;
    s.outputs.csv = true;
    const auto sum = run_scenario(s, options("s"));
    EXPECT_TRUE(sum.passed());
    const fs::path base = dir_ / "s" / "swarm_sync" / "base";
    EXPECT_TRUE(fs::exists(base / "seed_1_agent1.csv"));
    EXPECT_TRUE(fs::exists(base / "seed_1_agent2.csv"));
    EXPECT_TRUE(fs::exists(base / "seed_1_collective.csv"));
    const auto d = nlohmann::json::parse(read_file(base / "seed_1_drift_matrix.json"));
    EXPECT_NEAR(d.at("spectral_radius").get<double>(), 1.5, 1e-9);
}

TEST_F(RunnerTest, ConjecturePlumbing) {
    auto s = builtin("conjecture_log");
    s.conjecture.budgets = {100, 1000, 10000};
    const auto fit = conjecture_experiment(s);
    ASSERT_EQ(fit.points.size(), 3U);
    for (const auto& p : fit.points) EXPECT_EQ(p.crossed, 10U);
    EXPECT_GT(fit.fit.slope, 0.0);
    EXPECT_GT(fit.fit.r_squared, 0.9);
    EXPECT_LE(fit.fit.r_squared, 1.0);

    const auto flat = conjecture_experiment(builtin("conjecture_flat"));
    EXPECT_NEAR(flat.fit.slope, 0.0, 1e-9);
}
