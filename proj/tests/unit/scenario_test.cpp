#include <gtest/gtest.h>

#include "n2m/builtin.hpp"
#include "n2m/export.hpp"
#include "n2m/scenario.hpp"
#include "support.hpp"

using namespace n2m;
using n2m::test::expect_error;

namespace {

std::string with_header(const std::string& body) { return "schema_version = 1\n" + body; }

}  // namespace

TEST(Scenario, MinimalFile) {
    const auto all = parse_scenarios_text(with_header("[one]\nkind = single\n"));
    ASSERT_EQ(all.size(), 1U);
    EXPECT_EQ(all[0].name, "one");
    EXPECT_EQ(all[0].kind, ScenarioKind::Single);
    EXPECT_EQ(all[0].repeat, 1U);
}

TEST(Scenario, NegativeBetaNamesTheInvariant) {
    try {
        parse_scenarios_text(with_header("[s]\nkind = swarm\nagents = 2\nbeta = 0 -0.5; 0.5 0\n"));
        ADD_FAILURE();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ValidationError);
        EXPECT_NE(e.detail().find("beta_ij >= 0"), std::string::npos) << e.what();
        EXPECT_NE(e.detail().find("[s]"), std::string::npos);
    }
}

TEST(Scenario, SweepExpandsToGrid) {
    const auto all = parse_scenarios_text(with_header("[g]\nkind = single\nsweep.gamma = 5, 10, 20\n"));
    const auto points = expand(all[0]);
    ASSERT_EQ(points.size(), 3U);
    EXPECT_EQ(points[0].scenario.run.gamma, 5.0);
    EXPECT_EQ(points[1].scenario.run.gamma, 10.0);
    EXPECT_EQ(points[2].scenario.run.gamma, 20.0);
    EXPECT_EQ(points[2].label, "gamma=20");
    EXPECT_TRUE(points[0].scenario.sweep.empty());

    const auto grid = parse_scenarios_text(with_header("[g]\nkind = single\nsweep.gamma = 5, 10\nsweep.delta = 1, 2, 3\n"));
    EXPECT_EQ(expand(grid[0]).size(), 6U);
}

TEST(Scenario, SyntaxErrorCarriesLine) {
    try {
        parse_scenarios_text(with_header("[a]\nkind = single\nthis line has no equals sign\n"));
        ADD_FAILURE();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ParseError);
        EXPECT_NE(e.detail().find("line 4"), std::string::npos) << e.what();
    }
}

TEST(Scenario, BadFieldValueIsParseError) {
    try {
        parse_scenarios_text(with_header("[a]\nkind = single\ndelta = fast\n"));
        ADD_FAILURE();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ParseError);
        EXPECT_NE(e.detail().find("delta"), std::string::npos);
    }
}

TEST(Scenario, ValidationErrors) {
    expect_error([] { parse_scenarios_text(with_header("[a]\nkind = single\n[a]\nkind = single\n")); },
                 ErrorCode::ValidationError);
    expect_error([] { parse_scenarios_text(with_header("[a]\nkind = single\ncolour = red\n")); },
                 ErrorCode::ValidationError);
    expect_error([] { parse_scenarios_text("[a]\nkind = single\n"); }, ErrorCode::ValidationError);
    expect_error([] { parse_scenarios_text("schema_version = 2\n[a]\nkind = single\n"); }, ErrorCode::ValidationError);
    expect_error([] { parse_scenarios_text(with_header("[a]\nkind = single\nhorizon = 0\n")); },
                 ErrorCode::ValidationError);
    expect_error([] { parse_scenarios_text(with_header("[a]\nkind = single\nchecks = gamma_star\n")); },
                 ErrorCode::ValidationError);
    expect_error([] { parse_scenarios_text(with_header("[a]\nkind = single\nchecks = crossing\n")); },
                 ErrorCode::ValidationError);
    expect_error([] { parse_scenarios(std::string(N2M_SOURCE_DIR) + "/no/such/file.ini"); }, ErrorCode::IoError);
}

TEST(Scenario, BuiltinsRoundTrip) {
    const auto all = builtin_scenarios();
    EXPECT_GE(all.size(), 20U);
    const auto again = parse_scenarios_text(emit_scenarios(all));
    ASSERT_EQ(again.size(), all.size());
    for (std::size_t i = 0; i < all.size(); ++i) EXPECT_TRUE(again[i] == all[i]) << all[i].name;
    EXPECT_EQ(emit_scenarios(again), emit_scenarios(all));
}

TEST(Scenario, EmbeddedBuiltinsMatchTheShippedFile) {
    EXPECT_EQ(read_file(std::string(N2M_SOURCE_DIR) + "/scenarios/builtin.ini"), std::string(kBuiltinScenarios));
}

TEST(Scenario, BuiltinsCoverTheDocumentedScenarios) {
    const auto all = builtin_scenarios();
    for (const char* name : {"onebit", "tokens", "appendixC", "drift", "bounded", "collapse", "bursts", "crossing",
                             "gamma_star", "swarm_sync", "swarm_async", "swarm_relayed", "audit_length", "audit_cg",
                             "audit_fisher", "conjecture_log", "conjecture_flat"})
        EXPECT_NO_THROW(find_scenario(all, name)) << name;
    expect_error([&] { find_scenario(all, "nope"); }, ErrorCode::ValidationError);
}
