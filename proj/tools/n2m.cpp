// n2m: batch runner for the self-refinement loop simulator.
//
//   n2m run <config|builtin> [--scenario NAME] [--out DIR] [--jobs N]
//   n2m audit <measure> [--samples N] [--seed S] [--max-len L]
//   n2m gamma-star <config|builtin> [--scenario NAME]
//   n2m conjecture <config|builtin> [--scenario NAME] [--out DIR] [--jobs N]
//   n2m report <dir>
//
// Exit codes: 0 all hard checks passed, 1 a hard check failed, 2 usage or parse error.

#include <cstdio>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "n2m/builtin.hpp"
#include "n2m/runner.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

std::vector<n2m::Scenario> load(const std::string& config) {
    if (config == "builtin") return n2m::builtin_scenarios();
    return n2m::parse_scenarios(config);
}

std::vector<n2m::Scenario> select(const std::vector<n2m::Scenario>& all, const std::string& name,
                                  std::initializer_list<n2m::ScenarioKind> kinds) {
    if (!name.empty()) return {n2m::find_scenario(all, name)};
    std::vector<n2m::Scenario> out;
    for (const auto& s : all)
        for (auto k : kinds)
            if (s.kind == k) out.push_back(s);
    n2m::require(!out.empty(), n2m::ErrorCode::ValidationError, "no matching scenarios in the config");
    return out;
}

int run_all(const std::vector<n2m::Scenario>& scenarios, const n2m::RunOptions& opt) {
    std::vector<nlohmann::json> summaries;
    for (const auto& s : scenarios) {
        std::fprintf(stderr, "running %s\n", s.name.c_str());
        summaries.push_back(n2m::run_scenario(s, opt).json);
    }
    const auto rep = n2m::build_report(summaries);
    n2m::write_file_atomic(opt.out_dir / "report.json", rep.json.dump(2) + "\n");
    std::cout << n2m::format_report_table(rep);
    return rep.passed() ? kExitPass : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulator and checker for self-generated context growth loops"};
    app.require_subcommand(1);

    std::string config, scenario, out_dir = "out", measure, report_dir;
    std::size_t jobs = std::max(1U, std::thread::hardware_concurrency());
    std::size_t samples = 10000, max_len = 16;
    std::uint64_t seed = 1;

    auto* run = app.add_subcommand("run", "Run scenarios and write CSV/JSON/SVG artifacts");
    run->add_option("config", config, "Scenario file, or 'builtin'")->required();
    run->add_option("--scenario", scenario, "Run only this scenario");
    run->add_option("--out", out_dir, "Output directory")->capture_default_str();
    run->add_option("--jobs", jobs, "Parallel jobs")->check(CLI::PositiveNumber)->capture_default_str();

    auto* audit = app.add_subcommand("audit", "Audit a measure against the axioms");
    audit->add_option("measure", measure, "length | cg | power(e) | skl(s) | fisher(t) | combo(a,m,b,m) | floor(m)")
        ->required();
    audit->add_option("--samples", samples, "Random samples")->check(CLI::PositiveNumber)->capture_default_str();
    audit->add_option("--seed", seed, "Sampler seed")->capture_default_str();
    audit->add_option("--max-len", max_len, "Longest sampled meaning")->check(CLI::PositiveNumber)->capture_default_str();

    auto* gstar = app.add_subcommand("gamma-star", "Estimate the critical threshold by bisection");
    gstar->add_option("config", config, "Scenario file, or 'builtin'")->required();
    gstar->add_option("--scenario", scenario, "Use only this scenario");

    auto* conj = app.add_subcommand("conjecture", "Fit threshold-crossing time against log budget");
    conj->add_option("config", config, "Scenario file, or 'builtin'")->required();
    conj->add_option("--scenario", scenario, "Use only this scenario");
    conj->add_option("--out", out_dir, "Output directory")->capture_default_str();
    conj->add_option("--jobs", jobs, "Parallel jobs")->check(CLI::PositiveNumber)->capture_default_str();

    auto* report = app.add_subcommand("report", "Consolidate summary.json files into one verdict table");
    report->add_option("dir", report_dir, "Directory holding scenario outputs")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitPass : kExitUsage;
    }

    try {
        n2m::RunOptions opt;
        opt.out_dir = out_dir;
        opt.jobs = jobs;
        if (*run) {
            auto all = load(config);
            if (!scenario.empty()) all = {n2m::find_scenario(all, scenario)};
            return run_all(all, opt);
        }
        if (*audit) {
            const auto spec = n2m::parse_measure(measure);
            const auto rep = n2m::audit_measure(spec, n2m::uniform_sampler(max_len), samples, seed);
            nlohmann::json out = n2m::to_json(rep);
            out["measure"] = n2m::format_measure(spec);
            const auto floor = spec.kind == n2m::MeasureKind::CompressionGain
                                   ? n2m::compression_floor_counterexamples(8)
                                   : std::vector<n2m::Meaning>{};
            if (!floor.empty()) out["compression_floor_counterexamples"] = floor.size();
            std::cout << out.dump(2) << "\n";
            return kExitPass;
        }
        if (*gstar) {
            const auto chosen = select(load(config), scenario, {n2m::ScenarioKind::GammaStar});
            bool ok = true;
            for (const auto& s : chosen) {
                n2m::require(s.kind == n2m::ScenarioKind::GammaStar, n2m::ErrorCode::ValidationError,
                             "scenario '" + s.name + "' is not of kind gamma_star");
                n2m::RunOptions quiet = opt;
                quiet.write = false;
                const auto summary = n2m::run_scenario(s, quiet);
                for (const auto& r : summary.json["runs"])
                    std::printf("%s seed %llu: estimate %.9g (resolution %.3g)\n", s.name.c_str(),
                                static_cast<unsigned long long>(r["seed"].get<std::uint64_t>()),
                                r.value("estimate", 0.0), r.value("resolution", 0.0));
                ok = ok && summary.passed();
            }
            return ok ? kExitPass : kExitFail;
        }
        if (*conj) {
            const auto chosen = select(load(config), scenario, {n2m::ScenarioKind::Conjecture});
            for (const auto& s : chosen)
                n2m::require(s.kind == n2m::ScenarioKind::Conjecture, n2m::ErrorCode::ValidationError,
                             "scenario '" + s.name + "' is not of kind conjecture");
            const int rc = run_all(chosen, opt);
            return rc;
        }
        if (*report) {
            const auto rep = n2m::build_report(n2m::load_summaries(report_dir));
            n2m::write_file_atomic(std::filesystem::path(report_dir) / "report.json", rep.json.dump(2) + "\n");
            std::cout << n2m::format_report_table(rep);
            return rep.passed() ? kExitPass : kExitFail;
        }
    } catch (const n2m::Error& e) {
        std::cerr << "n2m: " << e.what() << "\n";
        switch (e.code()) {
        case n2m::ErrorCode::ParseError:
        case n2m::ErrorCode::ValidationError:
        case n2m::ErrorCode::IoError: return kExitUsage;
        default: return kExitFail;
        }
    }
    return kExitUsage;
}
