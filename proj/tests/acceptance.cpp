// Acceptance gate: one line per criterion, exit status 1 if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "n2m/audit.hpp"
#include "n2m/builtin.hpp"
#include "n2m/runner.hpp"
#include "n2m/swarm.hpp"
#include "n2m/verify.hpp"

using namespace n2m;
namespace fs = std::filesystem;

namespace {

// pinned tolerances
constexpr double kSigmas = 5.0;
constexpr double kGammaStarWindow = 2.5;
constexpr double kSpectralTol = 1e-9;
constexpr double kSlopeTol = 0.1;
constexpr double kDriftRuntimeLimit = 1.0;  // seconds

struct Outcome {
    bool ok = false;
    std::string detail;
};

std::string fmt(const char* f, double a = 0, double b = 0, double c = 0, double d = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

Scenario builtin(const std::string& name) { return find_scenario(builtin_scenarios(), name); }

RunConfig seeded(const Scenario& s, std::uint64_t seed) {
    RunConfig cfg = s.run;
    cfg.channel.seed = seed;
    return cfg;
}

Outcome drift_exactness() {
    const auto s = builtin("drift");
    const auto& cfg = s.run;
    if (cfg.update.delta != 0.5 || cfg.gamma != 10 || cfg.initial.norm != 11 || cfg.horizon != 10000)
        return {false, "builtin drift scenario does not match delta 0.5, Gamma 10, ||C(0)|| 11, 1e4 steps"};
    const auto start = std::chrono::steady_clock::now();
    const auto traj = run(seeded(s, s.seed));
    const auto r = verify_drift(traj, cfg.update.linear_gain(), cfg.gamma);
    std::size_t violations = 0;
    double worst = INFINITY;
    for (std::size_t k = 0; k <= cfg.horizon; ++k) {
        const double margin = traj.norm_at(k) - (traj.norm_at(0) + static_cast<double>(k) * 0.5 * 10.0);
        worst = std::min(worst, margin);
        violations += margin < 0;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {violations == 0 && r.passed && secs < kDriftRuntimeLimit,
            fmt("%.0f violations over k <= 1e4, min margin %.6g, %.3f s", static_cast<double>(violations), worst, secs)};
}

Outcome boundedness() {
    const auto s = builtin("bounded");
    if (s.run.initial.norm != 5 || s.run.gamma != 10 || s.run.horizon != 100000)
        return {false, "builtin bounded scenario does not match ||C(0)|| 5, Gamma 10, 1e5 steps"};
    std::size_t bad = 0;
    double top = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto r = verify_bounded(run(seeded(s, seed)), s.run.gamma);
        bad += r.lyapunov_nonzero;
        top = std::max(top, r.max_norm);
    }
    return {bad == 0, fmt("100 seeds x 1e5 steps, %.0f steps above Gamma, max norm %.6g", static_cast<double>(bad), top)};
}

Outcome tightness() {
    const auto s = builtin("gamma_star");
    const auto& g = s.gamma_star;
    const double truth = s.run.channel.gate_threshold;
    if (truth != 50 || g.lo != 1 || g.hi != 100 || g.iterations != 20)
        return {false, "builtin gamma_star scenario does not match Gamma_true 50, [1,100], 20 iterations"};
    std::size_t hits = 0;
    double worst = 0;
    for (std::uint64_t r = 0; r < 10; ++r) {
        const auto e = estimate_gamma_star(seeded(s, s.seed + r), g.lo, g.hi, g.iterations, g.mc_samples, s.seed + r);
        const double err = std::abs(e.estimate - truth);
        worst = std::max(worst, err);
        hits += err <= kGammaStarWindow;
    }
    return {hits == 10, fmt("%.0f/10 estimates within 2.5 of 50, worst error %.3g", static_cast<double>(hits), worst)};
}

Outcome fixed_point_dichotomy() {
    const auto greedy = builtin("fixed_point_greedy");
    const auto sampled = builtin("fixed_point_sampled");
    std::size_t settled = 0, free = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto fp = detect_fixed_point(run(seeded(greedy, seed)));
        settled += fp && *fp <= 2;
        free += !detect_fixed_point(run(seeded(sampled, seed))).has_value();
    }
    return {settled == 100 && free == 100 && sampled.run.horizon >= 10000,
            fmt("deterministic: %.0f/100 fixed by step 2; stochastic: %.0f/100 without fixed point over %.0f steps",
                static_cast<double>(settled), static_cast<double>(free), static_cast<double>(sampled.run.horizon))};
}

Outcome masked_drift() {
    const auto s = builtin("masked_drift");
    std::string detail;
    bool ok = true;
    for (double eps : {0.1, 0.5}) {
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            RunConfig cfg = seeded(s, seed);
            cfg.channel.mask_rate = EpsilonSchedule::constant(eps);
            const auto traj = run(cfg);
            const auto t0 = first_crossing(traj, cfg.gamma);
            if (!t0) return {false, "no crossing"};
            double sum = 0;
            std::size_t n = 0;
            for (std::size_t t = *t0; t < traj.records.size(); ++t, ++n) sum += traj.records[t].delta;
            const double mean = sum / static_cast<double>(n);
            const double unit = cfg.update.linear_gain() * cfg.channel.gain_hi;  // increment of an unmasked step
            const double bound = cfg.update.linear_gain() * (1 - eps) * cfg.gamma;
            const double sigma = unit * std::sqrt(eps * (1 - eps) / static_cast<double>(n));
            const bool pass = mean >= bound - kSigmas * sigma;
            ok = ok && pass;
            if (seed == 0 || !pass)
                detail += fmt("eps %.1f: mean %.4f vs %.4f - 5 x %.4f; ", eps, mean, bound, sigma);
        }
    }
    return {ok, detail + "10 seeds each"};
}

Outcome collapse() {
    const auto s = builtin("collapse");
    Meaning top;
    top.symbols.assign(s.run.channel.gain_hi, 1);
    const auto es = epsilon_star(s.run.update.delta, s.run.gamma, evaluate(s.run.measure, top));
    const double eps = s.run.channel.mask_rate.eps0;
    std::size_t bad = 0;
    double top_norm = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto r = verify_bounded(run(seeded(s, seed)), s.run.gamma);
        bad += r.lyapunov_nonzero;
        top_norm = std::max(top_norm, r.max_norm);
    }
    const bool ok = std::abs(es.value - 0.9) < 1e-12 && eps == 0.95 && s.run.horizon == 100000 && bad == 0;
    return {ok, fmt("eps* %.6g, eps %.6g, 100 seeds x 1e5 steps, max norm %.6g <= %.6g", es.value, eps, top_norm,
                    s.run.gamma)};
}

Outcome window_bursts() {
    const auto s = builtin("bursts");
    const auto traj = run(seeded(s, s.seed));
    const auto r = burst_stats(traj, s.run.update.window);
    const double w = static_cast<double>(s.run.update.window);
    const double retained = static_cast<double>(s.run.update.retain);
    const auto bound = static_cast<std::size_t>(std::ceil((w - retained) / (s.run.update.delta * s.run.gamma)));
    std::size_t over = 0;
    for (std::size_t i = 1; i < r.burst_steps.size(); ++i) over += r.burst_steps[i] - r.burst_steps[i - 1] > bound;
    const bool ok = s.run.horizon == 100000 && w == 100 && r.bursts >= 100 && r.max_norm == w && over == 0;
    return {ok, fmt("%.0f bursts, max norm %.6g, max gap %.0f <= %.0f", static_cast<double>(r.bursts), r.max_norm,
                    static_cast<double>(r.max_gap), static_cast<double>(bound))};
}

Outcome finite_time_bound() {
    const auto s = builtin("crossing");
    const std::uint64_t formula = divergence_time_bound(5, 12, 100, 1, 0, 10);
    std::size_t bad = 0, latest = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto traj = run(seeded(s, seed));
        const auto c = check_crossing_bound(traj, *s.crossing_target, s.run.update.delta, 0, s.run.gamma);
        const bool ok = c.t_star == 5 && c.norm_at_star == 12 && c.bound == 14 && c.observed && *c.observed <= c.bound;
        bad += !ok;
        if (c.observed) latest = std::max(latest, *c.observed);
    }
    return {formula == 14 && bad == 0, fmt("bound %.0f, latest observed crossing of B = 100 at t = %.0f, %.0f/100 violations",
                                           static_cast<double>(formula), static_cast<double>(latest),
                                           static_cast<double>(bad))};
}

Outcome swarm_equality() {
    auto sync = builtin("swarm_sync").swarm;
    const auto st = run_swarm(sync, 10000, 1);
    std::size_t off = 0;
    for (std::size_t t = 0; t < 10000; ++t) {
        off += st.collective[t].sum_delta != 24.0;
        for (const auto& a : st.agents) off += a.records[t].delta != 12.0;
    }
    const auto async = builtin("swarm_async").swarm;
    const auto at = run_swarm(async, 10000, 1);
    const double n = 10000;
    double coll_mean = 0;
    for (const auto& c : at.collective) coll_mean += c.sum_delta / n;
    bool within = true;
    std::string means;
    for (const auto& a : at.agents) {
        double m = 0;
        for (const auto& r : a.records) m += r.delta / n;
        // Delta_i = 12 Bernoulli(0.5)
        within = within && std::abs(m - 6.0) <= kSigmas * 12.0 * 0.5 / std::sqrt(n);
        means += fmt("%.4f ", m);
    }
    // collective = 12 (B_1 + B_2), independent activity
    within = within && std::abs(coll_mean - 12.0) <= kSigmas * std::sqrt(144.0 * 0.5 / n);
    return {off == 0 && within && async.lambda[0] == 0.5,
            fmt("sync: %.0f steps off 12/24; async means ", static_cast<double>(off)) + means + fmt("collective %.4f", coll_mean)};
}

Outcome spectral() {
    const double a = spectral_radius({{0, 1.5}, {1.5, 0}});
    const double b = spectral_radius({{0, 0.6, 0.6}, {0.6, 0, 0.6}, {0.6, 0.6, 0}});
    const auto s = builtin("swarm_relayed");
    std::size_t flagged = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed)
        flagged += predict_and_verify_divergence(s.swarm, s.swarm.agent.horizon, seed).flagged_divergent;
    const bool ok = std::abs(a - 1.5) <= kSpectralTol && std::abs(b - 1.2) <= kSpectralTol && flagged == 100;
    return {ok, fmt("rho %.12g and %.12g, rho > 1 flagged divergent in %.0f/100 seeds", a, b, static_cast<double>(flagged))};
}

Outcome cost_slopes() {
    const auto full = builtin("drift");
    const auto low = builtin("drift_low_rank");
    const double sf = cumulative_compute(run(seeded(full, full.seed)), full.run.cost, 100, 10000).loglog.slope;
    const double sl = cumulative_compute(run(seeded(low, low.seed)), low.run.cost, 100, 10000).loglog.slope;
    const bool ok = full.run.cost.variant == CostVariant::Full && low.run.cost.variant == CostVariant::LowRank &&
                    std::abs(sf - 2.0) <= kSlopeTol && std::abs(sl - 1.0) <= kSlopeTol;
    return {ok, fmt("FULL slope %.4f, LOW_RANK slope %.4f", sf, sl)};
}

Outcome measure_audits() {
    const auto len = audit_measure(MeasureSpec::length(), uniform_sampler(16), 10000, 1);
    const auto cg = audit_measure(MeasureSpec::compression_gain(), uniform_sampler(16), 10000, 1);
    const auto floor = compression_floor_counterexamples(8);
    const bool zero_found = !floor.empty() && floor.front().str() == "0" && omega_cg(floor.front()) == 0.0;
    const auto fisher = audit_measure(MeasureSpec::fisher(0.5), uniform_sampler(16), 2000, 1);
    const std::string pair[2] = {"1", "0"};
    const bool fisher_found = fisher.has_counterexample(Axiom::O2, pair);
    const std::size_t len_bad = len.o1_violations + len.o2_violations + len.o3_violations;
    const bool ok = len_bad == 0 && cg.o1_violations == 0 && zero_found && fisher_found;
    return {ok, fmt("length: %.0f violations; cg O1: %.0f; ", static_cast<double>(len_bad),
                    static_cast<double>(cg.o1_violations)) +
                    (zero_found ? "\"0\" -> 0 detected; " : "\"0\" missing; ") +
                    (fisher_found ? "Fisher \"1\"||\"0\" detected" : "Fisher counterexample missing")};
}

// The prototype listing line by line; randint(0, 1) reads the shared bit stream.
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

Outcome prototype_oracle() {
    std::size_t equal = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed)
        equal += run_appendix_c(PrototypeMode::Verbatim, 200, 10, seed) == listing(200, 10, seed);
    return {equal == 100, fmt("T = 200: %.0f/100 seeds sequence-equal", static_cast<double>(equal))};
}

std::size_t compare_trees(const fs::path& a, const fs::path& b, std::size_t& files) {
    std::size_t diffs = 0;
    for (const auto& e : fs::recursive_directory_iterator(a)) {
        if (!e.is_regular_file()) continue;
        ++files;
        const fs::path other = b / fs::relative(e.path(), a);
        diffs += !fs::exists(other) || read_file(e.path()) != read_file(other);
    }
    return diffs;
}

Outcome reproducibility() {
    const fs::path root = fs::temp_directory_path() / "n2m_acceptance_repro";
    fs::remove_all(root);
    std::size_t csv_diffs = 0, csvs = 0;
    // every builtin: the CSV of its first seed, in memory, twice
    for (const auto& s : builtin_scenarios()) {
        for (const auto& p : expand(s)) {
            const auto& ps = p.scenario;
            if (s.kind == ScenarioKind::Single) {
                csv_diffs += trajectory_csv(run(seeded(ps, ps.seed))) != trajectory_csv(run(seeded(ps, ps.seed)));
                ++csvs;
            } else if (s.kind == ScenarioKind::Swarm) {
                const auto x = run_swarm(ps.swarm, ps.swarm.agent.horizon, ps.seed);
                const auto y = run_swarm(ps.swarm, ps.swarm.agent.horizon, ps.seed);
                csv_diffs += collective_csv(x) != collective_csv(y);
                for (std::size_t i = 0; i < x.agents.size(); ++i)
                    csv_diffs += trajectory_csv(x.agents[i]) != trajectory_csv(y.agents[i]);
                csvs += 1 + x.agents.size();
            }
        }
    }
    // every builtin through the runner twice, serial then threaded: all artifacts byte-identical
    for (const auto& s : builtin_scenarios()) {
        run_scenario(s, {root / "a", 1, true});
        run_scenario(s, {root / "b", 2, true});
    }
    std::size_t files = 0;
    const std::size_t file_diffs = compare_trees(root / "a", root / "b", files);
    fs::remove_all(root);
    return {csv_diffs == 0 && file_diffs == 0 && files > 0,
            fmt("%.0f/%.0f in-memory CSVs identical, %.0f/%.0f artifact files identical",
                static_cast<double>(csvs - csv_diffs), static_cast<double>(csvs), static_cast<double>(files - file_diffs),
                static_cast<double>(files))};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"drift exactness", drift_exactness},
        {"boundedness", boundedness},
        {"threshold tightness", tightness},
        {"fixed-point dichotomy", fixed_point_dichotomy},
        {"masked drift", masked_drift},
        {"collapse threshold", collapse},
        {"window bursts", window_bursts},
        {"finite-time bound", finite_time_bound},
        {"swarm equality", swarm_equality},
        {"spectral radius", spectral},
        {"cost slopes", cost_slopes},
        {"measure audits", measure_audits},
        {"prototype oracle", prototype_oracle},
        {"reproducibility", reproducibility},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.ok;
        std::printf("criterion %2zu %s %s: %s\n", i + 1, o.ok ? "PASS" : "FAIL", criteria[i].first, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
