#pragma once

// Batch execution of scenarios: runs, verdicts, artifacts, conjecture fits and
// the consolidated report.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "n2m/audit.hpp"
#include "n2m/export.hpp"
#include "n2m/scenario.hpp"
#include "n2m/swarm.hpp"
#include "n2m/verify.hpp"

namespace n2m {

enum class VerdictStatus { Pass, Fail, Documented, Info };

constexpr std::string_view to_string(VerdictStatus s) {
    switch (s) {
    case VerdictStatus::Pass: return "PASS";
    case VerdictStatus::Fail: return "FAIL";
    case VerdictStatus::Documented: return "COUNTEREXAMPLE FOUND (documented)";
    case VerdictStatus::Info: return "INFO";
    }
    return "?";
}

inline VerdictStatus verdict_status_from(const std::string& s) {
    for (auto v : {VerdictStatus::Pass, VerdictStatus::Fail, VerdictStatus::Documented, VerdictStatus::Info})
        if (s == to_string(v)) return v;
    throw Error(ErrorCode::ParseError, "unknown verdict status '" + s + "'");
}

struct Verdict {
    std::string check;
    VerdictStatus status = VerdictStatus::Pass;
    double margin = 0.0;  // distance to the failure boundary, >= 0 when passing
    std::string detail;

    bool failed() const noexcept { return status == VerdictStatus::Fail; }
};

inline nlohmann::json to_json(const Verdict& v) {
    return {{"check", v.check},
            {"status", std::string(to_string(v.status))},
            {"margin", std::isfinite(v.margin) ? nlohmann::json(v.margin) : nlohmann::json()},
            {"detail", v.detail}};
}

struct ScenarioSummary {
    std::string name;
    std::vector<Verdict> verdicts;
    nlohmann::json json;

    bool passed() const {
        return std::none_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.failed(); });
    }
};

namespace detail {

inline Verdict pass_fail(const std::string& check, bool ok, double margin, std::string detail) {
    return {check, ok ? VerdictStatus::Pass : VerdictStatus::Fail, margin, std::move(detail)};
}

inline std::string fmt(const char* f, double a, double b = 0, double c = 0) {
    char buf[200];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

/// Windows of `window` steps after the first crossing: mean drift >= delta (1 - eps0 - kappa) Gamma - sigmas SE.
inline Verdict schedule_drift_verdict(const Trajectory& traj, std::size_t window = 1000, double sigmas = 5.0) {
    const auto& cfg = traj.config;
    const auto t0 = first_crossing(traj, cfg.gamma);
    if (!t0) return pass_fail("schedule_drift", false, -INFINITY, "Gamma never crossed");
    const auto& sch = cfg.channel.mask_rate;
    const double bound = cfg.update.linear_gain() * (1.0 - sch.eps0 - sch.kappa) * cfg.gamma;
    double worst = INFINITY;
    std::size_t windows = 0;
    for (std::size_t start = *t0; start + window <= traj.records.size(); start += window) {
        double sum = 0, sq = 0;
        for (std::size_t t = start; t < start + window; ++t) {
            sum += traj.records[t].delta;
            sq += traj.records[t].delta * traj.records[t].delta;
        }
        const double n = static_cast<double>(window);
        const double mean = sum / n;
        const double se = std::sqrt(std::max(0.0, (sq - n * mean * mean) / (n - 1)) / n);
        worst = std::min(worst, mean - (bound - sigmas * se));
        ++windows;
    }
    if (windows == 0) return pass_fail("schedule_drift", false, -INFINITY, "no complete window after crossing");
    return pass_fail("schedule_drift", worst >= 0 && traj.final_norm > cfg.gamma, worst,
                     std::to_string(windows) + " windows, bound " + fmt("%.6g", bound));
}

inline double expected_cost_slope(CostVariant v) { return v == CostVariant::Full ? 2.0 : 1.0; }

inline std::vector<Verdict> single_verdicts(const Scenario& s, const Trajectory& traj, nlohmann::json& run) {
    std::vector<Verdict> out;
    const auto& cfg = traj.config;
    const double gain = cfg.update.linear_gain();
    for (const auto& check : s.checks) {
        try {
            if (check == "drift") {
                const auto r = verify_drift(traj, gain, cfg.gamma);
                run["drift"] = drift_json(r);
                const double margin = r.masked_steps ? r.mean_drift - (r.drift_bound - 5 * r.standard_error)
                                                     : r.min_step_margin;
                out.push_back(pass_fail(check, r.passed, margin,
                                        fmt("mean drift %.6g vs bound %.6g", r.mean_drift, r.drift_bound)));
            } else if (check == "bounded") {
                const auto r = verify_bounded(traj, cfg.gamma);
                run["max_norm"] = r.max_norm;
                out.push_back(pass_fail(check, r.passed, cfg.gamma - r.max_norm, fmt("max norm %.6g", r.max_norm)));
            } else if (check == "fixed_point" || check == "no_fixed_point" || check == "fixed_point_dichotomy") {
                const auto fp = detect_fixed_point(traj);
                run["fixed_point"] = fp ? nlohmann::json(*fp) : nlohmann::json();
                bool want_fp = check == "fixed_point";
                if (check == "fixed_point_dichotomy") want_fp = cfg.channel.deterministic();
                const bool ok = want_fp ? (fp && *fp <= 2) : !fp;
                out.push_back(pass_fail(check, ok, 0.0,
                                        fp ? "fixed point from t = " + std::to_string(*fp) : "no persistent fixed point"));
            } else if (check == "classify") {
                const auto c = classify_run(traj);
                run["classification"] = std::string(to_string(c.kind));
                const RunClass want = cfg.channel.deterministic() ? RunClass::Converged : RunClass::Divergent;
                bool ok = c.kind == want;
                if (want == RunClass::Converged) ok = ok && c.fixed_point && *c.fixed_point <= 2;
                out.push_back(pass_fail(check, ok, 0.0, std::string(to_string(c.kind))));
            } else if (check == "bursts") {
                const auto r = burst_stats(traj, cfg.update.window);
                run["bursts"] = {{"count", r.bursts}, {"max_norm", r.max_norm}, {"max_gap", r.max_gap},
                                 {"mean_gap", r.mean_gap}, {"gap_bound", r.gap_bound}};
                const bool ok = r.passed && r.bursts > 0 && r.max_norm == static_cast<double>(cfg.update.window);
                out.push_back(pass_fail(check, ok, static_cast<double>(r.gap_bound) - static_cast<double>(r.max_gap),
                                        std::to_string(r.bursts) + " bursts, max gap " + std::to_string(r.max_gap) +
                                            " <= " + std::to_string(r.gap_bound)));
            } else if (check == "crossing") {
                const auto r = check_crossing_bound(traj, *s.crossing_target, gain, cfg.channel.mask_rate.eps0, cfg.gamma);
                run["crossing"] = {{"t_star", r.t_star}, {"norm_at_star", r.norm_at_star}, {"bound", r.bound},
                                   {"observed", r.observed ? nlohmann::json(*r.observed) : nlohmann::json()}};
                const double margin = r.observed ? static_cast<double>(r.bound) - static_cast<double>(*r.observed) : 0.0;
                out.push_back(pass_fail(check, r.passed, margin,
                                        "observed " + (r.observed ? std::to_string(*r.observed) : std::string("none")) +
                                            ", bound " + std::to_string(r.bound)));
            } else if (check == "collapse") {
                require(cfg.channel.psi == PsiKind::Gated, ErrorCode::PreconditionViolated,
                        "collapse check needs a gated channel");
                Meaning top;
                top.alphabet = cfg.channel.alphabet;
                top.symbols.assign(cfg.channel.gain_hi, 1);
                const double sup = evaluate(cfg.measure, top);
                const auto es = epsilon_star(gain, cfg.gamma, sup);
                const double eps = cfg.channel.mask_rate.eps0;
                const auto b = verify_bounded(traj, cfg.gamma);
                run["epsilon_star"] = es.value;
                run["max_norm"] = b.max_norm;
                out.push_back(pass_fail(check, eps > es.value && b.passed, cfg.gamma - b.max_norm,
                                        fmt("eps %.6g > eps* %.6g, max norm %.6g", eps, es.value, b.max_norm)));
            } else if (check == "schedule_drift") {
                out.push_back(schedule_drift_verdict(traj));
            } else if (check == "cost_slope") {
                const auto p = cumulative_compute(traj, cfg.cost);
                const double want = expected_cost_slope(cfg.cost.variant);
                run["cost"] = {{"slope", p.loglog.slope}, {"growth", std::string(to_string(p.growth))},
                               {"cumulative_flops", p.cumulative.empty() ? 0.0 : p.cumulative.back()}};
                out.push_back(pass_fail(check, std::abs(p.loglog.slope - want) <= 0.1,
                                        0.1 - std::abs(p.loglog.slope - want),
                                        fmt("slope %.4f, expected %.1f", p.loglog.slope, want)));
            }
        } catch (const Error& e) {
            out.push_back(pass_fail(check, false, -INFINITY, e.what()));
        }
    }
    return out;
}

inline std::vector<Verdict> swarm_verdicts(const Scenario& s, const SwarmSpec& spec, const SwarmTrajectory& traj,
                                           nlohmann::json& run) {
    std::vector<Verdict> out;
    for (const auto& check : s.checks) {
        try {
            if (check == "collective_gain") {
                const auto g = check_collective_gain(traj, spec);
                run["gain"] = swarm_json(traj, g);
                double margin = g.collective.observed - g.collective.bound;
                std::string detail = fmt("collective mean %.6g vs bound %.6g", g.collective.observed, g.collective.bound);
                if (!g.uniform) {
                    for (std::size_t i = 0; i < g.per_agent.size(); ++i)
                        if (!g.per_agent[i].passed)
                            detail += "; agent " + std::to_string(i + 1) + " below the averaged per-agent bound (reported)";
                }
                out.push_back(pass_fail(check, g.passed, margin, detail));
            } else if (check == "swarm_equality") {
                const double k = static_cast<double>(spec.k);
                const double want = (1.0 + spec.beta[0][1]) * k * spec.base_gain * spec.agent.update.linear_gain();
                std::size_t bad = 0;
                for (std::size_t t = 0; t < traj.collective.size(); ++t) {
                    for (const auto& a : traj.agents)
                        if (a.records[t].delta != want) ++bad;
                    if (traj.collective[t].sum_delta != k * want) ++bad;
                }
                const bool ok = spec.uniform_beta() && spec.schedule == Schedule::Synchronous && bad == 0;
                out.push_back(pass_fail(check, ok, 0.0,
                                        fmt("per-agent %.6g, collective %.6g", want, k * want) + ", " +
                                            std::to_string(bad) + " mismatches"));
            } else if (check == "threshold_rescaling") {
                const auto tk = swarm_crossing(traj);
                const auto ts = first_crossing(traj.solo, spec.agent.gamma);
                const bool ok = tk && (!ts || *tk <= *ts);
                run["swarm_crossing"] = tk ? nlohmann::json(*tk) : nlohmann::json();
                run["solo_crossing"] = ts ? nlohmann::json(*ts) : nlohmann::json();
                const double margin = tk && ts ? static_cast<double>(*ts) - static_cast<double>(*tk) : 0.0;
                out.push_back(pass_fail(check, ok, margin,
                                        "swarm " + (tk ? std::to_string(*tk) : std::string("none")) + ", solo " +
                                            (ts ? std::to_string(*ts) : std::string("none"))));
            } else if (check == "divergence") {
                const auto r = predict_and_verify_divergence(spec, traj.agents.front().records.size(), traj.seed);
                run["divergence"] = {{"rho", r.rho}, {"crossed", r.crossed}, {"slope", r.growth_slope},
                                     {"required_slope", r.required_slope}, {"flagged", r.flagged_divergent}};
                if (r.rho <= 1.0) {
                    out.push_back({check, VerdictStatus::Info, 0.0,
                                   fmt("rho %.6g <= 1: observed only, crossed = %g", r.rho, r.crossed ? 1.0 : 0.0)});
                } else {
                    out.push_back(pass_fail(check, r.flagged_divergent, r.growth_slope - (r.required_slope - r.tolerance),
                                            fmt("rho %.6g, slope %.6g vs log rho %.6g", r.rho, r.growth_slope,
                                                r.required_slope)));
                }
            }
        } catch (const Error& e) {
            out.push_back(pass_fail(check, false, -INFINITY, e.what()));
        }
    }
    return out;
}

/// Folds per-run verdicts into one verdict per check.
inline std::vector<Verdict> merge_verdicts(const std::vector<std::string>& checks,
                                           const std::vector<std::vector<Verdict>>& per_run) {
    std::vector<Verdict> out;
    for (const auto& check : checks) {
        Verdict v;
        v.check = check;
        v.margin = INFINITY;
        std::size_t runs = 0, failed = 0, documented = 0, info = 0;
        std::string first_fail, last_detail;
        for (const auto& run : per_run) {
            for (const auto& r : run) {
                if (r.check != check) continue;
                ++runs;
                v.margin = std::min(v.margin, r.margin);
                last_detail = r.detail;
                if (r.status == VerdictStatus::Fail) {
                    if (!failed) first_fail = r.detail;
                    ++failed;
                } else if (r.status == VerdictStatus::Documented) {
                    ++documented;
                } else if (r.status == VerdictStatus::Info) {
                    ++info;
                }
            }
        }
        if (failed) {
            v.status = VerdictStatus::Fail;
            v.detail = std::to_string(failed) + "/" + std::to_string(runs) + " runs failed; first: " + first_fail;
        } else if (documented) {
            v.status = VerdictStatus::Documented;
            v.detail = last_detail;
        } else if (info == runs && runs > 0) {
            v.status = VerdictStatus::Info;
            v.detail = last_detail;
        } else {
            v.status = VerdictStatus::Pass;
            v.detail = std::to_string(runs) + "/" + std::to_string(runs) + " runs; last: " + last_detail;
        }
        if (runs == 0) {
            v.status = VerdictStatus::Fail;
            v.detail = "check produced no result";
        }
        out.push_back(std::move(v));
    }
    return out;
}

inline std::string safe_name(const std::string& s) {
    std::string out;
    for (char c : s) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '=') ? c : '_';
    return out.empty() ? "_" : out;
}

/// Runs fn(i) for i in [0, n) on up to `jobs` threads; the first exception is rethrown.
template <class Fn>
void parallel_for(std::size_t n, std::size_t jobs, Fn&& fn) {
    jobs = std::max<std::size_t>(1, std::min(jobs, n));
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next = n;
            }
        }
    };
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (error) std::rethrow_exception(error);
}

inline std::uint64_t run_seed(const Scenario& s, std::size_t r) { return s.seed + r; }

/// -count as a margin, without printing "-0" for a clean audit.
inline double negated(std::size_t count) { return count == 0 ? 0.0 : -static_cast<double>(count); }

}  // namespace detail

// ---------------------------------------------------------------------------
// Conjecture experiment

struct ConjecturePoint {
    double budget = 0.0;
    double log_budget = 0.0;
    double mean_crossing = 0.0;
    std::size_t crossed = 0;
    std::size_t excluded = 0;  // NO_CROSSING runs
};

struct ConjectureFit {
    std::vector<ConjecturePoint> points;
    LineFit fit;
    std::size_t excluded = 0;
};

/// Mean first-crossing time per budget T and a least-squares fit of t* against log T.
inline ConjectureFit conjecture_experiment(const Scenario& s, std::size_t jobs = 1) {
    require(s.kind == ScenarioKind::Conjecture, ErrorCode::InvalidArgument, "not a conjecture scenario");
    std::vector<double> budgets = s.conjecture.budgets;
    std::sort(budgets.begin(), budgets.end());
    budgets.erase(std::unique(budgets.begin(), budgets.end()), budgets.end());
    require(budgets.size() >= 3, ErrorCode::InvalidArgument, "need >= 3 distinct budgets");
    const std::size_t n = budgets.size() * s.repeat;
    std::vector<std::optional<std::size_t>> crossings(n);
    detail::parallel_for(n, jobs, [&](std::size_t job) {
        const double T = budgets[job / s.repeat];
        const std::uint64_t seed = detail::run_seed(s, job % s.repeat);
        RunConfig cfg = s.run;
        if (s.conjecture.binding == BudgetBinding::Gamma) {
            cfg.gamma = T;
        } else {
            cfg.update.window = static_cast<std::size_t>(T);
        }
        if (s.conjecture.swarm_model) {
            SwarmSpec spec = s.swarm;
            spec.agent = cfg;
            crossings[job] = swarm_crossing(run_swarm(spec, cfg.horizon, seed));
        } else {
            cfg.channel.seed = seed;
            crossings[job] = first_crossing(run(cfg), cfg.gamma);
        }
    });
    ConjectureFit out;
    std::vector<double> xs, ys;
    for (std::size_t b = 0; b < budgets.size(); ++b) {
        ConjecturePoint p;
        p.budget = budgets[b];
        p.log_budget = std::log(budgets[b]);
        double sum = 0.0;
        for (std::size_t r = 0; r < s.repeat; ++r) {
            const auto& c = crossings[b * s.repeat + r];
            if (c) {
                sum += static_cast<double>(*c);
                ++p.crossed;
            } else {
                ++p.excluded;
            }
        }
        out.excluded += p.excluded;
        if (p.crossed) {
            p.mean_crossing = sum / static_cast<double>(p.crossed);
            xs.push_back(p.log_budget);
            ys.push_back(p.mean_crossing);
        }
        out.points.push_back(p);
    }
    if (xs.size() >= 2) out.fit = least_squares(xs, ys);
    return out;
}

inline nlohmann::json to_json(const ConjectureFit& f) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : f.points)
        pts.push_back({{"budget", p.budget}, {"log_budget", p.log_budget}, {"mean_crossing", p.mean_crossing},
                       {"crossed", p.crossed}, {"excluded", p.excluded}});
    return {{"points", pts},
            {"fit", {{"slope", f.fit.slope}, {"intercept", f.fit.intercept}, {"r_squared", f.fit.r_squared},
                     {"points", f.fit.points}}},
            {"excluded", f.excluded}};
}

// ---------------------------------------------------------------------------
// Scenario execution

struct RunOptions {
    std::filesystem::path out_dir = "out";
    std::size_t jobs = 1;
    bool write = true;
};

/// Executes every (sweep point x seed) job, writes artifacts, and returns the verdicts.
inline ScenarioSummary run_scenario(const Scenario& s, const RunOptions& opt = {}) {
    namespace fs = std::filesystem;
    const auto points = expand(s);
    const fs::path dir = opt.out_dir / detail::safe_name(s.name);
    ScenarioSummary summary;
    summary.name = s.name;
    nlohmann::json runs = nlohmann::json::array();
    std::vector<PlotSeries> series;
    std::vector<std::vector<Verdict>> per_run;

    auto path_for = [&](const SweepPoint& p, std::uint64_t seed, const std::string& suffix) {
        return dir / detail::safe_name(p.label) / ("seed_" + std::to_string(seed) + suffix);
    };

    const std::size_t n = points.size() * s.repeat;
    std::vector<nlohmann::json> run_json(n);
    std::vector<std::vector<Verdict>> run_verdicts(n);
    std::vector<PlotSeries> run_series(n);
    std::vector<std::string> extra_series_labels;

    if (s.kind == ScenarioKind::Single || s.kind == ScenarioKind::Swarm) {
        detail::parallel_for(n, opt.jobs, [&](std::size_t job) {
            const SweepPoint& p = points[job / s.repeat];
            const std::uint64_t seed = detail::run_seed(s, job % s.repeat);
            nlohmann::json run = {{"point", p.label}, {"seed", seed}};
            const Scenario& ps = p.scenario;
            if (s.kind == ScenarioKind::Single) {
                RunConfig cfg = ps.run;
                cfg.channel.seed = seed;
                const Trajectory traj = n2m::run(cfg);
                run["final_norm"] = traj.final_norm;
                const auto t0 = first_crossing(traj, cfg.gamma);
                run["first_crossing"] = t0 ? nlohmann::json(*t0) : nlohmann::json();
                run_verdicts[job] = detail::single_verdicts(ps, traj, run);
                if (opt.write && s.outputs.csv) {
                    const auto path = path_for(p, seed, ".csv");
                    write_file_atomic(path, trajectory_csv(traj));
                    run["csv"] = fs::relative(path, dir).string();
                }
                if (s.outputs.svg) run_series[job] = {p.label + " seed " + std::to_string(seed), traj.norms()};
            } else {
                const SwarmSpec& spec = ps.swarm;
                const SwarmTrajectory traj = run_swarm(spec, spec.agent.horizon, seed);
                nlohmann::json finals = nlohmann::json::array();
                for (const auto& a : traj.agents) finals.push_back(a.final_norm);
                run["final_norms"] = finals;
                run["delta_solo"] = traj.delta_solo;
                run_verdicts[job] = detail::swarm_verdicts(ps, spec, traj, run);
                if (opt.write && s.outputs.csv) {
                    for (std::size_t i = 0; i < traj.agents.size(); ++i)
                        write_file_atomic(path_for(p, seed, "_agent" + std::to_string(i + 1) + ".csv"),
                                          trajectory_csv(traj.agents[i]));
                    write_file_atomic(path_for(p, seed, "_collective.csv"), collective_csv(traj));
                }
                if (opt.write && s.outputs.json) {
                    DriftMatrix d = build_drift_matrix(spec);
                    spectral_radius(d);
                    write_file_atomic(path_for(p, seed, "_drift_matrix.json"), drift_matrix_json(d).dump(2) + "\n");
                }
                if (s.outputs.svg) {
                    // one line per run: the largest agent norm at each tick
                    std::vector<double> top(spec.agent.horizon + 1, 0.0);
                    for (const auto& a : traj.agents)
                        for (std::size_t t = 0; t <= spec.agent.horizon; ++t) top[t] = std::max(top[t], a.norm_at(t));
                    run_series[job] = {p.label + " seed " + std::to_string(seed), std::move(top)};
                }
            }
            run_json[job] = std::move(run);
        });
    } else if (s.kind == ScenarioKind::AppendixC) {
        detail::parallel_for(n, opt.jobs, [&](std::size_t job) {
            const SweepPoint& p = points[job / s.repeat];
            const std::uint64_t seed = detail::run_seed(s, job % s.repeat);
            const auto& ps = p.scenario;
            nlohmann::json run = {{"point", p.label}, {"seed", seed}};
            std::vector<long long> verbatim, cumulative;
            if (ps.appendix.verbatim) verbatim = run_appendix_c(PrototypeMode::Verbatim, ps.run.horizon, ps.run.gamma, seed);
            if (ps.appendix.cumulative)
                cumulative = run_appendix_c(PrototypeMode::Cumulative, ps.run.horizon, ps.run.gamma, seed);
            const bool binary = std::all_of(verbatim.begin(), verbatim.end(), [](long long c) { return c == 0 || c == 1; });
            const bool monotone = std::is_sorted(cumulative.begin(), cumulative.end());
            run["verbatim_final"] = verbatim.empty() ? nlohmann::json() : nlohmann::json(verbatim.back());
            run["cumulative_final"] = cumulative.empty() ? nlohmann::json() : nlohmann::json(cumulative.back());
            for (const auto& c : ps.checks)
                if (c == "prototype_shape")
                    run_verdicts[job].push_back(detail::pass_fail(
                        c, binary && monotone, 0.0,
                        std::string(binary ? "overwrite history in {0,1}" : "overwrite history left {0,1}") +
                            (monotone ? ", cumulative non-decreasing" : ", cumulative decreased")));
            if (opt.write && s.outputs.csv) {
                std::string csv = "t,verbatim,cumulative\n";
                for (std::size_t t = 0; t < ps.run.horizon; ++t) {
                    csv += std::to_string(t) + ',' + (verbatim.empty() ? "" : std::to_string(verbatim[t])) + ',' +
                           (cumulative.empty() ? "" : std::to_string(cumulative[t])) + '\n';
                }
                write_file_atomic(path_for(p, seed, ".csv"), csv);
            }
            if (s.outputs.svg) {
                std::vector<double> ys(cumulative.begin(), cumulative.end());
                if (ys.empty()) ys.assign(verbatim.begin(), verbatim.end());
                run_series[job] = {p.label + " seed " + std::to_string(seed), std::move(ys)};
            }
            run_json[job] = std::move(run);
        });
    } else if (s.kind == ScenarioKind::Audit) {
        detail::parallel_for(n, opt.jobs, [&](std::size_t job) {
            const SweepPoint& p = points[job / s.repeat];
            const std::uint64_t seed = detail::run_seed(s, job % s.repeat);
            const auto& ps = p.scenario;
            nlohmann::json run = {{"point", p.label}, {"seed", seed}, {"measure", format_measure(ps.run.measure)}};
            const AuditReport rep = audit_measure(ps.run.measure, uniform_sampler(ps.audit.max_len), ps.audit.samples, seed);
            run["audit"] = to_json(rep);
            for (const auto& c : ps.checks) {
                if (c == "axioms_clean") {
                    const auto v = rep.o1_violations + rep.o2_violations + rep.o3_violations;
                    run_verdicts[job].push_back(detail::pass_fail(c, v == 0, detail::negated(v),
                                                                  std::to_string(v) + " violations"));
                } else if (c == "o1_clean") {
                    run_verdicts[job].push_back(detail::pass_fail(c, rep.o1_violations == 0,
                                                                  detail::negated(rep.o1_violations),
                                                                  std::to_string(rep.o1_violations) + " violations"));
                } else if (c == "superadditivity_counterexample") {
                    const auto it = std::find_if(rep.counterexamples.begin(), rep.counterexamples.end(),
                                                 [](const Counterexample& x) { return x.axiom == Axiom::O2; });
                    if (it == rep.counterexamples.end()) {
                        run_verdicts[job].push_back(detail::pass_fail(c, false, 0.0, "no counterexample detected"));
                    } else {
                        std::string ins;
                        for (const auto& m : it->inputs) ins += (ins.empty() ? "" : ", ") + ("\"" + m.str() + "\"");
                        run_verdicts[job].push_back({c, VerdictStatus::Documented, 0.0, "O2 fails on (" + ins + ")"});
                    }
                } else if (c == "compression_floor") {
                    const auto cx = compression_floor_counterexamples(ps.audit.floor_len);
                    nlohmann::json arr = nlohmann::json::array();
                    for (const auto& m : cx) arr.push_back(m.str());
                    run["compression_floor"] = arr;
                    if (cx.empty())
                        run_verdicts[job].push_back(detail::pass_fail(c, false, 0.0, "no short string with zero gain"));
                    else
                        run_verdicts[job].push_back({c, VerdictStatus::Documented, 0.0,
                                                     std::to_string(cx.size()) + " non-empty strings with zero gain, first \"" +
                                                         cx.front().str() + "\""});
                }
            }
            run_json[job] = std::move(run);
        });
    } else if (s.kind == ScenarioKind::GammaStar) {
        detail::parallel_for(n, opt.jobs, [&](std::size_t job) {
            const SweepPoint& p = points[job / s.repeat];
            const std::uint64_t seed = detail::run_seed(s, job % s.repeat);
            const auto& ps = p.scenario;
            nlohmann::json run = {{"point", p.label}, {"seed", seed}};
            RunConfig cfg = ps.run;
            cfg.channel.seed = seed;
            try {
                const auto est = estimate_gamma_star(cfg, ps.gamma_star.lo, ps.gamma_star.hi, ps.gamma_star.iterations,
                                                     ps.gamma_star.mc_samples, seed);
                run["estimate"] = est.estimate;
                run["resolution"] = est.resolution;
                for (const auto& c : ps.checks) {
                    if (c != "gamma_star") continue;
                    const double err = std::abs(est.estimate - cfg.channel.gate_threshold);
                    run_verdicts[job].push_back(detail::pass_fail(
                        c, err <= est.resolution, est.resolution - err,
                        detail::fmt("estimate %.9g, gate %.9g, resolution %.3g", est.estimate, cfg.channel.gate_threshold,
                                    est.resolution)));
                }
            } catch (const Error& e) {
                run["error"] = e.what();
                for (const auto& c : ps.checks) run_verdicts[job].push_back(detail::pass_fail(c, false, -INFINITY, e.what()));
            }
            run_json[job] = std::move(run);
        });
    } else {
        const auto fit = conjecture_experiment(s, opt.jobs);
        run_json.assign(1, to_json(fit));
        summary.json["conjecture"] = to_json(fit);
        run_verdicts.assign(1, {});
        run_verdicts[0].push_back({"conjecture_fit", VerdictStatus::Info, 0.0,
                                   detail::fmt("slope %.6g, r^2 %.6g, excluded %g", fit.fit.slope, fit.fit.r_squared,
                                               static_cast<double>(fit.excluded))});
        if (s.outputs.svg) {
            std::vector<double> ys;
            for (const auto& p : fit.points) ys.push_back(p.mean_crossing);
            run_series.assign(1, {"mean crossing time per budget", ys});
        } else {
            run_series.clear();
        }
    }

    for (auto& r : run_json) runs.push_back(std::move(r));
    std::vector<std::string> checks = s.checks;
    if (s.kind == ScenarioKind::Conjecture) checks.push_back("conjecture_fit");
    summary.verdicts = detail::merge_verdicts(checks, run_verdicts);

    nlohmann::json verdicts = nlohmann::json::array();
    for (const auto& v : summary.verdicts) verdicts.push_back(to_json(v));
    summary.json["schema_version"] = kSchemaVersion;
    summary.json["scenario"] = s.name;
    summary.json["config"] = emit_scenario(s);
    summary.json["runs"] = runs;
    summary.json["verdicts"] = verdicts;
    summary.json["passed"] = summary.passed();

    if (opt.write) {
        // the summary is always written: the report reducer reads it
        write_file_atomic(dir / "summary.json", summary.json.dump(2) + "\n");
        if (s.outputs.svg) {
            for (auto& r : run_series)
                if (!r.values.empty()) series.push_back(std::move(r));
            const double level = s.kind == ScenarioKind::Conjecture ? 0.0 : s.run.gamma;
            write_file_atomic(dir / "plot.svg", svg_plot(series, level, s.name));
        }
    }
    return summary;
}

// ---------------------------------------------------------------------------
// Consolidated report

struct ReportRow {
    std::string scenario;
    Verdict verdict;
};

struct Report {
    std::vector<ReportRow> rows;
    nlohmann::json json;

    bool passed() const {
        return std::none_of(rows.begin(), rows.end(), [](const ReportRow& r) { return r.verdict.failed(); });
    }
};

inline Report build_report(const std::vector<nlohmann::json>& summaries) {
    require(!summaries.empty(), ErrorCode::InvalidArgument, "report needs at least one summary");
    Report rep;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& s : summaries) {
        for (const auto& v : s.at("verdicts")) {
            ReportRow row;
            row.scenario = s.at("scenario").get<std::string>();
            row.verdict.check = v.at("check").get<std::string>();
            row.verdict.status = verdict_status_from(v.at("status").get<std::string>());
            row.verdict.margin = v.at("margin").is_null() ? -INFINITY : v.at("margin").get<double>();
            row.verdict.detail = v.at("detail").get<std::string>();
            rows.push_back({{"scenario", row.scenario}, {"check", row.verdict.check}, {"status", v.at("status")},
                            {"margin", v.at("margin")}, {"detail", row.verdict.detail}});
            rep.rows.push_back(std::move(row));
        }
    }
    std::vector<std::string> failing;
    for (const auto& r : rep.rows)
        if (r.verdict.failed()) failing.push_back(r.scenario + "/" + r.verdict.check);
    rep.json = {{"schema_version", kSchemaVersion}, {"rows", rows}, {"failing", failing}, {"passed", rep.passed()}};
    return rep;
}

/// Loads every summary.json below `dir` (sorted by path).
inline std::vector<nlohmann::json> load_summaries(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    require(fs::is_directory(dir), ErrorCode::IoError, "not a directory: " + dir.string());
    std::vector<fs::path> paths;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file() && e.path().filename() == "summary.json") paths.push_back(e.path());
    std::sort(paths.begin(), paths.end());
    std::vector<nlohmann::json> out;
    for (const auto& p : paths) {
        try {
            out.push_back(nlohmann::json::parse(read_file(p)));
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::ParseError, p.string() + ": " + e.what());
        }
    }
    return out;
}

inline std::string format_report_table(const Report& rep) {
    std::size_t w1 = 8, w2 = 5, w3 = 6;
    for (const auto& r : rep.rows) {
        w1 = std::max(w1, r.scenario.size());
        w2 = std::max(w2, r.verdict.check.size());
        w3 = std::max(w3, to_string(r.verdict.status).size());
    }
    auto pad = [](std::string s, std::size_t w) {
        s.resize(std::max(w, s.size()), ' ');
        return s;
    };
    std::string out = pad("scenario", w1) + "  " + pad("check", w2) + "  " + pad("status", w3) + "  margin\n";
    for (const auto& r : rep.rows) {
        out += pad(r.scenario, w1) + "  " + pad(r.verdict.check, w2) + "  " +
               pad(std::string(to_string(r.verdict.status)), w3) + "  " +
               (std::isfinite(r.verdict.margin) ? fmt12(r.verdict.margin) : std::string("-")) + "\n";
        if (r.verdict.failed()) out += "    " + r.verdict.detail + "\n";
    }
    out += rep.passed() ? "ALL HARD CHECKS PASSED\n" : "HARD CHECK FAILURES\n";
    return out;
}

}  // namespace n2m
