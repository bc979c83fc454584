#pragma once

// Trajectory checkers for the single-agent loop.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "n2m/cost.hpp"
#include "n2m/engine.hpp"

namespace n2m {

// ---------------------------------------------------------------------------
// Fixed points

/// Smallest t such that state(s+1) == state(s) for every s in [t, horizon) and
/// the repeat spans at least `min_persistence` steps. A shorter tail cannot
/// separate a fixed point from a transient repeat.
inline std::optional<std::uint64_t> detect_fixed_point(const Trajectory& traj,
                                                       std::size_t min_persistence = 8) {
    require(traj.is_concrete(), ErrorCode::AbstractModeUnsupported,
            "fixed-point detection compares symbol states and needs CONCRETE mode");
    std::size_t start = traj.records.size();
    while (start > 0 && traj.records[start - 1].has(kFixedPoint)) --start;
    if (start == traj.records.size()) return std::nullopt;
    if (traj.records.size() - start < min_persistence) return std::nullopt;
    return traj.records[start].t;
}

// ---------------------------------------------------------------------------
// Drift

/// First t with ||C(t)|| > Gamma, if any (t ranges over 0..horizon).
inline std::optional<std::size_t> first_crossing(const Trajectory& traj, double level) {
    for (std::size_t t = 0; t <= traj.records.size(); ++t)
        if (traj.norm_at(t) > level) return t;
    return std::nullopt;
}

struct DriftReport {
    bool passed = false;
    std::size_t t0 = 0;
    std::size_t steps_checked = 0;
    std::size_t per_step_violations = 0;    // unmasked steps with gain < delta Gamma
    std::size_t cumulative_violations = 0;  // k with ||C(t0+k)|| < ||C(t0)|| + k delta Gamma (unmasked runs)
    double min_step_margin = std::numeric_limits<double>::infinity();
    double mean_drift = 0.0;
    double drift_bound = 0.0;   // delta (1 - eps) Gamma, averaged over eps_t
    double standard_error = 0.0;
    std::size_t masked_steps = 0;
};

/// Checks the post-crossing drift. When eps is not given the recorded eps_t is
/// used per step. Unmasked steps must gain at least delta*Gamma exactly; the
/// sample-mean drift must reach delta(1-eps)Gamma within `sigmas` standard errors.
inline DriftReport verify_drift(const Trajectory& traj, double delta, double gamma,
                                std::optional<double> eps = std::nullopt, double sigmas = 5.0) {
    const auto t0 = first_crossing(traj, gamma);
    require(t0.has_value(), ErrorCode::NoCrossing, "Gamma was never crossed within the horizon");
    DriftReport r;
    r.t0 = *t0;
    const double step_bound = delta * gamma;
    const double start = traj.norm_at(*t0);
    double sum = 0.0, sum_sq = 0.0, bound_sum = 0.0;
    for (std::size_t t = *t0; t < traj.records.size(); ++t) {
        const auto& rec = traj.records[t];
        ++r.steps_checked;
        sum += rec.delta;
        sum_sq += rec.delta * rec.delta;
        bound_sum += step_bound * (1.0 - eps.value_or(rec.epsilon));
        if (rec.has(kMasked)) {
            ++r.masked_steps;
            continue;
        }
        const double margin = traj.norm_at(t + 1) - (traj.norm_at(t) + step_bound);
        r.min_step_margin = std::min(r.min_step_margin, margin);
        if (margin < 0) ++r.per_step_violations;
    }
    if (r.masked_steps == 0) {
        for (std::size_t k = 0; *t0 + k <= traj.records.size(); ++k)
            if (traj.norm_at(*t0 + k) < start + static_cast<double>(k) * step_bound) ++r.cumulative_violations;
    }
    const double n = static_cast<double>(r.steps_checked);
    if (r.steps_checked > 0) {
        r.mean_drift = sum / n;
        r.drift_bound = bound_sum / n;
        const double var = r.steps_checked > 1 ? std::max(0.0, (sum_sq - n * r.mean_drift * r.mean_drift) / (n - 1)) : 0.0;
        r.standard_error = std::sqrt(var / n);
    }
    r.passed = r.per_step_violations == 0 && r.cumulative_violations == 0 &&
               r.mean_drift >= r.drift_bound - sigmas * r.standard_error;
    return r;
}

// ---------------------------------------------------------------------------
// Boundedness

struct BoundedReport {
    bool passed = false;
    double max_norm = 0.0;
    std::size_t lyapunov_nonzero = 0;  // steps with V(t) = max{0, ||C(t)|| - Gamma} > 0
};

inline BoundedReport verify_bounded(const Trajectory& traj, double gamma) {
    require(traj.norm_at(0) <= gamma, ErrorCode::PreconditionViolated, "||C(0)|| exceeds Gamma");
    BoundedReport r;
    for (double n : traj.norms()) {
        r.max_norm = std::max(r.max_norm, n);
        if (std::max(0.0, n - gamma) > 0) ++r.lyapunov_nonzero;
    }
    r.passed = r.lyapunov_nonzero == 0;
    return r;
}

// ---------------------------------------------------------------------------
// Critical threshold

struct GammaStarEstimate {
    double estimate = 0.0;
    double resolution = 0.0;
    double lo = 0.0;
    double hi = 0.0;
};

/// True iff every sampled context with norm in [x, x + span] yields Omega > 0
/// through the unmasked operator. The boundary x itself is always sampled.
inline bool positive_gain_above(const RunConfig& cfg, double x, double span, std::size_t mc_samples,
                                std::uint64_t seed) {
    for (std::size_t i = 0; i < std::max<std::size_t>(1, mc_samples); ++i) {
        const auto key = mix_keys({seed, std::bit_cast<std::uint64_t>(x), i});
        ContextState c = ContextState::abstract(i == 0 ? x : x + span * Stream(key).uniform());
        const NoiseDraw n = draw_noise_keyed(key, 0, cfg.channel);
        if (evaluate(cfg.measure, psi_base(n, c, cfg.channel)) <= 0.0) return false;
    }
    return true;
}

/// Bisection for Gamma* = inf{x > 0 : inf_{||C|| >= x} Omega(Psi(N, C)) > 0}.
inline GammaStarEstimate estimate_gamma_star(const RunConfig& cfg, double lo, double hi,
                                             std::size_t iterations, std::size_t mc_samples,
                                             std::uint64_t seed) {
    require(lo > 0 && lo < hi && std::isfinite(hi), ErrorCode::SearchBracketInvalid,
            "search bracket must satisfy 0 < lo < hi");
    const double span = hi - lo;
    GammaStarEstimate out;
    out.lo = lo;
    out.hi = hi;
    out.resolution = span / std::ldexp(1.0, static_cast<int>(iterations));
    if (positive_gain_above(cfg, lo, span, mc_samples, seed)) {
        out.estimate = lo;
        return out;
    }
    require(positive_gain_above(cfg, hi, span, mc_samples, seed), ErrorCode::SearchBracketInvalid,
            "no positive gain at the upper end of the bracket");
    double a = lo, b = hi;
    for (std::size_t i = 0; i < iterations; ++i) {
        const double mid = 0.5 * (a + b);
        if (positive_gain_above(cfg, mid, span, mc_samples, seed))
            b = mid;
        else
            a = mid;
    }
    out.estimate = 0.5 * (a + b);
    return out;
}

// ---------------------------------------------------------------------------
// Finite-time crossing

/// t* + ceil((B - ||C(t*)||) / (delta (1 - eps) Gamma)).
inline std::uint64_t divergence_time_bound(std::uint64_t t_star, double norm_at_star, double target,
                                           double delta, double eps, double gamma) {
    require(delta > 0 && gamma > 0, ErrorCode::InvalidArgument, "delta and Gamma must be > 0");
    require(eps >= 0 && eps < 1, ErrorCode::InvalidArgument, "eps must lie in [0,1)");
    require(target > norm_at_star, ErrorCode::InvalidArgument, "target B must exceed ||C(t*)||");
    const double steps = (target - norm_at_star) / (delta * (1.0 - eps) * gamma);
    // guard against x.0000000001 from rounding in the quotient
    const double snapped = std::nearbyint(steps);
    const double whole = std::abs(steps - snapped) <= 1e-12 * std::max(1.0, snapped) ? snapped : std::ceil(steps);
    return t_star + static_cast<std::uint64_t>(whole);
}

struct CrossingCheck {
    bool passed = false;
    std::size_t t_star = 0;
    double norm_at_star = 0.0;
    std::uint64_t bound = 0;
    std::optional<std::size_t> observed;  // first t with ||C(t)|| > B
};

/// Observed first reach of B against the bound computed from the first Gamma crossing.
inline CrossingCheck check_crossing_bound(const Trajectory& traj, double target, double delta, double eps,
                                          double gamma) {
    const auto t_star = first_crossing(traj, gamma);
    require(t_star.has_value(), ErrorCode::NoCrossing, "Gamma was never crossed within the horizon");
    CrossingCheck c;
    c.t_star = *t_star;
    c.norm_at_star = traj.norm_at(*t_star);
    if (c.norm_at_star > target) {
        c.bound = *t_star;
        c.observed = *t_star;
        c.passed = true;
        return c;
    }
    c.bound = c.norm_at_star == target ? *t_star + 1
                                       : divergence_time_bound(*t_star, c.norm_at_star, target, delta, eps, gamma);
    for (std::size_t t = *t_star; t <= traj.records.size(); ++t) {
        if (traj.norm_at(t) > target) {
            c.observed = t;
            break;
        }
    }
    c.passed = c.observed && *c.observed <= c.bound;
    if (!c.observed && c.bound > traj.records.size()) c.passed = true;  // bound beyond horizon: not falsified
    return c;
}

// ---------------------------------------------------------------------------
// Window bursts

struct BurstReport {
    bool passed = false;
    std::size_t bursts = 0;
    double max_norm = 0.0;
    std::vector<std::size_t> burst_steps;
    std::size_t max_gap = 0;
    double mean_gap = 0.0;
    std::uint64_t gap_bound = 0;  // ceil((W - retained) / (delta (1 - eps) Gamma))
    std::size_t gap_violations = 0;
};

/// Bursts are steps t with ||C(t)|| = W and ||C(t-1)|| < W.
inline BurstReport burst_stats(const Trajectory& traj, std::size_t window) {
    const auto& init = traj.config.initial;
    const bool capped = traj.config.update.kind == UpdateKind::Windowed || init.window_cap.has_value();
    require(capped, ErrorCode::RuleMismatch, "burst statistics need a window cap");
    const double w = static_cast<double>(window);
    BurstReport r;
    const auto norms = traj.norms();
    for (std::size_t t = 0; t < norms.size(); ++t) {
        r.max_norm = std::max(r.max_norm, norms[t]);
        if (t > 0 && norms[t] == w && norms[t - 1] < w) r.burst_steps.push_back(t);
    }
    r.bursts = r.burst_steps.size();

    std::size_t retained = init.window_retain.value_or(window / 2);
    if (traj.config.update.kind == UpdateKind::Windowed && traj.config.update.retain > 0)
        retained = traj.config.update.retain;
    double max_eps = 0.0;
    for (const auto& rec : traj.records) max_eps = std::max(max_eps, rec.epsilon);
    const double per_step = traj.config.update.linear_gain() * (1.0 - max_eps) * traj.config.gamma;
    r.gap_bound = static_cast<std::uint64_t>(std::ceil((w - static_cast<double>(retained)) / per_step));

    double gap_sum = 0.0;
    for (std::size_t i = 1; i < r.burst_steps.size(); ++i) {
        const std::size_t gap = r.burst_steps[i] - r.burst_steps[i - 1];
        r.max_gap = std::max(r.max_gap, gap);
        gap_sum += static_cast<double>(gap);
        if (max_eps == 0.0 && gap > r.gap_bound) ++r.gap_violations;
    }
    if (r.burst_steps.size() > 1) r.mean_gap = gap_sum / static_cast<double>(r.burst_steps.size() - 1);
    // under masking the per-gap bound holds in expectation only
    const bool gaps_ok = max_eps == 0.0 ? r.gap_violations == 0
                                        : (r.burst_steps.size() < 2 || r.mean_gap <= static_cast<double>(r.gap_bound));
    r.passed = r.max_norm <= w && gaps_ok;
    return r;
}

// ---------------------------------------------------------------------------
// Injectivity collapse

struct EpsilonStar {
    double value = 0.0;
    bool clamped = false;
};

/// 1 - delta Gamma / (2 sup Omega), clamped at 0.
inline EpsilonStar epsilon_star(double delta, double gamma, double omega_sup) {
    require(delta > 0 && gamma > 0 && omega_sup > 0, ErrorCode::InvalidArgument,
            "delta, Gamma and sup Omega must be > 0");
    const double v = 1.0 - delta * gamma / (2.0 * omega_sup);
    return v < 0 ? EpsilonStar{0.0, true} : EpsilonStar{v, false};
}

// ---------------------------------------------------------------------------
// Run classification

enum class RunClass { Converged, Divergent, Bounded };

constexpr std::string_view to_string(RunClass c) {
    switch (c) {
    case RunClass::Converged: return "CONVERGED";
    case RunClass::Divergent: return "DIVERGENT";
    case RunClass::Bounded: return "BOUNDED";
    }
    return "?";
}

struct Classification {
    RunClass kind = RunClass::Bounded;
    std::optional<std::uint64_t> fixed_point;
    double final_norm = 0.0;
};

/// CONVERGED: persistent fixed point (CONCRETE) or constant norm tail.
/// DIVERGENT: crossed Gamma and still growing over the last half.
inline Classification classify_run(const Trajectory& traj) {
    Classification c;
    c.final_norm = traj.final_norm;
    if (traj.is_concrete()) {
        c.fixed_point = detect_fixed_point(traj);
        if (c.fixed_point) {
            c.kind = RunClass::Converged;
            return c;
        }
    }
    const std::size_t h = traj.records.size();
    const double mid = traj.norm_at(h / 2);
    if (traj.final_norm > traj.config.gamma && traj.final_norm > mid)
        c.kind = RunClass::Divergent;
    else
        c.kind = RunClass::Bounded;
    return c;
}

// ---------------------------------------------------------------------------
// Compute along a trajectory

struct ComputeProfile {
    std::vector<double> instantaneous;
    std::vector<double> cumulative;
    LineFit loglog;  // log FLOPs(t) against log t over the fit window
    GrowthClass growth = GrowthClass::Flat;
};

inline ComputeProfile cumulative_compute(const Trajectory& traj, const CostModel& model,
                                         std::size_t fit_from = 100, std::size_t fit_to = 10000) {
    ComputeProfile p;
    double total = 0.0;
    for (const auto& rec : traj.records) {
        const double f = flops_at(rec.norm, model);
        total += f;
        p.instantaneous.push_back(f);
        p.cumulative.push_back(total);
    }
    std::vector<double> x, y;
    const std::size_t last = std::min(fit_to, traj.records.size() - 1);
    const std::size_t first = std::max<std::size_t>(1, std::min(fit_from, last / 2));
    for (std::size_t t = first; t <= last; ++t) {
        if (p.instantaneous[t] <= 0) continue;
        x.push_back(std::log(static_cast<double>(t)));
        y.push_back(std::log(p.instantaneous[t]));
    }
    if (x.size() >= 2) p.loglog = least_squares(x, y);
    p.growth = classify_slope(p.loglog.slope);
    return p;
}

}  // namespace n2m
