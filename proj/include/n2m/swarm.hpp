#pragma once

// k-agent swarm with broadcast coupling and the drift-matrix analysis.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <span>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "n2m/cost.hpp"
#include "n2m/engine.hpp"
#include "n2m/verify.hpp"

namespace n2m {

enum class Schedule { Synchronous, BernoulliAsync };

/// BROADCAST: every active agent gains delta * Omega_declared(own || others).
/// RELAYED: an active agent's increment is sum_{j != i} (1 + beta_ij) Delta_j(t-1),
/// so that E[Delta(t)] = D E[Delta(t-1)] holds by construction.
enum class Coupling { Broadcast, Relayed };

struct SwarmSpec {
    std::size_t k = 2;
    std::vector<std::vector<double>> beta;  // k x k, zero diagonal
    std::vector<double> lambda;              // per-agent activity rate, (0,1]
    Schedule schedule = Schedule::Synchronous;
    Coupling coupling = Coupling::Broadcast;
    RunConfig agent;   // per-agent template: channel, delta, Gamma, initial norm, cost
    double base_gain = 1.0;

    static SwarmSpec uniform(std::size_t k, double beta, double base_gain, double lambda = 1.0) {
        SwarmSpec s;
        s.k = k;
        s.beta.assign(k, std::vector<double>(k, beta));
        for (std::size_t i = 0; i < k; ++i) s.beta[i][i] = 0.0;
        s.lambda.assign(k, lambda);
        s.schedule = lambda < 1.0 ? Schedule::BernoulliAsync : Schedule::Synchronous;
        s.base_gain = base_gain;
        s.agent.update.kind = UpdateKind::DeltaMonotone;
        return s;
    }

    BonusTable bonus_table() const { return BonusTable{std::vector<double>(k, base_gain), beta}; }

    double rate(std::size_t i) const { return schedule == Schedule::Synchronous ? 1.0 : lambda.at(i); }

    /// Mean of the off-diagonal beta_ij.
    double beta_bar() const {
        double sum = 0.0;
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j)
                if (i != j) sum += beta[i][j];
        return sum / static_cast<double>(k * (k - 1));
    }

    bool uniform_beta() const {
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j)
                if (i != j && beta[i][j] != beta[0][1]) return false;
        return true;
    }

    void validate() const {
        require(k >= 2, ErrorCode::ValidationError, "a swarm needs k >= 2 agents");
        require(lambda.size() == k, ErrorCode::ValidationError, "lambda must have k entries");
        for (double l : lambda) require(l > 0 && l <= 1, ErrorCode::ValidationError, "lambda_i must lie in (0,1]");
        bonus_table().validate();
        require(base_gain >= 0, ErrorCode::ValidationError, "base gain must be >= 0");
        require(agent.initial.mode == ContextMode::Abstract, ErrorCode::ValidationError,
                "swarm agents run in ABSTRACT mode");
        require(agent.gamma > 0 && agent.horizon >= 1, ErrorCode::ValidationError, "need Gamma > 0 and horizon >= 1");
        agent.channel.validate();
        agent.update.validate();
    }

    friend bool operator==(const SwarmSpec&, const SwarmSpec&) = default;
};

struct SwarmState {
    std::vector<ContextState> contexts;
    std::vector<Meaning> previous;
    std::vector<double> last_delta;  // RELAYED memory
};

struct SwarmStepResult {
    std::vector<Record> records;  // one per agent
    double collective = 0.0;      // sum_i Delta_i(t)
    std::size_t active = 0;
    std::vector<char> active_flags;
};

inline SwarmState initial_swarm_state(const SwarmSpec& spec) {
    SwarmState s;
    s.contexts.assign(spec.k, spec.agent.initial);
    s.previous.assign(spec.k, Meaning{});
    s.last_delta.assign(spec.k, spec.agent.update.linear_gain() * spec.base_gain);
    return s;
}

namespace detail {

inline constexpr std::uint64_t kActivitySalt = 0x41435456ULL;

inline ChannelSpec agent_channel(const ChannelSpec& base, std::size_t i) {
    ChannelSpec c = base;
    c.seed = mix_keys({base.seed, static_cast<std::uint64_t>(i) + 1});
    return c;
}

inline bool agent_active(const SwarmSpec& spec, std::uint64_t t, std::size_t i) {
    if (spec.schedule == Schedule::Synchronous) return true;
    Stream s(mix_keys({spec.agent.channel.seed, kActivitySalt, t, static_cast<std::uint64_t>(i)}));
    return s.bernoulli(spec.lambda[i]);
}

/// Agent i's meaning, tagged i; the empty meaning when the valve fires.
inline Meaning agent_meaning(const SwarmSpec& spec, const SwarmState& s, std::uint64_t t, std::size_t i,
                             bool& masked) {
    const ChannelSpec ch = agent_channel(spec.agent.channel, i);
    const NoiseDraw n = draw_self_noise(s.previous[i], t, ch);
    masked = mask_fires(n, ch);
    Meaning m;
    m.alphabet = ch.alphabet;
    if (!masked) {
        m = psi_base(n, s.contexts[i], ch);
        m.tag = static_cast<std::uint32_t>(i);
    }
    return m;
}

}  // namespace detail

/// One synchronized tick: all meanings are drawn from the tick-t states before any agent commits.
inline SwarmStepResult swarm_step(SwarmState& s, std::uint64_t t, const SwarmSpec& spec) {
    const BonusTable table = spec.bonus_table();
    const double gain = spec.agent.update.linear_gain();
    const double eps = epsilon_at(schedule_index(t), spec.agent.channel.mask_rate);

    std::vector<Meaning> meanings(spec.k);
    std::vector<char> masked(spec.k, 0), active(spec.k, 0);
    for (std::size_t i = 0; i < spec.k; ++i) {
        bool mk = false;
        meanings[i] = detail::agent_meaning(spec, s, t, i, mk);
        masked[i] = mk;
        active[i] = detail::agent_active(spec, t, i);
    }

    SwarmStepResult out;
    out.records.resize(spec.k);
    out.active_flags = active;
    std::vector<double> deltas(spec.k, 0.0);
    for (std::size_t i = 0; i < spec.k; ++i) {
        Record& rec = out.records[i];
        rec.t = t;
        rec.norm = s.contexts[i].norm;
        rec.epsilon = eps;
        rec.flops = flops_at(rec.norm, spec.agent.cost);
        if (masked[i]) rec.events |= kMasked;
        if (!active[i]) continue;
        ++out.active;
        if (spec.coupling == Coupling::Broadcast) {
            // own meaning leads, the other broadcasts follow in ascending index
            std::vector<Meaning> parts;
            parts.reserve(spec.k);
            parts.push_back(meanings[i]);
            for (std::size_t j = 0; j < spec.k; ++j)
                if (j != i) parts.push_back(meanings[j]);
            rec.omega = omega_declared(parts, table);
            deltas[i] = gain * rec.omega;
        } else {
            double relayed = 0.0;
            for (std::size_t j = 0; j < spec.k; ++j)
                if (j != i) relayed += (1.0 + spec.beta[i][j]) * s.last_delta[j];
            rec.omega = gain > 0 ? relayed / gain : 0.0;
            deltas[i] = relayed;
        }
    }
    for (std::size_t i = 0; i < spec.k; ++i) {
        Record& rec = out.records[i];
        s.contexts[i].norm += deltas[i];
        rec.delta = deltas[i];
        out.collective += deltas[i];
        if (rec.norm <= spec.agent.gamma && s.contexts[i].norm > spec.agent.gamma) rec.events |= kCrossedGamma;
        s.previous[i] = std::move(meanings[i]);
    }
    s.last_delta = std::move(deltas);
    return out;
}

struct CollectiveRecord {
    std::uint64_t t = 0;
    double sum_delta = 0.0;
    std::size_t active = 0;

    friend bool operator==(const CollectiveRecord&, const CollectiveRecord&) = default;
};

struct SwarmTrajectory {
    std::vector<Trajectory> agents;
    std::vector<CollectiveRecord> collective;
    Trajectory solo;          // isolated agent with the same channel and update
    double delta_solo = 0.0;  // mean solo increment
    std::vector<std::size_t> active_steps;  // ticks each agent was active
    std::uint64_t seed = 0;
};

/// Runs the swarm for `horizon` ticks plus one isolated reference agent.
inline SwarmTrajectory run_swarm(const SwarmSpec& spec, std::size_t horizon, std::uint64_t seed) {
    require(horizon >= 1, ErrorCode::InvalidArgument, "horizon must be >= 1");
    SwarmSpec sp = spec;
    sp.agent.channel.seed = seed;
    sp.agent.horizon = horizon;
    sp.validate();

    SwarmTrajectory traj;
    traj.seed = seed;
    traj.agents.resize(sp.k);
    for (auto& a : traj.agents) {
        a.config = sp.agent;
        a.records.reserve(horizon);
    }
    traj.collective.reserve(horizon);
    traj.active_steps.assign(sp.k, 0);
    SwarmState state = initial_swarm_state(sp);
    for (std::uint64_t t = 0; t < horizon; ++t) {
        SwarmStepResult r = swarm_step(state, t, sp);
        for (std::size_t i = 0; i < sp.k; ++i) {
            traj.agents[i].records.push_back(r.records[i]);
            traj.active_steps[i] += r.active_flags[i] ? 1 : 0;
        }
        traj.collective.push_back({t, r.collective, r.active});
    }
    for (std::size_t i = 0; i < sp.k; ++i) traj.agents[i].final_norm = state.contexts[i].norm;

    // solo reference: agent 0's channel, no partners, always active
    const BonusTable table = sp.bonus_table();
    const ChannelSpec ch = detail::agent_channel(sp.agent.channel, 0);
    traj.solo.config = sp.agent;
    ContextState c = sp.agent.initial;
    Meaning prev;
    double total = 0.0;
    for (std::uint64_t t = 0; t < horizon; ++t) {
        Record rec;
        rec.t = t;
        rec.norm = c.norm;
        rec.epsilon = epsilon_at(schedule_index(t), ch.mask_rate);
        rec.flops = flops_at(c.norm, sp.agent.cost);
        const NoiseDraw n = draw_self_noise(prev, t, ch);
        Meaning m;
        m.alphabet = ch.alphabet;
        if (mask_fires(n, ch)) {
            rec.events |= kMasked;
        } else {
            m = psi_base(n, c, ch);
            m.tag = 0;
        }
        rec.omega = omega_declared(m, table);
        rec.delta = sp.agent.update.linear_gain() * rec.omega;
        c.norm += rec.delta;
        if (rec.norm <= sp.agent.gamma && c.norm > sp.agent.gamma) rec.events |= kCrossedGamma;
        total += rec.delta;
        prev = std::move(m);
        traj.solo.records.push_back(rec);
    }
    traj.solo.final_norm = c.norm;
    traj.delta_solo = total / static_cast<double>(horizon);
    return traj;
}

// ---------------------------------------------------------------------------
// Collective gain

struct GainComparison {
    double observed = 0.0;
    double bound = 0.0;
    double standard_error = 0.0;
    bool passed = false;
};

struct CollectiveGainReport {
    bool uniform = false;
    double beta_used = 0.0;  // beta (uniform) or beta-bar
    std::vector<double> rates;
    std::vector<GainComparison> per_agent;
    GainComparison collective;
    std::vector<double> activity;  // observed activity fraction per agent
    bool passed = false;           // collective bound and, for uniform beta, every per-agent bound
};

namespace detail {

inline GainComparison compare_mean(std::span<const double> xs, double bound, double sigmas) {
    GainComparison g;
    g.bound = bound;
    const double n = static_cast<double>(xs.size());
    double sum = 0.0, sq = 0.0;
    for (double x : xs) {
        sum += x;
        sq += x * x;
    }
    g.observed = sum / n;
    const double var = xs.size() > 1 ? std::max(0.0, (sq - n * g.observed * g.observed) / (n - 1)) : 0.0;
    g.standard_error = std::sqrt(var / n);
    // exact arithmetic on deterministic runs: allow only representation error
    const double slack = std::max(sigmas * g.standard_error, 1e-12 * std::max(1.0, std::abs(bound)));
    g.passed = g.observed >= bound - slack;
    return g;
}

}  // namespace detail

/// One-sided checks of E[Delta_i] >= rate_i (1 + beta) k Delta_solo and of the
/// collective sum against rate (1 + beta) k^2 Delta_solo. Non-uniform tables use
/// beta-bar; the per-agent comparison is then reported but does not gate the verdict.
inline CollectiveGainReport check_collective_gain(const SwarmTrajectory& traj, const SwarmSpec& spec,
                                                  double sigmas = 5.0) {
    CollectiveGainReport r;
    r.uniform = spec.uniform_beta();
    r.beta_used = r.uniform ? spec.beta[0][1] : spec.beta_bar();
    const double k = static_cast<double>(spec.k);
    double rate_sum = 0.0;
    bool agents_ok = true;
    for (std::size_t i = 0; i < spec.k; ++i) {
        const double rate = spec.rate(i);
        r.rates.push_back(rate);
        rate_sum += rate;
        std::vector<double> d;
        for (const auto& rec : traj.agents[i].records) d.push_back(rec.delta);
        r.activity.push_back(static_cast<double>(traj.active_steps[i]) / static_cast<double>(d.size()));
        r.per_agent.push_back(detail::compare_mean(d, rate * (1.0 + r.beta_used) * k * traj.delta_solo, sigmas));
        agents_ok = agents_ok && r.per_agent.back().passed;
    }
    std::vector<double> coll;
    for (const auto& c : traj.collective) coll.push_back(c.sum_delta);
    r.collective = detail::compare_mean(coll, rate_sum * (1.0 + r.beta_used) * k * traj.delta_solo, sigmas);
    r.passed = r.collective.passed && (!r.uniform || agents_ok);
    return r;
}

/// First tick with norm > Gamma for the fastest agent, and for the solo reference.
inline std::optional<std::size_t> swarm_crossing(const SwarmTrajectory& traj) {
    std::optional<std::size_t> best;
    for (const auto& a : traj.agents) {
        const auto t = first_crossing(a, a.config.gamma);
        if (t && (!best || *t < *best)) best = t;
    }
    return best;
}

// ---------------------------------------------------------------------------
// Drift matrix

struct DriftMatrix {
    std::vector<std::vector<double>> entries;
    double spectral_radius = 0.0;
    double tolerance = 0.0;

    std::size_t size() const noexcept { return entries.size(); }
};

/// D_ij = lambda_i (1 + beta_ij) for i != j, zero diagonal. Synchronous schedules use lambda = 1.
inline DriftMatrix build_drift_matrix(const SwarmSpec& spec) {
    DriftMatrix d;
    d.entries.assign(spec.k, std::vector<double>(spec.k, 0.0));
    for (std::size_t i = 0; i < spec.k; ++i)
        for (std::size_t j = 0; j < spec.k; ++j)
            if (i != j) d.entries[i][j] = spec.rate(i) * (1.0 + spec.beta[i][j]);
    return d;
}

struct SpectralEstimate {
    double value = 0.0;
    double lower = 0.0;  // Collatz-Wielandt bracket of rho(D)
    double upper = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

/// Power iteration on D + I from the all-ones vector. The shift keeps the
/// iterate positive and separates +rho from -rho (bipartite D). For positive x,
/// min_i (Ax)_i/x_i <= rho(A) <= max_i (Ax)_i/x_i; iteration stops when the
/// bracket is narrower than tol.
inline SpectralEstimate estimate_spectral_radius(const std::vector<std::vector<double>>& d, double tol,
                                                 std::size_t max_iters) {
    require(tol > 0, ErrorCode::InvalidArgument, "tolerance must be > 0");
    const std::size_t k = d.size();
    for (const auto& row : d) {
        require(row.size() == k, ErrorCode::InvalidArgument, "drift matrix must be square");
        for (double x : row) require(x >= 0 && std::isfinite(x), ErrorCode::InvalidArgument, "drift matrix must be nonnegative");
    }
    SpectralEstimate e;
    if (k == 0) {
        e.converged = true;
        return e;
    }
    std::vector<double> x(k, 1.0), y(k);
    for (std::size_t it = 1; it <= max_iters; ++it) {
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0, top = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            double s = x[i];
            for (std::size_t j = 0; j < k; ++j) s += d[i][j] * x[j];
            y[i] = s;
            lo = std::min(lo, s / x[i]);
            hi = std::max(hi, s / x[i]);
            top = std::max(top, s);
        }
        e.iterations = it;
        e.lower = lo - 1.0;
        e.upper = hi - 1.0;
        e.value = 0.5 * (lo + hi) - 1.0;
        for (std::size_t i = 0; i < k; ++i) x[i] = y[i] / top;
        if (hi - lo <= tol) {
            e.converged = true;
            break;
        }
    }
    e.lower = std::max(0.0, e.lower);
    e.value = std::max(0.0, e.value);
    return e;
}

/// rho(D) within tol; NO_CONVERGENCE carries the partial bracket.
inline double spectral_radius(const std::vector<std::vector<double>>& d, double tol = 1e-12,
                              std::size_t max_iters = 100000) {
    const SpectralEstimate e = estimate_spectral_radius(d, tol, max_iters);
    if (!e.converged) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "power iteration stopped after %zu iterations; estimate %.12g in [%.12g, %.12g]",
                      e.iterations, e.value, e.lower, e.upper);
        throw Error(ErrorCode::NoConvergence, buf);
    }
    return e.value;
}

inline double spectral_radius(DriftMatrix& d, double tol = 1e-12, std::size_t max_iters = 100000) {
    d.spectral_radius = spectral_radius(d.entries, tol, max_iters);
    d.tolerance = tol;
    return d.spectral_radius;
}

// ---------------------------------------------------------------------------
// Divergence prediction

struct DivergenceReport {
    double rho = 0.0;
    bool crossed = false;            // max per-agent norm exceeded Gamma
    std::optional<std::size_t> crossing;
    double growth_slope = 0.0;       // fitted d/dt log ||mean Delta(t)||
    double required_slope = 0.0;     // log rho
    double tolerance = 0.0;
    bool growth_checked = false;     // rho > 1 under RELAYED coupling
    bool growth_ok = true;
    bool flagged_divergent = false;
    std::size_t replicas = 0;
};

/// Runs `replicas` independent swarms (seeds derived from `seed`), averages the
/// increment vectors per tick and fits log ||mean Delta(t)|| over the second half.
inline DivergenceReport predict_and_verify_divergence(const SwarmSpec& spec, std::size_t horizon, std::uint64_t seed,
                                                      std::size_t replicas = 1, double tolerance = 0.05) {
    require(replicas >= 1, ErrorCode::InvalidArgument, "need at least one replica");
    DivergenceReport r;
    r.replicas = replicas;
    r.tolerance = tolerance;
    DriftMatrix d = build_drift_matrix(spec);
    r.rho = spectral_radius(d);
    std::vector<std::vector<double>> mean(horizon, std::vector<double>(spec.k, 0.0));
    for (std::size_t rep = 0; rep < replicas; ++rep) {
        const std::uint64_t s = replicas == 1 ? seed : mix_keys({seed, rep});
        const SwarmTrajectory traj = run_swarm(spec, horizon, s);
        for (std::size_t i = 0; i < spec.k; ++i) {
            for (std::size_t t = 0; t < horizon; ++t) mean[t][i] += traj.agents[i].records[t].delta / static_cast<double>(replicas);
            for (std::size_t t = 0; t <= horizon; ++t) {
                if (traj.agents[i].norm_at(t) > spec.agent.gamma) {
                    r.crossed = true;
                    if (!r.crossing || t < *r.crossing) r.crossing = t;
                    break;
                }
            }
        }
    }
    std::vector<double> xs, ys;
    for (std::size_t t = horizon / 2; t < horizon; ++t) {
        double n2 = 0.0;
        for (double v : mean[t]) n2 += v * v;
        if (n2 <= 0) continue;
        xs.push_back(static_cast<double>(t));
        ys.push_back(0.5 * std::log(n2));
    }
    if (xs.size() >= 2) r.growth_slope = least_squares(xs, ys).slope;
    r.required_slope = r.rho > 0 ? std::log(r.rho) : 0.0;
    r.growth_checked = r.rho > 1.0 && spec.coupling == Coupling::Relayed;
    if (r.growth_checked) r.growth_ok = xs.size() >= 2 && r.growth_slope >= r.required_slope - tolerance;
    r.flagged_divergent = r.rho > 1.0 && r.crossed && r.growth_ok;
    return r;
}

}  // namespace n2m
