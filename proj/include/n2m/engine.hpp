#pragma once

// Single-agent loop  C(t+1) = U(C(t), Psi(N_self(t), C(t))).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "n2m/channel.hpp"
#include "n2m/context.hpp"
#include "n2m/cost.hpp"
#include "n2m/measures.hpp"

namespace n2m {

enum class UpdateKind { Overwrite, Append, DeltaMonotone, Sublinear, Windowed };
enum class SublinearKind { Sqrt, Log1p };

struct UpdateRuleSpec {
    UpdateKind kind = UpdateKind::DeltaMonotone;
    double delta = 1.0;   // DELTA_MONOTONE, WINDOWED
    double c1 = 1.0;      // g = c1 * Omega, with c1 <= c2
    double c2 = 1.0;
    SublinearKind h = SublinearKind::Log1p;
    std::size_t window = 0;   // WINDOWED: W
    std::size_t retain = 0;   // WINDOWED: units kept after a cap hit (0 = W/2)
    bool skip_repeats = false;  // APPEND: an output equal to the previous one adds nothing

    void validate() const {
        if (kind == UpdateKind::DeltaMonotone || kind == UpdateKind::Windowed)
            require(delta > 0, ErrorCode::ValidationError, "delta must be > 0");
        if (kind == UpdateKind::DeltaMonotone)
            require(c1 > 0 && c1 <= c2, ErrorCode::ValidationError, "need 0 < c1 <= c2");
        if (kind == UpdateKind::Windowed) {
            require(window > 0, ErrorCode::ValidationError, "window cap W must be > 0");
            require(retain < window, ErrorCode::ValidationError, "window retain must be < W");
        }
    }

    /// Per-unit gain multiplier of the linear rules (delta * c1, or delta).
    double linear_gain() const noexcept {
        return kind == UpdateKind::DeltaMonotone ? delta * c1 : delta;
    }

    friend bool operator==(const UpdateRuleSpec&, const UpdateRuleSpec&) = default;
};

/// External policy gate: once tripped the loop rejects further self-generated input.
struct BudgetGate {
    std::optional<double> max_flops;  // cumulative
    std::optional<double> max_norm;

    friend bool operator==(const BudgetGate&, const BudgetGate&) = default;
};

struct RunConfig {
    ChannelSpec channel;
    UpdateRuleSpec update;
    MeasureSpec measure = MeasureSpec::length();
    double gamma = 10.0;
    std::size_t horizon = 100;
    std::optional<BudgetGate> budget_gate;
    ContextState initial;
    CostModel cost;

    void validate() const {
        require(horizon >= 1, ErrorCode::ValidationError, "horizon must be >= 1");
        require(gamma > 0, ErrorCode::ValidationError, "Gamma must be > 0");
        channel.validate();
        update.validate();
        cost.validate();
        initial.validate();
        require(measure.kind != MeasureKind::DeclaredBonus, ErrorCode::ValidationError,
                "the declared-bonus measure is only available to swarms");
        if (update.kind == UpdateKind::Windowed)
            require(initial.norm <= static_cast<double>(update.window), ErrorCode::ValidationError,
                    "initial norm exceeds the window cap");
    }

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

enum Event : std::uint32_t {
    kCrossedGamma = 1U << 0,
    kFixedPoint = 1U << 1,
    kBurstHitW = 1U << 2,
    kMasked = 1U << 3,
    kBudgetGated = 1U << 4,
};

inline std::string event_names(std::uint32_t events) {
    static constexpr std::pair<Event, const char*> kNames[] = {
        {kCrossedGamma, "CROSSED_GAMMA"}, {kFixedPoint, "FIXED_POINT"}, {kBurstHitW, "BURST_HIT_W"},
        {kMasked, "MASKED"},              {kBudgetGated, "BUDGET_GATED"},
    };
    std::string out;
    for (const auto& [flag, name] : kNames) {
        if (!(events & flag)) continue;
        if (!out.empty()) out += ';';
        out += name;
    }
    return out;
}

/// One loop step: norm is ||C(t)||, delta = ||C(t+1)|| - ||C(t)||.
struct Record {
    std::uint64_t t = 0;
    double norm = 0.0;
    double omega = 0.0;
    double delta = 0.0;
    double epsilon = 0.0;
    double flops = 0.0;
    std::uint32_t events = 0;

    bool has(Event e) const noexcept { return (events & e) != 0; }

    friend bool operator==(const Record&, const Record&) = default;
};

struct Trajectory {
    std::vector<Record> records;
    double final_norm = 0.0;
    RunConfig config;

    std::uint64_t seed() const noexcept { return config.channel.seed; }

    /// ||C(0)||, ..., ||C(horizon)||.
    std::vector<double> norms() const {
        std::vector<double> out;
        out.reserve(records.size() + 1);
        for (const auto& r : records) out.push_back(r.norm);
        out.push_back(final_norm);
        return out;
    }

    double norm_at(std::size_t t) const { return t < records.size() ? records[t].norm : final_norm; }

    bool is_concrete() const noexcept { return config.initial.mode == ContextMode::Concrete; }
};

/// Mutable loop state carried between steps.
struct LoopState {
    ContextState context;
    Meaning previous;          // the agent's last output, source of N_self
    double spent_flops = 0.0;  // cumulative compute of accepted steps
};

inline LoopState initial_state(const RunConfig& cfg) {
    LoopState s;
    s.context = cfg.initial;
    if (cfg.update.kind == UpdateKind::Windowed) {
        s.context.window_cap = cfg.update.window;
        if (cfg.update.retain > 0) s.context.window_retain = cfg.update.retain;
    }
    s.previous.alphabet = cfg.channel.alphabet;
    return s;
}

namespace detail {

/// Appends symbols cycled from `source` until the buffer holds floor(norm) symbols.
inline void fill_to_norm(ContextState& c, const Meaning& source) {
    const auto target = static_cast<std::size_t>(std::floor(c.norm));
    std::size_t i = 0;
    while (c.symbols.size() < target) {
        c.symbols.push_back(source.empty() ? Symbol{0} : source.symbols[i % source.norm()]);
        ++i;
    }
}

inline void keep_recent(std::vector<Symbol>& symbols, std::size_t n) {
    if (symbols.size() > n) symbols.erase(symbols.begin(), symbols.end() - static_cast<std::ptrdiff_t>(n));
}

inline double sublinear(SublinearKind h, double x) {
    return h == SublinearKind::Sqrt ? std::sqrt(x) : std::log1p(x);
}

inline void apply_update(ContextState& c, const Meaning& m, double omega, const Meaning& previous,
                         const UpdateRuleSpec& rule) {
    const bool concrete = c.mode == ContextMode::Concrete;
    switch (rule.kind) {
    case UpdateKind::Overwrite:
        c.norm = static_cast<double>(m.norm());
        if (concrete) c.symbols = m.symbols;
        return;
    case UpdateKind::Append:
        if (rule.skip_repeats && m == previous) return;
        c.norm += static_cast<double>(m.norm());
        if (concrete) c.symbols.insert(c.symbols.end(), m.symbols.begin(), m.symbols.end());
        return;
    case UpdateKind::DeltaMonotone:
        c.norm += rule.delta * rule.c1 * omega;
        break;
    case UpdateKind::Sublinear:
        c.norm += sublinear(rule.h, omega);
        break;
    case UpdateKind::Windowed:
        c.norm += rule.delta * omega;
        break;
    }
    if (concrete) fill_to_norm(c, m);
}

}  // namespace detail

/// Advances the loop by one step in place and returns the step record.
inline Record step(LoopState& state, std::uint64_t t, const RunConfig& cfg) {
    ContextState& c = state.context;
    Record rec;
    rec.t = t;
    rec.norm = c.norm;
    rec.epsilon = epsilon_at(schedule_index(t), cfg.channel.mask_rate);
    rec.flops = flops_at(c.norm, cfg.cost);

    const bool gated = cfg.budget_gate &&
                       ((cfg.budget_gate->max_flops && state.spent_flops >= *cfg.budget_gate->max_flops) ||
                        (cfg.budget_gate->max_norm && c.norm >= *cfg.budget_gate->max_norm));
    if (gated) {
        rec.events |= kBudgetGated;
        if (c.mode == ContextMode::Concrete) rec.events |= kFixedPoint;
        return rec;
    }
    state.spent_flops += rec.flops;

    const NoiseDraw noise = draw_self_noise(state.previous, t, cfg.channel);
    const bool masked = mask_fires(noise, cfg.channel);
    Meaning m;
    m.alphabet = cfg.channel.alphabet;
    if (masked)
        rec.events |= kMasked;
    else
        m = psi_base(noise, c, cfg.channel);
    rec.omega = evaluate(cfg.measure, m);

    const double before = c.norm;
    const bool compare = c.mode == ContextMode::Concrete;
    const bool truncate = c.window_cap && c.norm >= static_cast<double>(*c.window_cap);
    // Growth-only updates change the buffer iff they change its size; the others need a snapshot.
    const std::size_t old_size = c.symbols.size();
    std::optional<std::vector<Symbol>> snapshot;
    if (compare && (truncate || cfg.update.kind == UpdateKind::Overwrite)) snapshot = c.symbols;

    if (truncate) {
        c.norm = static_cast<double>(c.retain());
        if (compare) detail::keep_recent(c.symbols, c.retain());
    }
    detail::apply_update(c, m, rec.omega, state.previous, cfg.update);
    if (c.window_cap) {
        const auto cap = static_cast<double>(*c.window_cap);
        if (c.norm >= cap) {
            c.norm = cap;
            if (compare) detail::keep_recent(c.symbols, *c.window_cap);
            if (before < cap) rec.events |= kBurstHitW;
        }
    }

    rec.delta = c.norm - before;
    if (before <= cfg.gamma && c.norm > cfg.gamma) rec.events |= kCrossedGamma;
    if (compare && c.norm == before &&
        (snapshot ? c.symbols == *snapshot : c.symbols.size() == old_size))
        rec.events |= kFixedPoint;
    state.previous = std::move(m);
    return rec;
}

inline Trajectory run(const RunConfig& cfg) {
    cfg.validate();
    Trajectory traj;
    traj.config = cfg;
    traj.records.reserve(cfg.horizon);
    LoopState state = initial_state(cfg);
    for (std::uint64_t t = 0; t < cfg.horizon; ++t) traj.records.push_back(step(state, t, cfg));
    traj.final_norm = state.context.norm;
    // delta is recomputed from the stored norms so that norm(t) + delta(t) == norm(t+1) exactly
    for (std::size_t i = 0; i < traj.records.size(); ++i)
        traj.records[i].delta = traj.norm_at(i + 1) - traj.records[i].norm;
    return traj;
}

// ---------------------------------------------------------------------------
// Minimal prototype: a one-bit overwrite loop with a threshold bonus.

enum class PrototypeMode { Verbatim, Cumulative };

/// VERBATIM overwrites c with the fresh bit (plus one above Gamma), so history
/// never leaves {0, 1}; CUMULATIVE adds the bit to c (plus one above Gamma).
inline std::vector<long long> run_appendix_c(PrototypeMode mode, std::size_t steps, double gamma,
                                             std::uint64_t seed) {
    require(steps >= 1, ErrorCode::InvalidArgument, "T must be >= 1");
    Stream bits(seed);
    long long c = 0;
    std::vector<long long> history;
    history.reserve(steps);
    for (std::size_t t = 0; t < steps; ++t) {
        const long long n = bits.bit();
        const long long m = n;
        if (mode == PrototypeMode::Verbatim)
            c = static_cast<double>(c) <= gamma ? m : m + 1;
        else
            c = c + m + (static_cast<double>(c) > gamma ? 1 : 0);
        history.push_back(c);
    }
    return history;
}

}  // namespace n2m
