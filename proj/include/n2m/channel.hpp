#pragma once

// Self-referential noise source and noise-to-meaning operators, including the
// stochastic masking valve (a masked meaning is replaced by the empty meaning).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "n2m/context.hpp"
#include "n2m/error.hpp"
#include "n2m/meaning.hpp"
#include "n2m/random.hpp"

namespace n2m {

enum class PsiKind { Identity, TaggedInjective, Constant, Gated };

enum class ScheduleKind { Constant, PowerLaw };

/// eps_t = eps0 (CONSTANT) or min(eps0 + kappa t^-decay, 1 - 1e-9) (POWER_LAW, t >= 1).
struct EpsilonSchedule {
    ScheduleKind kind = ScheduleKind::Constant;
    double eps0 = 0.0;
    double kappa = 0.0;
    double decay = 1.0;

    static EpsilonSchedule constant(double eps) {
        EpsilonSchedule s;
        s.eps0 = eps;
        s.validate();
        return s;
    }

    static EpsilonSchedule power_law(double eps0, double kappa, double decay) {
        EpsilonSchedule s{ScheduleKind::PowerLaw, eps0, kappa, decay};
        s.validate();
        return s;
    }

    void validate() const {
        require(eps0 >= 0 && eps0 < 1, ErrorCode::ValidationError, "eps0 must lie in [0,1)");
        if (kind == ScheduleKind::PowerLaw) {
            require(kappa >= 0, ErrorCode::ValidationError, "kappa must be >= 0");
            require(decay > 0, ErrorCode::ValidationError, "power-law decay must be > 0");
            require(eps0 + kappa < 1, ErrorCode::ValidationError, "eps0 + kappa must be < 1");
        }
    }

    friend bool operator==(const EpsilonSchedule&, const EpsilonSchedule&) = default;
};

inline double epsilon_at(std::uint64_t t, const EpsilonSchedule& s) {
    if (s.kind == ScheduleKind::Constant) return s.eps0;
    require(t >= 1, ErrorCode::InvalidArgument, "power-law schedule is defined for t >= 1");
    const double eps = s.eps0 + s.kappa * std::pow(static_cast<double>(t), -s.decay);
    return std::min(eps, 1.0 - 1e-9);
}

struct ChannelSpec {
    PsiKind psi = PsiKind::Identity;
    double temperature = 1.0;  // 0 = zero-entropy source, > 0 = uniform symbols
    EpsilonSchedule mask_rate;
    std::size_t noise_len = 8;
    std::uint64_t seed = 0;
    std::uint8_t alphabet = 2;
    Meaning constant_meaning;   // CONSTANT: m-dagger
    double gate_threshold = 0;  // GATED: Gamma_true
    std::size_t gain_lo = 0;    // GATED: meaning length while norm <= Gamma_true
    std::size_t gain_hi = 1;    // GATED: meaning length above it
    std::size_t digest_bits = 16;  // TAGGED_INJECTIVE: context tag length

    void validate() const {
        require(temperature >= 0, ErrorCode::ValidationError, "temperature must be >= 0");
        require(noise_len >= 1, ErrorCode::ValidationError, "noise_len must be >= 1");
        require(alphabet >= 2 && alphabet <= kSymbolChars.size(), ErrorCode::ValidationError,
                "alphabet size must lie in [2, 36]");
        mask_rate.validate();
        if (psi == PsiKind::Constant)
            require(constant_meaning.alphabet == alphabet && constant_meaning.valid(),
                    ErrorCode::ValidationError, "constant meaning must use the channel alphabet");
        if (psi == PsiKind::Gated)
            require(gain_lo < gain_hi, ErrorCode::ValidationError, "gated channel needs gain_lo < gain_hi");
    }

    bool deterministic() const noexcept { return temperature == 0.0; }

    friend bool operator==(const ChannelSpec&, const ChannelSpec&) = default;
};

struct NoiseDraw {
    std::vector<Symbol> symbols;
    std::uint64_t source_t = 0;
    std::uint64_t key = 0;  // stream key the draw came from
};

namespace detail {

inline constexpr std::uint64_t kMaskSalt = 0x4D41534BULL;
inline constexpr std::uint64_t kGateSalt = 0x47415445ULL;

inline void fill_symbols(std::vector<Symbol>& out, std::size_t len, std::uint64_t key,
                         const ChannelSpec& spec) {
    out.assign(len, 0);
    if (spec.deterministic()) return;
    Stream rng(key);
    if (spec.alphabet == 2) {
        for (auto& s : out) s = static_cast<Symbol>(rng.bit());
    } else {
        for (auto& s : out) s = static_cast<Symbol>(rng.below(spec.alphabet));
    }
}

}  // namespace detail

/// Noise for an explicit stream key.
inline NoiseDraw draw_noise_keyed(std::uint64_t key, std::uint64_t t, const ChannelSpec& spec) {
    NoiseDraw n;
    n.source_t = t;
    n.key = key;
    detail::fill_symbols(n.symbols, spec.noise_len, key, spec);
    return n;
}

/// N_self(t): keyed by (seed, digest of the agent's previous output, t).
inline NoiseDraw draw_self_noise(const Meaning& prev, std::uint64_t t, const ChannelSpec& spec) {
    return draw_noise_keyed(mix_keys({spec.seed, digest(prev), t}), t, spec);
}

/// Psi without the masking valve.
inline Meaning psi_base(const NoiseDraw& n, const ContextState& c, const ChannelSpec& spec) {
    Meaning m;
    m.alphabet = spec.alphabet;
    switch (spec.psi) {
    case PsiKind::Identity:
        m.symbols = n.symbols;
        break;
    case PsiKind::TaggedInjective: {
        m.symbols = n.symbols;
        const std::uint64_t tag = digest(c);
        for (std::size_t i = 0; i < spec.digest_bits; ++i)
            m.symbols.push_back(static_cast<Symbol>((tag >> (i % 64)) & 1U));
        break;
    }
    case PsiKind::Constant:
        m = spec.constant_meaning;
        break;
    case PsiKind::Gated: {
        const std::size_t len = c.norm <= spec.gate_threshold ? spec.gain_lo : spec.gain_hi;
        detail::fill_symbols(m.symbols, len, mix_keys({n.key, detail::kGateSalt}), spec);
        break;
    }
    }
    return m;
}

/// Schedule index used for a draw taken at loop step t (schedules start at 1).
constexpr std::uint64_t schedule_index(std::uint64_t t) noexcept { return t + 1; }

inline bool mask_fires(const NoiseDraw& n, const ChannelSpec& spec) {
    const double eps = epsilon_at(schedule_index(n.source_t), spec.mask_rate);
    if (eps <= 0.0) return false;
    return Stream(mix_keys({n.key, detail::kMaskSalt})).uniform() < eps;
}

/// Psi followed by the masking valve.
inline Meaning apply_psi(const NoiseDraw& n, const ContextState& c, const ChannelSpec& spec) {
    if (mask_fires(n, spec)) {
        Meaning empty;
        empty.alphabet = spec.alphabet;
        return empty;
    }
    return psi_base(n, c, spec);
}

/// Empirical pairwise collision probability of Psi (valve included) over i.i.d. noise pairs.
inline double estimate_collision_rate(const ChannelSpec& spec, const ContextState& c, std::size_t trials,
                                      std::uint64_t seed) {
    require(trials >= 1, ErrorCode::InvalidArgument, "trials must be >= 1");
    std::size_t collisions = 0;
    for (std::size_t i = 0; i < trials; ++i) {
        const auto n1 = draw_noise_keyed(mix_keys({seed, i, 1}), 0, spec);
        const auto n2 = draw_noise_keyed(mix_keys({seed, i, 2}), 0, spec);
        collisions += apply_psi(n1, c, spec).symbols == apply_psi(n2, c, spec).symbols;
    }
    return static_cast<double>(collisions) / static_cast<double>(trials);
}

/// Plug-in Shannon entropy (bits) of the empirical noise distribution.
inline double entropy_estimate(const ChannelSpec& spec, std::size_t samples, std::uint64_t seed) {
    require(samples >= 1, ErrorCode::InvalidArgument, "samples must be >= 1");
    std::unordered_map<std::string, std::size_t> counts;
    for (std::size_t i = 0; i < samples; ++i) {
        const auto n = draw_noise_keyed(mix_keys({seed, i}), 0, spec);
        ++counts[std::string(n.symbols.begin(), n.symbols.end())];
    }
    double h = 0.0;
    for (const auto& [_, count] : counts) {
        const double p = static_cast<double>(count) / static_cast<double>(samples);
        h -= p * std::log2(p);
    }
    return h == 0.0 ? 0.0 : h;
}

}  // namespace n2m
