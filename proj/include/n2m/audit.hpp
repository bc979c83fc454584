#pragma once

// Empirical audit of the measure axioms:
//   (O1) Omega(m) >= 0
//   (O2) Omega(m1||m2) >= Omega(m1) + Omega(m2)
//   (O3) |Omega(m1) - Omega(m2)| <= L d(m1, m2)
//   MII monotonicity   Omega(m1||m2) >= Omega(m1)
//   MII extension      Omega(m||empty) == Omega(m)
// Violations are data; every stored counterexample replays to a violation.

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "n2m/measures.hpp"
#include "n2m/random.hpp"

namespace n2m {

enum class Axiom { O1, O2, O3, MiiMonotone, MiiExtension };

constexpr std::string_view to_string(Axiom a) {
    switch (a) {
    case Axiom::O1: return "O1";
    case Axiom::O2: return "O2";
    case Axiom::O3: return "O3";
    case Axiom::MiiMonotone: return "MII_MONOTONE";
    case Axiom::MiiExtension: return "MII_EXTENSION";
    }
    return "?";
}

struct Counterexample {
    Axiom axiom = Axiom::O1;
    std::vector<Meaning> inputs;
    std::vector<double> values;
};

struct AuditReport {
    std::size_t samples = 0;
    std::size_t o1_violations = 0;
    std::size_t o2_violations = 0;
    std::size_t o3_violations = 0;
    std::size_t mii_monotone_violations = 0;
    std::size_t mii_extension_violations = 0;
    double worst_lipschitz_ratio = 0.0;
    std::vector<Counterexample> counterexamples;

    bool clean() const noexcept {
        return o1_violations + o2_violations + o3_violations + mii_monotone_violations +
                   mii_extension_violations ==
               0;
    }

    bool has_counterexample(Axiom axiom, std::span<const std::string> inputs) const {
        for (const auto& c : counterexamples) {
            if (c.axiom != axiom || c.inputs.size() != inputs.size()) continue;
            bool same = true;
            for (std::size_t i = 0; i < inputs.size(); ++i) same = same && c.inputs[i].str() == inputs[i];
            if (same) return true;
        }
        return false;
    }
};

using Sampler = std::function<Meaning(Stream&)>;

/// Uniform binary strings with uniform length in [0, max_len]. When tags > 0
/// each meaning carries a uniform tag in [0, tags).
inline Sampler uniform_sampler(std::size_t max_len, std::uint32_t tags = 0) {
    return [max_len, tags](Stream& rng) {
        Meaning m;
        const auto len = rng.below(max_len + 1);
        m.symbols.resize(len);
        for (auto& s : m.symbols) s = static_cast<Symbol>(rng.bit());
        if (tags > 0) m.tag = static_cast<std::uint32_t>(rng.below(tags));
        return m;
    };
}

struct AuditOptions {
    std::size_t exhaustive_len = 3;       // all pairs of binary strings up to this length first
    std::size_t max_counterexamples = 64;  // per axiom
    double tolerance = 1e-9;               // relative
};

namespace detail {

inline bool below(double lhs, double rhs, double tol) {
    return lhs < rhs - tol * std::max({1.0, std::abs(lhs), std::abs(rhs)});
}

inline std::vector<Meaning> all_binary_strings(std::size_t max_len) {
    std::vector<Meaning> out;
    for (std::size_t len = 0; len <= max_len; ++len) {
        for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << len); ++bits) {
            Meaning m;
            for (std::size_t i = 0; i < len; ++i)
                m.symbols.push_back(static_cast<Symbol>((bits >> (len - 1 - i)) & 1U));
            out.push_back(std::move(m));
        }
    }
    return out;
}

}  // namespace detail

/// Re-evaluates a counterexample; true iff it still violates its axiom.
inline bool replay(const MeasureSpec& spec, const Counterexample& c, double tol = 1e-9) {
    const auto& in = c.inputs;
    switch (c.axiom) {
    case Axiom::O1:
        return evaluate(spec, std::span<const Meaning>(in)) < 0.0;
    case Axiom::O2:
        return detail::below(evaluate(spec, in[0], in[1]),
                             evaluate(spec, in[0]) + evaluate(spec, in[1]), tol);
    case Axiom::O3: {
        if (!spec.lipschitz_bound) return false;
        const double diff = std::abs(evaluate(spec, in[0]) - evaluate(spec, in[1]));
        const double bound = *spec.lipschitz_bound * static_cast<double>(symbol_distance(in[0], in[1]));
        return detail::below(bound, diff, tol);
    }
    case Axiom::MiiMonotone:
        return detail::below(evaluate(spec, in[0], in[1]), evaluate(spec, in[0]), tol);
    case Axiom::MiiExtension: {
        Meaning empty;
        empty.alphabet = in[0].alphabet;
        const double a = evaluate(spec, in[0], empty);
        const double b = evaluate(spec, in[0]);
        return detail::below(a, b, tol) || detail::below(b, a, tol);
    }
    }
    return false;
}

class AxiomAuditor {
public:
    AxiomAuditor(const MeasureSpec& spec, AuditOptions options) : spec_(spec), options_(options) {}

    void check(const Meaning& m1, const Meaning& m2, const Meaning& m1_edited) {
        ++report_.samples;
        const double a = evaluate(spec_, m1);
        const double b = evaluate(spec_, m2);
        const double ab = evaluate(spec_, m1, m2);
        if (a < 0 || b < 0 || ab < 0) {
            ++report_.o1_violations;
            const Meaning& bad = a < 0 ? m1 : (b < 0 ? m2 : m1);
            record(Axiom::O1, {bad}, {a < 0 ? a : b});
        }
        if (detail::below(ab, a + b, options_.tolerance)) {
            ++report_.o2_violations;
            record(Axiom::O2, {m1, m2}, {ab, a, b});
        }
        bool o3_bad = false;
        for (const Meaning* other : {&m2, &m1_edited}) {
            const double d = static_cast<double>(symbol_distance(m1, *other));
            const double diff = std::abs(a - evaluate(spec_, *other));
            if (d > 0) report_.worst_lipschitz_ratio = std::max(report_.worst_lipschitz_ratio, diff / d);
            if (spec_.lipschitz_bound && detail::below(*spec_.lipschitz_bound * d, diff, options_.tolerance)) {
                if (!o3_bad) record(Axiom::O3, {m1, *other}, {diff, d});
                o3_bad = true;
            }
        }
        report_.o3_violations += o3_bad;
        if (detail::below(ab, a, options_.tolerance)) {
            ++report_.mii_monotone_violations;
            record(Axiom::MiiMonotone, {m1, m2}, {ab, a});
        }
        Meaning empty;
        empty.alphabet = m1.alphabet;
        const double ext = evaluate(spec_, m1, empty);
        if (detail::below(ext, a, options_.tolerance) || detail::below(a, ext, options_.tolerance)) {
            ++report_.mii_extension_violations;
            record(Axiom::MiiExtension, {m1}, {ext, a});
        }
    }

    AuditReport take() { return std::move(report_); }

private:
    void record(Axiom axiom, std::vector<Meaning> inputs, std::vector<double> values) {
        std::size_t stored = 0;
        for (const auto& c : report_.counterexamples) stored += c.axiom == axiom;
        if (stored >= options_.max_counterexamples) return;
        report_.counterexamples.push_back({axiom, std::move(inputs), std::move(values)});
    }

    const MeasureSpec& spec_;
    AuditOptions options_;
    AuditReport report_;
};

inline Meaning flip_random(const Meaning& m, Stream& rng) {
    Meaning out = m;
    if (out.empty()) return out;
    const auto flips = 1 + rng.below(std::min<std::size_t>(3, out.norm()));
    for (std::uint64_t f = 0; f < flips; ++f) {
        auto& s = out.symbols[rng.below(out.norm())];
        s = static_cast<Symbol>((s + 1 + rng.below(out.alphabet - 1)) % out.alphabet);
    }
    return out;
}

/// Audits a measure: an exhaustive pass over all pairs of short binary strings
/// (skipped for the declared-bonus measure, which needs tagged input), then
/// `samples` random pairs from the sampler.
inline AuditReport audit_measure(const MeasureSpec& spec, const Sampler& sampler, std::size_t samples,
                                 std::uint64_t seed, AuditOptions options = {}) {
    require(samples > 0, ErrorCode::InvalidArgument, "audit needs samples > 0");
    AxiomAuditor auditor(spec, options);
    Stream rng(mix_keys({seed, 0xA0D17ULL}));
    if (spec.kind != MeasureKind::DeclaredBonus && options.exhaustive_len > 0) {
        const auto strings = detail::all_binary_strings(options.exhaustive_len);
        for (const auto& m1 : strings)
            for (const auto& m2 : strings) auditor.check(m1, m2, flip_random(m1, rng));
    }
    for (std::size_t i = 0; i < samples; ++i) {
        const Meaning m1 = sampler(rng);
        const Meaning m2 = sampler(rng);
        auditor.check(m1, m2, flip_random(m1, rng));
    }
    return auditor.take();
}

// ---------------------------------------------------------------------------
// Targeted audits

/// Non-empty strings up to max_len for which the compression gain is below 1.
inline std::vector<Meaning> compression_floor_counterexamples(std::size_t max_len) {
    std::vector<Meaning> out;
    for (auto& m : detail::all_binary_strings(max_len))
        if (!m.empty() && omega_cg(m) < 1.0) out.push_back(std::move(m));
    return out;
}

struct ReuseAudit {
    std::size_t samples = 0;
    std::size_t violations = 0;
    std::vector<std::pair<Meaning, Meaning>> counterexamples;
};

/// Checks coded_bits(m1||m2) <= coded_bits(m1) + coded_bits(m2) on random pairs.
inline ReuseAudit audit_lz_reuse(const Sampler& sampler, std::size_t samples, std::uint64_t seed,
                                 std::size_t max_counterexamples = 32) {
    ReuseAudit out;
    Stream rng(mix_keys({seed, 0x1278ULL}));
    for (std::size_t i = 0; i < samples; ++i) {
        const Meaning a = sampler(rng);
        const Meaning b = sampler(rng);
        ++out.samples;
        const auto joint = lz78_parse(concat(a, b)).coded_bits;
        if (joint > lz78_parse(a).coded_bits + lz78_parse(b).coded_bits) {
            ++out.violations;
            if (out.counterexamples.size() < max_counterexamples) out.counterexamples.emplace_back(a, b);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json meaning_to_json(const Meaning& m) {
    if (!m.tag) return m.str();
    return {{"symbols", m.str()}, {"tag", *m.tag}};
}

inline nlohmann::json to_json(const AuditReport& r) {
    nlohmann::json cx = nlohmann::json::array();
    for (const auto& c : r.counterexamples) {
        nlohmann::json inputs = nlohmann::json::array();
        for (const auto& m : c.inputs) inputs.push_back(meaning_to_json(m));
        cx.push_back({{"axiom", to_string(c.axiom)}, {"inputs", inputs}, {"values", c.values}});
    }
    return {
        {"samples", r.samples},
        {"o1_violations", r.o1_violations},
        {"o2_violations", r.o2_violations},
        {"o3_violations", r.o3_violations},
        {"mii_monotone_violations", r.mii_monotone_violations},
        {"mii_extension_violations", r.mii_extension_violations},
        {"worst_lipschitz_ratio", r.worst_lipschitz_ratio},
        {"counterexamples", cx},
    };
}

}  // namespace n2m
