#pragma once

// Information-integration measures. Every measure is a pure function of the
// meaning (or of an ordered list of meaning parts, for the order-aware and
// declared-bonus measures).

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "n2m/error.hpp"
#include "n2m/lz78.hpp"
#include "n2m/meaning.hpp"

namespace n2m {

enum class MeasureKind {
    CompressionGain,
    Length,
    PowerLaw,
    Skl,
    Fisher,
    DeclaredBonus,
    LinearCombo,
    UnitFloor,
};

/// Per-tag base gains and the pairwise bonus matrix beta[i][j] >= 0 (zero diagonal).
struct BonusTable {
    std::vector<double> base_gain;
    std::vector<std::vector<double>> beta;

    std::size_t size() const noexcept { return base_gain.size(); }

    void validate() const {
        const std::size_t k = base_gain.size();
        require(beta.size() == k, ErrorCode::ValidationError, "beta matrix must be k x k");
        for (std::size_t i = 0; i < k; ++i) {
            require(base_gain[i] >= 0, ErrorCode::ValidationError, "base gains must be >= 0");
            require(beta[i].size() == k, ErrorCode::ValidationError, "beta matrix must be k x k");
            for (std::size_t j = 0; j < k; ++j) {
                require(beta[i][j] >= 0, ErrorCode::ValidationError,
                        "beta_ij >= 0 violated at (" + std::to_string(i + 1) + "," +
                            std::to_string(j + 1) + ")");
            }
            require(beta[i][i] == 0, ErrorCode::ValidationError, "beta diagonal must be zero");
        }
    }

    friend bool operator==(const BonusTable&, const BonusTable&) = default;
};

struct MeasureSpec {
    MeasureKind kind = MeasureKind::Length;
    double exponent = 2.0;   // PowerLaw
    double theta0 = 0.5;     // Fisher
    double smoothing = 1.0;  // Skl pseudo-count per symbol
    BonusTable bonus;        // DeclaredBonus
    double alpha = 1.0;      // LinearCombo weights
    double beta = 1.0;
    std::vector<MeasureSpec> children;  // LinearCombo: 2, UnitFloor: 1
    std::optional<double> lipschitz_bound;  // nullopt = unknown

    friend bool operator==(const MeasureSpec&, const MeasureSpec&) = default;

    static MeasureSpec length() {
        MeasureSpec s;
        s.kind = MeasureKind::Length;
        s.lipschitz_bound = 1.0;
        return s;
    }

    static MeasureSpec compression_gain() {
        MeasureSpec s;
        s.kind = MeasureKind::CompressionGain;
        s.lipschitz_bound = 1.0;  // claimed; the audit checks it
        return s;
    }

    static MeasureSpec power_law(double exponent) {
        require(exponent > 1.0, ErrorCode::InvalidArgument, "power-law exponent must be > 1");
        MeasureSpec s;
        s.kind = MeasureKind::PowerLaw;
        s.exponent = exponent;
        return s;
    }

    static MeasureSpec skl(double smoothing = 1.0) {
        require(smoothing > 0, ErrorCode::InvalidArgument, "sKL smoothing must be > 0");
        MeasureSpec s;
        s.kind = MeasureKind::Skl;
        s.smoothing = smoothing;
        return s;
    }

    static MeasureSpec fisher(double theta0) {
        require(theta0 > 0 && theta0 < 1, ErrorCode::InvalidArgument, "theta0 must lie in (0,1)");
        MeasureSpec s;
        s.kind = MeasureKind::Fisher;
        s.theta0 = theta0;
        return s;
    }

    static MeasureSpec declared(BonusTable table) {
        table.validate();
        MeasureSpec s;
        s.kind = MeasureKind::DeclaredBonus;
        s.bonus = std::move(table);
        return s;
    }

    /// max{1, inner(m)} for non-empty m, 0 for the empty meaning.
    static MeasureSpec unit_floor(MeasureSpec inner) {
        MeasureSpec s;
        s.kind = MeasureKind::UnitFloor;
        s.lipschitz_bound = inner.lipschitz_bound;
        s.children.push_back(std::move(inner));
        return s;
    }
};

/// alpha * s1 + beta * s2, with Lipschitz bound alpha*L1 + beta*L2 when both are known.
inline MeasureSpec combine_measures(double alpha, MeasureSpec s1, double beta, MeasureSpec s2) {
    require(alpha > 0 && beta > 0, ErrorCode::InvalidArgument,
            "linear combination coefficients must be > 0");
    MeasureSpec s;
    s.kind = MeasureKind::LinearCombo;
    s.alpha = alpha;
    s.beta = beta;
    if (s1.lipschitz_bound && s2.lipschitz_bound)
        s.lipschitz_bound = alpha * *s1.lipschitz_bound + beta * *s2.lipschitz_bound;
    s.children.push_back(std::move(s1));
    s.children.push_back(std::move(s2));
    return s;
}

// ---------------------------------------------------------------------------
// Individual measures

inline double omega_length(const Meaning& m) noexcept { return static_cast<double>(m.norm()); }

inline double raw_bits(const Meaning& m) noexcept {
    return static_cast<double>(m.norm()) * bits_per_symbol(m.alphabet);
}

/// max{0, |m|_raw - |m|_lz}
inline double omega_cg(const Meaning& m) {
    const double lz = static_cast<double>(lz78_parse(m).coded_bits);
    return std::max(0.0, raw_bits(m) - lz);
}

inline double omega_power(const Meaning& m, double exponent) {
    require(exponent > 1.0, ErrorCode::InvalidArgument, "power-law exponent must be > 1");
    return std::pow(static_cast<double>(m.norm()), exponent);
}

/// Squared score of an i.i.d. Bernoulli(theta) model at theta0.
inline double omega_fisher(const Meaning& m, double theta0) {
    require(theta0 > 0 && theta0 < 1, ErrorCode::InvalidArgument, "theta0 must lie in (0,1)");
    require(m.alphabet == 2, ErrorCode::InvalidArgument, "Fisher measure needs binary meanings");
    double score = 0.0;
    for (Symbol s : m.symbols) score += s ? 1.0 / theta0 : -1.0 / (1.0 - theta0);
    return score * score;
}

using Distribution = std::map<std::string, double>;

namespace detail {

inline void check_distribution(const Distribution& p, const char* name) {
    double total = 0.0;
    for (const auto& [_, v] : p) {
        require(v >= 0 && std::isfinite(v), ErrorCode::InvalidArgument,
                std::string(name) + " has a negative or non-finite probability");
        total += v;
    }
    require(std::abs(total - 1.0) <= 1e-9, ErrorCode::InvalidArgument,
            std::string(name) + " does not sum to 1");
}

inline double prob(const Distribution& p, const std::string& key) {
    const auto it = p.find(key);
    return it == p.end() ? 0.0 : it->second;
}

}  // namespace detail

/// 1/2 [KL(p||q) + KL(q||p)] in nats. Throws SupportMismatch when either KL is infinite.
inline double omega_skl(const Distribution& p, const Distribution& q) {
    detail::check_distribution(p, "p");
    detail::check_distribution(q, "q");
    double kl_pq = 0.0;
    double kl_qp = 0.0;
    auto visit = [&](const std::string& key) {
        const double a = detail::prob(p, key);
        const double b = detail::prob(q, key);
        if (a == 0.0 && b == 0.0) return;
        require(a > 0.0 && b > 0.0, ErrorCode::SupportMismatch,
                "outcome '" + key + "' has zero mass under only one distribution");
        kl_pq += a * std::log(a / b);
        kl_qp += b * std::log(b / a);
    };
    for (const auto& [key, _] : p) visit(key);
    for (const auto& [key, _] : q)
        if (!p.contains(key)) visit(key);
    return std::max(0.0, 0.5 * (kl_pq + kl_qp));
}

/// Smoothed empirical symbol distribution of a symbol range.
inline Distribution symbol_distribution(std::span<const Symbol> symbols, std::uint8_t alphabet,
                                        double smoothing) {
    std::vector<double> counts(alphabet, smoothing);
    for (Symbol s : symbols) counts[s] += 1.0;
    const double total = static_cast<double>(symbols.size()) + smoothing * alphabet;
    Distribution d;
    for (std::size_t a = 0; a < alphabet; ++a) d[std::string(1, kSymbolChars[a])] = counts[a] / total;
    return d;
}

/// Ordered-pair sKL between the smoothed symbol distributions of two meanings.
inline double omega_skl_pair(const Meaning& first, const Meaning& second, double smoothing) {
    return omega_skl(symbol_distribution(first.symbols, first.alphabet, smoothing),
                     symbol_distribution(second.symbols, second.alphabet, smoothing));
}

/// A single meaning is read as the ordered pair of its two halves.
inline double omega_skl_single(const Meaning& m, double smoothing) {
    const std::span<const Symbol> all(m.symbols);
    const std::size_t half = all.size() / 2;
    return omega_skl(symbol_distribution(all.first(half), m.alphabet, smoothing),
                     symbol_distribution(all.subspan(half), m.alphabet, smoothing));
}

/// Declared-bonus measure over tagged parts. Empty parts are ignored. For the
/// remaining parts S with leading tag i:
///   Omega = (1 + mean_{j in S, j != i} beta_ij) * sum_{s in S} base(s)
/// which gives (1 + beta_ij)(base_i + base_j) on pairs and (1 + beta) * sum on
/// uniform tables.
inline double omega_declared(std::span<const Meaning> parts, const BonusTable& table) {
    std::vector<std::uint32_t> tags;
    for (const auto& part : parts) {
        if (part.empty()) continue;
        require(part.tag.has_value(), ErrorCode::UnknownTag, "declared measure needs tagged meanings");
        require(*part.tag < table.size(), ErrorCode::UnknownTag,
                "tag " + std::to_string(*part.tag) + " is not in the bonus table");
        tags.push_back(*part.tag);
    }
    if (tags.empty()) return 0.0;
    double total = 0.0;
    for (auto tag : tags) total += table.base_gain[tag];
    double bonus = 0.0;
    std::size_t others = 0;
    for (std::size_t s = 1; s < tags.size(); ++s) {
        bonus += table.beta[tags.front()][tags[s]];
        ++others;
    }
    const double mean_bonus = others ? bonus / static_cast<double>(others) : 0.0;
    return (1.0 + mean_bonus) * total;
}

inline double omega_declared(const Meaning& m, const BonusTable& table) {
    return omega_declared(std::span<const Meaning>(&m, 1), table);
}

// ---------------------------------------------------------------------------
// Dispatch

namespace detail {

inline Meaning flatten(std::span<const Meaning> parts) {
    Meaning out;
    if (!parts.empty()) out.alphabet = parts.front().alphabet;
    for (const auto& p : parts) out = concat(out, p);
    if (parts.size() == 1) out.tag = parts.front().tag;
    return out;
}

}  // namespace detail

/// Omega of the concatenation parts[0] || parts[1] || ...
inline double evaluate(const MeasureSpec& spec, std::span<const Meaning> parts) {
    switch (spec.kind) {
    case MeasureKind::DeclaredBonus:
        return omega_declared(parts, spec.bonus);
    case MeasureKind::Skl:
        if (parts.size() == 2) return omega_skl_pair(parts[0], parts[1], spec.smoothing);
        return omega_skl_single(detail::flatten(parts), spec.smoothing);
    case MeasureKind::LinearCombo:
        return spec.alpha * evaluate(spec.children.at(0), parts) +
               spec.beta * evaluate(spec.children.at(1), parts);
    case MeasureKind::UnitFloor: {
        const double inner = evaluate(spec.children.at(0), parts);
        bool empty = true;
        for (const auto& p : parts) empty = empty && p.empty();
        return empty ? 0.0 : std::max(1.0, inner);
    }
    default:
        break;
    }
    const Meaning m = detail::flatten(parts);
    switch (spec.kind) {
    case MeasureKind::CompressionGain: return omega_cg(m);
    case MeasureKind::Length: return omega_length(m);
    case MeasureKind::PowerLaw: return omega_power(m, spec.exponent);
    case MeasureKind::Fisher: return omega_fisher(m, spec.theta0);
    default: break;
    }
    throw Error(ErrorCode::InvalidArgument, "unhandled measure kind");
}

inline double evaluate(const MeasureSpec& spec, const Meaning& m) {
    return evaluate(spec, std::span<const Meaning>(&m, 1));
}

inline double evaluate(const MeasureSpec& spec, const Meaning& a, const Meaning& b) {
    const Meaning parts[2] = {a, b};
    return evaluate(spec, std::span<const Meaning>(parts));
}

}  // namespace n2m
