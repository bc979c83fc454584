#pragma once

// Scenario files: INI sections, one scenario per section, plus a top-level
// `schema_version`. Sweeps are `sweep.<key> = v1, v2, ...` and expand to the
// cartesian product in key order.

#include <algorithm>
#include <cstdint>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "n2m/engine.hpp"
#include "n2m/measure_expr.hpp"
#include "n2m/swarm.hpp"

namespace n2m {

inline constexpr int kSchemaVersion = 1;

enum class ScenarioKind { Single, Swarm, AppendixC, Audit, GammaStar, Conjecture };

struct AppendixCSpec {
    bool verbatim = true;
    bool cumulative = true;

    friend bool operator==(const AppendixCSpec&, const AppendixCSpec&) = default;
};

struct AuditSpec {
    std::size_t samples = 10000;
    std::size_t max_len = 16;
    std::size_t floor_len = 8;  // compression-floor scan length

    friend bool operator==(const AuditSpec&, const AuditSpec&) = default;
};

struct GammaStarSpec {
    double lo = 1.0;
    double hi = 100.0;
    std::size_t iterations = 20;
    std::size_t mc_samples = 16;

    friend bool operator==(const GammaStarSpec&, const GammaStarSpec&) = default;
};

enum class BudgetBinding { Gamma, Window };

struct ConjectureSpec {
    bool swarm_model = false;
    std::vector<double> budgets;
    BudgetBinding binding = BudgetBinding::Gamma;

    friend bool operator==(const ConjectureSpec&, const ConjectureSpec&) = default;
};

struct Outputs {
    bool csv = true;
    bool json = true;
    bool svg = true;

    friend bool operator==(const Outputs&, const Outputs&) = default;
};

struct Scenario {
    std::string name;
    ScenarioKind kind = ScenarioKind::Single;
    RunConfig run;      // single agent, or the per-agent template of a swarm
    SwarmSpec swarm;
    AppendixCSpec appendix;
    AuditSpec audit;
    GammaStarSpec gamma_star;
    ConjectureSpec conjecture;
    std::size_t repeat = 1;
    std::uint64_t seed = 1;
    Outputs outputs;
    std::vector<std::string> checks;
    std::optional<double> crossing_target;
    std::vector<std::pair<std::string, std::vector<std::string>>> sweep;

    bool uses_swarm() const noexcept {
        return kind == ScenarioKind::Swarm || (kind == ScenarioKind::Conjecture && conjecture.swarm_model);
    }

    friend bool operator==(const Scenario&, const Scenario&) = default;
};

// ---------------------------------------------------------------------------
// Value helpers

namespace detail {

inline std::string trim(std::string_view s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return std::string(s.substr(a, b - a));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t p = s.find(sep, start);
        out.push_back(trim(s.substr(start, p == std::string_view::npos ? std::string_view::npos : p - start)));
        if (p == std::string_view::npos) break;
        start = p + 1;
    }
    if (out.size() == 1 && out[0].empty()) out.clear();
    return out;
}

inline std::string join(const std::vector<std::string>& xs, const char* sep = ", ") {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += sep;
        out += xs[i];
    }
    return out;
}

struct FieldError {
    std::string why;
};

inline double to_double(const std::string& v) {
    double x = 0;
    if (!parse_number(v, x)) throw FieldError{"expected a number, got '" + v + "'"};
    return x;
}

inline std::uint64_t to_uint(const std::string& v) {
    if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
        throw FieldError{"expected a non-negative integer, got '" + v + "'"};
    try {
        return std::stoull(v);
    } catch (const std::exception&) {
        throw FieldError{"integer out of range: '" + v + "'"};
    }
}

inline bool to_bool(const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw FieldError{"expected true or false, got '" + v + "'"};
}

inline std::vector<double> to_doubles(const std::string& v) {
    std::vector<double> out;
    for (const auto& p : split(v, ',')) out.push_back(to_double(p));
    return out;
}

inline std::string from_doubles(const std::vector<double>& xs) {
    std::vector<std::string> parts;
    for (double x : xs) parts.push_back(format_number(x));
    return join(parts);
}

template <class E, std::size_t N>
E to_enum(const std::string& v, const std::pair<E, const char*> (&names)[N]) {
    for (const auto& [e, n] : names)
        if (v == n) return e;
    std::string allowed;
    for (const auto& [e, n] : names) allowed += std::string(allowed.empty() ? "" : "|") + n;
    throw FieldError{"expected one of " + allowed + ", got '" + v + "'"};
}

template <class E, std::size_t N>
std::string from_enum(E e, const std::pair<E, const char*> (&names)[N]) {
    for (const auto& [k, n] : names)
        if (k == e) return n;
    return "?";
}

inline constexpr std::pair<ScenarioKind, const char*> kKindNames[] = {
    {ScenarioKind::Single, "single"},       {ScenarioKind::Swarm, "swarm"},
    {ScenarioKind::AppendixC, "appendix_c"}, {ScenarioKind::Audit, "audit"},
    {ScenarioKind::GammaStar, "gamma_star"}, {ScenarioKind::Conjecture, "conjecture"},
};
inline constexpr std::pair<PsiKind, const char*> kPsiNames[] = {
    {PsiKind::Identity, "identity"}, {PsiKind::TaggedInjective, "tagged"},
    {PsiKind::Constant, "constant"}, {PsiKind::Gated, "gated"},
};
inline constexpr std::pair<ScheduleKind, const char*> kScheduleKindNames[] = {
    {ScheduleKind::Constant, "constant"}, {ScheduleKind::PowerLaw, "power_law"},
};
inline constexpr std::pair<UpdateKind, const char*> kUpdateNames[] = {
    {UpdateKind::Overwrite, "overwrite"},          {UpdateKind::Append, "append"},
    {UpdateKind::DeltaMonotone, "delta_monotone"}, {UpdateKind::Sublinear, "sublinear"},
    {UpdateKind::Windowed, "windowed"},
};
inline constexpr std::pair<SublinearKind, const char*> kSublinearNames[] = {
    {SublinearKind::Sqrt, "sqrt"}, {SublinearKind::Log1p, "log1p"},
};
inline constexpr std::pair<ContextMode, const char*> kModeNames[] = {
    {ContextMode::Abstract, "abstract"}, {ContextMode::Concrete, "concrete"},
};
inline constexpr std::pair<CostVariant, const char*> kCostNames[] = {
    {CostVariant::Full, "full"}, {CostVariant::LowRank, "low_rank"}, {CostVariant::LogRank, "log_rank"},
};
inline constexpr std::pair<Schedule, const char*> kSwarmScheduleNames[] = {
    {Schedule::Synchronous, "sync"}, {Schedule::BernoulliAsync, "async"},
};
inline constexpr std::pair<Coupling, const char*> kCouplingNames[] = {
    {Coupling::Broadcast, "broadcast"}, {Coupling::Relayed, "relayed"},
};
inline constexpr std::pair<BudgetBinding, const char*> kBindingNames[] = {
    {BudgetBinding::Gamma, "gamma"}, {BudgetBinding::Window, "window"},
};

// kind masks
inline constexpr unsigned kSingle = 1U << 0, kSwarmK = 1U << 1, kAppendix = 1U << 2, kAudit = 1U << 3,
                          kGammaStar = 1U << 4, kConjecture = 1U << 5;
inline constexpr unsigned kAll = 0x3F;
inline constexpr unsigned kRun = kSingle | kSwarmK | kGammaStar | kConjecture;

inline unsigned kind_bit(ScenarioKind k) { return 1U << static_cast<unsigned>(k); }

using Setter = std::function<void(Scenario&, const std::string&)>;
using Getter = std::function<std::optional<std::string>(const Scenario&)>;

struct KeyDef {
    const char* key;
    unsigned kinds;
    Setter set;
    Getter get;
};

inline std::string num(double x) { return format_number(x); }
inline std::string num(std::uint64_t x) { return std::to_string(x); }

inline std::string symbols_text(const std::vector<Symbol>& s) {
    std::string out;
    for (Symbol x : s) out += kSymbolChars[x];
    return out;
}

inline std::vector<Symbol> parse_symbols(const std::string& text, std::uint8_t alphabet) {
    try {
        return Meaning::parse(text, alphabet).symbols;
    } catch (const Error& e) {
        throw FieldError{e.detail()};
    }
}

inline std::string beta_text(const std::vector<std::vector<double>>& b) {
    std::vector<std::string> rows;
    for (const auto& row : b) {
        std::vector<std::string> cells;
        for (double x : row) cells.push_back(format_number(x));
        rows.push_back(join(cells, " "));
    }
    return join(rows, "; ");
}

inline std::vector<std::vector<double>> parse_beta(const std::string& v) {
    std::vector<std::vector<double>> out;
    for (const auto& row : split(v, ';')) {
        std::vector<double> r;
        std::istringstream ss(row);
        std::string cell;
        while (ss >> cell) r.push_back(to_double(cell));
        out.push_back(std::move(r));
    }
    return out;
}

/// Every recognised key, in application order (later keys may depend on earlier ones).
inline const std::vector<KeyDef>& key_table() {
    static const std::vector<KeyDef> table = [] {
        std::vector<KeyDef> t;
        auto add = [&](const char* key, unsigned kinds, Setter set, Getter get) {
            t.push_back({key, kinds, std::move(set), std::move(get)});
        };
        auto swarm_only = [](const Scenario& s) { return s.uses_swarm(); };
        // ---- common
        add("repeat", kAll, [](Scenario& s, const std::string& v) { s.repeat = to_uint(v); },
            [](const Scenario& s) { return num(static_cast<std::uint64_t>(s.repeat)); });
        add("seed", kAll, [](Scenario& s, const std::string& v) { s.seed = to_uint(v); },
            [](const Scenario& s) { return num(s.seed); });
        add("outputs", kAll,
            [](Scenario& s, const std::string& v) {
                s.outputs = Outputs{false, false, false};
                for (const auto& o : split(v, ',')) {
                    if (o == "csv") s.outputs.csv = true;
                    else if (o == "json") s.outputs.json = true;
                    else if (o == "svg") s.outputs.svg = true;
                    else throw FieldError{"unknown output '" + o + "' (csv, json, svg)"};
                }
            },
            [](const Scenario& s) {
                std::vector<std::string> o;
                if (s.outputs.csv) o.push_back("csv");
                if (s.outputs.json) o.push_back("json");
                if (s.outputs.svg) o.push_back("svg");
                return join(o);
            });
        add("checks", kAll, [](Scenario& s, const std::string& v) { s.checks = split(v, ','); },
            [](const Scenario& s) { return join(s.checks); });
        // ---- conjecture model first: it decides whether swarm keys apply
        add("model", kConjecture,
            [](Scenario& s, const std::string& v) {
                if (v != "single" && v != "swarm") throw FieldError{"expected single|swarm, got '" + v + "'"};
                s.conjecture.swarm_model = v == "swarm";
            },
            [](const Scenario& s) { return std::string(s.conjecture.swarm_model ? "swarm" : "single"); });
        add("budgets", kConjecture, [](Scenario& s, const std::string& v) { s.conjecture.budgets = to_doubles(v); },
            [](const Scenario& s) { return from_doubles(s.conjecture.budgets); });
        add("binding", kConjecture,
            [](Scenario& s, const std::string& v) { s.conjecture.binding = to_enum(v, kBindingNames); },
            [](const Scenario& s) { return from_enum(s.conjecture.binding, kBindingNames); });
        // ---- channel
        add("psi", kRun, [](Scenario& s, const std::string& v) { s.run.channel.psi = to_enum(v, kPsiNames); },
            [](const Scenario& s) { return from_enum(s.run.channel.psi, kPsiNames); });
        add("temperature", kRun, [](Scenario& s, const std::string& v) { s.run.channel.temperature = to_double(v); },
            [](const Scenario& s) { return num(s.run.channel.temperature); });
        add("noise_len", kRun, [](Scenario& s, const std::string& v) { s.run.channel.noise_len = to_uint(v); },
            [](const Scenario& s) { return num(static_cast<std::uint64_t>(s.run.channel.noise_len)); });
        add("alphabet", kRun,
            [](Scenario& s, const std::string& v) {
                const auto a = to_uint(v);
                if (a < 2 || a > kSymbolChars.size()) throw FieldError{"alphabet size must lie in [2, 36]"};
                s.run.channel.alphabet = static_cast<std::uint8_t>(a);
                s.run.channel.constant_meaning.alphabet = s.run.channel.alphabet;
            },
            [](const Scenario& s) { return num(static_cast<std::uint64_t>(s.run.channel.alphabet)); });
        add("constant_meaning", kRun,
            [](Scenario& s, const std::string& v) {
                s.run.channel.constant_meaning.symbols = parse_symbols(v, s.run.channel.alphabet);
            },
            [](const Scenario& s) -> std::optional<std::string> {
                if (s.run.channel.psi != PsiKind::Constant) return std::nullopt;
                return symbols_text(s.run.channel.constant_meaning.symbols);
            });
        add("gate_threshold", kRun, [](Scenario& s, const std::string& v) { s.run.channel.gate_threshold = to_double(v); },
            [](const Scenario& s) -> std::optional<std::string> {
                if (s.run.channel.psi != PsiKind::Gated) return std::nullopt;
                return num(s.run.channel.gate_threshold);
            });
        add("gain_lo", kRun, [](Scenario& s, const std::string& v) { s.run.channel.gain_lo = to_uint(v); },
            [](const Scenario& s) -> std::optional<std::string> {
                if (s.run.channel.psi != PsiKind::Gated) return std::nullopt;
                return num(static_cast<std::uint64_t>(s.run.channel.gain_lo));
            });
        add("gain_hi", kRun, [](Scenario& s, const std::string& v) { s.run.channel.gain_hi = to_uint(v); },
            [](const Scenario& s) -> std::optional<std::string> {
                if (s.run.channel.psi != PsiKind::Gated) return std::nullopt;
                return num(static_cast<std::uint64_t>(s.run.channel.gain_hi));
            });
        add("digest_bits", kRun, [](Scenario& s, const std::string& v) { s.run.channel.digest_bits = to_uint(v); },
            [](const Scenario& s) -> std::optional<std::string> {
                if (s.run.channel.psi != PsiKind::TaggedInjective) return std::nullopt;
                return num(static_cast<std::uint64_t>(s.run.channel.digest_bits));
            });
        add("mask_schedule", kRun,
            [](Scenario& s, const std::string& v) { s.run.channel.mask_rate.kind = to_enum(v, kScheduleKindNames); },
            [](const Scenario& s) { return from_enum(s.run.channel.mask_rate.kind, kScheduleKindNames); });
        add("mask_rate", kRun, [](Scenario& s, const std::string& v) { s.run.channel.mask_rate.eps0 = to_double(v); },
            [](const Scenario& s) { return num(s.run.channel.mask_rate.eps0); });
        add("mask_kappa", kRun, [](Scenario& s, const std::string& v) { s.run.channel.mask_rate.kappa = to_double(v); },
            [](const Scenario& s) -> std::optional<std::string> {
                if (s.run.channel.mask_rate.kind != ScheduleKind::PowerLaw) return std::nullopt;
                return num(s.run.channel.mask_rate.kappa);
            });
        add("mask_decay", kRun, [](Scenario& s, const std::string& v) { s.run.channel.mask_rate.decay = to_double(v); },
            [](const Scenario& s) -> std::optional<std::string> {
                if (s.run.channel.mask_rate.kind != ScheduleKind::PowerLaw) return std::nullopt;
                return num(s.run.channel.mask_rate.decay);
            });
        // ---- update rule
        add("update", kRun, [](Scenario& s, const std::string& v) { s.run.update.kind = to_enum(v, kUpdateNames); },
            [](const Scenario& s) { return from_enum(s.run.update.kind, kUpdateNames); });
        add("delta", kRun, [](Scenario& s, const std::string& v) { s.run.update.delta = to_double(v); },
            [](const Scenario& s) { return num(s.run.update.delta); });
        add("c1", kRun, [](Scenario& s, const std::string& v) { s.run.update.c1 = to_double(v); },
            [](const Scenario& s) { return num(s.run.update.c1); });
        add("c2", kRun, [](Scenario& s, const std::string& v) { s.run.update.c2 = to_double(v); },
            [](const Scenario& s) { return num(s.run.update.c2); });
        add("h", kRun, [](Scenario& s, const std::string& v) { s.run.update.h = to_enum(v, kSublinearNames); },
            [](const Scenario& s) -> std::optional<std::string> {
                if (s.run.update.kind != UpdateKind::Sublinear) return std::nullopt;
                return from_enum(s.run.update.h, kSublinearNames);
            });
        add("window", kRun, [](Scenario& s, const std::string& v) { s.run.update.window = to_uint(v); },
            [](const Scenario& s) -> std::optional<std::string> {
                if (s.run.update.kind != UpdateKind::Windowed) return std::nullopt;
                return num(static_cast<std::uint64_t>(s.run.update.window));
            });
        add("retain", kRun, [](Scenario& s, const std::string& v) { s.run.update.retain = to_uint(v); },
            [](const Scenario& s) -> std::optional<std::string> {
                if (s.run.update.kind != UpdateKind::Windowed) return std::nullopt;
                return num(static_cast<std::uint64_t>(s.run.update.retain));
            });
        add("skip_repeats", kRun, [](Scenario& s, const std::string& v) { s.run.update.skip_repeats = to_bool(v); },
            [](const Scenario& s) -> std::optional<std::string> {
                if (s.run.update.kind != UpdateKind::Append) return std::nullopt;
                return std::string(s.run.update.skip_repeats ? "true" : "false");
            });
        add("measure", kRun | kAudit,
            [](Scenario& s, const std::string& v) {
                try {
                    s.run.measure = parse_measure(v);
                } catch (const Error& e) {
                    throw FieldError{e.detail()};
                }
            },
            [](const Scenario& s) -> std::optional<std::string> {
                if (s.uses_swarm()) return std::nullopt;  // swarms use the declared-bonus measure
                return format_measure(s.run.measure);
            });
        add("gamma", kRun | kAppendix, [](Scenario& s, const std::string& v) { s.run.gamma = to_double(v); },
            [](const Scenario& s) { return num(s.run.gamma); });
        add("horizon", kRun | kAppendix, [](Scenario& s, const std::string& v) { s.run.horizon = to_uint(v); },
            [](const Scenario& s) { return num(static_cast<std::uint64_t>(s.run.horizon)); });
        add("budget_max_flops", kRun,
            [](Scenario& s, const std::string& v) {
                if (!s.run.budget_gate) s.run.budget_gate.emplace();
                s.run.budget_gate->max_flops = to_double(v);
            },
            [](const Scenario& s) -> std::optional<std::string> {
                if (!s.run.budget_gate || !s.run.budget_gate->max_flops) return std::nullopt;
                return num(*s.run.budget_gate->max_flops);
            });
        add("budget_max_norm", kRun,
            [](Scenario& s, const std::string& v) {
                if (!s.run.budget_gate) s.run.budget_gate.emplace();
                s.run.budget_gate->max_norm = to_double(v);
            },
            [](const Scenario& s) -> std::optional<std::string> {
                if (!s.run.budget_gate || !s.run.budget_gate->max_norm) return std::nullopt;
                return num(*s.run.budget_gate->max_norm);
            });
        // ---- initial context
        add("mode", kRun,
            [](Scenario& s, const std::string& v) {
                s.run.initial.mode = to_enum(v, kModeNames);
                if (s.run.initial.mode == ContextMode::Concrete) {
                    s.run.initial.norm = static_cast<double>(s.run.initial.symbols.size());
                } else {
                    s.run.initial.symbols.clear();
                }
            },
            [](const Scenario& s) { return from_enum(s.run.initial.mode, kModeNames); });
        add("initial_norm", kRun,
            [](Scenario& s, const std::string& v) {
                if (s.run.initial.mode == ContextMode::Concrete)
                    throw FieldError{"concrete contexts take initial_symbols, not initial_norm"};
                s.run.initial.norm = to_double(v);
            },
            [](const Scenario& s) -> std::optional<std::string> {
                if (s.run.initial.mode == ContextMode::Concrete) return std::nullopt;
                return num(s.run.initial.norm);
            });
        add("initial_symbols", kRun,
            [](Scenario& s, const std::string& v) {
                if (s.run.initial.mode != ContextMode::Concrete)
                    throw FieldError{"initial_symbols needs mode = concrete"};
                s.run.initial.symbols = parse_symbols(v, s.run.channel.alphabet);
                s.run.initial.norm = static_cast<double>(s.run.initial.symbols.size());
            },
            [](const Scenario& s) -> std::optional<std::string> {
                if (s.run.initial.mode != ContextMode::Concrete) return std::nullopt;
                return symbols_text(s.run.initial.symbols);
            });
        // ---- cost
        add("cost", kRun, [](Scenario& s, const std::string& v) { s.run.cost.variant = to_enum(v, kCostNames); },
            [](const Scenario& s) { return from_enum(s.run.cost.variant, kCostNames); });
        add("alpha_attn", kRun, [](Scenario& s, const std::string& v) { s.run.cost.alpha_attn = to_double(v); },
            [](const Scenario& s) { return num(s.run.cost.alpha_attn); });
        add("alpha_ffn", kRun, [](Scenario& s, const std::string& v) { s.run.cost.alpha_ffn = to_double(v); },
            [](const Scenario& s) { return num(s.run.cost.alpha_ffn); });
        add("rank", kRun, [](Scenario& s, const std::string& v) { s.run.cost.rank = to_uint(v); },
            [](const Scenario& s) -> std::optional<std::string> {
                if (s.run.cost.variant != CostVariant::LowRank) return std::nullopt;
                return num(static_cast<std::uint64_t>(s.run.cost.rank));
            });
        add("alpha_attn_r", kRun, [](Scenario& s, const std::string& v) { s.run.cost.alpha_attn_r = to_double(v); },
            [](const Scenario& s) -> std::optional<std::string> {
                if (s.run.cost.variant == CostVariant::Full) return std::nullopt;
                return num(s.run.cost.alpha_attn_r);
            });
        add("log_rank_coeff", kRun, [](Scenario& s, const std::string& v) { s.run.cost.log_rank_coeff = to_double(v); },
            [](const Scenario& s) -> std::optional<std::string> {
                if (s.run.cost.variant != CostVariant::LogRank) return std::nullopt;
                return num(s.run.cost.log_rank_coeff);
            });
        add("d_model", kRun, [](Scenario& s, const std::string& v) { s.run.cost.d_model = to_uint(v); },
            [](const Scenario& s) { return num(static_cast<std::uint64_t>(s.run.cost.d_model)); });
        add("crossing_target", kSingle, [](Scenario& s, const std::string& v) { s.crossing_target = to_double(v); },
            [](const Scenario& s) -> std::optional<std::string> {
                if (!s.crossing_target) return std::nullopt;
                return num(*s.crossing_target);
            });
        // ---- swarm
        add("agents", kSwarmK | kConjecture,
            [](Scenario& s, const std::string& v) {
                s.swarm.k = to_uint(v);
                if (s.swarm.k < 2 || s.swarm.k > 1024) throw FieldError{"agent count must lie in [2, 1024]"};
                s.swarm.beta.assign(s.swarm.k, std::vector<double>(s.swarm.k, 0.0));
                s.swarm.lambda.assign(s.swarm.k, 1.0);
            },
            [swarm_only](const Scenario& s) -> std::optional<std::string> {
                if (!swarm_only(s)) return std::nullopt;
                return num(static_cast<std::uint64_t>(s.swarm.k));
            });
        add("beta", kSwarmK | kConjecture,
            [](Scenario& s, const std::string& v) {
                const auto rows = parse_beta(v);
                if (rows.size() == 1 && rows[0].size() == 1) {
                    // scalar: uniform off-diagonal
                    s.swarm.beta.assign(s.swarm.k, std::vector<double>(s.swarm.k, rows[0][0]));
                    for (std::size_t i = 0; i < s.swarm.k; ++i) s.swarm.beta[i][i] = 0.0;
                } else {
                    s.swarm.beta = rows;
                }
            },
            [swarm_only](const Scenario& s) -> std::optional<std::string> {
                if (!swarm_only(s)) return std::nullopt;
                return beta_text(s.swarm.beta);
            });
        add("lambda", kSwarmK | kConjecture,
            [](Scenario& s, const std::string& v) {
                auto l = to_doubles(v);
                if (l.size() == 1) l.assign(s.swarm.k, l[0]);
                s.swarm.lambda = std::move(l);
            },
            [swarm_only](const Scenario& s) -> std::optional<std::string> {
                if (!swarm_only(s)) return std::nullopt;
                return from_doubles(s.swarm.lambda);
            });
        add("schedule", kSwarmK | kConjecture,
            [](Scenario& s, const std::string& v) { s.swarm.schedule = to_enum(v, kSwarmScheduleNames); },
            [swarm_only](const Scenario& s) -> std::optional<std::string> {
                if (!swarm_only(s)) return std::nullopt;
                return from_enum(s.swarm.schedule, kSwarmScheduleNames);
            });
        add("coupling", kSwarmK | kConjecture,
            [](Scenario& s, const std::string& v) { s.swarm.coupling = to_enum(v, kCouplingNames); },
            [swarm_only](const Scenario& s) -> std::optional<std::string> {
                if (!swarm_only(s)) return std::nullopt;
                return from_enum(s.swarm.coupling, kCouplingNames);
            });
        add("base_gain", kSwarmK | kConjecture, [](Scenario& s, const std::string& v) { s.swarm.base_gain = to_double(v); },
            [swarm_only](const Scenario& s) -> std::optional<std::string> {
                if (!swarm_only(s)) return std::nullopt;
                return num(s.swarm.base_gain);
            });
        // ---- one-bit prototype
        add("prototype_mode", kAppendix,
            [](Scenario& s, const std::string& v) {
                if (v == "both") s.appendix = {true, true};
                else if (v == "verbatim") s.appendix = {true, false};
                else if (v == "cumulative") s.appendix = {false, true};
                else throw FieldError{"expected verbatim|cumulative|both, got '" + v + "'"};
            },
            [](const Scenario& s) {
                return std::string(s.appendix.verbatim && s.appendix.cumulative ? "both"
                                   : s.appendix.verbatim                         ? "verbatim"
                                                                                 : "cumulative");
            });
        // ---- audit
        add("samples", kAudit, [](Scenario& s, const std::string& v) { s.audit.samples = to_uint(v); },
            [](const Scenario& s) { return num(static_cast<std::uint64_t>(s.audit.samples)); });
        add("max_len", kAudit, [](Scenario& s, const std::string& v) { s.audit.max_len = to_uint(v); },
            [](const Scenario& s) { return num(static_cast<std::uint64_t>(s.audit.max_len)); });
        add("floor_len", kAudit, [](Scenario& s, const std::string& v) { s.audit.floor_len = to_uint(v); },
            [](const Scenario& s) { return num(static_cast<std::uint64_t>(s.audit.floor_len)); });
        // ---- threshold search
        add("search_lo", kGammaStar, [](Scenario& s, const std::string& v) { s.gamma_star.lo = to_double(v); },
            [](const Scenario& s) { return num(s.gamma_star.lo); });
        add("search_hi", kGammaStar, [](Scenario& s, const std::string& v) { s.gamma_star.hi = to_double(v); },
            [](const Scenario& s) { return num(s.gamma_star.hi); });
        add("iterations", kGammaStar, [](Scenario& s, const std::string& v) { s.gamma_star.iterations = to_uint(v); },
            [](const Scenario& s) { return num(static_cast<std::uint64_t>(s.gamma_star.iterations)); });
        add("mc_samples", kGammaStar, [](Scenario& s, const std::string& v) { s.gamma_star.mc_samples = to_uint(v); },
            [](const Scenario& s) { return num(static_cast<std::uint64_t>(s.gamma_star.mc_samples)); });
        return t;
    }();
    return table;
}

inline const KeyDef* find_key(const std::string& key) {
    for (const auto& d : key_table())
        if (key == d.key) return &d;
    return nullptr;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Checks

struct CheckInfo {
    const char* name;
    unsigned kinds;
};

inline const std::vector<CheckInfo>& known_checks() {
    using namespace detail;
    static const std::vector<CheckInfo> checks = {
        {"drift", kSingle},
        {"bounded", kSingle},
        {"fixed_point", kSingle},
        {"no_fixed_point", kSingle},
        {"fixed_point_dichotomy", kSingle},
        {"classify", kSingle},
        {"bursts", kSingle},
        {"crossing", kSingle},
        {"collapse", kSingle},
        {"schedule_drift", kSingle},
        {"cost_slope", kSingle},
        {"collective_gain", kSwarmK},
        {"swarm_equality", kSwarmK},
        {"threshold_rescaling", kSwarmK},
        {"divergence", kSwarmK},
        {"prototype_shape", kAppendix},
        {"axioms_clean", kAudit},
        {"o1_clean", kAudit},
        {"superadditivity_counterexample", kAudit},
        {"compression_floor", kAudit},
        {"gamma_star", kGammaStar},
    };
    return checks;
}

// ---------------------------------------------------------------------------
// Validation and expansion

namespace detail {

inline void finalize(Scenario& s) {
    auto fail = [&](const std::string& why) {
        throw Error(ErrorCode::ValidationError, "[" + s.name + "] " + why);
    };
    try {
        if (s.repeat < 1) fail("repeat must be >= 1");
        for (const auto& c : s.checks) {
            const auto& all = known_checks();
            const auto it = std::find_if(all.begin(), all.end(), [&](const CheckInfo& i) { return c == i.name; });
            if (it == all.end()) fail("unknown check '" + c + "'");
            if (!(it->kinds & kind_bit(s.kind)))
                fail("check '" + c + "' does not apply to kind " + from_enum(s.kind, kKindNames));
        }
        const bool needs_target =
            std::find(s.checks.begin(), s.checks.end(), "crossing") != s.checks.end();
        if (needs_target && !s.crossing_target) fail("check 'crossing' needs crossing_target");
        switch (s.kind) {
        case ScenarioKind::AppendixC:
            if (s.run.horizon < 1) fail("horizon must be >= 1");
            break;
        case ScenarioKind::Audit:
            if (s.audit.samples < 1) fail("audit samples must be >= 1");
            if (s.audit.max_len < 1) fail("audit max_len must be >= 1");
            if (s.run.measure.kind == MeasureKind::DeclaredBonus) fail("declared-bonus measures are audited in code");
            break;
        case ScenarioKind::GammaStar:
            s.run.validate();
            if (!(s.gamma_star.lo > 0 && s.gamma_star.lo < s.gamma_star.hi)) fail("search bracket must satisfy 0 < lo < hi");
            if (s.gamma_star.iterations < 1 || s.gamma_star.iterations > 60) fail("iterations must lie in [1, 60]");
            break;
        case ScenarioKind::Conjecture: {
            std::set<double> distinct(s.conjecture.budgets.begin(), s.conjecture.budgets.end());
            if (distinct.size() < 3) fail("conjecture needs >= 3 distinct budgets");
            for (double b : distinct)
                if (!(b > 0)) fail("budgets must be > 0");
            if (s.conjecture.binding == BudgetBinding::Window &&
                (s.conjecture.swarm_model || s.run.update.kind != UpdateKind::Windowed))
                fail("window binding needs a single agent with update = windowed");
            if (s.conjecture.swarm_model) {
                s.swarm.agent = s.run;
                s.swarm.validate();
            } else {
                s.run.validate();
            }
            break;
        }
        case ScenarioKind::Swarm:
            s.swarm.agent = s.run;
            s.swarm.validate();
            break;
        case ScenarioKind::Single:
            s.run.validate();
            break;
        }
        if (!s.uses_swarm()) s.swarm = SwarmSpec{};
    } catch (const Error& e) {
        if (e.detail().rfind("[" + s.name + "]", 0) == 0) throw;
        throw Error(ErrorCode::ValidationError, "[" + s.name + "] " + e.detail());
    }
}

inline void apply_settings(Scenario& s, const std::map<std::string, std::string>& settings) {
    for (const auto& def : key_table()) {
        const auto it = settings.find(def.key);
        if (it == settings.end()) continue;
        if (!(def.kinds & kind_bit(s.kind)))
            throw Error(ErrorCode::ValidationError, "[" + s.name + "] key '" + it->first + "' does not apply to kind " +
                                                        from_enum(s.kind, kKindNames));
        try {
            def.set(s, it->second);
        } catch (const FieldError& e) {
            throw Error(ErrorCode::ParseError, "[" + s.name + "] field '" + it->first + "': " + e.why);
        }
    }
}

/// Builds a scenario from raw key-value pairs of one section.
inline Scenario build(const std::string& name, const std::vector<std::pair<std::string, std::string>>& pairs) {
    Scenario s;
    s.name = name;
    std::map<std::string, std::string> settings;
    for (const auto& [k, v] : pairs) {
        if (k == "kind") {
            try {
                s.kind = to_enum(v, kKindNames);
            } catch (const FieldError& e) {
                throw Error(ErrorCode::ParseError, "[" + name + "] field 'kind': " + e.why);
            }
            continue;
        }
        if (k.rfind("sweep.", 0) == 0) {
            const std::string target = k.substr(6);
            const KeyDef* def = find_key(target);
            if (!def) throw Error(ErrorCode::ValidationError, "[" + name + "] sweep over unknown key '" + target + "'");
            auto values = split(v, ',');
            if (values.empty()) throw Error(ErrorCode::ValidationError, "[" + name + "] sweep '" + target + "' is empty");
            s.sweep.emplace_back(target, std::move(values));
            continue;
        }
        if (!find_key(k)) throw Error(ErrorCode::ValidationError, "[" + name + "] unknown key '" + k + "'");
        settings[k] = v;
    }
    if (s.kind == ScenarioKind::Swarm || s.kind == ScenarioKind::Conjecture) {
        // agents default to 2 so that beta/lambda have a shape
        if (!settings.count("agents")) {
            s.swarm.beta.assign(2, std::vector<double>(2, 0.0));
            s.swarm.lambda.assign(2, 1.0);
        }
        // swarm agents default to a linear-gain update
        if (s.kind == ScenarioKind::Swarm && !settings.count("update")) s.run.update.kind = UpdateKind::DeltaMonotone;
    }
    apply_settings(s, settings);
    std::sort(s.sweep.begin(), s.sweep.end());
    finalize(s);
    return s;
}

}  // namespace detail

struct SweepPoint {
    std::string label;  // "gamma=5,delta=1" or "base"
    Scenario scenario;  // with overrides applied; sweep cleared
};

/// Cartesian product of the sweep grid, validated point by point.
inline std::vector<SweepPoint> expand(const Scenario& s) {
    std::vector<SweepPoint> out;
    Scenario base = s;
    base.sweep.clear();
    if (s.sweep.empty()) {
        out.push_back({"base", base});
        return out;
    }
    std::vector<std::size_t> idx(s.sweep.size(), 0);
    while (true) {
        Scenario p = base;
        std::map<std::string, std::string> overrides;
        std::string label;
        for (std::size_t i = 0; i < s.sweep.size(); ++i) {
            overrides[s.sweep[i].first] = s.sweep[i].second[idx[i]];
            if (!label.empty()) label += ',';
            label += s.sweep[i].first + '=' + s.sweep[i].second[idx[i]];
        }
        detail::apply_settings(p, overrides);
        detail::finalize(p);
        out.push_back({label, std::move(p)});
        std::size_t d = 0;
        while (d < idx.size() && ++idx[d] == s.sweep[d].second.size()) idx[d++] = 0;
        if (d == idx.size()) break;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Parse / emit

inline std::vector<Scenario> parse_scenarios_text(const std::string& text) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    {
        // the INI reader rejects repeated sections as a syntax error; name them as a schema violation instead
        std::istringstream lines(text);
        std::set<std::string> seen;
        std::string line;
        for (std::size_t no = 1; std::getline(lines, line); ++no) {
            const std::string t = detail::trim(line);
            if (t.size() < 2 || t.front() != '[' || t.back() != ']') continue;
            const std::string name = detail::trim(std::string_view(t).substr(1, t.size() - 2));
            if (!seen.insert(name).second)
                throw Error(ErrorCode::ValidationError,
                            "duplicate scenario name '" + name + "' at line " + std::to_string(no));
        }
    }
    std::istringstream in(text);
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(e.line()) + ": " + e.message());
    }
    std::optional<int> version;
    std::vector<Scenario> out;
    std::set<std::string> names;
    for (const auto& [key, node] : tree) {
        if (node.empty()) {
            if (key != "schema_version")
                throw Error(ErrorCode::ValidationError, "unknown top-level key '" + key + "'");
            try {
                version = static_cast<int>(detail::to_uint(node.data()));
            } catch (const detail::FieldError& e) {
                throw Error(ErrorCode::ParseError, "field 'schema_version': " + e.why);
            }
            continue;
        }
        if (!names.insert(key).second) throw Error(ErrorCode::ValidationError, "duplicate scenario name '" + key + "'");
        std::vector<std::pair<std::string, std::string>> pairs;
        for (const auto& [k, v] : node) {
            if (!v.empty()) throw Error(ErrorCode::ParseError, "[" + key + "] nested key '" + k + "'");
            pairs.emplace_back(k, v.data());
        }
        out.push_back(detail::build(key, pairs));
    }
    require(version.has_value(), ErrorCode::ValidationError, "missing schema_version");
    require(*version == kSchemaVersion, ErrorCode::ValidationError,
            "unsupported schema_version " + std::to_string(*version) + " (expected " + std::to_string(kSchemaVersion) + ")");
    require(!out.empty(), ErrorCode::ValidationError, "no scenarios defined");
    return out;
}

inline std::vector<Scenario> parse_scenarios(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    require(static_cast<bool>(f), ErrorCode::IoError, "cannot read " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_scenarios_text(ss.str());
}

/// Canonical text of one scenario section.
inline std::string emit_scenario(const Scenario& s) {
    std::string out = "[" + s.name + "]\n";
    out += "kind = " + detail::from_enum(s.kind, detail::kKindNames) + "\n";
    for (const auto& def : detail::key_table()) {
        if (!(def.kinds & detail::kind_bit(s.kind))) continue;
        const auto v = def.get(s);
        if (!v) continue;
        if (v->empty() && std::string(def.key) != "checks" && std::string(def.key) != "initial_symbols") continue;
        out += std::string(def.key) + " = " + *v + "\n";
    }
    for (const auto& [k, values] : s.sweep) out += "sweep." + k + " = " + detail::join(values) + "\n";
    return out;
}

inline std::string emit_scenarios(const std::vector<Scenario>& scenarios) {
    std::string out = "schema_version = " + std::to_string(kSchemaVersion) + "\n";
    for (const auto& s : scenarios) out += "\n" + emit_scenario(s);
    return out;
}

inline const Scenario& find_scenario(const std::vector<Scenario>& all, const std::string& name) {
    for (const auto& s : all)
        if (s.name == name) return s;
    throw Error(ErrorCode::ValidationError, "no scenario named '" + name + "'");
}

}  // namespace n2m
