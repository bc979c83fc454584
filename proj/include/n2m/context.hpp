#pragma once

#include <cmath>
#include <cstring>
#include <cstddef>
#include <optional>
#include <vector>

#include "n2m/error.hpp"
#include "n2m/meaning.hpp"

namespace n2m {

enum class ContextMode { Abstract, Concrete };

/// Agent context. `norm` is always authoritative. In CONCRETE mode the symbol
/// buffer holds floor(norm) symbols (norm itself when increments are integral);
/// in ABSTRACT mode the buffer stays empty.
struct ContextState {
    ContextMode mode = ContextMode::Abstract;
    std::vector<Symbol> symbols;
    double norm = 0.0;
    std::optional<std::size_t> window_cap;
    std::optional<std::size_t> window_retain;  // kept after a cap hit; default cap/2

    static ContextState abstract(double norm) {
        ContextState c;
        c.norm = norm;
        return c;
    }

    static ContextState concrete(std::vector<Symbol> symbols = {}) {
        ContextState c;
        c.mode = ContextMode::Concrete;
        c.norm = static_cast<double>(symbols.size());
        c.symbols = std::move(symbols);
        return c;
    }

    std::size_t retain() const noexcept {
        return window_retain.value_or(window_cap.value_or(0) / 2);
    }

    void validate() const {
        require(norm >= 0 && std::isfinite(norm), ErrorCode::ValidationError, "context norm must be >= 0");
        if (mode == ContextMode::Concrete)
            require(static_cast<double>(symbols.size()) == std::floor(norm), ErrorCode::ValidationError,
                    "concrete context must hold floor(norm) symbols");
        else
            require(symbols.empty(), ErrorCode::ValidationError, "abstract context holds no symbols");
        if (window_cap) {
            require(*window_cap > 0, ErrorCode::ValidationError, "window cap W must be > 0");
            require(norm <= static_cast<double>(*window_cap), ErrorCode::ValidationError,
                    "initial norm exceeds the window cap");
            require(retain() < *window_cap, ErrorCode::ValidationError, "window retain must be < W");
        }
    }

    friend bool operator==(const ContextState&, const ContextState&) = default;
};

inline std::uint64_t digest(const ContextState& c) noexcept {
    std::uint64_t norm_bits = 0;
    static_assert(sizeof(norm_bits) == sizeof(c.norm));
    std::memcpy(&norm_bits, &c.norm, sizeof(norm_bits));
    return mix_keys({fnv1a(c.symbols), norm_bits});
}

}  // namespace n2m
