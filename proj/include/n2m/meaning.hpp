#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "n2m/error.hpp"
#include "n2m/random.hpp"

namespace n2m {

using Symbol = std::uint8_t;

inline constexpr std::string_view kSymbolChars = "0123456789abcdefghijklmnopqrstuvwxyz";

/// Bits needed to write one symbol of an alphabet of the given size.
constexpr int bits_per_symbol(unsigned alphabet) noexcept {
    int bits = 0;
    while ((1U << bits) < alphabet) ++bits;
    return bits;
}

/// A finite symbol sequence over {0, ..., alphabet-1}; its norm is its length.
struct Meaning {
    std::vector<Symbol> symbols;
    std::optional<std::uint32_t> tag;
    std::uint8_t alphabet = 2;

    std::size_t norm() const noexcept { return symbols.size(); }
    bool empty() const noexcept { return symbols.empty(); }

    std::string str() const {
        std::string out;
        out.reserve(symbols.size());
        for (auto s : symbols) out.push_back(kSymbolChars[s]);
        return out;
    }

    static Meaning parse(std::string_view text, std::uint8_t alphabet = 2) {
        require(alphabet >= 2 && alphabet <= kSymbolChars.size(), ErrorCode::InvalidArgument,
                "alphabet size must lie in [2, 36]");
        Meaning m;
        m.alphabet = alphabet;
        m.symbols.reserve(text.size());
        for (char c : text) {
            const auto pos = kSymbolChars.find(c);
            require(pos != std::string_view::npos && pos < alphabet, ErrorCode::InvalidArgument,
                    std::string("symbol '") + c + "' is outside the alphabet");
            m.symbols.push_back(static_cast<Symbol>(pos));
        }
        return m;
    }

    static Meaning tagged(std::string_view text, std::uint32_t tag) {
        Meaning m = parse(text);
        m.tag = tag;
        return m;
    }

    bool valid() const noexcept {
        return std::all_of(symbols.begin(), symbols.end(),
                           [&](Symbol s) { return s < alphabet; });
    }

    friend bool operator==(const Meaning&, const Meaning&) = default;
};

/// m1 || m2. The tag survives only if both sides agree on it.
inline Meaning concat(const Meaning& a, const Meaning& b) {
    require(a.alphabet == b.alphabet, ErrorCode::InvalidArgument,
            "cannot concatenate meanings over different alphabets");
    Meaning out;
    out.alphabet = a.alphabet;
    out.symbols.reserve(a.symbols.size() + b.symbols.size());
    out.symbols.insert(out.symbols.end(), a.symbols.begin(), a.symbols.end());
    out.symbols.insert(out.symbols.end(), b.symbols.begin(), b.symbols.end());
    if (a.tag == b.tag) out.tag = a.tag;
    return out;
}

/// Symbol edits on the common prefix plus the length difference. Equals the
/// Hamming distance for equal lengths.
inline std::size_t symbol_distance(const Meaning& a, const Meaning& b) noexcept {
    const std::size_t common = std::min(a.symbols.size(), b.symbols.size());
    std::size_t d = a.symbols.size() > b.symbols.size() ? a.symbols.size() - common
                                                        : b.symbols.size() - common;
    for (std::size_t i = 0; i < common; ++i) d += a.symbols[i] != b.symbols[i];
    return d;
}

inline std::uint64_t digest(std::span<const Symbol> symbols) noexcept {
    return fnv1a(symbols);
}

inline std::uint64_t digest(const Meaning& m) noexcept {
    return mix_keys({fnv1a(m.symbols), m.symbols.size()});
}

}  // namespace n2m
