#pragma once

// LZ78 parsing with integer bit accounting:
//   phrase i (1-based) costs ceil(log2 i) index bits, plus the symbol bits when
//   it carries an explicit next symbol. An incomplete tail phrase (input ended
//   inside a known phrase) costs index bits only.

#include <cstdint>
#include <optional>
#include <vector>

#include "n2m/meaning.hpp"

namespace n2m {

struct Lz78Phrase {
    std::uint32_t prefix = 0;  // 0 is the empty phrase
    std::optional<Symbol> next;

    friend bool operator==(const Lz78Phrase&, const Lz78Phrase&) = default;
};

struct Lz78Parse {
    std::vector<Lz78Phrase> phrases;
    std::uint64_t coded_bits = 0;
    std::uint8_t alphabet = 2;
};

constexpr std::uint64_t ceil_log2(std::uint64_t n) noexcept {
    std::uint64_t bits = 0;
    while ((std::uint64_t{1} << bits) < n) ++bits;
    return bits;
}

inline std::uint64_t lz78_coded_bits(const std::vector<Lz78Phrase>& phrases,
                                     std::uint8_t alphabet = 2) noexcept {
    const auto sym_bits = static_cast<std::uint64_t>(bits_per_symbol(alphabet));
    std::uint64_t bits = 0;
    for (std::size_t i = 1; i <= phrases.size(); ++i) {
        bits += ceil_log2(i);
        if (phrases[i - 1].next) bits += sym_bits;
    }
    return bits;
}

inline Lz78Parse lz78_parse(const Meaning& m) {
    Lz78Parse out;
    out.alphabet = m.alphabet;
    // trie[node * alphabet + symbol] = child node id, 0 = absent (root is node 0)
    const std::size_t a = m.alphabet;
    std::vector<std::uint32_t> trie(a, 0);
    std::uint32_t node = 0;
    for (Symbol s : m.symbols) {
        const std::uint32_t child = trie[node * a + s];
        if (child != 0) {
            node = child;
            continue;
        }
        out.phrases.push_back({node, s});
        const auto id = static_cast<std::uint32_t>(out.phrases.size());
        trie[node * a + s] = id;
        trie.resize(trie.size() + a, 0);
        node = 0;
    }
    if (node != 0) out.phrases.push_back({node, std::nullopt});
    out.coded_bits = lz78_coded_bits(out.phrases, out.alphabet);
    return out;
}

inline Meaning lz78_decode(const Lz78Parse& parse) {
    Meaning out;
    out.alphabet = parse.alphabet;
    std::vector<std::vector<Symbol>> dict(1);
    for (std::size_t i = 0; i < parse.phrases.size(); ++i) {
        const auto& p = parse.phrases[i];
        require(p.prefix <= i, ErrorCode::InvalidArgument, "LZ78 prefix index out of range");
        std::vector<Symbol> entry = dict[p.prefix];
        if (p.next) entry.push_back(*p.next);
        out.symbols.insert(out.symbols.end(), entry.begin(), entry.end());
        dict.push_back(std::move(entry));
    }
    return out;
}

}  // namespace n2m
