#pragma once

// Text form of measures:  length | cg | power(e) | skl(s) | fisher(t)
//                         | combo(a, <expr>, b, <expr>) | floor(<expr>)

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <string_view>

#include "n2m/measures.hpp"

namespace n2m {

/// Shortest %g form that parses back to the same double.
inline std::string format_number(double x) {
    char buf[40];
    for (int prec = 6; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, x);
        if (std::strtod(buf, nullptr) == x) break;
    }
    return buf;
}

inline bool parse_number(std::string_view text, double& out) {
    const std::string s(text);
    if (s.empty()) return false;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size() && std::isfinite(out);
}

namespace detail {

class MeasureParser {
public:
    explicit MeasureParser(std::string_view text) : text_(text) {}

    MeasureSpec parse_all() {
        MeasureSpec s = expr();
        skip_ws();
        if (pos_ != text_.size()) fail("unexpected trailing input");
        return s;
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& why) const {
        throw Error(ErrorCode::ParseError,
                    "measure '" + std::string(text_) + "' at offset " + std::to_string(pos_) + ": " + why);
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!eat(c)) fail(std::string("expected '") + c + "'");
    }

    std::string ident() {
        skip_ws();
        const std::size_t start = pos_;
        while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        if (start == pos_) fail("expected a measure name");
        return std::string(text_.substr(start, pos_ - start));
    }

    double number() {
        skip_ws();
        const std::size_t start = pos_;
        while (pos_ < text_.size() && text_[pos_] != ',' && text_[pos_] != ')' &&
               !std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
        double v = 0;
        if (!parse_number(text_.substr(start, pos_ - start), v)) fail("expected a number");
        return v;
    }

    MeasureSpec expr() {
        const std::string name = ident();
        try {
            if (name == "length") return MeasureSpec::length();
            if (name == "cg") return MeasureSpec::compression_gain();
            if (name == "power") {
                expect('(');
                const double e = number();
                expect(')');
                return MeasureSpec::power_law(e);
            }
            if (name == "skl") {
                double s = 1.0;
                if (eat('(')) {
                    s = number();
                    expect(')');
                }
                return MeasureSpec::skl(s);
            }
            if (name == "fisher") {
                expect('(');
                const double t = number();
                expect(')');
                return MeasureSpec::fisher(t);
            }
            if (name == "floor") {
                expect('(');
                MeasureSpec inner = expr();
                expect(')');
                return MeasureSpec::unit_floor(std::move(inner));
            }
            if (name == "combo") {
                expect('(');
                const double a = number();
                expect(',');
                MeasureSpec s1 = expr();
                expect(',');
                const double b = number();
                expect(',');
                MeasureSpec s2 = expr();
                expect(')');
                return combine_measures(a, std::move(s1), b, std::move(s2));
            }
        } catch (const Error& e) {
            if (e.code() == ErrorCode::ParseError) throw;
            fail(e.what());
        }
        fail("unknown measure '" + name + "'");
    }
};

}  // namespace detail

inline MeasureSpec parse_measure(std::string_view text) { return detail::MeasureParser(text).parse_all(); }

inline std::string format_measure(const MeasureSpec& s) {
    switch (s.kind) {
    case MeasureKind::Length: return "length";
    case MeasureKind::CompressionGain: return "cg";
    case MeasureKind::PowerLaw: return "power(" + format_number(s.exponent) + ")";
    case MeasureKind::Skl: return "skl(" + format_number(s.smoothing) + ")";
    case MeasureKind::Fisher: return "fisher(" + format_number(s.theta0) + ")";
    case MeasureKind::UnitFloor: return "floor(" + format_measure(s.children.at(0)) + ")";
    case MeasureKind::LinearCombo:
        return "combo(" + format_number(s.alpha) + "," + format_measure(s.children.at(0)) + "," +
               format_number(s.beta) + "," + format_measure(s.children.at(1)) + ")";
    case MeasureKind::DeclaredBonus: break;
    }
    throw Error(ErrorCode::InvalidArgument, "the declared-bonus measure has no text form");
}

}  // namespace n2m
