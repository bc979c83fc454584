#pragma once

// Per-step compute model:
//   FULL      alpha_attn n^2 + alpha_ffn n
//   LOW_RANK  alpha_attn_r r n + alpha_ffn n          (fixed r)
//   LOG_RANK  same with r = max(1, ceil(c log n))     (rank tracking log n)

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "n2m/error.hpp"

namespace n2m {

enum class CostVariant { Full, LowRank, LogRank };

struct CostModel {
    double alpha_attn = 1.0;
    double alpha_ffn = 1.0;
    CostVariant variant = CostVariant::Full;
    std::size_t rank = 1;          // LOW_RANK
    double alpha_attn_r = 1.0;     // LOW_RANK / LOG_RANK
    double log_rank_coeff = 1.0;   // LOG_RANK
    std::size_t d_model = 4096;    // informational only

    void validate() const {
        require(alpha_attn > 0 && alpha_ffn > 0 && alpha_attn_r > 0, ErrorCode::ValidationError,
                "cost coefficients must be > 0");
        require(rank >= 1, ErrorCode::ValidationError, "low-rank r must be >= 1");
        require(log_rank_coeff > 0, ErrorCode::ValidationError, "log-rank coefficient must be > 0");
    }

    std::size_t rank_at(double norm) const noexcept {
        if (variant == CostVariant::LowRank) return rank;
        if (norm <= 1.0) return 1;
        return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(log_rank_coeff * std::log(norm))));
    }

    friend bool operator==(const CostModel&, const CostModel&) = default;
};

inline double flops_at(double norm, const CostModel& model) {
    require(norm >= 0, ErrorCode::InvalidArgument, "norm must be >= 0");
    if (model.variant == CostVariant::Full)
        return model.alpha_attn * norm * norm + model.alpha_ffn * norm;
    const auto r = static_cast<double>(model.rank_at(norm));
    return model.alpha_attn_r * r * norm + model.alpha_ffn * norm;
}

/// Smallest n at or beyond which FULL cost dominates LOW_RANK cost.
inline double low_rank_crossover(const CostModel& model) {
    return static_cast<double>(model.rank) * model.alpha_attn_r / model.alpha_attn;
}

/// Coupling required for polynomial compute under log-rank attention: c < delta (1 - eps) / Gamma.
inline void validate_log_rank_coefficient(double c, double delta, double eps, double gamma) {
    require(c > 0 && delta > 0 && gamma > 0 && eps >= 0 && eps < 1, ErrorCode::ValidationError,
            "log-rank coupling parameters out of range");
    require(c < delta * (1.0 - eps) / gamma, ErrorCode::ValidationError,
            "log-rank coefficient must satisfy c < delta (1 - eps) / Gamma");
}

struct QuadraticBoundReport {
    bool passed = true;
    double largest_admissible_c = std::numeric_limits<double>::infinity();
    std::optional<double> smallest_failing_n;
};

/// Checks flops(n) >= c n^2 over the sampled norms (FULL variant only).
inline QuadraticBoundReport check_quadratic_bound(const CostModel& model, double c,
                                                  std::span<const double> norms) {
    require(model.variant == CostVariant::Full, ErrorCode::InvalidArgument,
            "the quadratic lower bound applies to full attention only");
    require(c > 0, ErrorCode::InvalidArgument, "c must be > 0");
    QuadraticBoundReport r;
    std::vector<double> sorted(norms.begin(), norms.end());
    std::sort(sorted.begin(), sorted.end());
    for (double n : sorted) {
        if (n <= 0) continue;
        const double f = flops_at(n, model);
        r.largest_admissible_c = std::min(r.largest_admissible_c, f / (n * n));
        if (f < c * n * n && !r.smallest_failing_n) {
            r.passed = false;
            r.smallest_failing_n = n;
        }
    }
    return r;
}

enum class GrowthClass { Flat, Linear, Quadratic, SuperQuadratic };

constexpr std::string_view to_string(GrowthClass g) {
    switch (g) {
    case GrowthClass::Flat: return "FLAT";
    case GrowthClass::Linear: return "LINEAR";
    case GrowthClass::Quadratic: return "QUADRATIC";
    case GrowthClass::SuperQuadratic: return "SUPER_QUADRATIC";
    }
    return "?";
}

constexpr GrowthClass classify_slope(double slope) noexcept {
    if (slope < 0.5) return GrowthClass::Flat;
    if (slope < 1.5) return GrowthClass::Linear;
    if (slope < 2.5) return GrowthClass::Quadratic;
    return GrowthClass::SuperQuadratic;
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::size_t points = 0;
};

/// Ordinary least squares y = slope x + intercept.
inline LineFit least_squares(std::span<const double> x, std::span<const double> y) {
    require(x.size() == y.size() && x.size() >= 2, ErrorCode::InvalidArgument,
            "least squares needs >= 2 paired points");
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    LineFit f;
    f.points = x.size();
    f.slope = sxx > 0 ? sxy / sxx : 0.0;
    f.intercept = my - f.slope * mx;
    f.r_squared = (sxx > 0 && syy > 0) ? std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0) : 0.0;
    return f;
}

}  // namespace n2m
