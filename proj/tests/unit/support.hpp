#pragma once

#include <gtest/gtest.h>

#include "n2m/engine.hpp"
#include "n2m/error.hpp"

namespace n2m::test {

template <class F>
void expect_error(F&& f, ErrorCode code) {
    try {
        f();
        ADD_FAILURE() << "expected " << to_string(code) << ", nothing thrown";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), code) << e.what();
    }
}

/// ABSTRACT DELTA_MONOTONE run on a gated channel.
inline RunConfig gated(double gate, std::size_t lo, std::size_t hi, double delta, double norm0,
                       std::size_t horizon, std::uint64_t seed = 1) {
    RunConfig cfg;
    cfg.channel.psi = PsiKind::Gated;
    cfg.channel.gate_threshold = gate;
    cfg.channel.gain_lo = lo;
    cfg.channel.gain_hi = hi;
    cfg.channel.seed = seed;
    cfg.update.kind = UpdateKind::DeltaMonotone;
    cfg.update.delta = delta;
    cfg.gamma = gate;
    cfg.horizon = horizon;
    cfg.initial = ContextState::abstract(norm0);
    return cfg;
}

}  // namespace n2m::test
