#pragma once

// Builtin scenario set. Kept byte-identical to scenarios/builtin.ini (a unit test checks this).

#include <string_view>
#include <vector>

#include "n2m/scenario.hpp"

namespace n2m {

inline constexpr std::string_view kBuiltinScenarios = R"ini(; Builtin scenarios. `n2m run builtin` runs all of them; `--scenario NAME` picks one.
schema_version = 1

; one-bit self-copy: the context is always the previous noise bit
[onebit]
kind = single
psi = identity
noise_len = 1
update = overwrite
mode = concrete
initial_symbols = 0
gamma = 1
horizon = 32

; stochastic vs greedy decoding stand-in: growth vs an immediate plateau
[tokens]
kind = single
psi = identity
noise_len = 8
update = append
skip_repeats = true
mode = concrete
gamma = 10
horizon = 200
sweep.temperature = 1, 0
checks = classify, fixed_point_dichotomy

[appendixC]
kind = appendix_c
prototype_mode = both
gamma = 10
horizon = 200
checks = prototype_shape

[drift]
kind = single
psi = gated
gate_threshold = 10
gain_lo = 0
gain_hi = 12
update = delta_monotone
delta = 0.5
gamma = 10
initial_norm = 11
horizon = 10000
outputs = json, svg
checks = drift, cost_slope

[drift_low_rank]
kind = single
psi = gated
gate_threshold = 10
gain_lo = 0
gain_hi = 12
update = delta_monotone
delta = 0.5
gamma = 10
initial_norm = 11
horizon = 10000
cost = low_rank
rank = 8
outputs = json
checks = cost_slope

[masked_drift]
kind = single
psi = gated
gate_threshold = 10
gain_lo = 0
gain_hi = 10
update = delta_monotone
delta = 1
gamma = 10
initial_norm = 11
horizon = 10000
sweep.mask_rate = 0.1, 0.5
outputs = json
checks = drift

[schedule_drift]
kind = single
psi = gated
gate_threshold = 10
gain_lo = 0
gain_hi = 10
update = delta_monotone
delta = 1
gamma = 10
initial_norm = 11
mask_schedule = power_law
mask_rate = 0.1
mask_kappa = 0.3
mask_decay = 0.5
horizon = 10000
outputs = json
checks = schedule_drift

[bounded]
kind = single
psi = gated
gate_threshold = 10
gain_lo = 5
gain_hi = 12
mask_rate = 0.2
update = overwrite
gamma = 10
initial_norm = 5
horizon = 100000
repeat = 10
outputs = json
checks = bounded

[collapse]
kind = single
psi = gated
gate_threshold = 4
gain_lo = 4
gain_hi = 10
mask_rate = 0.95
update = overwrite
delta = 0.5
gamma = 4
initial_norm = 0
horizon = 100000
repeat = 10
outputs = json
checks = collapse

[bursts]
kind = single
psi = gated
gate_threshold = 10
gain_lo = 1
gain_hi = 10
update = windowed
delta = 1
window = 100
retain = 50
gamma = 10
initial_norm = 0
horizon = 100000
outputs = json
checks = bursts

[crossing]
kind = single
psi = gated
gate_threshold = 10
gain_lo = 2
gain_hi = 11
update = delta_monotone
delta = 1
gamma = 10
initial_norm = 2
horizon = 40
crossing_target = 100
repeat = 100
outputs = json, svg
checks = crossing

[gamma_star]
kind = gamma_star
psi = gated
gate_threshold = 50
gain_lo = 0
gain_hi = 5
update = delta_monotone
search_lo = 1
search_hi = 100
iterations = 20
mc_samples = 16
repeat = 10
checks = gamma_star

[fixed_point_greedy]
kind = single
psi = identity
temperature = 0
update = overwrite
mode = concrete
horizon = 10000
repeat = 100
outputs = json
checks = fixed_point

[fixed_point_sampled]
kind = single
psi = identity
temperature = 1
noise_len = 8
update = overwrite
mode = concrete
horizon = 10000
repeat = 100
outputs = json
checks = no_fixed_point

[swarm_sync]
kind = swarm
agents = 2
beta = 0.5
base_gain = 4
delta = 1
gamma = 10
horizon = 1000
outputs = json, svg
checks = swarm_equality, collective_gain, threshold_rescaling

[swarm_async]
kind = swarm
agents = 2
beta = 0.5
lambda = 0.5
schedule = async
base_gain = 4
delta = 1
gamma = 10
horizon = 10000
outputs = json
checks = collective_gain

[swarm_mixed]
kind = swarm
agents = 2
beta = 0 0.2; 0.6 0
base_gain = 4
delta = 1
gamma = 10
horizon = 1000
outputs = json
checks = collective_gain

[swarm_relayed]
kind = swarm
agents = 2
beta = 0.5
coupling = relayed
base_gain = 4
delta = 1
gamma = 1000
horizon = 60
repeat = 100
outputs = json
checks = divergence

[audit_length]
kind = audit
measure = length
samples = 10000
checks = axioms_clean

[audit_cg]
kind = audit
measure = cg
samples = 10000
checks = o1_clean, compression_floor

[audit_fisher]
kind = audit
measure = fisher(0.5)
samples = 2000
checks = superadditivity_counterexample

[conjecture_log]
kind = conjecture
model = swarm
agents = 2
beta = 0.5
coupling = relayed
base_gain = 4
delta = 1
horizon = 80
budgets = 100, 1000, 10000, 100000
binding = gamma
repeat = 10

[conjecture_flat]
kind = conjecture
model = single
psi = gated
gate_threshold = 10
gain_lo = 1
gain_hi = 10
update = windowed
delta = 1
window = 100
gamma = 10
horizon = 200
budgets = 100, 1000, 10000, 100000
binding = window
repeat = 10
)ini";

inline std::vector<Scenario> builtin_scenarios() { return parse_scenarios_text(std::string(kBuiltinScenarios)); }

}  // namespace n2m
