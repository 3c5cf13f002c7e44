// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "twingrid/rng.hpp"
#include "twingrid/scenario/types.hpp"

namespace twingrid::scenario {

/// Applies the attack schedule to trace.tampered and sets labels: a record is
/// labeled 1 iff its timestamp falls inside any attack window. Attacks apply
/// in schedule order; bias/scale/noise transform the current tampered value,
/// replay and freeze substitute values looked up in the clean series (replay:
/// clean(t - offset) under zero-order hold; freeze: clean value at the first
/// record inside the window). Noise draws come from rng in record order, so
/// (trace, attacks, seed) fully determines the output.
void inject_attacks(SimulationTrace& trace, const std::vector<AttackSpec>& attacks, Rng& rng);

/// Validates one attack against a trace: known kind, nonempty known targets,
/// t_start < t_end, window within the trace, replay offset not reaching
/// before the first record. Throws ValidationError.
void validate_attack(const AttackSpec& attack, const SimulationTrace& trace);

}  // namespace twingrid::scenario
