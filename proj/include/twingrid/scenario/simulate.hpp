// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "twingrid/scenario/types.hpp"

namespace twingrid::scenario {

/// Throws ValidationError when any cross-reference or range rule is broken:
/// unknown buses/devices/channels, non-monotonic profiles, bad timing, attack
/// windows outside [0, duration), replay offsets reaching before the start.
void validate_scenario(const Scenario& scenario);

/// Runs the plant side: at each telemetry period the profiles dispatch the
/// devices, the inverter current loops / PLLs / frequency model advance at
/// dt_sim with a one-substep-lagged head voltage from the upstream Thevenin
/// source, a power-flow solve closes each substep, and the period's final
/// state is recorded as ground truth plus clean telemetry. Deterministic;
/// labels are all zero and tampered equals clean until inject_attacks runs.
/// Power-flow divergence is rethrown with the failure timestamp attached.
SimulationTrace simulate(const Scenario& scenario);

}  // namespace twingrid::scenario
