// SPDX-License-Identifier: Apache-2.0
#include "twingrid/scenario/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "twingrid/telemetry/frame.hpp"

namespace twingrid::scenario {

namespace {

std::int64_t to_ms(double seconds) { return std::llround(seconds * 1000.0); }

/// Sorted unique channel addresses for an attack's targets.
std::vector<std::uint32_t> target_ioas(const AttackSpec& attack) {
  std::vector<std::uint32_t> ioas;
  ioas.reserve(attack.targets.size());
  for (const std::string& name : attack.targets) {
    ioas.push_back(telemetry::channel_ioa(name));
  }
  std::sort(ioas.begin(), ioas.end());
  ioas.erase(std::unique(ioas.begin(), ioas.end()), ioas.end());
  return ioas;
}

/// Index of the clean record in force at t_ms under zero-order hold.
std::size_t index_at(const SimulationTrace& trace, std::int64_t t_ms) {
  const std::int64_t period_ms = to_ms(trace.dt_telemetry_s);
  std::int64_t idx = t_ms / period_ms;
  idx = std::clamp<std::int64_t>(idx, 0, static_cast<std::int64_t>(trace.clean.size()) - 1);
  return static_cast<std::size_t>(idx);
}

}  // namespace

void validate_attack(const AttackSpec& attack, const SimulationTrace& trace) {
  if (attack.kind != "bias" && attack.kind != "scale" && attack.kind != "replay" &&
      attack.kind != "freeze" && attack.kind != "noise") {
    throw ValidationError("inject_attacks: unknown kind '" + attack.kind + "'");
  }
  if (attack.targets.empty()) {
    throw ValidationError("inject_attacks: " + attack.kind + " entry has no targets");
  }
  for (const std::string& name : attack.targets) {
    telemetry::channel_ioa(name);
  }
  if (!(attack.t_start_s < attack.t_end_s)) {
    throw ValidationError("inject_attacks: window must satisfy t_start < t_end");
  }
  if (trace.clean.empty()) {
    throw ValidationError("inject_attacks: trace has no records");
  }
  const double duration = static_cast<double>(trace.clean.size()) * trace.dt_telemetry_s;
  if (attack.t_start_s < 0.0 || attack.t_end_s > duration + 1e-9) {
    throw ValidationError("inject_attacks: window must lie within the trace duration");
  }
  if (attack.kind == "replay") {
    if (!(attack.magnitude >= 0.0)) {
      throw ValidationError("inject_attacks: replay offset must be non-negative");
    }
    if (attack.t_start_s - attack.magnitude < 0.0) {
      throw ValidationError("inject_attacks: replay offset reaches before the start of the trace");
    }
  }
  if (attack.kind == "noise" && !(attack.magnitude >= 0.0)) {
    throw ValidationError("inject_attacks: noise sigma must be non-negative");
  }
}

void inject_attacks(SimulationTrace& trace, const std::vector<AttackSpec>& attacks, Rng& rng) {
  if (trace.tampered.size() != trace.clean.size()) {
    throw ValidationError("inject_attacks: tampered series out of step with clean series");
  }
  for (const AttackSpec& attack : attacks) {
    validate_attack(attack, trace);
  }

  for (const AttackSpec& attack : attacks) {
    const std::int64_t start_ms = to_ms(attack.t_start_s);
    const std::int64_t end_ms = to_ms(attack.t_end_s);
    const std::vector<std::uint32_t> ioas = target_ioas(attack);
    const std::int64_t offset_ms = to_ms(attack.magnitude);

    for (std::size_t i = 0; i < trace.tampered.size(); ++i) {
      TelemetryRecord& rec = trace.tampered[i];
      if (rec.t_ms < start_ms || rec.t_ms >= end_ms) continue;
      for (const std::uint32_t ioa : ioas) {
        double& value = channel_ref(rec, ioa);
        if (attack.kind == "bias") {
          value += attack.magnitude;
        } else if (attack.kind == "scale") {
          value *= attack.magnitude;
        } else if (attack.kind == "noise") {
          value += rng.normal(0.0, attack.magnitude);
        } else if (attack.kind == "replay") {
          const std::size_t src = index_at(trace, rec.t_ms - offset_ms);
          value = channel_value(trace.clean[src], ioa);
        } else {  // freeze
          const std::size_t src = index_at(trace, start_ms);
          value = channel_value(trace.clean[src], ioa);
        }
      }
    }
  }

  trace.labels.assign(trace.tampered.size(), 0);
  for (std::size_t i = 0; i < trace.tampered.size(); ++i) {
    const std::int64_t t = trace.tampered[i].t_ms;
    int label = 0;
    for (const AttackSpec& attack : attacks) {
      if (t >= to_ms(attack.t_start_s) && t < to_ms(attack.t_end_s)) {
        label = 1;
        break;
      }
    }
    trace.labels[i] = label;
    trace.tampered[i].label = label;
  }
}

}  // namespace twingrid::scenario
