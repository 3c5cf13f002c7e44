// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "twingrid/dense.hpp"
#include "twingrid/errors.hpp"
#include "twingrid/grid/types.hpp"

namespace twingrid::scenario {

/// Per-unit bases and the nominal frequency shared by plant and twin.
struct Bases {
  double s_base_kva = 1000.0;
  double v_base_v = 400.0;
  double f_nominal_hz = 50.0;
};

/// Time discretization. dt_sim is the dynamics substep, dt_telemetry the
/// recording cadence; dt_telemetry must be an integer multiple of dt_sim.
struct Timing {
  double dt_sim_s = 0.01;
  double dt_telemetry_s = 0.1;
  double duration_s = 60.0;
  double settle_s = 1.0;  // unrecorded pre-roll
};

/// Thevenin equivalent of the upstream grid behind the feeder head. The head
/// voltage sags with the current drawn through (r, x), one substep lagged.
struct Upstream {
  double v_source_pu = 1.0;
  double r_pu = 0.0;
  double x_pu = 0.0;
};

/// One device placement. Inverter kinds (pv/wind/battery) use tau_i_s and
/// i_max_pu; loads use np/nq/v0 and the kvar rating. Ratings size the
/// per-device share when an aggregate is split back across buses.
struct DeviceConfig {
  std::string id;
  std::string kind;  // pv | wind | battery | load
  int bus = 0;
  double rating_kw = 0.0;
  double rating_kvar = 0.0;
  double tau_i_s = 0.02;
  double i_max_pu = 1.5;
  double np = 0.0;
  double nq = 0.0;
  double v0_pu = 1.0;
};

struct ProfilePoint {
  double t_s = 0.0;
  double p_kw = 0.0;
  double q_kvar = 0.0;
};

/// Dispatch schedule for one device, held constant between samples.
struct Profile {
  std::string device;
  std::vector<ProfilePoint> samples;
};

/// Returns the sample in force at time t (zero-order hold). Before the first
/// sample the first sample applies.
ProfilePoint profile_value(const Profile& profile, double t_s);

/// Throws ValidationError unless timestamps strictly increase.
void validate_profile(const Profile& profile);

/// One tampering action by an on-path adversary. magnitude is kind-dependent:
/// bias in channel units, scale as a factor, replay as an offset in seconds,
/// noise as a standard deviation in channel units; freeze ignores it.
struct AttackSpec {
  std::string kind;  // bias | scale | replay | freeze | noise
  std::vector<std::string> targets;  // channel names, e.g. "p_pv"
  double t_start_s = 0.0;
  double t_end_s = 0.0;  // window is [t_start, t_end)
  double magnitude = 0.0;
};

/// Complete description of one co-simulation run.
struct Scenario {
  std::string name;
  std::uint64_t seed = 0;
  Bases bases;
  Timing timing;
  Upstream upstream;
  grid::FeederTopology topology;
  std::vector<DeviceConfig> devices;
  std::vector<Profile> profiles;
  std::vector<AttackSpec> attacks;
};

/// One IED reading: the eight power channels in physical units plus the
/// attack label. Times are milliseconds since the start of recording.
struct TelemetryRecord {
  std::int64_t t_ms = 0;
  double p_pv = 0.0;
  double q_pv = 0.0;
  double p_batt = 0.0;
  double q_batt = 0.0;
  double p_w = 0.0;
  double q_w = 0.0;
  double p_n = 0.0;
  double q_n = 0.0;
  int label = 0;

  friend bool operator==(const TelemetryRecord&, const TelemetryRecord&) = default;
};

/// Access a record's power field by its wire channel address (1..8).
double& channel_ref(TelemetryRecord& record, std::uint32_t ioa);
double channel_value(const TelemetryRecord& record, std::uint32_t ioa);

/// True plant state at one recording instant, straight from the solver.
struct GroundTruthStep {
  std::int64_t t_ms = 0;
  Vectord v_mag;    // pu, indexed by bus id minus one
  Vectord v_angle;  // rad
  Vectord f_node;   // Hz
  double f_sys = 0.0;
  double head_voltage = 0.0;  // pu, the slack anchor used for this step
  double p_slack = 0.0;       // pu
  double q_slack = 0.0;       // pu
};

/// Everything one run produces, on a shared telemetry time grid. tampered
/// starts as a copy of clean; inject_attacks rewrites it and sets labels.
struct SimulationTrace {
  double dt_telemetry_s = 0.0;
  int n_buses = 0;
  std::vector<GroundTruthStep> truth;
  std::vector<TelemetryRecord> clean;
  std::vector<TelemetryRecord> tampered;
  std::vector<int> labels;
};

}  // namespace twingrid::scenario
