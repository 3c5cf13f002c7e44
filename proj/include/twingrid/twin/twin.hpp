// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "twingrid/dense.hpp"
#include "twingrid/errors.hpp"
#include "twingrid/grid/types.hpp"
#include "twingrid/ml/dataset.hpp"
#include "twingrid/scenario/types.hpp"

namespace twingrid::twin {

/// Everything the estimator may know: the plant's topology and device
/// parameters, but no profiles and no attack schedule. Measured powers are
/// the only time-varying input besides the head voltage.
struct TwinConfig {
  scenario::Bases bases;
  double dt_telemetry_s = 0.1;
  grid::FeederTopology topology;
  std::vector<scenario::DeviceConfig> devices;
  double tolerance = 1e-8;
  int max_iterations = 50;
  double t_f_s = 2.0;
  double k_f = 0.5;
  double tau_pll_s = 0.1;
  // Stop rule for splitting the aggregate consumer reading across load buses.
  double balance_tolerance = 1e-12;
  int balance_max_iterations = 60;
};

/// Copies the shared plant knowledge out of a scenario.
TwinConfig twin_config_from_scenario(const scenario::Scenario& scenario);

/// Estimator output for one telemetry step. Vectors are indexed by bus id
/// minus one; v[0] always equals the supplied head-voltage magnitude.
struct VirtualMeasurements {
  std::int64_t t_ms = 0;
  Vectord v;  // pu
  Vectord f;  // Hz
  bool diverged = false;
};

/// Estimation failure (power-flow divergence or an unplaceable consumer
/// reading) carrying the timestamp of the offending record.
class TwinEstimationError : public RuntimeFailure {
 public:
  TwinEstimationError(const std::string& message, std::int64_t t_ms)
      : RuntimeFailure(message), t_ms_(t_ms) {}
  std::int64_t t_ms() const noexcept { return t_ms_; }

 private:
  std::int64_t t_ms_;
};

/// Twin-side dynamic state: the frequency model plus warm starts for the
/// consumer apportionment scales.
struct TwinState {
  grid::FrequencyState<double> frequency;
  double scale_p = 1.0;
  double scale_q = 1.0;
};

TwinState make_twin_state(const TwinConfig& config);

/// One estimation step: anchors the network at head_voltage, injects the
/// reported inverter powers as constant-PQ devices, splits the aggregate
/// consumer reading across load buses by rating (rescaled until the solved
/// voltage-dependent consumption matches the reading), advances the
/// frequency model one telemetry period, and emits per-bus voltages and
/// frequencies. Throws TwinEstimationError on divergence.
VirtualMeasurements twin_step(TwinState& state, const TwinConfig& config,
                              std::complex<double> head_voltage,
                              const scenario::TelemetryRecord& ied_powers);

/// Replays a whole record series. head_voltages[i] anchors step i. A step
/// that fails to converge is flagged diverged and carries the previous
/// step's estimates forward instead of being dropped.
std::vector<VirtualMeasurements> run_twin(const TwinConfig& config,
                                          const std::vector<scenario::TelemetryRecord>& records,
                                          const std::vector<double>& head_voltages);

/// The eight power channels as a labeled dataset (the baseline feature set).
ml::LabeledDataset plain_features(const std::vector<scenario::TelemetryRecord>& records);

/// Concatenates power channels with virtual measurements: 8 + N voltage +
/// N frequency features, plus per-node |v - nominal| residuals when
/// include_residuals is set (nominal defaults to 1.0 pu everywhere). Labels
/// pass through unchanged. Length or timestamp misalignment throws
/// ValidationError.
ml::LabeledDataset augment_with_dt(const std::vector<scenario::TelemetryRecord>& records,
                                   const std::vector<VirtualMeasurements>& virtuals,
                                   bool include_residuals = false,
                                   const Vectord* v_nominal = nullptr);

}  // namespace twingrid::twin
