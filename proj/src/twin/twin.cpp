// SPDX-License-Identifier: Apache-2.0
#include "twingrid/twin/twin.hpp"

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "twingrid/grid/device_models.hpp"
#include "twingrid/grid/frequency.hpp"
#include "twingrid/grid/power_flow.hpp"
#include "twingrid/grid/topology.hpp"
#include "twingrid/telemetry/frame.hpp"

namespace twingrid::twin {

namespace {

bool is_inverter_kind(const std::string& kind) {
  return kind == "pv" || kind == "wind" || kind == "battery";
}

std::string at_step(std::int64_t t_ms) { return " at t=" + std::to_string(t_ms) + " ms"; }

struct ConsumerSplit {
  std::vector<grid::ExponentialLoad<double>> loads;  // aligned with load devices
  std::vector<int> buses;
  double rated_p = 0.0;  // pu, sum of load ratings
  double rated_q = 0.0;
};

}  // namespace

TwinConfig twin_config_from_scenario(const scenario::Scenario& sc) {
  TwinConfig config;
  config.bases = sc.bases;
  config.dt_telemetry_s = sc.timing.dt_telemetry_s;
  config.topology = sc.topology;
  config.devices = sc.devices;
  return config;
}

TwinState make_twin_state(const TwinConfig& config) {
  const grid::FeederTree tree = grid::build_tree(config.topology);
  TwinState state;
  state.frequency = grid::make_frequency_state<double>(
      tree.n, config.bases.f_nominal_hz, config.t_f_s, config.k_f, config.tau_pll_s);
  return state;
}

VirtualMeasurements twin_step(TwinState& state, const TwinConfig& config,
                              std::complex<double> head_voltage,
                              const scenario::TelemetryRecord& ied_powers) {
  const double v_head = std::abs(head_voltage);
  if (!(v_head > 0.0)) {
    throw TwinEstimationError("twin_step: head voltage magnitude must be positive",
                              ied_powers.t_ms);
  }
  const grid::FeederTree tree = grid::build_tree(config.topology);
  const double s_base = config.bases.s_base_kva;

  grid::PowerFlowInput<double> in;
  in.p_constant = Vectord::Zero(tree.n);
  in.q_constant = Vectord::Zero(tree.n);
  in.slack_voltage = v_head;
  in.tolerance = config.tolerance;
  in.max_iterations = config.max_iterations;

  ConsumerSplit split;
  std::vector<const scenario::DeviceConfig*> load_devices;
  for (const scenario::DeviceConfig& dev : config.devices) {
    const int bus_idx = dev.bus - 1;
    if (is_inverter_kind(dev.kind)) {
      const std::uint32_t p_ioa = dev.kind == "pv" ? 1u : (dev.kind == "battery" ? 3u : 5u);
      in.p_constant[bus_idx] += scenario::channel_value(ied_powers, p_ioa) / s_base;
      in.q_constant[bus_idx] += scenario::channel_value(ied_powers, p_ioa + 1) / s_base;
    } else if (dev.kind == "load") {
      grid::ExponentialLoad<double> load;
      load.v0 = dev.v0_pu;
      load.np = dev.np;
      load.nq = dev.nq;
      split.loads.push_back(load);
      split.buses.push_back(dev.bus);
      split.rated_p += dev.rating_kw / s_base;
      split.rated_q += dev.rating_kvar / s_base;
      load_devices.push_back(&dev);
    }
  }

  const double target_p = ied_powers.p_n / s_base;
  const double target_q = ied_powers.q_n / s_base;
  const bool need_p = target_p != 0.0;
  const bool need_q = target_q != 0.0;
  if ((need_p && !(split.rated_p > 0.0)) || (need_q && !(split.rated_q > 0.0))) {
    throw TwinEstimationError(
        "twin_step: consumer reading cannot be placed, no rated load to carry it",
        ied_powers.t_ms);
  }

  // Splits the aggregate consumer reading across load buses in proportion to
  // their ratings, then rescales until the voltage-dependent consumption at
  // the solved voltages reproduces the reading.
  double s_p = need_p ? state.scale_p : 0.0;
  double s_q = need_q ? state.scale_q : 0.0;
  if (need_p && s_p == 0.0) s_p = 1.0;
  if (need_q && s_q == 0.0) s_q = 1.0;

  grid::PowerFlowSolution<double> sol;
  bool balanced = false;
  for (int iter = 0; iter < config.balance_max_iterations; ++iter) {
    in.loads.clear();
    for (std::size_t i = 0; i < split.loads.size(); ++i) {
      grid::ExponentialLoad<double> load = split.loads[i];
      load.p0 = s_p * (load_devices[i]->rating_kw / s_base);
      load.q0 = s_q * (load_devices[i]->rating_kvar / s_base);
      load.p_ref = load.p0;
      load.q_ref = load.q0;
      in.loads.emplace_back(split.buses[i], load);
    }

    try {
      sol = grid::solve_power_flow(tree, in);
    } catch (const grid::PowerFlowDiverged& e) {
      throw TwinEstimationError(std::string("twin_step: ") + e.what() + at_step(ied_powers.t_ms),
                                ied_powers.t_ms);
    }

    double consumed_p = 0.0;
    double consumed_q = 0.0;
    for (const auto& [bus, load] : in.loads) {
      const grid::PowerPQ<double> pq = grid::load_power(load, sol.v_mag[bus - 1]);
      consumed_p += pq.p;
      consumed_q += pq.q;
    }
    const double err_p = consumed_p - target_p;
    const double err_q = consumed_q - target_q;
    const double tol_p = config.balance_tolerance * std::max(1.0, std::abs(target_p));
    const double tol_q = config.balance_tolerance * std::max(1.0, std::abs(target_q));
    if (std::abs(err_p) <= tol_p && std::abs(err_q) <= tol_q) {
      balanced = true;
      break;
    }
    if (need_p) {
      if (std::abs(consumed_p) > 1e-300 && (consumed_p / target_p) > 0.0) {
        s_p *= target_p / consumed_p;
      } else {
        s_p += -err_p / std::max(split.rated_p, 1e-12);
      }
    }
    if (need_q) {
      if (std::abs(consumed_q) > 1e-300 && (consumed_q / target_q) > 0.0) {
        s_q *= target_q / consumed_q;
      } else {
        s_q += -err_q / std::max(split.rated_q, 1e-12);
      }
    }
  }
  if (!balanced) {
    throw TwinEstimationError("twin_step: consumer apportionment did not converge" +
                                  at_step(ied_powers.t_ms),
                              ied_powers.t_ms);
  }

  state.scale_p = need_p ? s_p : state.scale_p;
  state.scale_q = need_q ? s_q : state.scale_q;
  state.frequency = grid::frequency_step(state.frequency, sol.p_injection[tree.root],
                                         config.dt_telemetry_s, config.bases.f_nominal_hz);

  VirtualMeasurements vm;
  vm.t_ms = ied_powers.t_ms;
  vm.v = sol.v_mag;
  vm.f = state.frequency.f_node;
  return vm;
}

std::vector<VirtualMeasurements> run_twin(const TwinConfig& config,
                                          const std::vector<scenario::TelemetryRecord>& records,
                                          const std::vector<double>& head_voltages) {
  if (records.size() != head_voltages.size()) {
    throw ValidationError("run_twin: one head voltage is required per record");
  }
  const grid::FeederTree tree = grid::build_tree(config.topology);
  TwinState state = make_twin_state(config);
  std::vector<VirtualMeasurements> out;
  out.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    try {
      out.push_back(twin_step(state, config, {head_voltages[i], 0.0}, records[i]));
    } catch (const TwinEstimationError&) {
      VirtualMeasurements vm;
      vm.t_ms = records[i].t_ms;
      if (out.empty()) {
        vm.v = Vectord::Ones(tree.n);
        vm.f = Vectord::Constant(tree.n, config.bases.f_nominal_hz);
      } else {
        vm.v = out.back().v;
        vm.f = out.back().f;
      }
      vm.diverged = true;
      out.push_back(std::move(vm));
    }
  }
  return out;
}

ml::LabeledDataset plain_features(const std::vector<scenario::TelemetryRecord>& records) {
  ml::LabeledDataset out;
  const Eigen::Index n = static_cast<Eigen::Index>(records.size());
  out.x.resize(n, static_cast<Eigen::Index>(telemetry::kChannelCount));
  out.y.resize(n);
  for (std::string_view name : telemetry::channel_names()) {
    out.feature_names.emplace_back(name);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const scenario::TelemetryRecord& rec = records[static_cast<std::size_t>(i)];
    for (std::uint32_t ioa = 1; ioa <= telemetry::kChannelCount; ++ioa) {
      out.x(i, static_cast<Eigen::Index>(ioa) - 1) = scenario::channel_value(rec, ioa);
    }
    out.y[i] = rec.label;
  }
  return out;
}

ml::LabeledDataset augment_with_dt(const std::vector<scenario::TelemetryRecord>& records,
                                   const std::vector<VirtualMeasurements>& virtuals,
                                   bool include_residuals, const Vectord* v_nominal) {
  if (records.size() != virtuals.size()) {
    throw ValidationError("augment_with_dt: records and virtual measurements differ in length");
  }
  ml::LabeledDataset base = plain_features(records);
  if (records.empty()) return base;

  const Eigen::Index n = base.x.rows();
  const Eigen::Index n_buses = virtuals.front().v.size();
  if (n_buses < 1 || virtuals.front().f.size() != n_buses) {
    throw ValidationError("augment_with_dt: virtual measurement vectors are malformed");
  }
  Vectord nominal = v_nominal != nullptr ? *v_nominal : Vectord::Ones(n_buses);
  if (nominal.size() != n_buses) {
    throw ValidationError("augment_with_dt: nominal voltage vector does not cover every bus");
  }

  const Eigen::Index base_cols = base.x.cols();
  const Eigen::Index extra = include_residuals ? 3 * n_buses : 2 * n_buses;
  ml::LabeledDataset out;
  out.x.resize(n, base_cols + extra);
  out.y = base.y;
  out.feature_names = base.feature_names;
  for (Eigen::Index k = 0; k < n_buses; ++k) {
    out.feature_names.push_back("v" + std::to_string(k + 1));
  }
  for (Eigen::Index k = 0; k < n_buses; ++k) {
    out.feature_names.push_back("f" + std::to_string(k + 1));
  }
  if (include_residuals) {
    for (Eigen::Index k = 0; k < n_buses; ++k) {
      out.feature_names.push_back("r" + std::to_string(k + 1));
    }
  }

  for (Eigen::Index i = 0; i < n; ++i) {
    const VirtualMeasurements& vm = virtuals[static_cast<std::size_t>(i)];
    if (vm.t_ms != records[static_cast<std::size_t>(i)].t_ms) {
      throw ValidationError("augment_with_dt: timestamp mismatch" + at_step(vm.t_ms));
    }
    if (vm.v.size() != n_buses || vm.f.size() != n_buses) {
      throw ValidationError("augment_with_dt: virtual measurement arity changed mid-series");
    }
    out.x.row(i).head(base_cols) = base.x.row(i);
    out.x.row(i).segment(base_cols, n_buses) = vm.v.transpose();
    out.x.row(i).segment(base_cols + n_buses, n_buses) = vm.f.transpose();
    if (include_residuals) {
      out.x.row(i).tail(n_buses) = (vm.v - nominal).cwiseAbs().transpose();
    }
  }
  return out;
}

}  // namespace twingrid::twin
