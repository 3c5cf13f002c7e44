// SPDX-License-Identifier: Apache-2.0
#include "twingrid/scenario/simulate.hpp"

#include <cmath>
#include <complex>
#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "twingrid/grid/device_models.hpp"
#include "twingrid/grid/frequency.hpp"
#include "twingrid/grid/power_flow.hpp"
#include "twingrid/grid/topology.hpp"
#include "twingrid/telemetry/frame.hpp"

namespace twingrid::scenario {

namespace {

bool is_inverter_kind(const std::string& kind) {
  return kind == "pv" || kind == "wind" || kind == "battery";
}

std::int64_t to_ms(double seconds) { return std::llround(seconds * 1000.0); }

struct InverterRuntime {
  const DeviceConfig* config = nullptr;
  int bus_idx = 0;
  std::uint32_t p_ioa = 0;
  const Profile* profile = nullptr;
  grid::InverterState<double> state;
  double p_elec = 0.0;  // pu, output used in the latest solve
  double q_elec = 0.0;
};

struct LoadRuntime {
  const DeviceConfig* config = nullptr;
  int bus_idx = 0;
  const Profile* profile = nullptr;
  grid::ExponentialLoad<double> load;
};

const Profile* find_profile(const std::vector<Profile>& profiles, const std::string& device) {
  for (const Profile& p : profiles) {
    if (p.device == device) return &p;
  }
  return nullptr;
}

std::string at_time(double t_s) { return " at t=" + std::to_string(t_s) + " s"; }

}  // namespace

ProfilePoint profile_value(const Profile& profile, double t_s) {
  if (profile.samples.empty()) {
    throw ValidationError("profile_value: profile for '" + profile.device + "' has no samples");
  }
  const ProfilePoint* current = &profile.samples.front();
  for (const ProfilePoint& sample : profile.samples) {
    if (sample.t_s <= t_s) {
      current = &sample;
    } else {
      break;
    }
  }
  return *current;
}

void validate_profile(const Profile& profile) {
  if (profile.device.empty()) {
    throw ValidationError("profiles: entry missing its device id");
  }
  if (profile.samples.empty()) {
    throw ValidationError("profiles: '" + profile.device + "' has no samples");
  }
  for (std::size_t i = 1; i < profile.samples.size(); ++i) {
    if (!(profile.samples[i].t_s > profile.samples[i - 1].t_s)) {
      throw ValidationError("profiles: '" + profile.device +
                            "' timestamps must be strictly increasing");
    }
  }
}

double& channel_ref(TelemetryRecord& record, std::uint32_t ioa) {
  switch (ioa) {
    case 1: return record.p_pv;
    case 2: return record.q_pv;
    case 3: return record.p_batt;
    case 4: return record.q_batt;
    case 5: return record.p_w;
    case 6: return record.q_w;
    case 7: return record.p_n;
    case 8: return record.q_n;
    default: throw ValidationError("channel_ref: unknown channel address " + std::to_string(ioa));
  }
}

double channel_value(const TelemetryRecord& record, std::uint32_t ioa) {
  return channel_ref(const_cast<TelemetryRecord&>(record), ioa);
}

void validate_scenario(const Scenario& sc) {
  if (!(sc.bases.s_base_kva > 0.0) || !(sc.bases.v_base_v > 0.0) ||
      !(sc.bases.f_nominal_hz > 0.0)) {
    throw ValidationError("bases: s_base_kva, v_base_v and f_nominal_hz must be positive");
  }
  const Timing& tm = sc.timing;
  if (!(tm.dt_sim_s > 0.0) || !(tm.dt_telemetry_s > 0.0)) {
    throw ValidationError("timing: dt_sim_s and dt_telemetry_s must be positive");
  }
  if (!(tm.duration_s > 0.0)) {
    throw ValidationError("timing: duration_s must be positive");
  }
  if (!(tm.settle_s >= 0.0)) {
    throw ValidationError("timing: settle_s must be non-negative");
  }
  const double ratio = tm.dt_telemetry_s / tm.dt_sim_s;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 || std::llround(ratio) < 1) {
    throw ValidationError("timing: dt_telemetry_s must be a whole multiple of dt_sim_s");
  }
  const double periods = tm.duration_s / tm.dt_telemetry_s;
  if (std::abs(periods - std::round(periods)) > 1e-6 || std::llround(periods) < 1) {
    throw ValidationError("timing: duration_s must cover a whole number of telemetry periods");
  }
  if (!(sc.upstream.v_source_pu > 0.0)) {
    throw ValidationError("upstream: v_source_pu must be positive");
  }
  if (sc.upstream.r_pu < 0.0 || sc.upstream.x_pu < 0.0) {
    throw ValidationError("upstream: r_pu and x_pu must be non-negative");
  }

  const grid::FeederTree tree = grid::build_tree(sc.topology);

  std::set<std::string> ids;
  for (const DeviceConfig& dev : sc.devices) {
    if (dev.id.empty()) throw ValidationError("devices: entry missing its id");
    if (!ids.insert(dev.id).second) {
      throw ValidationError("devices: duplicate id '" + dev.id + "'");
    }
    if (!is_inverter_kind(dev.kind) && dev.kind != "load") {
      throw ValidationError("devices: '" + dev.id + "' has unknown kind '" + dev.kind + "'");
    }
    if (dev.bus < 1 || dev.bus > tree.n) {
      throw ValidationError("devices: '" + dev.id + "' references unknown bus " +
                            std::to_string(dev.bus));
    }
    if (dev.rating_kw < 0.0 || dev.rating_kvar < 0.0) {
      throw ValidationError("devices: '" + dev.id + "' ratings must be non-negative");
    }
    if (is_inverter_kind(dev.kind)) {
      if (!(dev.tau_i_s > 0.0) || !(dev.i_max_pu > 0.0)) {
        throw ValidationError("devices: '" + dev.id + "' needs positive tau_i_s and i_max_pu");
      }
      if (!(tm.dt_sim_s <= dev.tau_i_s / 2.0)) {
        throw ValidationError("devices: '" + dev.id +
                              "' requires dt_sim_s <= tau_i_s/2 for a stable current loop");
      }
    } else {
      if (!(dev.v0_pu > 0.0)) {
        throw ValidationError("devices: '" + dev.id + "' needs positive v0_pu");
      }
    }
  }

  std::set<std::string> profiled;
  for (const Profile& profile : sc.profiles) {
    validate_profile(profile);
    if (ids.find(profile.device) == ids.end()) {
      throw ValidationError("profiles: unknown device '" + profile.device + "'");
    }
    if (!profiled.insert(profile.device).second) {
      throw ValidationError("profiles: device '" + profile.device + "' scheduled twice");
    }
  }

  for (const AttackSpec& attack : sc.attacks) {
    if (attack.kind != "bias" && attack.kind != "scale" && attack.kind != "replay" &&
        attack.kind != "freeze" && attack.kind != "noise") {
      throw ValidationError("attacks: unknown kind '" + attack.kind + "'");
    }
    if (attack.targets.empty()) {
      throw ValidationError("attacks: " + attack.kind + " entry has no targets");
    }
    for (const std::string& target : attack.targets) {
      telemetry::channel_ioa(target);  // throws on unknown names
    }
    if (!(attack.t_start_s < attack.t_end_s)) {
      throw ValidationError("attacks: window must satisfy t_start < t_end");
    }
    if (attack.t_start_s < 0.0 || attack.t_end_s > tm.duration_s) {
      throw ValidationError("attacks: window must lie within [0, duration_s)");
    }
    if (attack.kind == "replay") {
      if (!(attack.magnitude >= 0.0)) {
        throw ValidationError("attacks: replay offset must be non-negative");
      }
      if (attack.t_start_s - attack.magnitude < 0.0) {
        throw ValidationError("attacks: replay offset reaches before the start of the trace");
      }
    }
    if (attack.kind == "noise" && !(attack.magnitude >= 0.0)) {
      throw ValidationError("attacks: noise sigma must be non-negative");
    }
  }
}

SimulationTrace simulate(const Scenario& sc) {
  validate_scenario(sc);

  const grid::FeederTree tree = grid::build_tree(sc.topology);
  const int n = tree.n;
  const double s_base = sc.bases.s_base_kva;
  const double f_nominal = sc.bases.f_nominal_hz;
  const double dt = sc.timing.dt_sim_s;
  const int substeps = static_cast<int>(std::llround(sc.timing.dt_telemetry_s / dt));
  const std::int64_t n_periods = std::llround(sc.timing.duration_s / sc.timing.dt_telemetry_s);
  const std::int64_t settle_periods =
      static_cast<std::int64_t>(std::ceil(sc.timing.settle_s / sc.timing.dt_telemetry_s - 1e-9));

  std::vector<InverterRuntime> inverters;
  std::vector<LoadRuntime> loads;
  for (const DeviceConfig& dev : sc.devices) {
    if (is_inverter_kind(dev.kind)) {
      InverterRuntime rt;
      rt.config = &dev;
      rt.bus_idx = dev.bus - 1;
      rt.p_ioa = dev.kind == "pv" ? 1u : (dev.kind == "battery" ? 3u : 5u);
      rt.profile = find_profile(sc.profiles, dev.id);
      rt.state.tau_i = dev.tau_i_s;
      rt.state.i_max = dev.i_max_pu;
      inverters.push_back(rt);
    } else {
      LoadRuntime rt;
      rt.config = &dev;
      rt.bus_idx = dev.bus - 1;
      rt.profile = find_profile(sc.profiles, dev.id);
      rt.load.v0 = dev.v0_pu;
      rt.load.np = dev.np;
      rt.load.nq = dev.nq;
      loads.push_back(rt);
    }
  }

  grid::FrequencyState<double> freq =
      grid::make_frequency_state<double>(n, f_nominal, 2.0, 0.5, 0.1);
  const std::complex<double> z_up(sc.upstream.r_pu, sc.upstream.x_pu);
  std::complex<double> i_head(0.0, 0.0);
  Vectord v_mag = Vectord::Constant(n, sc.upstream.v_source_pu);
  Vectord v_angle = Vectord::Zero(n);
  double head_voltage = sc.upstream.v_source_pu;
  grid::PowerFlowSolution<double> sol;
  sol.p_injection = Vectord::Zero(n);
  sol.q_injection = Vectord::Zero(n);

  // Dispatches references for the period starting at t_s, then advances the
  // plant through its substeps.
  const auto run_period = [&](double t_s) {
    for (InverterRuntime& inv : inverters) {
      double p_ref = 0.0;
      double q_ref = 0.0;
      if (inv.profile != nullptr) {
        const ProfilePoint pt = profile_value(*inv.profile, t_s);
        p_ref = pt.p_kw / s_base;
        q_ref = pt.q_kvar / s_base;
      }
      const auto [id_ref, iq_ref] = grid::current_refs_from_power(
          p_ref, q_ref, v_mag[inv.bus_idx], inv.state.i_max);
      inv.state.i_d_ref = id_ref;
      inv.state.i_q_ref = iq_ref;
    }
    for (LoadRuntime& ld : loads) {
      double p_ref = 0.0;
      double q_ref = 0.0;
      if (ld.profile != nullptr) {
        const ProfilePoint pt = profile_value(*ld.profile, t_s);
        p_ref = pt.p_kw / s_base;
        q_ref = pt.q_kvar / s_base;
      }
      ld.load.p_ref = p_ref;
      ld.load.q_ref = q_ref;
      ld.load.p0 = p_ref;
      ld.load.q0 = q_ref;
    }

    for (int s = 0; s < substeps; ++s) {
      const std::complex<double> v_head = sc.upstream.v_source_pu - z_up * i_head;
      head_voltage = std::abs(v_head);
      if (!(head_voltage > 0.0)) {
        throw RuntimeFailure("simulate: head voltage collapsed" + at_time(t_s));
      }

      grid::PowerFlowInput<double> in;
      in.p_constant = Vectord::Zero(n);
      in.q_constant = Vectord::Zero(n);
      in.slack_voltage = head_voltage;
      for (InverterRuntime& inv : inverters) {
        inv.state = grid::current_loop_step(inv.state, dt);
        inv.state.pll = grid::pll_step(inv.state.pll, v_angle[inv.bus_idx], dt, 0.0);
        const grid::PowerPQ<double> pq = grid::inverter_power(
            inv.state.i_d, inv.state.i_q, v_mag[inv.bus_idx], inv.state.pll.rho);
        inv.p_elec = pq.p;
        inv.q_elec = pq.q;
        in.p_constant[inv.bus_idx] += pq.p;
        in.q_constant[inv.bus_idx] += pq.q;
      }
      for (const LoadRuntime& ld : loads) {
        in.loads.emplace_back(ld.config->bus, ld.load);
      }

      sol = grid::solve_power_flow(tree, in);
      v_mag = sol.v_mag;
      v_angle = sol.v_angle;
      const std::complex<double> s_slack(sol.p_injection[tree.root],
                                         sol.q_injection[tree.root]);
      i_head = std::conj(s_slack / head_voltage);
      freq = grid::frequency_step(freq, sol.p_injection[tree.root], dt, f_nominal);
    }
  };

  SimulationTrace trace;
  trace.dt_telemetry_s = sc.timing.dt_telemetry_s;
  trace.n_buses = n;
  trace.truth.reserve(static_cast<std::size_t>(n_periods));
  trace.clean.reserve(static_cast<std::size_t>(n_periods));

  for (std::int64_t k = -settle_periods; k < n_periods; ++k) {
    const double t_s = static_cast<double>(std::max<std::int64_t>(k, 0)) * sc.timing.dt_telemetry_s;
    try {
      run_period(t_s);
    } catch (const grid::PowerFlowDiverged& e) {
      throw grid::PowerFlowDiverged(std::string(e.what()) + at_time(t_s), e.last_v_mag(),
                                    e.last_v_angle(), e.iterations());
    } catch (const RuntimeFailure& e) {
      throw RuntimeFailure(std::string(e.what()) + at_time(t_s));
    }
    if (k < 0) continue;

    GroundTruthStep truth;
    truth.t_ms = to_ms(t_s);
    truth.v_mag = v_mag;
    truth.v_angle = v_angle;
    truth.f_node = freq.f_node;
    truth.f_sys = freq.f_sys;
    truth.head_voltage = head_voltage;
    truth.p_slack = sol.p_injection[tree.root];
    truth.q_slack = sol.q_injection[tree.root];

    TelemetryRecord rec;
    rec.t_ms = truth.t_ms;
    for (const InverterRuntime& inv : inverters) {
      channel_ref(rec, inv.p_ioa) += inv.p_elec * s_base;
      channel_ref(rec, inv.p_ioa + 1) += inv.q_elec * s_base;
    }
    for (const LoadRuntime& ld : loads) {
      const grid::PowerPQ<double> pq = grid::load_power(ld.load, v_mag[ld.bus_idx]);
      rec.p_n += pq.p * s_base;
      rec.q_n += pq.q * s_base;
    }

    trace.truth.push_back(std::move(truth));
    trace.clean.push_back(rec);
  }

  trace.tampered = trace.clean;
  trace.labels.assign(trace.clean.size(), 0);
  return trace;
}

}  // namespace twingrid::scenario
