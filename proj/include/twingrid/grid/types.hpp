// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "twingrid/dense.hpp"

namespace twingrid::grid {

enum class BusKind { Slack, Pq };

/// Network node. Ids are 1-based and contiguous; bus 1 is the feeder head.
struct Bus {
  int id = 0;
  BusKind kind = BusKind::Pq;
  double v_nominal = 1.0;  // pu
};

/// Series R-X branch between two buses. No shunt elements.
struct LineSegment {
  int from_bus = 0;
  int to_bus = 0;
  double r = 0.0;  // pu
  double x = 0.0;  // pu
};

/// Buses plus lines; must form a tree rooted at the slack bus.
struct FeederTopology {
  std::vector<Bus> buses;
  std::vector<LineSegment> lines;
};

/// Voltage-dependent load: P = p0*(v/v0)^np, Q = q0*(v/v0)^nq.
/// p0/q0 track the latest dispatch command (p_ref/q_ref) each telemetry step.
template <typename Scalar = double>
struct ExponentialLoad {
  Scalar p0{0};  // pu at v0
  Scalar q0{0};
  Scalar v0{1};
  Scalar np{0};
  Scalar nq{0};
  Scalar p_ref{0};  // latest command, pu
  Scalar q_ref{0};
};

/// Synchronous-reference-frame PLL. rho is the estimation error
/// theta_hat - theta_poc, wrapped to (-pi, pi].
template <typename Scalar = double>
struct PllState {
  Scalar theta_hat{0};  // rad
  Scalar omega_hat{0};  // rad/s
  Scalar kp{40};
  Scalar ki{80};
  Scalar integ{0};
  Scalar rho{0};  // rad
};

/// Current-source inverter interface. The closed current loop is a
/// first-order lag with time constant tau_i; magnitude capped at i_max.
template <typename Scalar = double>
struct InverterState {
  Scalar i_d{0};  // pu
  Scalar i_q{0};
  Scalar i_d_ref{0};
  Scalar i_q_ref{0};
  Scalar tau_i{0.02};  // s
  Scalar i_max{1.5};   // pu
  PllState<Scalar> pll{};
};

/// Converged network state. Vectors are indexed by bus id minus one.
template <typename Scalar = double>
struct PowerFlowSolution {
  Vector<Scalar> v_mag;        // pu
  Vector<Scalar> v_angle;      // rad
  Vector<Scalar> p_injection;  // pu, generation positive
  Vector<Scalar> q_injection;  // pu
  int iterations = 0;
  bool converged = false;
};

/// Aggregate system frequency plus per-node PLL-filtered measurements.
template <typename Scalar = double>
struct FrequencyState {
  Scalar f_sys{0};         // Hz
  Vector<Scalar> f_node;   // Hz, indexed by bus id minus one
  Scalar t_f{2.0};         // s
  Scalar k_f{0.5};         // Hz per pu imbalance
  Scalar tau_pll{0.1};     // s
};

template <typename Scalar>
FrequencyState<Scalar> make_frequency_state(Eigen::Index n_buses, Scalar f_nominal,
                                            Scalar t_f, Scalar k_f, Scalar tau_pll) {
  FrequencyState<Scalar> s;
  s.f_sys = f_nominal;
  s.f_node = Vector<Scalar>::Constant(n_buses, f_nominal);
  s.t_f = t_f;
  s.k_f = k_f;
  s.tau_pll = tau_pll;
  return s;
}

}  // namespace twingrid::grid
