// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <tuple>
#include <utility>

#include "twingrid/errors.hpp"
#include "twingrid/grid/types.hpp"

namespace twingrid::grid {

/// Wraps an angle to (-pi, pi].
template <typename Scalar>
Scalar wrap_angle(Scalar a) {
  constexpr Scalar pi = std::numbers::pi_v<Scalar>;
  Scalar r = std::remainder(a, Scalar{2} * pi);
  if (r <= -pi) r = pi;
  return r;
}

template <typename Scalar>
struct PowerPQ {
  Scalar p{0};
  Scalar q{0};
};

/// Exponential voltage dependence around the reference point (p0, q0, v0).
template <typename Scalar>
PowerPQ<Scalar> load_power(const ExponentialLoad<Scalar>& load, Scalar v) {
  if (!(v > Scalar{0})) throw RuntimeFailure("load_power: non-positive voltage");
  using std::pow;
  const Scalar ratio = v / load.v0;
  return {load.p0 * pow(ratio, load.np), load.q0 * pow(ratio, load.nq)};
}

/// Power delivered at the point of connection by a current-source inverter,
/// seen through a PLL with angle error rho.
template <typename Scalar>
PowerPQ<Scalar> inverter_power(Scalar i_d, Scalar i_q, Scalar v_poc, Scalar rho) {
  using std::cos;
  using std::sin;
  const Scalar c = cos(rho);
  const Scalar s = sin(rho);
  return {i_d * v_poc * c + i_q * v_poc * s, -i_q * v_poc * c + i_d * v_poc * s};
}

/// Caps the current vector at i_max, preserving the i_d:i_q ratio.
template <typename Scalar>
std::pair<Scalar, Scalar> limit_current(Scalar i_d, Scalar i_q, Scalar i_max) {
  using std::hypot;
  const Scalar mag = hypot(i_d, i_q);
  if (mag <= i_max) return {i_d, i_q};
  const Scalar scale = i_max / mag;
  return {i_d * scale, i_q * scale};
}

/// Inverts the locked-PLL power equations to current references, then applies
/// the magnitude limit. Refuses to divide by a collapsed voltage.
template <typename Scalar>
std::pair<Scalar, Scalar> current_refs_from_power(Scalar p_ref, Scalar q_ref, Scalar v_poc,
                                                  Scalar i_max, Scalar v_min = Scalar{0.1}) {
  if (!(v_poc >= v_min)) {
    throw RuntimeFailure("current_refs_from_power: v_poc below under-voltage threshold");
  }
  return limit_current(p_ref / v_poc, -q_ref / v_poc, i_max);
}

/// One explicit-Euler step of the first-order closed current loop.
template <typename Scalar>
InverterState<Scalar> current_loop_step(InverterState<Scalar> state, Scalar dt) {
  if (!(dt > Scalar{0}) || !(dt <= state.tau_i / Scalar{2})) {
    throw ValidationError("current_loop_step: dt must lie in (0, tau_i/2]");
  }
  const Scalar a = dt / state.tau_i;
  state.i_d += a * (state.i_d_ref - state.i_d);
  state.i_q += a * (state.i_q_ref - state.i_q);
  std::tie(state.i_d, state.i_q) = limit_current(state.i_d, state.i_q, state.i_max);
  return state;
}

/// One explicit-Euler step of a PI synchronous-reference-frame PLL tracking
/// the point-of-connection angle.
template <typename Scalar>
PllState<Scalar> pll_step(PllState<Scalar> state, Scalar theta_poc, Scalar dt,
                          Scalar omega_nominal) {
  if (!(dt > Scalar{0})) throw ValidationError("pll_step: dt must be positive");
  const Scalar err = wrap_angle(theta_poc - state.theta_hat);
  state.integ += state.ki * err * dt;
  state.omega_hat = omega_nominal + state.kp * err + state.integ;
  state.theta_hat += state.omega_hat * dt;
  state.rho = wrap_angle(state.theta_hat - theta_poc);
  return state;
}

/// Receiving-end voltage across a series R-X branch.
template <typename Scalar>
std::complex<Scalar> line_voltage_drop(std::complex<Scalar> v_from, std::complex<Scalar> i,
                                       Scalar r, Scalar x) {
  return v_from - std::complex<Scalar>(r, x) * i;
}

}  // namespace twingrid::grid
