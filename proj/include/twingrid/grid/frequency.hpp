// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "twingrid/errors.hpp"
#include "twingrid/grid/types.hpp"

namespace twingrid::grid {

/// One explicit-Euler step of the aggregate frequency response to a net
/// active-power imbalance, plus the per-node measurement lag.
template <typename Scalar>
FrequencyState<Scalar> frequency_step(FrequencyState<Scalar> state, Scalar delta_p, Scalar dt,
                                      Scalar f_nominal) {
  if (!(dt > Scalar{0})) throw ValidationError("frequency_step: dt must be positive");
  state.f_sys += (dt / state.t_f) * (f_nominal - state.k_f * delta_p - state.f_sys);
  state.f_node.array() += (dt / state.tau_pll) * (state.f_sys - state.f_node.array());
  return state;
}

}  // namespace twingrid::grid
