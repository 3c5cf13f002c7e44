// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "twingrid/dense.hpp"
#include "twingrid/errors.hpp"
#include "twingrid/grid/device_models.hpp"
#include "twingrid/grid/topology.hpp"
#include "twingrid/grid/types.hpp"

namespace twingrid::grid {

/// Thrown when the sweep fails to converge; carries the last iterate.
class PowerFlowDiverged : public RuntimeFailure {
 public:
  PowerFlowDiverged(const std::string& message, std::vector<double> v_mag,
                    std::vector<double> v_angle, int iterations)
      : RuntimeFailure(message),
        v_mag_(std::move(v_mag)),
        v_angle_(std::move(v_angle)),
        iterations_(iterations) {}

  const std::vector<double>& last_v_mag() const noexcept { return v_mag_; }
  const std::vector<double>& last_v_angle() const noexcept { return v_angle_; }
  int iterations() const noexcept { return iterations_; }

 private:
  std::vector<double> v_mag_;
  std::vector<double> v_angle_;
  int iterations_;
};

/// Injections for one solve. Vectors are indexed by bus id minus one and hold
/// constant-power devices (generation positive). Voltage-dependent loads are
/// attached by bus id and re-evaluated at every iterate.
template <typename Scalar = double>
struct PowerFlowInput {
  Vector<Scalar> p_constant;
  Vector<Scalar> q_constant;
  std::vector<std::pair<int, ExponentialLoad<Scalar>>> loads;
  Scalar slack_voltage{1};
  Scalar tolerance{1e-8};
  int max_iterations{50};
};

namespace detail {

template <typename Scalar>
void evaluate_injections(const PowerFlowInput<Scalar>& in,
                         const Vector<std::complex<Scalar>>& v,
                         Vector<std::complex<Scalar>>& s_net) {
  for (Eigen::Index k = 0; k < s_net.size(); ++k) {
    s_net[k] = std::complex<Scalar>(in.p_constant[k], in.q_constant[k]);
  }
  for (const auto& [bus_id, load] : in.loads) {
    const Eigen::Index k = bus_id - 1;
    const PowerPQ<Scalar> pq = load_power(load, std::abs(v[k]));
    s_net[k] -= std::complex<Scalar>(pq.p, pq.q);
  }
}

/// Backward pass: branch currents feeding each bus, plus the net injection
/// current drawn from the slack source. s_net must match v.
template <typename Scalar>
std::complex<Scalar> backward_currents(const FeederTree& tree,
                                       const Vector<std::complex<Scalar>>& v,
                                       const Vector<std::complex<Scalar>>& s_net,
                                       Vector<std::complex<Scalar>>& i_branch) {
  for (int k = 0; k < tree.n; ++k) {
    i_branch[k] = -std::conj(s_net[k] / v[k]);
  }
  std::complex<Scalar> into_root{0, 0};
  i_branch[tree.root] = std::complex<Scalar>{0, 0};
  for (std::size_t pos = tree.order.size(); pos-- > 1;) {
    const int k = tree.order[pos];
    const int up = tree.parent[static_cast<std::size_t>(k)];
    if (up == tree.root) {
      into_root += i_branch[k];
    } else {
      i_branch[up] += i_branch[k];
    }
  }
  return into_root;
}

}  // namespace detail

/// Backward/forward sweep on a radial feeder. Loads are re-evaluated at each
/// iterate's voltage; convergence is the max voltage update falling below
/// in.tolerance. Throws PowerFlowDiverged on iteration exhaustion.
template <typename Scalar = double>
PowerFlowSolution<Scalar> solve_power_flow(const FeederTree& tree,
                                           const PowerFlowInput<Scalar>& in) {
  if (!(in.slack_voltage > Scalar{0})) {
    throw ValidationError("solve_power_flow: slack voltage must be positive");
  }
  if (in.p_constant.size() != tree.n || in.q_constant.size() != tree.n) {
    throw ValidationError("solve_power_flow: injection vectors must cover every bus");
  }
  for (const auto& [bus_id, load] : in.loads) {
    if (bus_id < 1 || bus_id > tree.n) {
      throw ValidationError("solve_power_flow: load attached to unknown bus");
    }
    (void)load;
  }

  using Complex = std::complex<Scalar>;
  Vector<Complex> v = Vector<Complex>::Constant(tree.n, Complex(in.slack_voltage, 0));
  Vector<Complex> s_net(tree.n);
  Vector<Complex> i_branch(tree.n);

  int iterations = 0;
  bool converged = false;
  while (iterations < in.max_iterations) {
    ++iterations;
    detail::evaluate_injections(in, v, s_net);
    detail::backward_currents(tree, v, s_net, i_branch);
    Scalar delta{0};
    for (std::size_t pos = 1; pos < tree.order.size(); ++pos) {
      const int k = tree.order[pos];
      const int up = tree.parent[static_cast<std::size_t>(k)];
      const Complex next = line_voltage_drop(
          v[up], i_branch[k], Scalar(tree.line_r[static_cast<std::size_t>(k)]),
          Scalar(tree.line_x[static_cast<std::size_t>(k)]));
      delta = std::max(delta, std::abs(next - v[k]));
      v[k] = next;
    }
    if (delta < in.tolerance) {
      converged = true;
      break;
    }
  }

  if (!converged) {
    std::vector<double> mag(static_cast<std::size_t>(tree.n));
    std::vector<double> ang(static_cast<std::size_t>(tree.n));
    for (int k = 0; k < tree.n; ++k) {
      mag[static_cast<std::size_t>(k)] = static_cast<double>(std::abs(v[k]));
      ang[static_cast<std::size_t>(k)] = static_cast<double>(std::arg(v[k]));
    }
    throw PowerFlowDiverged("solve_power_flow: no convergence after " +
                                std::to_string(iterations) + " sweeps",
                            std::move(mag), std::move(ang), iterations);
  }

  // One consistency pass at the final voltage so the reported injections,
  // branch currents, and slack power satisfy KCL exactly.
  detail::evaluate_injections(in, v, s_net);
  const std::complex<Scalar> into_root = detail::backward_currents(tree, v, s_net, i_branch);
  const std::complex<Scalar> s_slack = v[tree.root] * std::conj(into_root) - s_net[tree.root];

  PowerFlowSolution<Scalar> out;
  out.v_mag.resize(tree.n);
  out.v_angle.resize(tree.n);
  out.p_injection.resize(tree.n);
  out.q_injection.resize(tree.n);
  for (int k = 0; k < tree.n; ++k) {
    out.v_mag[k] = std::abs(v[k]);
    out.v_angle[k] = std::arg(v[k]);
    out.p_injection[k] = s_net[k].real();
    out.q_injection[k] = s_net[k].imag();
  }
  out.p_injection[tree.root] = s_slack.real();
  out.q_injection[tree.root] = s_slack.imag();
  out.iterations = iterations;
  out.converged = true;
  return out;
}

/// Convenience overload that validates the topology first.
template <typename Scalar = double>
PowerFlowSolution<Scalar> solve_power_flow(const FeederTopology& topology,
                                           const PowerFlowInput<Scalar>& in) {
  return solve_power_flow(build_tree(topology), in);
}

}  // namespace twingrid::grid
