// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <utility>
#include <vector>

#include "twingrid/grid/types.hpp"
#include "twingrid/rng.hpp"

namespace twingrid::test {

/// Closed-form receiving-end voltage of a two-bus feeder: slack at e1 (real),
/// one series r+jx line, constant power P+jQ consumed at the far bus.
/// Derived from |V2|^2 = e1*conj(V2) - (r+jx)(P-jQ); the high root is the
/// physical operating point.
inline std::complex<double> two_bus_voltage(double e1, double r, double x, double p, double q) {
  const double b = -(x * p - r * q) / e1;
  const double disc = e1 * e1 - 4.0 * (b * b + r * p + x * q);
  if (disc < 0) throw std::runtime_error("two_bus_voltage: no real operating point");
  const double a = 0.5 * (e1 + std::sqrt(disc));
  return {a, b};
}

/// Independent nodal Newton solve in rectangular coordinates with a central
/// finite-difference Jacobian. Loads follow the exponential voltage law,
/// evaluated inline so the oracle shares no solver code with the sweep.
inline Eigen::VectorXcd newton_power_flow(
    const grid::FeederTopology& topo, const Eigen::VectorXd& p_const,
    const Eigen::VectorXd& q_const,
    const std::vector<std::pair<int, grid::ExponentialLoad<double>>>& loads,
    double v_slack) {
  const int n = static_cast<int>(topo.buses.size());
  Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n, n);
  for (const auto& line : topo.lines) {
    const int a = line.from_bus - 1;
    const int b = line.to_bus - 1;
    const std::complex<double> adm = 1.0 / std::complex<double>(line.r, line.x);
    y(a, a) += adm;
    y(b, b) += adm;
    y(a, b) -= adm;
    y(b, a) -= adm;
  }
  int slack = -1;
  for (const auto& bus : topo.buses) {
    if (bus.kind == grid::BusKind::Slack) slack = bus.id - 1;
  }
  if (slack < 0) throw std::runtime_error("newton_power_flow: no slack bus");

  std::vector<int> unknown;
  for (int k = 0; k < n; ++k) {
    if (k != slack) unknown.push_back(k);
  }
  const int m = static_cast<int>(unknown.size());

  const auto assemble = [&](const Eigen::VectorXd& xs) {
    Eigen::VectorXcd v(n);
    v[slack] = {v_slack, 0.0};
    for (int j = 0; j < m; ++j) v[unknown[j]] = {xs[2 * j], xs[2 * j + 1]};
    return v;
  };
  const auto residual = [&](const Eigen::VectorXd& xs) {
    const Eigen::VectorXcd v = assemble(xs);
    Eigen::VectorXcd s_inj(n);
    for (int k = 0; k < n; ++k) s_inj[k] = {p_const[k], q_const[k]};
    for (const auto& [bus_id, load] : loads) {
      const int k = bus_id - 1;
      const double vm = std::abs(v[k]);
      s_inj[k] -= std::complex<double>(load.p0 * std::pow(vm / load.v0, load.np),
                                       load.q0 * std::pow(vm / load.v0, load.nq));
    }
    const Eigen::VectorXcd i = y * v;
    Eigen::VectorXd f(2 * m);
    for (int j = 0; j < m; ++j) {
      const int k = unknown[j];
      const std::complex<double> mis = v[k] * std::conj(i[k]) - s_inj[k];
      f[2 * j] = mis.real();
      f[2 * j + 1] = mis.imag();
    }
    return f;
  };

  Eigen::VectorXd xs(2 * m);
  for (int j = 0; j < m; ++j) {
    xs[2 * j] = v_slack;
    xs[2 * j + 1] = 0.0;
  }
  const double h = 1e-7;
  for (int iter = 0; iter < 80; ++iter) {
    const Eigen::VectorXd f = residual(xs);
    if (f.lpNorm<Eigen::Infinity>() < 1e-12) break;
    Eigen::MatrixXd jac(2 * m, 2 * m);
    for (int c = 0; c < 2 * m; ++c) {
      Eigen::VectorXd hi = xs;
      Eigen::VectorXd lo = xs;
      hi[c] += h;
      lo[c] -= h;
      jac.col(c) = (residual(hi) - residual(lo)) / (2.0 * h);
    }
    xs += jac.partialPivLu().solve(-f);
  }
  if (residual(xs).lpNorm<Eigen::Infinity>() > 1e-10) {
    throw std::runtime_error("newton_power_flow: did not converge");
  }
  return assemble(xs);
}

/// Random radial feeder: bus 1 slack, each new bus hangs off a uniformly
/// chosen existing bus with modest series impedance.
inline grid::FeederTopology random_radial_feeder(Rng& rng, int n) {
  grid::FeederTopology topo;
  topo.buses.push_back({1, grid::BusKind::Slack, 1.0});
  for (int id = 2; id <= n; ++id) {
    topo.buses.push_back({id, grid::BusKind::Pq, 1.0});
    const int parent = 1 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(id - 1)));
    topo.lines.push_back({parent, id, 0.001 + 0.02 * rng.uniform(), 0.002 + 0.03 * rng.uniform()});
  }
  return topo;
}

}  // namespace twingrid::test
