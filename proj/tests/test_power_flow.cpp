// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <complex>
#include <cstring>
#include <vector>

#include <doctest.h>

#include "support/oracles.hpp"
#include "twingrid/errors.hpp"
#include "twingrid/grid/power_flow.hpp"
#include "twingrid/grid/topology.hpp"
#include "twingrid/rng.hpp"

using namespace twingrid;
using namespace twingrid::grid;

namespace {

FeederTopology chain(int n, double r, double x) {
  FeederTopology topo;
  topo.buses.push_back({1, BusKind::Slack, 1.0});
  for (int id = 2; id <= n; ++id) {
    topo.buses.push_back({id, BusKind::Pq, 1.0});
    topo.lines.push_back({id - 1, id, r, x});
  }
  return topo;
}

PowerFlowInput<double> zero_input(int n) {
  PowerFlowInput<double> in;
  in.p_constant = Vectord::Zero(n);
  in.q_constant = Vectord::Zero(n);
  return in;
}

double line_losses_p(const FeederTopology& topo, const PowerFlowSolution<double>& sol) {
  double losses = 0.0;
  for (const auto& line : topo.lines) {
    const int a = line.from_bus - 1;
    const int b = line.to_bus - 1;
    const std::complex<double> va = std::polar(sol.v_mag[a], sol.v_angle[a]);
    const std::complex<double> vb = std::polar(sol.v_mag[b], sol.v_angle[b]);
    const std::complex<double> i = (va - vb) / std::complex<double>(line.r, line.x);
    losses += line.r * std::norm(i);
  }
  return losses;
}

}  // namespace

TEST_CASE("no-load feeder solves flat in one sweep") {
  const auto topo = chain(5, 0.01, 0.02);
  const auto sol = solve_power_flow(topo, zero_input(5));
  CHECK(sol.converged);
  CHECK(sol.iterations == 1);
  for (int k = 0; k < 5; ++k) {
    CHECK(sol.v_mag[k] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(sol.v_angle[k] == doctest::Approx(0.0).epsilon(1e-15));
  }
}

TEST_CASE("two-bus constant-power load matches the closed-form nodal solution") {
  const auto topo = chain(2, 0.01, 0.02);
  auto in = zero_input(2);
  in.p_constant[1] = -0.5;
  in.q_constant[1] = -0.2;
  const auto sol = solve_power_flow(topo, in);
  const auto v2 = test::two_bus_voltage(1.0, 0.01, 0.02, 0.5, 0.2);
  CHECK(sol.converged);
  CHECK(std::abs(std::polar(sol.v_mag[1], sol.v_angle[1]) - v2) < 1e-8);
}

TEST_CASE("two-bus exponential load matches the independent Newton solve") {
  const auto topo = chain(2, 0.02, 0.04);
  auto in = zero_input(2);
  ExponentialLoad<double> load;
  load.p0 = 0.6;
  load.q0 = 0.25;
  load.v0 = 1.0;
  load.np = 1.8;
  load.nq = 2.2;
  in.loads.emplace_back(2, load);
  const auto sol = solve_power_flow(topo, in);
  const auto oracle =
      test::newton_power_flow(topo, in.p_constant, in.q_constant, in.loads, 1.0);
  CHECK(sol.converged);
  CHECK(std::abs(std::polar(sol.v_mag[1], sol.v_angle[1]) - oracle[1]) < 1e-8);
}

TEST_CASE("three-bus chain with an exporting inverter shows voltage rise") {
  const auto topo = chain(3, 0.01, 0.02);
  auto in = zero_input(3);
  in.p_constant[2] = 0.3;
  const auto sol = solve_power_flow(topo, in);
  CHECK(sol.converged);
  CHECK(sol.v_mag[2] > sol.v_mag[1]);
  CHECK(sol.v_mag[1] > sol.v_mag[0]);

  const auto oracle =
      test::newton_power_flow(topo, in.p_constant, in.q_constant, in.loads, 1.0);
  for (int k = 0; k < 3; ++k) {
    CHECK(std::abs(std::polar(sol.v_mag[k], sol.v_angle[k]) - oracle[k]) < 1e-8);
  }
}

TEST_CASE("sweep matches the Newton oracle on random radial feeders") {
  Rng rng(201);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform_int(7));
    const auto topo = test::random_radial_feeder(rng, n);
    auto in = zero_input(n);
    std::vector<std::pair<int, ExponentialLoad<double>>> loads;
    for (int k = 1; k < n; ++k) {
      in.p_constant[k] = 0.2 * rng.uniform() - 0.1;
      in.q_constant[k] = 0.1 * rng.uniform() - 0.05;
      if (rng.uniform() < 0.5) {
        ExponentialLoad<double> load;
        load.p0 = 0.15 * rng.uniform();
        load.q0 = 0.05 * rng.uniform();
        load.v0 = 1.0;
        load.np = 3.0 * rng.uniform();
        load.nq = 3.0 * rng.uniform();
        loads.emplace_back(k + 1, load);
        in.loads.emplace_back(k + 1, load);
      }
    }
    const auto sol = solve_power_flow(topo, in);
    const auto oracle = test::newton_power_flow(topo, in.p_constant, in.q_constant, loads, 1.0);
    CHECK(sol.converged);
    for (int k = 0; k < n; ++k) {
      CHECK(std::abs(std::polar(sol.v_mag[k], sol.v_angle[k]) - oracle[k]) < 1e-8);
    }
  }
}

TEST_CASE("slack injection balances device power and line losses") {
  Rng rng(202);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform_int(19));
    const auto topo = test::random_radial_feeder(rng, n);
    auto in = zero_input(n);
    for (int k = 1; k < n; ++k) {
      in.p_constant[k] = 0.12 * rng.uniform() - 0.06;
      in.q_constant[k] = 0.06 * rng.uniform() - 0.03;
      if (rng.uniform() < 0.6) {
        ExponentialLoad<double> load;
        load.p0 = 0.1 * rng.uniform();
        load.q0 = 0.04 * rng.uniform();
        load.v0 = 1.0;
        load.np = 3.0 * rng.uniform();
        load.nq = 3.0 * rng.uniform();
        in.loads.emplace_back(k + 1, load);
      }
    }
    const auto sol = solve_power_flow(topo, in);
    CHECK(sol.converged);
    double devices = 0.0;
    for (int k = 0; k < n; ++k) {
      if (k != 0) devices += sol.p_injection[k];
    }
    const double losses = line_losses_p(topo, sol);
    CHECK(std::abs(sol.p_injection[0] - (-devices + losses)) < 1e-6);
  }
}

TEST_CASE("solver reports the load actually drawn at the solved voltage") {
  const auto topo = chain(2, 0.05, 0.08);
  auto in = zero_input(2);
  ExponentialLoad<double> load;
  load.p0 = 0.5;
  load.q0 = 0.2;
  load.v0 = 1.0;
  load.np = 2.0;
  load.nq = 2.0;
  in.loads.emplace_back(2, load);
  const auto sol = solve_power_flow(topo, in);
  const double v = sol.v_mag[1];
  CHECK(sol.p_injection[1] == doctest::Approx(-0.5 * v * v).epsilon(1e-10));
  CHECK(sol.q_injection[1] == doctest::Approx(-0.2 * v * v).epsilon(1e-10));
}

TEST_CASE("diverging case throws and carries the last iterate") {
  const auto topo = chain(2, 0.05, 0.1);
  auto in = zero_input(2);
  in.p_constant[1] = -40.0;
  in.q_constant[1] = -20.0;
  bool threw = false;
  try {
    solve_power_flow(topo, in);
  } catch (const PowerFlowDiverged& e) {
    threw = true;
    CHECK(e.iterations() == in.max_iterations);
    CHECK(e.last_v_mag().size() == 2);
    CHECK(e.category() == ErrorCategory::Runtime);
  }
  CHECK(threw);
}

TEST_CASE("solver validates slack voltage and input sizes") {
  const auto topo = chain(3, 0.01, 0.02);
  auto in = zero_input(3);
  in.slack_voltage = 0.0;
  CHECK_THROWS_AS(solve_power_flow(topo, in), ValidationError);
  in.slack_voltage = 1.0;
  in.p_constant = Vectord::Zero(2);
  CHECK_THROWS_AS(solve_power_flow(topo, in), ValidationError);
  in.p_constant = Vectord::Zero(3);
  ExponentialLoad<double> load;
  in.loads.emplace_back(9, load);
  CHECK_THROWS_AS(solve_power_flow(topo, in), ValidationError);
}

TEST_CASE("topology validation rejects malformed feeders") {
  SUBCASE("loop") {
    FeederTopology topo = chain(3, 0.01, 0.02);
    topo.lines.push_back({3, 1, 0.01, 0.02});
    topo.buses.push_back({4, BusKind::Pq, 1.0});
    topo.lines.push_back({1, 4, 0.01, 0.02});
    CHECK_THROWS_AS(build_tree(topo), ValidationError);
  }
  SUBCASE("disconnected") {
    FeederTopology topo;
    topo.buses = {{1, BusKind::Slack, 1.0}, {2, BusKind::Pq, 1.0}, {3, BusKind::Pq, 1.0}};
    topo.lines = {{2, 3, 0.01, 0.02}, {3, 2, 0.01, 0.02}};
    CHECK_THROWS_AS(build_tree(topo), ValidationError);
  }
  SUBCASE("wrong line count") {
    FeederTopology topo = chain(3, 0.01, 0.02);
    topo.lines.pop_back();
    CHECK_THROWS_AS(build_tree(topo), ValidationError);
  }
  SUBCASE("two slack buses") {
    FeederTopology topo = chain(2, 0.01, 0.02);
    topo.buses[1].kind = BusKind::Slack;
    CHECK_THROWS_AS(build_tree(topo), ValidationError);
  }
  SUBCASE("no slack bus") {
    FeederTopology topo = chain(2, 0.01, 0.02);
    topo.buses[0].kind = BusKind::Pq;
    CHECK_THROWS_AS(build_tree(topo), ValidationError);
  }
  SUBCASE("non-contiguous ids") {
    FeederTopology topo;
    topo.buses = {{1, BusKind::Slack, 1.0}, {5, BusKind::Pq, 1.0}};
    topo.lines = {{1, 5, 0.01, 0.02}};
    CHECK_THROWS_AS(build_tree(topo), ValidationError);
  }
  SUBCASE("duplicate ids") {
    FeederTopology topo;
    topo.buses = {{1, BusKind::Slack, 1.0}, {2, BusKind::Pq, 1.0}, {2, BusKind::Pq, 1.0}};
    topo.lines = {{1, 2, 0.01, 0.02}, {1, 2, 0.01, 0.02}};
    CHECK_THROWS_AS(build_tree(topo), ValidationError);
  }
  SUBCASE("negative impedance") {
    FeederTopology topo = chain(2, -0.01, 0.02);
    CHECK_THROWS_AS(build_tree(topo), ValidationError);
  }
  SUBCASE("self loop") {
    FeederTopology topo;
    topo.buses = {{1, BusKind::Slack, 1.0}, {2, BusKind::Pq, 1.0}};
    topo.lines = {{2, 2, 0.01, 0.02}};
    CHECK_THROWS_AS(build_tree(topo), ValidationError);
  }
}

TEST_CASE("identical inputs produce bit-identical solutions") {
  Rng rng(203);
  const auto topo = test::random_radial_feeder(rng, 12);
  auto in = zero_input(12);
  for (int k = 1; k < 12; ++k) {
    in.p_constant[k] = 0.1 * rng.uniform() - 0.05;
    in.q_constant[k] = 0.05 * rng.uniform() - 0.025;
  }
  const auto a = solve_power_flow(topo, in);
  const auto b = solve_power_flow(topo, in);
  CHECK(std::memcmp(a.v_mag.data(), b.v_mag.data(), sizeof(double) * 12) == 0);
  CHECK(std::memcmp(a.v_angle.data(), b.v_angle.data(), sizeof(double) * 12) == 0);
  CHECK(std::memcmp(a.p_injection.data(), b.p_injection.data(), sizeof(double) * 12) == 0);
  CHECK(a.iterations == b.iterations);
}
