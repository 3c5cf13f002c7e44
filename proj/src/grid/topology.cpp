// SPDX-License-Identifier: Apache-2.0
#include "twingrid/grid/topology.hpp"

#include <queue>
#include <string>
#include <vector>

#include "twingrid/errors.hpp"

namespace twingrid::grid {

FeederTree build_tree(const FeederTopology& topology) {
  const int n = static_cast<int>(topology.buses.size());
  if (n == 0) throw ValidationError("topology: no buses");

  std::vector<bool> seen_id(static_cast<std::size_t>(n), false);
  int slack = -1;
  for (const Bus& bus : topology.buses) {
    if (bus.id < 1 || bus.id > n) {
      throw ValidationError("topology: bus ids must be contiguous from 1, got " +
                            std::to_string(bus.id));
    }
    if (seen_id[static_cast<std::size_t>(bus.id - 1)]) {
      throw ValidationError("topology: duplicate bus id " + std::to_string(bus.id));
    }
    seen_id[static_cast<std::size_t>(bus.id - 1)] = true;
    if (bus.kind == BusKind::Slack) {
      if (slack >= 0) throw ValidationError("topology: more than one slack bus");
      slack = bus.id - 1;
    }
    if (!(bus.v_nominal > 0)) {
      throw ValidationError("topology: bus " + std::to_string(bus.id) +
                            " has non-positive nominal voltage");
    }
  }
  if (slack < 0) throw ValidationError("topology: no slack bus");

  if (topology.lines.size() != static_cast<std::size_t>(n - 1)) {
    throw ValidationError("topology: a radial feeder with " + std::to_string(n) +
                          " buses needs exactly " + std::to_string(n - 1) + " lines");
  }

  std::vector<std::vector<std::pair<int, const LineSegment*>>> adjacency(
      static_cast<std::size_t>(n));
  for (const LineSegment& line : topology.lines) {
    if (line.from_bus < 1 || line.from_bus > n || line.to_bus < 1 || line.to_bus > n) {
      throw ValidationError("topology: line references unknown bus");
    }
    if (line.from_bus == line.to_bus) {
      throw ValidationError("topology: line connects bus " + std::to_string(line.from_bus) +
                            " to itself");
    }
    if (line.r < 0 || line.x < 0) {
      throw ValidationError("topology: line impedance must be non-negative");
    }
    adjacency[static_cast<std::size_t>(line.from_bus - 1)].emplace_back(line.to_bus - 1, &line);
    adjacency[static_cast<std::size_t>(line.to_bus - 1)].emplace_back(line.from_bus - 1, &line);
  }

  FeederTree tree;
  tree.n = n;
  tree.root = slack;
  tree.parent.assign(static_cast<std::size_t>(n), -1);
  tree.line_r.assign(static_cast<std::size_t>(n), 0.0);
  tree.line_x.assign(static_cast<std::size_t>(n), 0.0);
  tree.order.reserve(static_cast<std::size_t>(n));

  std::vector<bool> visited(static_cast<std::size_t>(n), false);
  std::queue<int> frontier;
  visited[static_cast<std::size_t>(slack)] = true;
  frontier.push(slack);
  tree.order.push_back(slack);
  while (!frontier.empty()) {
    const int here = frontier.front();
    frontier.pop();
    for (const auto& [next, line] : adjacency[static_cast<std::size_t>(here)]) {
      if (next == tree.parent[static_cast<std::size_t>(here)]) continue;
      if (visited[static_cast<std::size_t>(next)]) {
        throw ValidationError("topology: lines form a loop, feeder must be radial");
      }
      visited[static_cast<std::size_t>(next)] = true;
      tree.parent[static_cast<std::size_t>(next)] = here;
      tree.line_r[static_cast<std::size_t>(next)] = line->r;
      tree.line_x[static_cast<std::size_t>(next)] = line->x;
      tree.order.push_back(next);
      frontier.push(next);
    }
  }
  if (tree.order.size() != static_cast<std::size_t>(n)) {
    throw ValidationError("topology: not all buses are connected to the slack");
  }
  return tree;
}

}  // namespace twingrid::grid
