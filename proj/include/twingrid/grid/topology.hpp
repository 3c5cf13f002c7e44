// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "twingrid/grid/types.hpp"

namespace twingrid::grid {

/// Validated radial view of a FeederTopology. Indices are bus id minus one.
struct FeederTree {
  int n = 0;
  int root = 0;                 // slack bus index
  std::vector<int> parent;      // -1 at the root
  std::vector<int> order;       // breadth-first from the root
  std::vector<double> line_r;   // impedance of the branch feeding each bus
  std::vector<double> line_x;
};

/// Validates bus ids, slack uniqueness, line parameters, and radiality.
/// Throws ValidationError when the topology is not a tree rooted at the slack.
FeederTree build_tree(const FeederTopology& topology);

}  // namespace twingrid::grid
