// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>

#include "twingrid/scenario/types.hpp"

namespace twingrid::scenario {

/// Parses a scenario from JSON text. base_dir resolves relative profile file
/// references. Schema problems raise ValidationError naming the offending
/// key; file problems raise IoError with the path.
Scenario parse_scenario(const std::string& text, const std::filesystem::path& base_dir = {});

/// Reads and parses a scenario config file; the file's directory resolves
/// profile references. The result is validated.
Scenario load_scenario(const std::filesystem::path& path);

/// Serializes a scenario back to JSON (used for manifests and round-trips).
std::string scenario_to_json(const Scenario& scenario);

}  // namespace twingrid::scenario
