// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace twingrid::cli {

/// Provenance record emitted next to every command's outputs: what ran, on
/// which inputs, under which seed, and how long each stage took. The timings
/// are wall-clock and therefore the one deliberately non-reproducible part
/// of a run's output set.
struct RunManifest {
  std::string command;
  std::string tool_version;
  std::string config_hash;  // fingerprint of config bytes + effective seed
  std::uint64_t seed = 0;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::vector<std::pair<std::string, double>> timings_s;  // stage -> seconds
};

/// FNV-1a over the raw bytes; stable across platforms and builds.
std::uint64_t fnv1a64(std::string_view bytes);

/// Hex fingerprint binding config bytes to the effective seed, so identical
/// configs and seeds hash identically and any edit changes the hash.
std::string config_fingerprint(std::string_view config_bytes, std::uint64_t seed);

std::string manifest_to_json(const RunManifest& manifest);
RunManifest manifest_from_json(const std::string& text);

/// Writes manifest JSON to path, creating parent directories.
void write_manifest(const RunManifest& manifest, const std::filesystem::path& path);

}  // namespace twingrid::cli
