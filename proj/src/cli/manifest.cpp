// SPDX-License-Identifier: Apache-2.0
#include "twingrid/cli/manifest.hpp"

#include <cstdio>
#include <fstream>
#include <system_error>

#include <json.hpp>

#include "twingrid/errors.hpp"

namespace twingrid::cli {

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string config_fingerprint(std::string_view config_bytes, std::uint64_t seed) {
  std::uint64_t hash = fnv1a64(config_bytes);
  // Fold the seed in byte by byte so fingerprints bind config and seed.
  for (int shift = 0; shift < 64; shift += 8) {
    hash ^= (seed >> shift) & 0xffULL;
    hash *= 0x100000001b3ULL;
  }
  char out[17];
  std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(hash));
  return std::string(out, 16);
}

std::string manifest_to_json(const RunManifest& manifest) {
  nlohmann::json j;
  j["command"] = manifest.command;
  j["tool_version"] = manifest.tool_version;
  j["config_hash"] = manifest.config_hash;
  j["seed"] = manifest.seed;
  j["inputs"] = manifest.inputs;
  j["outputs"] = manifest.outputs;
  nlohmann::json timings = nlohmann::json::array();
  for (const auto& [stage, seconds] : manifest.timings_s) {
    timings.push_back({{"stage", stage}, {"seconds", seconds}});
  }
  j["timings_s"] = std::move(timings);
  return j.dump(2) + "\n";
}

RunManifest manifest_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw ValidationError("manifest: invalid JSON");
  }
  try {
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.tool_version = j.at("tool_version").get<std::string>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.inputs = j.at("inputs").get<std::vector<std::string>>();
    m.outputs = j.at("outputs").get<std::vector<std::string>>();
    for (const auto& entry : j.at("timings_s")) {
      m.timings_s.emplace_back(entry.at("stage").get<std::string>(),
                               entry.at("seconds").get<double>());
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("manifest: ") + e.what());
  }
}

void write_manifest(const RunManifest& manifest, const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) {
      throw IoError("write_manifest: cannot create directory " + path.parent_path().string() +
                    ": " + ec.message());
    }
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("write_manifest: cannot open " + path.string());
  }
  out << manifest_to_json(manifest);
  if (!out) {
    throw IoError("write_manifest: write failed for " + path.string());
  }
}

}  // namespace twingrid::cli
