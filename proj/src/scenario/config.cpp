// SPDX-License-Identifier: Apache-2.0
#include "twingrid/scenario/config.hpp"

#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "twingrid/ml/dataset.hpp"
#include "twingrid/scenario/simulate.hpp"

namespace twingrid::scenario {

namespace {

using nlohmann::json;

[[noreturn]] void bad_key(const std::string& key, const std::string& why) {
  throw ValidationError("scenario config: key '" + key + "' " + why);
}

const json& require(const json& node, const std::string& key, const std::string& context) {
  const auto it = node.find(key);
  if (it == node.end()) bad_key(context.empty() ? key : context + "." + key, "is missing");
  return *it;
}

double as_number(const json& node, const std::string& key) {
  if (!node.is_number()) bad_key(key, "must be a number");
  return node.get<double>();
}

double number_or(const json& parent, const std::string& key, const std::string& context,
                 double fallback) {
  const auto it = parent.find(key);
  if (it == parent.end()) return fallback;
  return as_number(*it, context.empty() ? key : context + "." + key);
}

std::string as_string(const json& node, const std::string& key) {
  if (!node.is_string()) bad_key(key, "must be a string");
  return node.get<std::string>();
}

int as_int(const json& node, const std::string& key) {
  if (!node.is_number_integer()) bad_key(key, "must be an integer");
  return node.get<int>();
}

/// Reads a profile from a delimited text file with columns t_s, p_kw, q_kvar.
std::vector<ProfilePoint> profile_from_file(const std::filesystem::path& path) {
  const std::string text = ml::read_text_file(path);
  const ml::CleanTable table = ml::clean_table(text, ml::sniff_format(text));
  if (table.columns.size() < 2) {
    throw ValidationError("scenario config: profile file '" + path.string() +
                          "' needs at least t and p columns");
  }
  std::vector<ProfilePoint> samples;
  samples.reserve(static_cast<std::size_t>(table.values.rows()));
  for (Eigen::Index i = 0; i < table.values.rows(); ++i) {
    ProfilePoint pt;
    pt.t_s = table.values(i, 0);
    pt.p_kw = table.values(i, 1);
    pt.q_kvar = table.values.cols() > 2 ? table.values(i, 2) : 0.0;
    samples.push_back(pt);
  }
  return samples;
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("scenario config: invalid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ValidationError("scenario config: top level must be an object");

  Scenario sc;
  if (root.contains("name")) sc.name = as_string(root["name"], "name");
  if (root.contains("seed")) {
    const json& seed = root["seed"];
    if (!seed.is_number_integer() && !seed.is_number_unsigned()) bad_key("seed", "must be an integer");
    sc.seed = seed.get<std::uint64_t>();
  }

  if (root.contains("bases")) {
    const json& bases = root["bases"];
    if (!bases.is_object()) bad_key("bases", "must be an object");
    sc.bases.s_base_kva = number_or(bases, "s_base_kva", "bases", sc.bases.s_base_kva);
    sc.bases.v_base_v = number_or(bases, "v_base_v", "bases", sc.bases.v_base_v);
    sc.bases.f_nominal_hz = number_or(bases, "f_nominal_hz", "bases", sc.bases.f_nominal_hz);
  }
  if (root.contains("timing")) {
    const json& timing = root["timing"];
    if (!timing.is_object()) bad_key("timing", "must be an object");
    sc.timing.dt_sim_s = number_or(timing, "dt_sim_s", "timing", sc.timing.dt_sim_s);
    sc.timing.dt_telemetry_s =
        number_or(timing, "dt_telemetry_s", "timing", sc.timing.dt_telemetry_s);
    sc.timing.duration_s = number_or(timing, "duration_s", "timing", sc.timing.duration_s);
    sc.timing.settle_s = number_or(timing, "settle_s", "timing", sc.timing.settle_s);
  }
  if (root.contains("upstream")) {
    const json& upstream = root["upstream"];
    if (!upstream.is_object()) bad_key("upstream", "must be an object");
    sc.upstream.v_source_pu =
        number_or(upstream, "v_source_pu", "upstream", sc.upstream.v_source_pu);
    sc.upstream.r_pu = number_or(upstream, "r_pu", "upstream", sc.upstream.r_pu);
    sc.upstream.x_pu = number_or(upstream, "x_pu", "upstream", sc.upstream.x_pu);
  }

  const json& buses = require(root, "buses", "");
  if (!buses.is_array() || buses.empty()) bad_key("buses", "must be a non-empty array");
  for (const json& node : buses) {
    grid::Bus bus;
    bus.id = as_int(require(node, "id", "buses[]"), "buses[].id");
    const std::string kind = as_string(require(node, "kind", "buses[]"), "buses[].kind");
    if (kind == "slack") {
      bus.kind = grid::BusKind::Slack;
    } else if (kind == "pq") {
      bus.kind = grid::BusKind::Pq;
    } else {
      bad_key("buses[].kind", "must be 'slack' or 'pq'");
    }
    bus.v_nominal = number_or(node, "v_nominal_pu", "buses[].v_nominal_pu", 1.0);
    sc.topology.buses.push_back(bus);
  }

  const json& lines = require(root, "lines", "");
  if (!lines.is_array()) bad_key("lines", "must be an array");
  for (const json& node : lines) {
    grid::LineSegment line;
    line.from_bus = as_int(require(node, "from", "lines[]"), "lines[].from");
    line.to_bus = as_int(require(node, "to", "lines[]"), "lines[].to");
    line.r = as_number(require(node, "r_pu", "lines[]"), "lines[].r_pu");
    line.x = as_number(require(node, "x_pu", "lines[]"), "lines[].x_pu");
    sc.topology.lines.push_back(line);
  }

  const json& devices = require(root, "devices", "");
  if (!devices.is_array()) bad_key("devices", "must be an array");
  for (const json& node : devices) {
    DeviceConfig dev;
    dev.id = as_string(require(node, "id", "devices[]"), "devices[].id");
    dev.kind = as_string(require(node, "kind", "devices[]"), "devices[].kind");
    dev.bus = as_int(require(node, "bus", "devices[]"), "devices[].bus");
    dev.rating_kw = number_or(node, "rating_kw", "devices[].rating_kw", 0.0);
    dev.rating_kvar = number_or(node, "rating_kvar", "devices[].rating_kvar", 0.0);
    dev.tau_i_s = number_or(node, "tau_i_s", "devices[].tau_i_s", dev.tau_i_s);
    dev.i_max_pu = number_or(node, "i_max_pu", "devices[].i_max_pu", dev.i_max_pu);
    dev.np = number_or(node, "np", "devices[].np", dev.np);
    dev.nq = number_or(node, "nq", "devices[].nq", dev.nq);
    dev.v0_pu = number_or(node, "v0_pu", "devices[].v0_pu", dev.v0_pu);
    sc.devices.push_back(dev);
  }

  if (root.contains("profiles")) {
    const json& profiles = root["profiles"];
    if (!profiles.is_array()) bad_key("profiles", "must be an array");
    for (const json& node : profiles) {
      Profile profile;
      profile.device =
          as_string(require(node, "device", "profiles[]"), "profiles[].device");
      const bool inline_samples = node.contains("samples");
      const bool file_samples = node.contains("file");
      if (inline_samples == file_samples) {
        bad_key("profiles[]", "must carry exactly one of 'samples' or 'file'");
      }
      if (inline_samples) {
        const json& samples = node["samples"];
        if (!samples.is_array()) bad_key("profiles[].samples", "must be an array");
        for (const json& row : samples) {
          if (!row.is_array() || row.size() < 2 || row.size() > 3) {
            bad_key("profiles[].samples", "entries must be [t_s, p_kw] or [t_s, p_kw, q_kvar]");
          }
          ProfilePoint pt;
          pt.t_s = as_number(row[0], "profiles[].samples[][0]");
          pt.p_kw = as_number(row[1], "profiles[].samples[][1]");
          pt.q_kvar = row.size() > 2 ? as_number(row[2], "profiles[].samples[][2]") : 0.0;
          profile.samples.push_back(pt);
        }
      } else {
        const std::filesystem::path ref = as_string(node["file"], "profiles[].file");
        profile.samples = profile_from_file(ref.is_absolute() ? ref : base_dir / ref);
      }
      sc.profiles.push_back(std::move(profile));
    }
  }

  if (root.contains("attacks")) {
    const json& attacks = root["attacks"];
    if (!attacks.is_array()) bad_key("attacks", "must be an array");
    for (const json& node : attacks) {
      AttackSpec attack;
      attack.kind = as_string(require(node, "kind", "attacks[]"), "attacks[].kind");
      const json& targets = require(node, "targets", "attacks[]");
      if (!targets.is_array()) bad_key("attacks[].targets", "must be an array");
      for (const json& target : targets) {
        attack.targets.push_back(as_string(target, "attacks[].targets[]"));
      }
      const json& window = require(node, "window_s", "attacks[]");
      if (!window.is_array() || window.size() != 2) {
        bad_key("attacks[].window_s", "must be [t_start_s, t_end_s]");
      }
      attack.t_start_s = as_number(window[0], "attacks[].window_s[0]");
      attack.t_end_s = as_number(window[1], "attacks[].window_s[1]");
      attack.magnitude = number_or(node, "magnitude", "attacks[].magnitude", 0.0);
      sc.attacks.push_back(std::move(attack));
    }
  }

  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  const std::string text = ml::read_text_file(path);
  Scenario sc = parse_scenario(text, path.parent_path());
  validate_scenario(sc);
  return sc;
}

std::string scenario_to_json(const Scenario& sc) {
  json root;
  root["name"] = sc.name;
  root["seed"] = sc.seed;
  root["bases"] = {{"s_base_kva", sc.bases.s_base_kva},
                   {"v_base_v", sc.bases.v_base_v},
                   {"f_nominal_hz", sc.bases.f_nominal_hz}};
  root["timing"] = {{"dt_sim_s", sc.timing.dt_sim_s},
                    {"dt_telemetry_s", sc.timing.dt_telemetry_s},
                    {"duration_s", sc.timing.duration_s},
                    {"settle_s", sc.timing.settle_s}};
  root["upstream"] = {{"v_source_pu", sc.upstream.v_source_pu},
                      {"r_pu", sc.upstream.r_pu},
                      {"x_pu", sc.upstream.x_pu}};
  root["buses"] = json::array();
  for (const grid::Bus& bus : sc.topology.buses) {
    root["buses"].push_back({{"id", bus.id},
                             {"kind", bus.kind == grid::BusKind::Slack ? "slack" : "pq"},
                             {"v_nominal_pu", bus.v_nominal}});
  }
  root["lines"] = json::array();
  for (const grid::LineSegment& line : sc.topology.lines) {
    root["lines"].push_back(
        {{"from", line.from_bus}, {"to", line.to_bus}, {"r_pu", line.r}, {"x_pu", line.x}});
  }
  root["devices"] = json::array();
  for (const DeviceConfig& dev : sc.devices) {
    json node = {{"id", dev.id},         {"kind", dev.kind},
                 {"bus", dev.bus},       {"rating_kw", dev.rating_kw},
                 {"rating_kvar", dev.rating_kvar}};
    if (dev.kind == "load") {
      node["np"] = dev.np;
      node["nq"] = dev.nq;
      node["v0_pu"] = dev.v0_pu;
    } else {
      node["tau_i_s"] = dev.tau_i_s;
      node["i_max_pu"] = dev.i_max_pu;
    }
    root["devices"].push_back(std::move(node));
  }
  root["profiles"] = json::array();
  for (const Profile& profile : sc.profiles) {
    json samples = json::array();
    for (const ProfilePoint& pt : profile.samples) {
      samples.push_back({pt.t_s, pt.p_kw, pt.q_kvar});
    }
    root["profiles"].push_back({{"device", profile.device}, {"samples", std::move(samples)}});
  }
  root["attacks"] = json::array();
  for (const AttackSpec& attack : sc.attacks) {
    root["attacks"].push_back({{"kind", attack.kind},
                               {"targets", attack.targets},
                               {"window_s", {attack.t_start_s, attack.t_end_s}},
                               {"magnitude", attack.magnitude}});
  }
  return root.dump(2) + "\n";
}

}  // namespace twingrid::scenario
