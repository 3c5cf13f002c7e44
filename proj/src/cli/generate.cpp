// SPDX-License-Identifier: Apache-2.0
#include <chrono>
#include <string>
#include <utility>
#include <vector>

#include "twingrid/cli/commands.hpp"
#include "twingrid/errors.hpp"
#include "twingrid/rng.hpp"
#include "twingrid/scenario/attacks.hpp"
#include "twingrid/scenario/config.hpp"
#include "twingrid/scenario/export.hpp"
#include "twingrid/scenario/simulate.hpp"
#include "twingrid/telemetry/frame.hpp"
#include "twingrid/twin/twin.hpp"
#include "twingrid/version.hpp"

namespace twingrid::cli {

namespace {

/// Wall-clock stage timer feeding manifest timings.
class StageTimer {
public:
  explicit StageTimer(RunManifest& manifest) : manifest_(manifest) {}

  template <typename Fn>
  auto run(const std::string& stage, Fn&& fn) -> decltype(fn()) {
    const auto start = std::chrono::steady_clock::now();
    if constexpr (std::is_void_v<decltype(fn())>) {
      fn();
      record(stage, start);
    } else {
      auto value = fn();
      record(stage, start);
      return value;
    }
  }

private:
  void record(const std::string& stage, std::chrono::steady_clock::time_point start) {
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    manifest_.timings_s.emplace_back(stage, elapsed.count());
  }

  RunManifest& manifest_;
};

}  // namespace

DatasetBundle build_datasets(const scenario::Scenario& sc, bool residuals) {
  DatasetBundle bundle;
  scenario::SimulationTrace trace = scenario::simulate(sc);
  Rng rng(sc.seed);
  scenario::inject_attacks(trace, sc.attacks, rng);

  twin::TwinConfig twin_config = twin::twin_config_from_scenario(sc);
  std::vector<double> heads;
  heads.reserve(trace.truth.size());
  for (const auto& step : trace.truth) heads.push_back(step.head_voltage);
  std::vector<twin::VirtualMeasurements> virtuals =
      twin::run_twin(twin_config, trace.tampered, heads);

  bundle.plain = twin::plain_features(trace.tampered);
  bundle.dt = twin::augment_with_dt(trace.tampered, virtuals, residuals);
  bundle.records = std::move(trace.tampered);
  return bundle;
}

GenerateResult cmd_generate(const GenerateOptions& options) {
  GenerateResult result;
  RunManifest& manifest = result.manifest;
  manifest.command = "generate";
  manifest.tool_version = kVersion;
  manifest.inputs.push_back(options.config.string());
  StageTimer timer(manifest);

  const std::string config_text = ml::read_text_file(options.config);
  scenario::Scenario sc = timer.run("parse", [&] {
    scenario::Scenario parsed =
        scenario::parse_scenario(config_text, options.config.parent_path());
    if (options.seed) parsed.seed = *options.seed;
    scenario::validate_scenario(parsed);
    return parsed;
  });
  manifest.seed = sc.seed;
  manifest.config_hash = config_fingerprint(config_text, sc.seed);

  DatasetBundle bundle =
      timer.run("simulate+twin", [&] { return build_datasets(sc, options.residuals); });
  result.records = bundle.records.size();
  for (const auto& record : bundle.records) {
    if (record.label != 0) ++result.attack_records;
  }

  timer.run("export", [&] {
    scenario::ExportOptions plain_options;
    plain_options.stem = "dataset_plain";
    scenario::ExportPaths plain_paths = scenario::export_dataset(
        bundle.records, Matrixd(), {}, options.out_dir, plain_options);
    result.plain_csv = plain_paths.combined;
    manifest.outputs.push_back(plain_paths.combined.string());
    manifest.outputs.push_back(plain_paths.normal.string());
    manifest.outputs.push_back(plain_paths.attack.string());

    const Eigen::Index n_extra = bundle.dt.x.cols() - bundle.plain.x.cols();
    Matrixd extra = bundle.dt.x.rightCols(n_extra);
    std::vector<std::string> extra_names(bundle.dt.feature_names.end() - n_extra,
                                         bundle.dt.feature_names.end());
    scenario::ExportOptions dt_options;
    dt_options.stem = "dataset_dt";
    scenario::ExportPaths dt_paths = scenario::export_dataset(
        bundle.records, extra, extra_names, options.out_dir, dt_options);
    result.dt_csv = dt_paths.combined;
    manifest.outputs.push_back(dt_paths.combined.string());
    manifest.outputs.push_back(dt_paths.normal.string());
    manifest.outputs.push_back(dt_paths.attack.string());

    if (options.frames) {
      const std::filesystem::path frames_path = options.out_dir / "telemetry.tmf";
      telemetry::write_tmf(frames_path, scenario::records_to_frames(bundle.records));
      result.frames_path = frames_path;
      manifest.outputs.push_back(frames_path.string());
    }
  });

  result.manifest_path = options.out_dir / "manifest.json";
  manifest.outputs.push_back(result.manifest_path.string());
  write_manifest(manifest, result.manifest_path);
  return result;
}

}  // namespace twingrid::cli
