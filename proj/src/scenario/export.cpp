// SPDX-License-Identifier: Apache-2.0
#include "twingrid/scenario/export.hpp"

#include <cstdint>
#include <string>
#include <system_error>
#include <vector>

#include "twingrid/errors.hpp"

namespace twingrid::scenario {

namespace {

/// Feature column names: the eight power channels plus any extras.
std::vector<std::string> feature_columns(const std::vector<std::string>& extra_names) {
  std::vector<std::string> columns;
  columns.reserve(telemetry::kChannelCount + extra_names.size());
  for (std::string_view name : telemetry::channel_names()) {
    columns.emplace_back(name);
  }
  columns.insert(columns.end(), extra_names.begin(), extra_names.end());
  return columns;
}

Matrixd feature_matrix(const std::vector<TelemetryRecord>& records, const Matrixd& extra) {
  const Eigen::Index n = static_cast<Eigen::Index>(records.size());
  const Eigen::Index k = extra.size() == 0 ? 0 : extra.cols();
  Matrixd out(n, static_cast<Eigen::Index>(telemetry::kChannelCount) + k);
  for (Eigen::Index i = 0; i < n; ++i) {
    const TelemetryRecord& rec = records[static_cast<std::size_t>(i)];
    for (std::uint32_t ioa = 1; ioa <= telemetry::kChannelCount; ++ioa) {
      out(i, static_cast<Eigen::Index>(ioa) - 1) = channel_value(rec, ioa);
    }
    if (k > 0) out.row(i).tail(k) = extra.row(i);
  }
  return out;
}

}  // namespace

ExportPaths export_dataset(const std::vector<TelemetryRecord>& records, const Matrixd& extra,
                           const std::vector<std::string>& extra_names,
                           const std::filesystem::path& dir, const ExportOptions& options) {
  const bool has_extra = extra.size() != 0;
  if (has_extra && extra.rows() != static_cast<Eigen::Index>(records.size())) {
    throw ValidationError("export_dataset: extra feature rows do not match the record count");
  }
  if (static_cast<Eigen::Index>(extra_names.size()) != (has_extra ? extra.cols() : 0)) {
    throw ValidationError("export_dataset: extra_names must name every extra column");
  }

  const Matrixd features = feature_matrix(records, extra);
  const std::vector<std::string> columns = feature_columns(extra_names);

  std::vector<std::string> combined_columns;
  combined_columns.reserve(columns.size() + 2);
  combined_columns.emplace_back("t_ms");
  combined_columns.insert(combined_columns.end(), columns.begin(), columns.end());
  combined_columns.emplace_back("label");

  const Eigen::Index n = features.rows();
  Matrixd combined(n, features.cols() + 2);
  Eigen::Index n_attack = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const TelemetryRecord& rec = records[static_cast<std::size_t>(i)];
    combined(i, 0) = static_cast<double>(rec.t_ms);
    combined.row(i).segment(1, features.cols()) = features.row(i);
    combined(i, combined.cols() - 1) = static_cast<double>(rec.label);
    if (rec.label != 0) ++n_attack;
  }

  Matrixd normal(n - n_attack, features.cols());
  Matrixd attack(n_attack, features.cols());
  Eigen::Index i_normal = 0;
  Eigen::Index i_attack = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (records[static_cast<std::size_t>(i)].label != 0) {
      attack.row(i_attack++) = features.row(i);
    } else {
      normal.row(i_normal++) = features.row(i);
    }
  }

  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw IoError("export_dataset: cannot create directory " + dir.string() + ": " + ec.message());
  }

  ExportPaths paths;
  paths.combined = dir / (options.stem + ".csv");
  paths.normal = dir / (options.stem + "_normal.csv");
  paths.attack = dir / (options.stem + "_attack.csv");
  ml::write_table(paths.combined, combined_columns, combined, options.format);
  ml::write_table(paths.normal, columns, normal, options.format);
  ml::write_table(paths.attack, columns, attack, options.format);
  return paths;
}

ExportPaths export_dataset(const SimulationTrace& trace, const std::filesystem::path& dir,
                           const ExportOptions& options) {
  return export_dataset(trace.tampered, Matrixd(), {}, dir, options);
}

std::vector<telemetry::MeasurementFrame> records_to_frames(
    const std::vector<TelemetryRecord>& records) {
  std::vector<telemetry::MeasurementFrame> frames;
  frames.reserve(records.size() * telemetry::kChannelCount);
  for (const TelemetryRecord& rec : records) {
    for (std::uint32_t ioa = 1; ioa <= telemetry::kChannelCount; ++ioa) {
      telemetry::MeasurementFrame frame;
      frame.channel = ioa;
      frame.value = static_cast<float>(channel_value(rec, ioa));
      frame.timestamp = static_cast<std::uint64_t>(rec.t_ms);
      frames.push_back(frame);
    }
  }
  return frames;
}

}  // namespace twingrid::scenario
