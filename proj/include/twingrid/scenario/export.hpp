// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "twingrid/dense.hpp"
#include "twingrid/ml/dataset.hpp"
#include "twingrid/scenario/types.hpp"
#include "twingrid/telemetry/frame.hpp"

namespace twingrid::scenario {

/// Output dialect and file naming for dataset export.
struct ExportOptions {
  ml::TableFormat format{};
  std::string stem = "dataset";
};

struct ExportPaths {
  std::filesystem::path combined;  // t_ms, features..., label
  std::filesystem::path normal;    // feature rows with label 0, no t/label columns
  std::filesystem::path attack;    // feature rows with label 1, no t/label columns
};

/// Writes three delimited files under dir: a combined labeled table plus
/// per-class feature tables (training inputs free of time and label columns).
/// extra appends feature columns after the eight power channels; pass a 0x0
/// matrix for none, otherwise extra.rows() must equal records.size() and
/// extra_names must name every column. Empty records give header-only files.
ExportPaths export_dataset(const std::vector<TelemetryRecord>& records, const Matrixd& extra,
                           const std::vector<std::string>& extra_names,
                           const std::filesystem::path& dir, const ExportOptions& options);

/// Convenience overload over a trace's tampered records with no extras.
ExportPaths export_dataset(const SimulationTrace& trace, const std::filesystem::path& dir,
                           const ExportOptions& options);

/// Expands records to wire frames, one per channel in address order (1..8),
/// record-major, timestamps in ms.
std::vector<telemetry::MeasurementFrame> records_to_frames(
    const std::vector<TelemetryRecord>& records);

}  // namespace twingrid::scenario
