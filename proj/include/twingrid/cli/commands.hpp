// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "twingrid/cli/manifest.hpp"
#include "twingrid/ml/cross_validation.hpp"
#include "twingrid/ml/dataset.hpp"
#include "twingrid/ml/eda.hpp"
#include "twingrid/scenario/types.hpp"

namespace twingrid::cli {

enum class ModelSet { Rf, Lstm, All };
enum class FeatureSet { Plain, Dt, Both };
enum class ReportFormat { Text, Structured };

/// Full data pipeline product for one scenario: tampered telemetry plus the
/// two feature views of it (power channels only, and power channels extended
/// with the twin's virtual measurements).
struct DatasetBundle {
  std::vector<scenario::TelemetryRecord> records;  // tampered, labeled
  ml::LabeledDataset plain;                        // 8 power channels
  ml::LabeledDataset dt;                           // 8 + per-bus v, f (+ residuals)
};

/// Simulates a scenario, applies its attacks, replays the twin over the
/// tampered telemetry, and assembles both feature views. The twin consumes
/// exactly what a detector would see: tampered channels anchored at the
/// recorded head voltage.
DatasetBundle build_datasets(const scenario::Scenario& sc, bool residuals);

// -------------------------------------------------------------- generate --

struct GenerateOptions {
  std::filesystem::path config;
  std::filesystem::path out_dir;
  std::optional<std::uint64_t> seed;  // overrides the scenario seed
  bool residuals = false;             // add |v - nominal| columns to the DT view
  bool frames = false;                // also emit the wire-format frame stream
};

struct GenerateResult {
  std::filesystem::path plain_csv;
  std::filesystem::path dt_csv;
  std::filesystem::path manifest_path;
  std::optional<std::filesystem::path> frames_path;
  std::size_t records = 0;
  std::size_t attack_records = 0;
  RunManifest manifest;
};

/// Writes dataset_plain.csv and dataset_dt.csv (with per-class companions),
/// manifest.json, and optionally telemetry.tmf under out_dir.
GenerateResult cmd_generate(const GenerateOptions& options);

// ------------------------------------------------------------ experiment --

struct ExperimentOptions {
  std::optional<std::filesystem::path> config;      // scenario route
  std::optional<std::filesystem::path> data_plain;  // pre-generated route
  std::optional<std::filesystem::path> data_dt;
  std::filesystem::path out_dir;
  std::optional<std::uint64_t> seed;  // cv seed; defaults to the scenario seed or 0
  ModelSet models = ModelSet::All;
  FeatureSet features = FeatureSet::Both;
  int folds = 10;
  bool pooled_prep = false;  // preprocess globally before folding (leaky on purpose)
  bool residuals = false;    // scenario route only
  ReportFormat format = ReportFormat::Text;
  int lstm_window = 20;  // telemetry steps per sequence
  int lstm_stride = 10;  // sequence start spacing
  int lstm_hidden = 32;
  int lstm_epochs = 40;
};

/// One model x feature-set cell of the comparison table.
struct CellReport {
  std::string model;     // "rf" | "lstm"
  std::string features;  // "plain" | "dt"
  ml::CvReport cv;
};

struct ExperimentReport {
  std::uint64_t seed = 0;
  int folds = 0;
  std::vector<CellReport> cells;
};

struct ExperimentResult {
  ExperimentReport report;
  std::filesystem::path report_txt;
  std::filesystem::path report_json;
  std::filesystem::path manifest_path;
  RunManifest manifest;
};

/// Cross-validated model comparison over the two feature views. Emits the
/// report in both human-readable (report.txt) and machine-readable
/// (report.json) form plus manifest.json under out_dir.
ExperimentResult cmd_experiment(const ExperimentOptions& options);

/// Lossless round-trip of the machine-readable report.
std::string experiment_report_to_json(const ExperimentReport& report);
ExperimentReport experiment_report_from_json(const std::string& text);

/// Renders the human-readable comparison table with the reference footnote.
std::string experiment_report_to_text(const ExperimentReport& report);

// --------------------------------------------------------------- inspect --

struct InspectOptions {
  std::filesystem::path dataset;  // combined labeled table (t_ms, features..., label)
  std::filesystem::path out_dir;
  bool svg = false;
  ReportFormat format = ReportFormat::Text;
};

struct InspectResult {
  ml::EdaReport eda;
  std::vector<std::string> feature_names;
  std::size_t rows = 0;
  std::size_t label_positive = 0;  // 0 when the table has no label column
  bool has_label = false;
  std::filesystem::path stats_csv;
  std::filesystem::path correlation_csv;
  std::filesystem::path timeseries_csv;
  std::optional<std::filesystem::path> svg_path;
  std::filesystem::path manifest_path;
  RunManifest manifest;
  std::string rendered;  // stdout body in the requested format
};

/// Descriptive statistics, Pearson correlations (label and time excluded),
/// and per-channel plot data for a generated dataset; optional SVG chart.
InspectResult cmd_inspect(const InspectOptions& options);

}  // namespace twingrid::cli
