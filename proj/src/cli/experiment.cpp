// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include <json.hpp>

#include "twingrid/cli/commands.hpp"
#include "twingrid/errors.hpp"
#include "twingrid/ml/lstm.hpp"
#include "twingrid/ml/random_forest.hpp"
#include "twingrid/ml/resample.hpp"
#include "twingrid/ml/scaler.hpp"
#include "twingrid/ml/sequences.hpp"
#include "twingrid/rng.hpp"
#include "twingrid/scenario/config.hpp"
#include "twingrid/scenario/simulate.hpp"
#include "twingrid/version.hpp"

namespace twingrid::cli {

namespace {

/// Published reference F1 scores from the hardware-in-the-loop testbed the
/// comparison is modeled after; printed alongside results for context.
constexpr double kReferenceRfPlain = 0.75;
constexpr double kReferenceRfDt = 0.8006;
constexpr double kReferenceLstmPlain = 0.8254;
constexpr double kReferenceLstmDt = 0.9028;

/// Stable per-cell seed derivation, independent of which cells are selected.
std::uint64_t cell_seed(std::uint64_t seed, int salt) {
  return seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(salt));
}

template <typename Fn>
auto run_stage(const std::string& stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    const std::string message = "experiment stage " + stage + ": " + e.what();
    switch (e.category()) {
      case ErrorCategory::Validation:
        throw ValidationError(message);
      case ErrorCategory::Io:
        throw IoError(message);
      case ErrorCategory::Runtime:
        throw RuntimeFailure(message);
    }
    throw Error(e.category(), message);
  } catch (const std::exception& e) {
    throw RuntimeFailure("experiment stage " + stage + ": " + e.what());
  }
}

/// Extracts features + labels from a combined table, dropping the time axis
/// so the classifier never sees the attack schedule directly.
ml::LabeledDataset dataset_from_combined(const ml::CleanTable& table, const std::string& name,
                                         Vectord* t_ms_out) {
  const auto label_it = std::find(table.columns.begin(), table.columns.end(), "label");
  if (label_it == table.columns.end()) {
    throw ValidationError("experiment: " + name + " has no label column");
  }
  const Eigen::Index label_col = label_it - table.columns.begin();
  const auto t_it = std::find(table.columns.begin(), table.columns.end(), "t_ms");
  const Eigen::Index t_col = t_it == table.columns.end() ? -1 : t_it - table.columns.begin();

  ml::LabeledDataset ds;
  const Eigen::Index n = table.values.rows();
  const Eigen::Index kept = table.values.cols() - 1 - (t_col >= 0 ? 1 : 0);
  if (kept <= 0) {
    throw ValidationError("experiment: " + name + " has no feature columns");
  }
  ds.x.resize(n, kept);
  ds.y.resize(n);
  if (t_ms_out) t_ms_out->resize(n);
  Eigen::Index out = 0;
  for (Eigen::Index c = 0; c < table.values.cols(); ++c) {
    if (c == label_col || c == t_col) continue;
    ds.x.col(out) = table.values.col(c);
    ds.feature_names.push_back(table.columns[static_cast<std::size_t>(c)]);
    ++out;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const double label = table.values(i, label_col);
    if (label != 0.0 && label != 1.0) {
      throw ValidationError("experiment: " + name + " labels must be 0 or 1");
    }
    ds.y[i] = static_cast<int>(label);
    if (t_ms_out) (*t_ms_out)[i] = t_col >= 0 ? table.values(i, t_col) : 0.0;
  }
  return ds;
}

Eigen::Index minority_count(const Eigen::VectorXi& y) {
  Eigen::Index ones = 0;
  for (Eigen::Index i = 0; i < y.size(); ++i) ones += y[i];
  return std::min(ones, y.size() - ones);
}

/// SMOTE neighbor count that every training fold can support: the smallest
/// training fold keeps minority - ceil(minority / folds) minority rows, and
/// smote needs strictly more rows than neighbors. Returns 0 when
/// oversampling must be skipped.
int safe_smote_neighbors(Eigen::Index minority, int folds) {
  const Eigen::Index min_train = minority - (minority + folds - 1) / folds;
  return static_cast<int>(std::max<Eigen::Index>(0, std::min<Eigen::Index>(5, min_train - 1)));
}

/// Global preprocessing: fit once on everything, oversample once, then let
/// the folds see the already-mixed rows. Reproduces evaluation pipelines
/// that prepare the full dataset before cross-validation.
ml::LabeledDataset prepare_global(const ml::LabeledDataset& ds, std::uint64_t seed,
                                  std::vector<std::string>* notes, bool scale = true) {
  ml::LabeledDataset out = ds;
  if (scale) {
    const ml::ScalerParams scaler = ml::fit_zscore(out.x);
    out.x = ml::apply_zscore(scaler, out.x);
  }
  const int k = static_cast<int>(std::min<Eigen::Index>(5, minority_count(out.y) - 1));
  if (k < 1) {
    if (notes) notes->push_back("smote skipped: minority class too small");
    return out;
  }
  Rng rng(cell_seed(seed, 77));
  return ml::smote(out, k, 1.0, rng);
}

ml::FoldPipeline leak_safe_pipeline(const ml::LabeledDataset& ds, int folds,
                                    std::vector<std::string>* notes) {
  ml::FoldPipeline pipeline;
  pipeline.scale = true;
  pipeline.target_ratio = 1.0;
  pipeline.shuffle = true;
  const int k = safe_smote_neighbors(minority_count(ds.y), folds);
  pipeline.smote = k >= 1;
  if (pipeline.smote) {
    pipeline.k_neighbors = k;
  } else if (notes) {
    notes->push_back("smote skipped: minority class too small");
  }
  return pipeline;
}

ml::FoldPipeline preprocessed_pipeline() {
  ml::FoldPipeline pipeline;
  pipeline.scale = false;
  pipeline.smote = false;
  pipeline.shuffle = true;
  return pipeline;
}

ml::FoldTrainer rf_trainer() {
  return [](const ml::LabeledDataset& train, const Matrixd& x_test, std::uint64_t fold_seed) {
    ml::RfHyper hyper;
    ml::RandomForestModel model = ml::rf_train(train, hyper, fold_seed);
    return ml::rf_predict(model, x_test).labels;
  };
}

ml::FoldTrainer lstm_trainer(const ExperimentOptions& options) {
  ml::LstmConfig config;
  config.hidden = options.lstm_hidden;
  config.window = options.lstm_window;
  config.epochs = options.lstm_epochs;
  return [config](const ml::LabeledDataset& train, const Matrixd& x_test,
                  std::uint64_t fold_seed) {
    ml::LstmModel model = ml::lstm_train(train, config, fold_seed);
    const Vectord probability = ml::lstm_predict(model, x_test);
    Eigen::VectorXi labels(probability.size());
    for (Eigen::Index i = 0; i < probability.size(); ++i) {
      labels[i] = probability[i] >= 0.5 ? 1 : 0;
    }
    return labels;
  };
}

struct CellSpec {
  std::string model;
  std::string features;
  int salt = 0;
};

}  // namespace

ExperimentResult cmd_experiment(const ExperimentOptions& options) {
  const bool config_route = options.config.has_value();
  const bool data_route = options.data_plain.has_value() || options.data_dt.has_value();
  if (config_route == data_route) {
    throw ValidationError(
        "experiment: pass either --config or both dataset paths, not neither/both");
  }
  if (data_route && (!options.data_plain || !options.data_dt)) {
    throw ValidationError("experiment: the dataset route needs both the plain and dt files");
  }
  if (options.folds < 2) {
    throw ValidationError("experiment: --folds must be at least 2");
  }

  ExperimentResult result;
  RunManifest& manifest = result.manifest;
  manifest.command = "experiment";
  manifest.tool_version = kVersion;

  ml::LabeledDataset plain;
  ml::LabeledDataset dt;
  std::uint64_t seed = 0;

  const auto t0 = std::chrono::steady_clock::now();
  if (config_route) {
    const std::string config_text = ml::read_text_file(*options.config);
    scenario::Scenario sc = run_stage("parse", [&] {
      scenario::Scenario parsed =
          scenario::parse_scenario(config_text, options.config->parent_path());
      if (options.seed) parsed.seed = *options.seed;
      scenario::validate_scenario(parsed);
      return parsed;
    });
    seed = sc.seed;
    manifest.inputs.push_back(options.config->string());
    manifest.config_hash = config_fingerprint(config_text, seed);
    DatasetBundle bundle =
        run_stage("simulate+twin", [&] { return build_datasets(sc, options.residuals); });
    plain = std::move(bundle.plain);
    dt = std::move(bundle.dt);
  } else {
    seed = options.seed.value_or(0);
    const std::string plain_text = ml::read_text_file(*options.data_plain);
    const std::string dt_text = ml::read_text_file(*options.data_dt);
    manifest.inputs.push_back(options.data_plain->string());
    manifest.inputs.push_back(options.data_dt->string());
    manifest.config_hash = config_fingerprint(plain_text + dt_text, seed);
    run_stage("load", [&] {
      Vectord t_plain;
      Vectord t_dt;
      plain = dataset_from_combined(ml::clean_table(plain_text, ml::sniff_format(plain_text)),
                                    options.data_plain->string(), &t_plain);
      dt = dataset_from_combined(ml::clean_table(dt_text, ml::sniff_format(dt_text)),
                                 options.data_dt->string(), &t_dt);
      if (plain.size() != dt.size()) {
        throw ValidationError("experiment: datasets disagree on row count");
      }
      for (Eigen::Index i = 0; i < plain.y.size(); ++i) {
        if (plain.y[i] != dt.y[i]) {
          throw ValidationError("experiment: datasets disagree on labels");
        }
        if (t_plain[i] != t_dt[i]) {
          throw ValidationError("experiment: datasets disagree on the time base");
        }
      }
    });
  }
  manifest.seed = seed;
  const std::chrono::duration<double> prep_elapsed = std::chrono::steady_clock::now() - t0;
  manifest.timings_s.emplace_back("prepare", prep_elapsed.count());

  result.report.seed = seed;
  result.report.folds = options.folds;

  std::vector<CellSpec> cells;
  const bool want_rf = options.models != ModelSet::Lstm;
  const bool want_lstm = options.models != ModelSet::Rf;
  const bool want_plain = options.features != FeatureSet::Dt;
  const bool want_dt = options.features != FeatureSet::Plain;
  if (want_rf && want_plain) cells.push_back({"rf", "plain", 1});
  if (want_rf && want_dt) cells.push_back({"rf", "dt", 2});
  if (want_lstm && want_plain) cells.push_back({"lstm", "plain", 3});
  if (want_lstm && want_dt) cells.push_back({"lstm", "dt", 4});

  for (const CellSpec& spec : cells) {
    const auto cell_start = std::chrono::steady_clock::now();
    const ml::LabeledDataset& source = spec.features == "plain" ? plain : dt;
    const std::uint64_t cv_seed = cell_seed(seed, spec.salt);
    const std::string stage = spec.model + "-" + spec.features;

    std::vector<std::string> notes;
    ml::CvReport cv = run_stage(stage, [&] {
      if (spec.model == "rf") {
        if (options.pooled_prep) {
          const ml::LabeledDataset prepared = prepare_global(source, cv_seed, &notes);
          return ml::kfold_cv(prepared, options.folds, preprocessed_pipeline(), rf_trainer(),
                              cv_seed);
        }
        return ml::kfold_cv(source, options.folds,
                            leak_safe_pipeline(source, options.folds, &notes), rf_trainer(),
                            cv_seed);
      }
      // Sequence models consume overlapping windows; windows are built before
      // folding so every fold holds whole sequences.
      if (options.pooled_prep) {
        ml::LabeledDataset scaled = source;
        const ml::ScalerParams scaler = ml::fit_zscore(scaled.x);
        scaled.x = ml::apply_zscore(scaler, scaled.x);
        ml::LabeledDataset sequences =
            ml::make_sequences(scaled, options.lstm_window, options.lstm_stride);
        sequences = prepare_global(sequences, cv_seed, &notes, /*scale=*/false);
        return ml::kfold_cv(sequences, options.folds, preprocessed_pipeline(),
                            lstm_trainer(options), cv_seed);
      }
      const ml::LabeledDataset sequences =
          ml::make_sequences(source, options.lstm_window, options.lstm_stride);
      return ml::kfold_cv(sequences, options.folds,
                          leak_safe_pipeline(sequences, options.folds, &notes),
                          lstm_trainer(options), cv_seed);
    });
    cv.warnings.insert(cv.warnings.end(), notes.begin(), notes.end());
    // Folds repeat the same preprocessing warnings; keep first occurrences.
    std::vector<std::string> unique_warnings;
    for (std::string& warning : cv.warnings) {
      if (std::find(unique_warnings.begin(), unique_warnings.end(), warning) ==
          unique_warnings.end()) {
        unique_warnings.push_back(std::move(warning));
      }
    }
    cv.warnings = std::move(unique_warnings);

    result.report.cells.push_back({spec.model, spec.features, std::move(cv)});
    const std::chrono::duration<double> cell_elapsed =
        std::chrono::steady_clock::now() - cell_start;
    manifest.timings_s.emplace_back(stage, cell_elapsed.count());
  }

  result.report_txt = options.out_dir / "report.txt";
  result.report_json = options.out_dir / "report.json";
  result.manifest_path = options.out_dir / "manifest.json";

  run_stage("write", [&] {
    std::error_code ec;
    std::filesystem::create_directories(options.out_dir, ec);
    if (ec) {
      throw IoError("experiment: cannot create directory " + options.out_dir.string() + ": " +
                    ec.message());
    }
    std::ofstream txt(result.report_txt, std::ios::binary);
    txt << experiment_report_to_text(result.report);
    if (!txt) throw IoError("experiment: write failed for " + result.report_txt.string());
    std::ofstream json(result.report_json, std::ios::binary);
    json << experiment_report_to_json(result.report);
    if (!json) throw IoError("experiment: write failed for " + result.report_json.string());
  });

  manifest.outputs.push_back(result.report_txt.string());
  manifest.outputs.push_back(result.report_json.string());
  manifest.outputs.push_back(result.manifest_path.string());
  write_manifest(manifest, result.manifest_path);
  return result;
}

namespace {

nlohmann::json summary_to_json(const ml::MetricsSummary& s) {
  return {{"accuracy", s.accuracy},
          {"precision", s.precision},
          {"recall", s.recall},
          {"f1", s.f1}};
}

ml::MetricsSummary summary_from_json(const nlohmann::json& j) {
  ml::MetricsSummary s;
  s.accuracy = j.at("accuracy").get<double>();
  s.precision = j.at("precision").get<double>();
  s.recall = j.at("recall").get<double>();
  s.f1 = j.at("f1").get<double>();
  return s;
}

}  // namespace

std::string experiment_report_to_json(const ExperimentReport& report) {
  nlohmann::json j;
  j["seed"] = report.seed;
  j["folds"] = report.folds;
  nlohmann::json cells = nlohmann::json::array();
  for (const CellReport& cell : report.cells) {
    nlohmann::json folds = nlohmann::json::array();
    for (const ml::MetricsReport& fold : cell.cv.folds) {
      folds.push_back({{"tp", fold.confusion.tp},
                       {"tn", fold.confusion.tn},
                       {"fp", fold.confusion.fp},
                       {"fn", fold.confusion.fn},
                       {"accuracy", fold.accuracy},
                       {"precision", fold.precision},
                       {"recall", fold.recall},
                       {"f1", fold.f1}});
    }
    cells.push_back({{"model", cell.model},
                     {"features", cell.features},
                     {"k", cell.cv.k},
                     {"folds", std::move(folds)},
                     {"mean", summary_to_json(cell.cv.mean)},
                     {"stddev", summary_to_json(cell.cv.stddev)},
                     {"warnings", cell.cv.warnings}});
  }
  j["cells"] = std::move(cells);
  j["reference_f1"] = {{"rf_plain", kReferenceRfPlain},
                       {"rf_dt", kReferenceRfDt},
                       {"lstm_plain", kReferenceLstmPlain},
                       {"lstm_dt", kReferenceLstmDt}};
  return j.dump(2) + "\n";
}

ExperimentReport experiment_report_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw ValidationError("experiment report: invalid JSON");
  }
  try {
    ExperimentReport report;
    report.seed = j.at("seed").get<std::uint64_t>();
    report.folds = j.at("folds").get<int>();
    for (const auto& cell_json : j.at("cells")) {
      CellReport cell;
      cell.model = cell_json.at("model").get<std::string>();
      cell.features = cell_json.at("features").get<std::string>();
      cell.cv.k = cell_json.at("k").get<int>();
      for (const auto& fold_json : cell_json.at("folds")) {
        ml::MetricsReport fold;
        fold.confusion.tp = fold_json.at("tp").get<std::int64_t>();
        fold.confusion.tn = fold_json.at("tn").get<std::int64_t>();
        fold.confusion.fp = fold_json.at("fp").get<std::int64_t>();
        fold.confusion.fn = fold_json.at("fn").get<std::int64_t>();
        fold.accuracy = fold_json.at("accuracy").get<double>();
        fold.precision = fold_json.at("precision").get<double>();
        fold.recall = fold_json.at("recall").get<double>();
        fold.f1 = fold_json.at("f1").get<double>();
        cell.cv.folds.push_back(fold);
      }
      cell.cv.mean = summary_from_json(cell_json.at("mean"));
      cell.cv.stddev = summary_from_json(cell_json.at("stddev"));
      cell.cv.warnings = cell_json.at("warnings").get<std::vector<std::string>>();
      report.cells.push_back(std::move(cell));
    }
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("experiment report: ") + e.what());
  }
}

std::string experiment_report_to_text(const ExperimentReport& report) {
  auto cellfmt = [](double mean, double stddev) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.4f +/- %.4f", mean, stddev);
    return std::string(buffer);
  };

  std::string out;
  out += "Detection comparison, " + std::to_string(report.folds) +
         "-fold stratified CV, seed " + std::to_string(report.seed) + "\n\n";
  char header[160];
  std::snprintf(header, sizeof(header), "%-6s %-11s %-19s %-19s %-19s %-19s\n", "model",
                "features", "accuracy", "precision", "recall", "f1");
  out += header;
  for (const CellReport& cell : report.cells) {
    const std::string features = cell.features == "dt" ? "with DT" : "without DT";
    char row[200];
    std::snprintf(row, sizeof(row), "%-6s %-11s %-19s %-19s %-19s %-19s\n", cell.model.c_str(),
                  features.c_str(), cellfmt(cell.cv.mean.accuracy, cell.cv.stddev.accuracy).c_str(),
                  cellfmt(cell.cv.mean.precision, cell.cv.stddev.precision).c_str(),
                  cellfmt(cell.cv.mean.recall, cell.cv.stddev.recall).c_str(),
                  cellfmt(cell.cv.mean.f1, cell.cv.stddev.f1).c_str());
    out += row;
    constexpr std::size_t kMaxShown = 6;
    for (std::size_t i = 0; i < cell.cv.warnings.size() && i < kMaxShown; ++i) {
      out += "  warning: " + cell.cv.warnings[i] + "\n";
    }
    if (cell.cv.warnings.size() > kMaxShown) {
      out += "  (" + std::to_string(cell.cv.warnings.size() - kMaxShown) +
             " more warnings in report.json)\n";
    }
  }
  char footnote[240];
  std::snprintf(footnote, sizeof(footnote),
                "\nReference F1 from the original hardware-in-the-loop testbed: "
                "rf %.4f (without DT) -> %.4f (with DT), lstm %.4f -> %.4f.\n",
                kReferenceRfPlain, kReferenceRfDt, kReferenceLstmPlain, kReferenceLstmDt);
  out += footnote;
  return out;
}

}  // namespace twingrid::cli
