// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include <json.hpp>

#include "twingrid/cli/commands.hpp"
#include "twingrid/errors.hpp"
#include "twingrid/version.hpp"

namespace twingrid::cli {

namespace {

std::string xml_escape(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fmt(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.6g", value);
  return std::string(buffer);
}

/// One stacked band per channel, one polyline per channel. Long series are
/// strided down to at most kMaxPoints vertices per polyline.
std::string render_svg(const Vectord& t, const Matrixd& x,
                       const std::vector<std::string>& names) {
  constexpr int kWidth = 960;
  constexpr int kBand = 72;
  constexpr int kGap = 12;
  constexpr int kLeft = 150;
  constexpr int kRight = 20;
  constexpr Eigen::Index kMaxPoints = 1200;

  const Eigen::Index n = x.rows();
  const Eigen::Index channels = x.cols();
  const int height = kGap + static_cast<int>(channels) * (kBand + kGap);
  const double plot_w = kWidth - kLeft - kRight;
  const Eigen::Index stride = std::max<Eigen::Index>(1, (n + kMaxPoints - 1) / kMaxPoints);
  const double t_min = t.size() ? t.minCoeff() : 0.0;
  const double t_max = t.size() ? t.maxCoeff() : 1.0;
  const double t_span = t_max > t_min ? t_max - t_min : 1.0;

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(kWidth) +
         "\" height=\"" + std::to_string(height) + "\" viewBox=\"0 0 " + std::to_string(kWidth) +
         " " + std::to_string(height) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  for (Eigen::Index c = 0; c < channels; ++c) {
    const int top = kGap + static_cast<int>(c) * (kBand + kGap);
    const double lo = x.col(c).minCoeff();
    const double hi = x.col(c).maxCoeff();
    const double span = hi > lo ? hi - lo : 1.0;

    svg += "<rect x=\"" + std::to_string(kLeft) + "\" y=\"" + std::to_string(top) +
           "\" width=\"" + fmt(plot_w) + "\" height=\"" + std::to_string(kBand) +
           "\" fill=\"#f6f6f6\" stroke=\"#cccccc\"/>\n";
    svg += "<text x=\"8\" y=\"" + std::to_string(top + 16) +
           "\" font-family=\"sans-serif\" font-size=\"13\">" +
           xml_escape(names[static_cast<std::size_t>(c)]) + "</text>\n";
    svg += "<text x=\"8\" y=\"" + std::to_string(top + 34) +
           "\" font-family=\"sans-serif\" font-size=\"10\" fill=\"#666666\">" +
           xml_escape("[" + fmt(lo) + ", " + fmt(hi) + "]") + "</text>\n";

    std::string points;
    for (Eigen::Index i = 0; i < n; i += stride) {
      const double px = kLeft + (t.size() ? (t[i] - t_min) / t_span : 0.0) * plot_w;
      const double normalized = hi > lo ? (x(i, c) - lo) / span : 0.5;
      const double py = top + kBand - 6 - normalized * (kBand - 12);
      char buffer[56];
      std::snprintf(buffer, sizeof(buffer), "%.2f,%.2f ", px, py);
      points += buffer;
    }
    if (!points.empty()) points.pop_back();
    svg += "<polyline fill=\"none\" stroke=\"#1f6fb4\" stroke-width=\"1\" points=\"" + points +
           "\"/>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace

InspectResult cmd_inspect(const InspectOptions& options) {
  InspectResult result;
  RunManifest& manifest = result.manifest;
  manifest.command = "inspect";
  manifest.tool_version = kVersion;
  manifest.inputs.push_back(options.dataset.string());

  const std::string text = ml::read_text_file(options.dataset);
  manifest.config_hash = config_fingerprint(text, 0);
  const ml::CleanTable table = ml::clean_table(text, ml::sniff_format(text));

  const auto label_it = std::find(table.columns.begin(), table.columns.end(), "label");
  const Eigen::Index label_col =
      label_it == table.columns.end() ? -1 : label_it - table.columns.begin();
  const auto t_it = std::find(table.columns.begin(), table.columns.end(), "t_ms");
  const Eigen::Index t_col = t_it == table.columns.end() ? -1 : t_it - table.columns.begin();

  const Eigen::Index n = table.values.rows();
  const Eigen::Index kept = table.values.cols() - (label_col >= 0 ? 1 : 0) - (t_col >= 0 ? 1 : 0);
  if (kept <= 0) {
    throw ValidationError("inspect: " + options.dataset.string() + " has no feature columns");
  }

  ml::LabeledDataset ds;
  ds.x.resize(n, kept);
  ds.y = Eigen::VectorXi::Zero(n);
  Eigen::Index out = 0;
  for (Eigen::Index c = 0; c < table.values.cols(); ++c) {
    if (c == label_col || c == t_col) continue;
    ds.x.col(out) = table.values.col(c);
    ds.feature_names.push_back(table.columns[static_cast<std::size_t>(c)]);
    ++out;
  }
  result.has_label = label_col >= 0;
  if (label_col >= 0) {
    for (Eigen::Index i = 0; i < n; ++i) {
      ds.y[i] = table.values(i, label_col) != 0.0 ? 1 : 0;
      result.label_positive += static_cast<std::size_t>(ds.y[i]);
    }
  }
  Vectord t(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    t[i] = t_col >= 0 ? table.values(i, t_col) : static_cast<double>(i);
  }

  result.rows = static_cast<std::size_t>(n);
  result.feature_names = ds.feature_names;
  result.eda = ml::eda_report(ds);

  std::error_code ec;
  std::filesystem::create_directories(options.out_dir, ec);
  if (ec) {
    throw IoError("inspect: cannot create directory " + options.out_dir.string() + ": " +
                  ec.message());
  }

  // Per-feature descriptive statistics, with constant channels flagged.
  result.stats_csv = options.out_dir / "stats.csv";
  {
    std::ofstream file(result.stats_csv, std::ios::binary);
    file << "feature,mean,median,variance,q1,q3,iqr,constant\n";
    for (const ml::FeatureStats& s : result.eda.features) {
      const ml::TableFormat format;
      file << s.name << ',' << ml::format_cell(s.mean, format) << ','
           << ml::format_cell(s.median, format) << ',' << ml::format_cell(s.variance, format)
           << ',' << ml::format_cell(s.q1, format) << ',' << ml::format_cell(s.q3, format) << ','
           << ml::format_cell(s.iqr, format) << ',' << (s.variance == 0.0 ? 1 : 0) << '\n';
    }
    if (!file) throw IoError("inspect: write failed for " + result.stats_csv.string());
  }

  result.correlation_csv = options.out_dir / "correlation.csv";
  ml::write_table(result.correlation_csv, ds.feature_names, result.eda.correlation, {});

  // Columnar plot data: time axis first, then every channel.
  result.timeseries_csv = options.out_dir / "timeseries.csv";
  {
    std::vector<std::string> columns;
    columns.push_back("t_ms");
    columns.insert(columns.end(), ds.feature_names.begin(), ds.feature_names.end());
    Matrixd series(n, kept + 1);
    series.col(0) = t;
    series.rightCols(kept) = ds.x;
    ml::write_table(result.timeseries_csv, columns, series, {});
  }

  if (options.svg) {
    const std::filesystem::path svg_path = options.out_dir / "charts.svg";
    std::ofstream file(svg_path, std::ios::binary);
    file << render_svg(t, ds.x, ds.feature_names);
    if (!file) throw IoError("inspect: write failed for " + svg_path.string());
    result.svg_path = svg_path;
  }

  manifest.outputs.push_back(result.stats_csv.string());
  manifest.outputs.push_back(result.correlation_csv.string());
  manifest.outputs.push_back(result.timeseries_csv.string());
  if (result.svg_path) manifest.outputs.push_back(result.svg_path->string());
  result.manifest_path = options.out_dir / "manifest.json";
  manifest.outputs.push_back(result.manifest_path.string());
  write_manifest(manifest, result.manifest_path);

  // Rendered summary for stdout.
  if (options.format == ReportFormat::Structured) {
    nlohmann::json j;
    j["rows"] = result.rows;
    j["label"] = {{"present", result.has_label}, {"positive", result.label_positive}};
    nlohmann::json features = nlohmann::json::array();
    for (const ml::FeatureStats& s : result.eda.features) {
      features.push_back({{"name", s.name},
                          {"mean", s.mean},
                          {"median", s.median},
                          {"variance", s.variance},
                          {"q1", s.q1},
                          {"q3", s.q3},
                          {"iqr", s.iqr},
                          {"constant", s.variance == 0.0}});
    }
    j["features"] = std::move(features);
    nlohmann::json correlation = nlohmann::json::array();
    for (Eigen::Index r = 0; r < result.eda.correlation.rows(); ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index c = 0; c < result.eda.correlation.cols(); ++c) {
        row.push_back(result.eda.correlation(r, c));
      }
      correlation.push_back(std::move(row));
    }
    j["correlation"] = std::move(correlation);
    nlohmann::json files;
    files["stats"] = result.stats_csv.string();
    files["correlation"] = result.correlation_csv.string();
    files["timeseries"] = result.timeseries_csv.string();
    if (result.svg_path) files["charts"] = result.svg_path->string();
    files["manifest"] = result.manifest_path.string();
    j["files"] = std::move(files);
    result.rendered = j.dump(2) + "\n";
  } else {
    std::string body;
    body += "rows " + std::to_string(result.rows);
    if (result.has_label) {
      body += ", attack rows " + std::to_string(result.label_positive);
    }
    body += "\n\n";
    char header[160];
    std::snprintf(header, sizeof(header), "%-12s %12s %12s %12s %12s %12s %12s\n", "feature",
                  "mean", "median", "variance", "q1", "q3", "iqr");
    body += header;
    for (const ml::FeatureStats& s : result.eda.features) {
      char row[220];
      std::snprintf(row, sizeof(row), "%-12s %12s %12s %12s %12s %12s %12s%s\n", s.name.c_str(),
                    fmt(s.mean).c_str(), fmt(s.median).c_str(), fmt(s.variance).c_str(),
                    fmt(s.q1).c_str(), fmt(s.q3).c_str(), fmt(s.iqr).c_str(),
                    s.variance == 0.0 ? "  (constant)" : "");
      body += row;
    }
    result.rendered = body;
  }
  return result;
}

}  // namespace twingrid::cli
