// SPDX-License-Identifier: Apache-2.0
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "twingrid/cli/commands.hpp"
#include "twingrid/errors.hpp"
#include "twingrid/version.hpp"

namespace {

int exit_code_for(const twingrid::Error& e) {
  switch (e.category()) {
    case twingrid::ErrorCategory::Validation: return 1;
    case twingrid::ErrorCategory::Runtime: return 2;
    case twingrid::ErrorCategory::Io: return 3;
  }
  return 2;
}

twingrid::cli::ModelSet parse_models(const std::string& name) {
  if (name == "rf") return twingrid::cli::ModelSet::Rf;
  if (name == "lstm") return twingrid::cli::ModelSet::Lstm;
  return twingrid::cli::ModelSet::All;
}

twingrid::cli::FeatureSet parse_features(const std::string& name) {
  if (name == "plain") return twingrid::cli::FeatureSet::Plain;
  if (name == "dt") return twingrid::cli::FeatureSet::Dt;
  return twingrid::cli::FeatureSet::Both;
}

}  // namespace

int main(int argc, char** argv) {
  using twingrid::cli::ReportFormat;

  CLI::App app{"twingrid: deterministic feeder co-simulation and tamper-detection toolkit"};
  app.set_version_flag("--version", std::string(twingrid::kVersion));
  app.require_subcommand(1);

  // generate
  std::string gen_config;
  std::string gen_out;
  std::optional<std::uint64_t> gen_seed;
  bool gen_residuals = false;
  bool gen_frames = false;
  CLI::App* generate =
      app.add_subcommand("generate", "Simulate a scenario and export labeled datasets");
  generate->add_option("--config", gen_config, "Scenario JSON file")->required();
  generate->add_option("--out", gen_out, "Output directory")->required();
  generate->add_option("--seed", gen_seed, "Override the scenario seed");
  generate->add_flag("--residuals", gen_residuals, "Add per-bus |v - nominal| feature columns");
  generate->add_flag("--frames", gen_frames, "Also write the telemetry frame stream (.tmf)");

  // experiment
  std::string exp_config;
  std::string exp_plain;
  std::string exp_dt;
  std::string exp_out;
  std::optional<std::uint64_t> exp_seed;
  std::string exp_models = "all";
  std::string exp_features = "both";
  int exp_folds = 10;
  bool exp_pooled_prep = false;
  bool exp_residuals = false;
  std::string exp_format = "text";
  CLI::App* experiment = app.add_subcommand(
      "experiment", "Cross-validated detection comparison over both feature sets");
  experiment->add_option("--config", exp_config, "Scenario JSON file (generates in memory)");
  experiment->add_option("--data-plain", exp_plain, "Pre-generated plain dataset CSV");
  experiment->add_option("--data-dt", exp_dt, "Pre-generated DT dataset CSV");
  experiment->add_option("--out", exp_out, "Output directory")->required();
  experiment->add_option("--seed", exp_seed, "Seed for scenario and cross-validation");
  experiment->add_option("--models", exp_models, "Models to run")
      ->check(CLI::IsMember({"rf", "lstm", "all"}));
  experiment->add_option("--features", exp_features, "Feature sets to run")
      ->check(CLI::IsMember({"plain", "dt", "both"}));
  experiment->add_option("--folds", exp_folds, "Cross-validation folds")
      ->check(CLI::Range(2, 1000));
  experiment->add_flag("--pooled-prep", exp_pooled_prep,
                       "Preprocess the whole dataset before folding instead of per fold");
  experiment->add_flag("--residuals", exp_residuals,
                       "Add residual feature columns (scenario route)");
  experiment->add_option("--format", exp_format, "Stdout format")
      ->check(CLI::IsMember({"text", "structured"}));

  // inspect
  std::string ins_data;
  std::string ins_out;
  bool ins_svg = false;
  std::string ins_format = "text";
  CLI::App* inspect =
      app.add_subcommand("inspect", "Descriptive statistics and plot data for a dataset");
  inspect->add_option("dataset", ins_data, "Dataset CSV (combined table)")->required();
  inspect->add_option("--out", ins_out, "Output directory")->required();
  inspect->add_flag("--svg", ins_svg, "Also render self-contained SVG line charts");
  inspect->add_option("--format", ins_format, "Stdout format")
      ->check(CLI::IsMember({"text", "structured"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      return app.exit(e);  // --help / --version
    }
    std::fprintf(stderr, "%s\n", e.what());
    return 1;
  }

  try {
    if (generate->parsed()) {
      twingrid::cli::GenerateOptions options;
      options.config = gen_config;
      options.out_dir = gen_out;
      options.seed = gen_seed;
      options.residuals = gen_residuals;
      options.frames = gen_frames;
      const twingrid::cli::GenerateResult result = twingrid::cli::cmd_generate(options);
      std::printf("records %zu (attack %zu)\n", result.records, result.attack_records);
      std::printf("wrote %s\n", result.plain_csv.string().c_str());
      std::printf("wrote %s\n", result.dt_csv.string().c_str());
      if (result.frames_path) std::printf("wrote %s\n", result.frames_path->string().c_str());
      std::printf("wrote %s\n", result.manifest_path.string().c_str());
    } else if (experiment->parsed()) {
      twingrid::cli::ExperimentOptions options;
      if (!exp_config.empty()) options.config = exp_config;
      if (!exp_plain.empty()) options.data_plain = exp_plain;
      if (!exp_dt.empty()) options.data_dt = exp_dt;
      options.out_dir = exp_out;
      options.seed = exp_seed;
      options.models = parse_models(exp_models);
      options.features = parse_features(exp_features);
      options.folds = exp_folds;
      options.pooled_prep = exp_pooled_prep;
      options.residuals = exp_residuals;
      options.format = exp_format == "structured" ? ReportFormat::Structured : ReportFormat::Text;
      const twingrid::cli::ExperimentResult result = twingrid::cli::cmd_experiment(options);
      if (options.format == ReportFormat::Structured) {
        std::fputs(twingrid::cli::experiment_report_to_json(result.report).c_str(), stdout);
      } else {
        std::fputs(twingrid::cli::experiment_report_to_text(result.report).c_str(), stdout);
      }
    } else if (inspect->parsed()) {
      twingrid::cli::InspectOptions options;
      options.dataset = ins_data;
      options.out_dir = ins_out;
      options.svg = ins_svg;
      options.format = ins_format == "structured" ? ReportFormat::Structured : ReportFormat::Text;
      const twingrid::cli::InspectResult result = twingrid::cli::cmd_inspect(options);
      std::fputs(result.rendered.c_str(), stdout);
    }
  } catch (const twingrid::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
