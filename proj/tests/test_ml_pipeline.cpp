// SPDX-License-Identifier: Apache-2.0
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"
#include "twingrid/errors.hpp"
#include "twingrid/ml/cross_validation.hpp"
#include "twingrid/ml/dataset.hpp"
#include "twingrid/ml/lstm.hpp"
#include "twingrid/ml/model_io.hpp"
#include "twingrid/ml/random_forest.hpp"
#include "twingrid/ml/scaler.hpp"
#include "twingrid/rng.hpp"

using namespace twingrid;
using namespace twingrid::ml;

namespace {

LabeledDataset make_blobs(Eigen::Index per_class, std::uint64_t seed) {
  Rng rng(seed);
  LabeledDataset d;
  d.x.resize(2 * per_class, 2);
  d.y.resize(2 * per_class);
  for (Eigen::Index i = 0; i < per_class; ++i) {
    d.x(i, 0) = rng.normal();
    d.x(i, 1) = rng.normal();
    d.y[i] = 0;
    d.x(per_class + i, 0) = 4.0 + rng.normal();
    d.x(per_class + i, 1) = 4.0 + rng.normal();
    d.y[per_class + i] = 1;
  }
  d.feature_names = {"f0", "f1"};
  return d;
}

bool reports_identical(const CvReport& a, const CvReport& b) {
  if (a.k != b.k || a.folds.size() != b.folds.size()) return false;
  for (std::size_t f = 0; f < a.folds.size(); ++f) {
    if (std::memcmp(&a.folds[f].accuracy, &b.folds[f].accuracy, sizeof(double)) != 0 ||
        std::memcmp(&a.folds[f].precision, &b.folds[f].precision, sizeof(double)) != 0 ||
        std::memcmp(&a.folds[f].recall, &b.folds[f].recall, sizeof(double)) != 0 ||
        std::memcmp(&a.folds[f].f1, &b.folds[f].f1, sizeof(double)) != 0 ||
        a.folds[f].confusion.tp != b.folds[f].confusion.tp ||
        a.folds[f].confusion.tn != b.folds[f].confusion.tn ||
        a.folds[f].confusion.fp != b.folds[f].confusion.fp ||
        a.folds[f].confusion.fn != b.folds[f].confusion.fn) {
      return false;
    }
  }
  return std::memcmp(&a.mean, &b.mean, sizeof(MetricsSummary)) == 0 &&
         std::memcmp(&a.stddev, &b.stddev, sizeof(MetricsSummary)) == 0;
}

FoldTrainer rf_trainer(const RfHyper& hyper) {
  return [hyper](const LabeledDataset& train, const Matrixd& x_test,
                 std::uint64_t fold_seed) {
    const RandomForestModel model = rf_train(train, hyper, fold_seed);
    return rf_predict(model, x_test).labels;
  };
}

}  // namespace

TEST_CASE("kfold stratification and aggregation") {
  const LabeledDataset d = make_blobs(50, 7);

  SUBCASE("constant classifier scores accuracy 0.5 and recall 0 on balanced data") {
    const FoldTrainer always_zero = [](const LabeledDataset&, const Matrixd& x_test,
                                       std::uint64_t) {
      return Eigen::VectorXi(Eigen::VectorXi::Zero(x_test.rows()));
    };
    const CvReport report = kfold_cv(d, 10, FoldPipeline{}, always_zero, 1);
    REQUIRE(report.k == 10);
    REQUIRE(report.folds.size() == 10);
    CHECK(report.mean.accuracy == 0.5);
    CHECK(report.mean.recall == 0.0);
    CHECK(report.stddev.accuracy == 0.0);
    CHECK(!report.warnings.empty());  // zero-denominator precision warnings
    for (const auto& fold : report.folds) {
      CHECK(fold.confusion.total() == 10);
      CHECK(fold.confusion.tp + fold.confusion.fn == 5);  // 5/5 per fold
    }
  }
  SUBCASE("fold test sets partition the dataset") {
    std::vector<int> seen(static_cast<std::size_t>(d.size()), 0);
    const FoldTrainer counting = [&](const LabeledDataset& train, const Matrixd& x_test,
                                     std::uint64_t) {
      CHECK(train.size() + x_test.rows() == d.size());
      return Eigen::VectorXi(Eigen::VectorXi::Zero(x_test.rows()));
    };
    FoldPipeline pipeline;
    pipeline.scale = false;
    pipeline.shuffle = false;
    const CvReport report = kfold_cv(d, 5, pipeline, counting, 2);
    Eigen::Index covered = 0;
    for (const auto& fold : report.folds) covered += fold.confusion.total();
    CHECK(covered == d.size());
  }
  SUBCASE("a real model separates the folds well") {
    RfHyper hyper;
    hyper.n_estimators = 15;
    FoldPipeline pipeline;
    pipeline.smote = false;
    const CvReport report = kfold_cv(d, 5, pipeline, rf_trainer(hyper), 3);
    CHECK(report.mean.f1 > 0.95);
  }
  SUBCASE("class smaller than k rejected") {
    const LabeledDataset tiny = make_blobs(3, 11);
    CHECK_THROWS_AS(kfold_cv(tiny, 5, FoldPipeline{}, rf_trainer(RfHyper{}), 1),
                    ValidationError);
  }
  SUBCASE("k below 2 rejected") {
    CHECK_THROWS_AS(kfold_cv(d, 1, FoldPipeline{}, rf_trainer(RfHyper{}), 1),
                    ValidationError);
  }
}

TEST_CASE("full pipeline is byte-identical across runs with one seed") {
  // clean -> label -> fold -> scale -> augment -> smote -> train -> evaluate
  std::string normal_text = "f0,f1\n";
  std::string attack_text = "f0,f1\n";
  Rng rng(19);
  for (int i = 0; i < 60; ++i) {
    normal_text += format_cell(rng.normal(), TableFormat{}) + "," +
                   format_cell(rng.normal(), TableFormat{}) + "\n";
  }
  for (int i = 0; i < 30; ++i) {
    attack_text += format_cell(4.0 + rng.normal(), TableFormat{}) + "," +
                   format_cell(4.0 + rng.normal(), TableFormat{}) + "\n";
  }

  auto run_once = [&]() {
    const CleanTable normal = clean_table(normal_text, TableFormat{});
    const CleanTable attack = clean_table(attack_text, TableFormat{});
    const LabeledDataset d = label_and_merge(normal, attack);
    RfHyper hyper;
    hyper.n_estimators = 10;
    FoldPipeline pipeline;
    pipeline.augment = true;
    pipeline.sigma_frac = 0.02;
    pipeline.smote = true;
    return kfold_cv(d, 5, pipeline, rf_trainer(hyper), 42);
  };

  const CvReport a = run_once();
  const CvReport b = run_once();
  CHECK(reports_identical(a, b));
}

TEST_CASE("random forest artifacts round-trip losslessly") {
  const LabeledDataset d = make_blobs(30, 23);
  RfHyper hyper;
  hyper.n_estimators = 5;
  const RandomForestModel model = rf_train(d, hyper, 9);
  const ScalerParams scaler = fit_zscore(d.x);

  const ModelArtifact artifact = make_rf_artifact(model, scaler);
  const std::string text = artifact_to_string(artifact);
  const ModelArtifact back = artifact_from_string(text);

  CHECK(back.kind == "random_forest");
  CHECK(back.feature_names == model.feature_names);
  CHECK((back.scaler.mu.array() == scaler.mu.array()).all());
  CHECK((back.scaler.sigma.array() == scaler.sigma.array()).all());
  CHECK(back.rf.seed == model.seed);
  CHECK(back.rf.n_features == model.n_features);
  CHECK(back.rf.hyper.n_estimators == model.hyper.n_estimators);
  CHECK(back.rf.hyper.features_per_split == model.hyper.features_per_split);
  REQUIRE(back.rf.trees.size() == model.trees.size());
  for (std::size_t t = 0; t < model.trees.size(); ++t) {
    const auto& a = model.trees[t].nodes;
    const auto& b = back.rf.trees[t].nodes;
    REQUIRE(a.size() == b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
      CHECK(a[k].feature == b[k].feature);
      CHECK(std::memcmp(&a[k].threshold, &b[k].threshold, sizeof(double)) == 0);
      CHECK(a[k].left == b[k].left);
      CHECK(a[k].right == b[k].right);
      CHECK(std::memcmp(&a[k].p1, &b[k].p1, sizeof(double)) == 0);
    }
  }
  CHECK((back.rf.importances.array() == model.importances.array()).all());

  // Reloaded model predicts identically.
  const RfPrediction p1 = rf_predict(model, d.x);
  const RfPrediction p2 = rf_predict(back.rf, d.x);
  CHECK((p1.probabilities.array() == p2.probabilities.array()).all());
}

TEST_CASE("lstm artifacts round-trip losslessly") {
  LstmConfig config;
  config.hidden = 5;
  config.window = 3;
  config.epochs = 3;
  config.batch = 4;
  LabeledDataset d;
  Rng rng(31);
  d.x.resize(12, 6);
  d.y.resize(12);
  for (Eigen::Index i = 0; i < 12; ++i) {
    d.y[i] = static_cast<int>(i % 2);
    for (Eigen::Index j = 0; j < 6; ++j) d.x(i, j) = rng.normal() + d.y[i];
  }
  const LstmModel model = lstm_train(d, config, 13);

  const ModelArtifact artifact =
      make_lstm_artifact(model, ScalerParams{}, {"a", "b"});
  const std::string text = artifact_to_string(artifact);
  const ModelArtifact back = artifact_from_string(text);

  CHECK(back.kind == "lstm");
  CHECK(back.feature_names == std::vector<std::string>{"a", "b"});
  CHECK(back.lstm.seed == model.seed);
  CHECK(back.lstm.input_dim == model.input_dim);
  CHECK(back.lstm.config.hidden == model.config.hidden);
  CHECK(back.lstm.config.window == model.config.window);
  CHECK(back.lstm.config.learning_rate == model.config.learning_rate);
  CHECK(back.lstm.epochs_run == model.epochs_run);
  CHECK((back.lstm.w_x.array() == model.w_x.array()).all());
  CHECK((back.lstm.w_h.array() == model.w_h.array()).all());
  CHECK((back.lstm.b.array() == model.b.array()).all());
  CHECK((back.lstm.w_out.array() == model.w_out.array()).all());
  CHECK(std::memcmp(&back.lstm.b_out, &model.b_out, sizeof(double)) == 0);

  const Vectord p1 = lstm_predict(model, d.x);
  const Vectord p2 = lstm_predict(back.lstm, d.x);
  CHECK((p1.array() == p2.array()).all());
}

TEST_CASE("artifact files survive a disk round-trip") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "twingrid_model_test";
  fs::create_directories(dir);
  const fs::path path = dir / "model.json";

  const LabeledDataset d = make_blobs(20, 29);
  RfHyper hyper;
  hyper.n_estimators = 3;
  const RandomForestModel model = rf_train(d, hyper, 77);
  save_artifact(make_rf_artifact(model, fit_zscore(d.x)), path.string());
  const ModelArtifact back = load_artifact(path.string());
  CHECK(back.rf.trees.size() == 3);
  const RfPrediction p1 = rf_predict(model, d.x);
  const RfPrediction p2 = rf_predict(back.rf, d.x);
  CHECK((p1.probabilities.array() == p2.probabilities.array()).all());
  fs::remove_all(dir);

  SUBCASE("missing file is an io error") {
    CHECK_THROWS_AS(load_artifact("/nonexistent/twingrid/model.json"), IoError);
  }
  SUBCASE("malformed content is a validation error") {
    CHECK_THROWS_AS(artifact_from_string("not json at all"), ValidationError);
    CHECK_THROWS_AS(artifact_from_string("{\"format\":\"other\"}"), ValidationError);
  }
}
