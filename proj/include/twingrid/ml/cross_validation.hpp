// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "twingrid/ml/dataset.hpp"
#include "twingrid/ml/metrics.hpp"

namespace twingrid::ml {

/// Per-fold preprocessing, always fitted on the k-1 training folds only so no
/// test information leaks into scaling or resampling. Disable pieces when the
/// caller has already prepared the whole dataset up front.
struct FoldPipeline {
  bool scale = true;
  bool augment = false;
  double sigma_frac = 0.01;
  bool smote = false;
  int k_neighbors = 5;
  double target_ratio = 1.0;
  bool shuffle = true;  // final order randomization of the processed train fold
};

/// Fits on the processed training fold and predicts labels for the processed
/// test features. fold_seed derives from the cv seed and the fold index.
using FoldTrainer = std::function<Eigen::VectorXi(
    const LabeledDataset& train, const Matrixd& x_test, std::uint64_t fold_seed)>;

struct MetricsSummary {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct CvReport {
  int k = 0;
  std::vector<MetricsReport> folds;
  MetricsSummary mean;
  MetricsSummary stddev;  // sample standard deviation over folds
  std::vector<std::string> warnings;
};

/// Stratified k-fold cross-validation: for each fold, preprocess the training
/// folds per `pipeline`, train via `trainer`, and score the held-out fold.
/// Every class must have at least k samples.
CvReport kfold_cv(const LabeledDataset& dataset, int k, const FoldPipeline& pipeline,
                  const FoldTrainer& trainer, std::uint64_t seed);

}  // namespace twingrid::ml
