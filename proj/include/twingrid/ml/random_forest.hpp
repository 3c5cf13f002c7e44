// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "twingrid/dense.hpp"
#include "twingrid/ml/dataset.hpp"

namespace twingrid::ml {

struct RfHyper {
  int n_estimators = 100;
  int max_depth = 10;
  int min_samples_split = 10;
  int min_samples_leaf = 5;
  int features_per_split = 0;  // 0 selects floor(sqrt(d))
};

/// Node of a binary decision tree. Leaves have feature -1 and carry the
/// class-1 probability.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double p1 = 0.0;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // node 0 is the root
};

struct RandomForestModel {
  RfHyper hyper;
  std::uint64_t seed = 0;
  int n_features = 0;
  std::vector<DecisionTree> trees;
  Vectord importances;  // Gini importance, sums to 1
  std::vector<std::string> feature_names;
};

struct RfPrediction {
  Eigen::VectorXi labels;
  Vectord probabilities;
};

/// Fits a forest of Gini-split trees on bootstrap samples with sqrt(d)
/// feature subsampling per node. Split-quality ties break toward the lowest
/// feature index, then the lowest threshold, so results are reproducible.
/// Trees train in parallel with per-tree derived seeds; the result is
/// independent of the worker count.
RandomForestModel rf_train(const LabeledDataset& train, const RfHyper& hyper,
                           std::uint64_t seed);

/// Mean of per-tree leaf class-1 probabilities; label = probability >= threshold.
RfPrediction rf_predict(const RandomForestModel& model, const Matrixd& x,
                        double threshold = 0.5);

struct ImportanceReport {
  Vectord importance;
  std::vector<int> ranking;  // feature indices, most important first
};

/// Trains a forest and reports normalized Gini importances with a ranking.
ImportanceReport gini_importance(const LabeledDataset& dataset, const RfHyper& hyper,
                                 std::uint64_t seed);

/// Smallest importance-ordered prefix whose cumulative importance reaches
/// cutoff; returns kept feature indices in ascending order.
std::vector<int> select_by_cumulative_importance(const Vectord& importance, double cutoff);

}  // namespace twingrid::ml
