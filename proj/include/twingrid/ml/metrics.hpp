// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "twingrid/dense.hpp"

namespace twingrid::ml {

/// Binary confusion counts; the positive class is 1 (attack).
struct ConfusionMatrix {
  std::int64_t tp = 0;
  std::int64_t tn = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;

  std::int64_t total() const { return tp + tn + fp + fn; }
};

struct MetricsReport {
  ConfusionMatrix confusion;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Derives accuracy, precision, recall, and F1 from counts. Zero-denominator
/// metrics are reported as 0 with a warning, never NaN.
MetricsReport metrics_from_confusion(const ConfusionMatrix& confusion,
                                     std::vector<std::string>* warnings = nullptr);

/// Scores predictions against ground truth. Values must be 0 or 1.
MetricsReport evaluate(const Eigen::VectorXi& y_true, const Eigen::VectorXi& y_pred,
                       std::vector<std::string>* warnings = nullptr);

}  // namespace twingrid::ml
