// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "twingrid/dense.hpp"
#include "twingrid/ml/dataset.hpp"

namespace twingrid::ml {

struct FeatureStats {
  std::string name;
  double mean = 0.0;
  double median = 0.0;
  double variance = 0.0;  // sample variance, n-1 denominator
  double q1 = 0.0;
  double q3 = 0.0;
  double iqr = 0.0;
};

struct EdaReport {
  std::vector<FeatureStats> features;
  Matrixd correlation;  // Pearson, label column excluded
};

/// Linear-interpolation quantile of an unsorted sample, q in [0,1].
double quantile(const Vectord& values, double q);

/// Descriptive statistics and the full Pearson correlation matrix over the
/// feature columns. Constant features correlate 0 with everything but keep a
/// 1 on the diagonal.
EdaReport eda_report(const LabeledDataset& dataset);

}  // namespace twingrid::ml
