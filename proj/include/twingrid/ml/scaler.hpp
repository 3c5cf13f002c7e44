// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "twingrid/dense.hpp"

namespace twingrid::ml {

/// Per-feature standardization parameters, fitted on training data only.
struct ScalerParams {
  Vectord mu;
  Vectord sigma;  // sample standard deviation, n-1 denominator
};

/// Fits mean and sample standard deviation per column. Constant columns get
/// sigma 0 and a warning; they standardize to 0.
ScalerParams fit_zscore(const Matrixd& x, std::vector<std::string>* warnings = nullptr);

/// Applies (x - mu) / sigma columnwise; sigma 0 columns map to 0.
Matrixd apply_zscore(const ScalerParams& params, const Matrixd& x);

}  // namespace twingrid::ml
