// SPDX-License-Identifier: Apache-2.0
#include "twingrid/ml/scaler.hpp"

#include <cmath>

#include "twingrid/errors.hpp"

namespace twingrid::ml {

ScalerParams fit_zscore(const Matrixd& x, std::vector<std::string>* warnings) {
  const Eigen::Index n = x.rows();
  if (n < 2) throw ValidationError("fit_zscore: need at least 2 samples");
  ScalerParams params;
  params.mu = x.colwise().mean();
  params.sigma.resize(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double ss = (x.col(j).array() - params.mu[j]).square().sum();
    params.sigma[j] = std::sqrt(ss / static_cast<double>(n - 1));
    if (params.sigma[j] == 0.0 && warnings != nullptr) {
      warnings->push_back("fit_zscore: feature " + std::to_string(j) +
                          " is constant, standardized values set to 0");
    }
  }
  return params;
}

Matrixd apply_zscore(const ScalerParams& params, const Matrixd& x) {
  if (x.cols() != params.mu.size()) {
    throw ValidationError("apply_zscore: feature count mismatch");
  }
  Matrixd z(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    if (params.sigma[j] == 0.0) {
      z.col(j).setZero();
    } else {
      z.col(j) = (x.col(j).array() - params.mu[j]) / params.sigma[j];
    }
  }
  return z;
}

}  // namespace twingrid::ml
