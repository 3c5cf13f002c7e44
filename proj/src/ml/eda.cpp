// SPDX-License-Identifier: Apache-2.0
#include "twingrid/ml/eda.hpp"

#include <algorithm>
#include <cmath>

#include "twingrid/errors.hpp"

namespace twingrid::ml {

double quantile(const Vectord& values, double q) {
  if (values.size() == 0) throw ValidationError("quantile: empty sample");
  if (q < 0.0 || q > 1.0) throw ValidationError("quantile: q must lie in [0,1]");
  std::vector<double> sorted(values.data(), values.data() + values.size());
  std::sort(sorted.begin(), sorted.end());
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  const double frac = pos - std::floor(pos);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

EdaReport eda_report(const LabeledDataset& dataset) {
  const Eigen::Index n = dataset.x.rows();
  const Eigen::Index d = dataset.x.cols();
  if (n < 2) throw ValidationError("eda_report: need at least 2 samples");

  EdaReport report;
  report.features.reserve(static_cast<std::size_t>(d));
  Vectord mean(d);
  Vectord sd(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    FeatureStats stats;
    stats.name = static_cast<std::size_t>(j) < dataset.feature_names.size()
                     ? dataset.feature_names[static_cast<std::size_t>(j)]
                     : "f" + std::to_string(j);
    const Vectord col = dataset.x.col(j);
    stats.mean = col.mean();
    stats.variance = (col.array() - stats.mean).square().sum() / static_cast<double>(n - 1);
    stats.median = quantile(col, 0.5);
    stats.q1 = quantile(col, 0.25);
    stats.q3 = quantile(col, 0.75);
    stats.iqr = stats.q3 - stats.q1;
    mean[j] = stats.mean;
    sd[j] = std::sqrt(stats.variance);
    report.features.push_back(std::move(stats));
  }

  report.correlation = Matrixd::Zero(d, d);
  for (Eigen::Index a = 0; a < d; ++a) {
    report.correlation(a, a) = 1.0;
    for (Eigen::Index b = a + 1; b < d; ++b) {
      if (sd[a] == 0.0 || sd[b] == 0.0) continue;
      const double cov = ((dataset.x.col(a).array() - mean[a]) *
                          (dataset.x.col(b).array() - mean[b]))
                             .sum() /
                         static_cast<double>(n - 1);
      const double r = cov / (sd[a] * sd[b]);
      report.correlation(a, b) = r;
      report.correlation(b, a) = r;
    }
  }
  return report;
}

}  // namespace twingrid::ml
