// SPDX-License-Identifier: Apache-2.0
#include "twingrid/ml/metrics.hpp"

#include "twingrid/errors.hpp"

namespace twingrid::ml {

MetricsReport metrics_from_confusion(const ConfusionMatrix& confusion,
                                     std::vector<std::string>* warnings) {
  if (confusion.tp < 0 || confusion.tn < 0 || confusion.fp < 0 || confusion.fn < 0) {
    throw ValidationError("metrics_from_confusion: negative counts");
  }
  MetricsReport report;
  report.confusion = confusion;
  const auto warn = [&](const char* what) {
    if (warnings != nullptr) {
      warnings->push_back(std::string("metrics: ") + what +
                          " has a zero denominator, reported as 0");
    }
  };
  const std::int64_t n = confusion.total();
  if (n == 0) {
    warn("accuracy");
  } else {
    report.accuracy =
        static_cast<double>(confusion.tp + confusion.tn) / static_cast<double>(n);
  }
  if (confusion.tp + confusion.fp == 0) {
    warn("precision");
  } else {
    report.precision =
        static_cast<double>(confusion.tp) / static_cast<double>(confusion.tp + confusion.fp);
  }
  if (confusion.tp + confusion.fn == 0) {
    warn("recall");
  } else {
    report.recall =
        static_cast<double>(confusion.tp) / static_cast<double>(confusion.tp + confusion.fn);
  }
  if (report.precision + report.recall == 0.0) {
    warn("F1");
  } else {
    report.f1 = 2.0 * report.precision * report.recall / (report.precision + report.recall);
  }
  return report;
}

MetricsReport evaluate(const Eigen::VectorXi& y_true, const Eigen::VectorXi& y_pred,
                       std::vector<std::string>* warnings) {
  if (y_true.size() != y_pred.size()) {
    throw ValidationError("evaluate: prediction and truth lengths differ");
  }
  ConfusionMatrix confusion;
  for (Eigen::Index i = 0; i < y_true.size(); ++i) {
    const int t = y_true[i];
    const int p = y_pred[i];
    if ((t != 0 && t != 1) || (p != 0 && p != 1)) {
      throw ValidationError("evaluate: labels must be 0 or 1");
    }
    if (t == 1 && p == 1) ++confusion.tp;
    if (t == 0 && p == 0) ++confusion.tn;
    if (t == 0 && p == 1) ++confusion.fp;
    if (t == 1 && p == 0) ++confusion.fn;
  }
  return metrics_from_confusion(confusion, warnings);
}

}  // namespace twingrid::ml
