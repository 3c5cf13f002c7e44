// SPDX-License-Identifier: Apache-2.0
#include "twingrid/ml/cross_validation.hpp"

#include <cmath>
#include <numeric>

#include "twingrid/errors.hpp"
#include "twingrid/ml/resample.hpp"
#include "twingrid/ml/scaler.hpp"
#include "twingrid/ml/split.hpp"
#include "twingrid/rng.hpp"

namespace twingrid::ml {

namespace {

void accumulate(MetricsSummary& acc, const MetricsReport& r) {
  acc.accuracy += r.accuracy;
  acc.precision += r.precision;
  acc.recall += r.recall;
  acc.f1 += r.f1;
}

double sample_std(const std::vector<double>& values, double mean) {
  if (values.size() < 2) return 0.0;
  double ss = 0.0;
  for (const double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

}  // namespace

CvReport kfold_cv(const LabeledDataset& dataset, int k, const FoldPipeline& pipeline,
                  const FoldTrainer& trainer, std::uint64_t seed) {
  if (k < 2) throw ValidationError("kfold_cv: k must be >= 2");
  if (!trainer) throw ValidationError("kfold_cv: trainer is required");

  Rng fold_rng = Rng::derived(seed, 1);
  const auto folds = stratified_folds(dataset.y, k, fold_rng);

  CvReport report;
  report.k = k;
  report.folds.reserve(static_cast<std::size_t>(k));

  for (int f = 0; f < k; ++f) {
    const std::uint64_t fold_seed = seed ^ static_cast<std::uint64_t>(f + 1);
    std::vector<Eigen::Index> train_rows;
    for (int other = 0; other < k; ++other) {
      if (other == f) continue;
      train_rows.insert(train_rows.end(), folds[static_cast<std::size_t>(other)].begin(),
                        folds[static_cast<std::size_t>(other)].end());
    }
    LabeledDataset train = take_rows(dataset, train_rows);
    const LabeledDataset test = take_rows(dataset, folds[static_cast<std::size_t>(f)]);

    Matrixd x_test = test.x;
    if (pipeline.scale) {
      const ScalerParams params = fit_zscore(train.x, &report.warnings);
      train.x = apply_zscore(params, train.x);
      x_test = apply_zscore(params, x_test);
    }
    if (pipeline.augment) {
      Rng rng = Rng::derived(fold_seed, 1);
      train = gaussian_augment(train, pipeline.sigma_frac, rng);
    }
    if (pipeline.smote) {
      Rng rng = Rng::derived(fold_seed, 2);
      train = smote(train, pipeline.k_neighbors, pipeline.target_ratio, rng);
    }
    if (pipeline.shuffle) {
      std::vector<Eigen::Index> order(static_cast<std::size_t>(train.x.rows()));
      std::iota(order.begin(), order.end(), Eigen::Index{0});
      Rng rng = Rng::derived(fold_seed, 3);
      rng.shuffle(order);
      train = take_rows(train, order);
    }

    const Eigen::VectorXi y_pred = trainer(train, x_test, fold_seed);
    report.folds.push_back(evaluate(test.y, y_pred, &report.warnings));
  }

  MetricsSummary sum;
  for (const auto& fold : report.folds) accumulate(sum, fold);
  const double inv_k = 1.0 / static_cast<double>(k);
  report.mean = {sum.accuracy * inv_k, sum.precision * inv_k, sum.recall * inv_k,
                 sum.f1 * inv_k};

  std::vector<double> acc;
  std::vector<double> prec;
  std::vector<double> rec;
  std::vector<double> f1;
  for (const auto& fold : report.folds) {
    acc.push_back(fold.accuracy);
    prec.push_back(fold.precision);
    rec.push_back(fold.recall);
    f1.push_back(fold.f1);
  }
  report.stddev = {sample_std(acc, report.mean.accuracy),
                   sample_std(prec, report.mean.precision),
                   sample_std(rec, report.mean.recall),
                   sample_std(f1, report.mean.f1)};
  return report;
}

}  // namespace twingrid::ml
