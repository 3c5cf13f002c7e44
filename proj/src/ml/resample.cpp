// SPDX-License-Identifier: Apache-2.0
#include "twingrid/ml/resample.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "twingrid/errors.hpp"
#include "twingrid/ml/scaler.hpp"

namespace twingrid::ml {

Vectord smote_synthesize(const Vectord& a, const Vectord& b, double u) {
  if (a.size() != b.size()) throw ValidationError("smote_synthesize: dimension mismatch");
  if (u < 0.0 || u > 1.0) throw ValidationError("smote_synthesize: u must lie in [0,1]");
  return a + u * (b - a);
}

LabeledDataset smote(const LabeledDataset& dataset, int k_neighbors, double target_ratio,
                     Rng& rng) {
  if (k_neighbors < 1) throw ValidationError("smote: k_neighbors must be positive");
  if (target_ratio <= 0.0) throw ValidationError("smote: target_ratio must be positive");

  const Eigen::Index n = dataset.x.rows();
  Eigen::Index count1 = 0;
  for (Eigen::Index i = 0; i < n; ++i) count1 += dataset.y[i];
  const Eigen::Index count0 = n - count1;
  const int minority_label = count1 <= count0 ? 1 : 0;
  const Eigen::Index minority = std::min(count0, count1);
  const Eigen::Index majority = std::max(count0, count1);

  if (minority <= k_neighbors) {
    throw ValidationError("smote: minority class must exceed k_neighbors");
  }

  const auto wanted = static_cast<Eigen::Index>(std::llround(target_ratio * static_cast<double>(majority)));
  const Eigen::Index n_syn = std::max<Eigen::Index>(0, wanted - minority);

  std::vector<Eigen::Index> minority_rows;
  minority_rows.reserve(static_cast<std::size_t>(minority));
  for (Eigen::Index i = 0; i < n; ++i) {
    if (dataset.y[i] == minority_label) minority_rows.push_back(i);
  }
  Matrixd m_x(minority, dataset.x.cols());
  for (Eigen::Index i = 0; i < minority; ++i) {
    m_x.row(i) = dataset.x.row(minority_rows[static_cast<std::size_t>(i)]);
  }

  // k nearest minority neighbors per minority row, ties broken by lower index.
  const auto k = static_cast<std::size_t>(k_neighbors);
  std::vector<std::vector<Eigen::Index>> neighbors(static_cast<std::size_t>(minority));
  std::vector<std::pair<double, Eigen::Index>> dist;
  dist.reserve(static_cast<std::size_t>(minority) - 1);
  for (Eigen::Index i = 0; i < minority; ++i) {
    dist.clear();
    const Vectord d2 = (m_x.rowwise() - m_x.row(i)).rowwise().squaredNorm();
    for (Eigen::Index j = 0; j < minority; ++j) {
      if (j != i) dist.emplace_back(d2[j], j);
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    auto& list = neighbors[static_cast<std::size_t>(i)];
    list.reserve(k);
    for (std::size_t s = 0; s < k; ++s) list.push_back(dist[s].second);
  }

  LabeledDataset out;
  out.feature_names = dataset.feature_names;
  out.x.resize(n + n_syn, dataset.x.cols());
  out.x.topRows(n) = dataset.x;
  out.y.resize(n + n_syn);
  out.y.head(n) = dataset.y;
  for (Eigen::Index s = 0; s < n_syn; ++s) {
    const auto a = static_cast<Eigen::Index>(rng.uniform_int(static_cast<std::uint64_t>(minority)));
    const auto pick = rng.uniform_int(k);
    const Eigen::Index b = neighbors[static_cast<std::size_t>(a)][pick];
    const double u = rng.uniform();
    out.x.row(n + s) = m_x.row(a) + u * (m_x.row(b) - m_x.row(a));
    out.y[n + s] = minority_label;
  }
  return out;
}

LabeledDataset gaussian_augment(const LabeledDataset& dataset, double sigma_frac, Rng& rng) {
  if (sigma_frac < 0.0) throw ValidationError("gaussian_augment: sigma_frac must be >= 0");
  const Eigen::Index n = dataset.x.rows();
  const Eigen::Index d = dataset.x.cols();
  if (n < 2) throw ValidationError("gaussian_augment: need at least 2 samples");

  const ScalerParams stats = fit_zscore(dataset.x);

  LabeledDataset out;
  out.feature_names = dataset.feature_names;
  out.x.resize(2 * n, d);
  out.x.topRows(n) = dataset.x;
  out.y.resize(2 * n);
  out.y.head(n) = dataset.y;
  out.y.tail(n) = dataset.y;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      out.x(n + i, j) = dataset.x(i, j) + sigma_frac * stats.sigma[j] * rng.normal();
    }
  }
  return out;
}

}  // namespace twingrid::ml
