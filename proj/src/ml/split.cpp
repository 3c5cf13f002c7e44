// SPDX-License-Identifier: Apache-2.0
#include "twingrid/ml/split.hpp"

#include <array>
#include <cmath>

#include "twingrid/errors.hpp"

namespace twingrid::ml {

namespace {

std::array<std::vector<Eigen::Index>, 2> indices_by_class(const Eigen::VectorXi& y) {
  std::array<std::vector<Eigen::Index>, 2> by_class;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const int label = y[i];
    if (label != 0 && label != 1) {
      throw ValidationError("stratified split: labels must be 0 or 1");
    }
    by_class[static_cast<std::size_t>(label)].push_back(i);
  }
  return by_class;
}

}  // namespace

LabeledDataset take_rows(const LabeledDataset& dataset,
                         const std::vector<Eigen::Index>& rows) {
  LabeledDataset out;
  out.feature_names = dataset.feature_names;
  out.x.resize(static_cast<Eigen::Index>(rows.size()), dataset.x.cols());
  out.y.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.x.row(static_cast<Eigen::Index>(i)) = dataset.x.row(rows[i]);
    out.y[static_cast<Eigen::Index>(i)] = dataset.y[rows[i]];
  }
  return out;
}

std::pair<LabeledDataset, LabeledDataset> stratified_split(const LabeledDataset& dataset,
                                                           double test_frac, Rng& rng) {
  if (!(test_frac > 0.0) || !(test_frac < 1.0)) {
    throw ValidationError("stratified_split: test_frac must lie in (0,1)");
  }
  auto by_class = indices_by_class(dataset.y);
  for (const auto& members : by_class) {
    if (members.size() < 2) {
      throw ValidationError("stratified_split: each class needs at least 2 samples");
    }
  }

  std::vector<Eigen::Index> train_rows;
  std::vector<Eigen::Index> test_rows;
  for (auto& members : by_class) {
    rng.shuffle(members);
    const auto take = static_cast<std::size_t>(
        std::llround(static_cast<double>(members.size()) * test_frac));
    test_rows.insert(test_rows.end(), members.begin(),
                     members.begin() + static_cast<std::ptrdiff_t>(take));
    train_rows.insert(train_rows.end(), members.begin() + static_cast<std::ptrdiff_t>(take),
                      members.end());
  }
  rng.shuffle(train_rows);
  rng.shuffle(test_rows);
  return {take_rows(dataset, train_rows), take_rows(dataset, test_rows)};
}

std::vector<std::vector<Eigen::Index>> stratified_folds(const Eigen::VectorXi& y, int k,
                                                        Rng& rng) {
  if (k < 2) throw ValidationError("stratified_folds: k must be at least 2");
  auto by_class = indices_by_class(y);
  for (const auto& members : by_class) {
    if (!members.empty() && members.size() < static_cast<std::size_t>(k)) {
      throw ValidationError("stratified_folds: every present class needs at least k samples");
    }
  }

  std::vector<std::vector<Eigen::Index>> folds(static_cast<std::size_t>(k));
  for (auto& members : by_class) {
    rng.shuffle(members);
    for (std::size_t i = 0; i < members.size(); ++i) {
      folds[i % static_cast<std::size_t>(k)].push_back(members[i]);
    }
  }
  return folds;
}

}  // namespace twingrid::ml
