// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <utility>
#include <vector>

#include "twingrid/ml/dataset.hpp"
#include "twingrid/rng.hpp"

namespace twingrid::ml {

/// Shuffled per-class partition: each class contributes
/// round(class count * test_frac) samples to the test set.
std::pair<LabeledDataset, LabeledDataset> stratified_split(const LabeledDataset& dataset,
                                                           double test_frac, Rng& rng);

/// Stratified fold assignment: per-class shuffled indices dealt round-robin,
/// so fold class counts differ by at most one. Returns k index lists that
/// partition [0, n).
std::vector<std::vector<Eigen::Index>> stratified_folds(const Eigen::VectorXi& y, int k,
                                                        Rng& rng);

/// Row/label subset in the given index order.
LabeledDataset take_rows(const LabeledDataset& dataset,
                         const std::vector<Eigen::Index>& rows);

}  // namespace twingrid::ml
