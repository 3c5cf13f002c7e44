// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "twingrid/dense.hpp"
#include "twingrid/ml/dataset.hpp"
#include "twingrid/rng.hpp"

namespace twingrid::ml {

/// Linear interpolation between two samples: a + u*(b - a), u in [0,1].
Vectord smote_synthesize(const Vectord& a, const Vectord& b, double u);

/// Synthetic minority oversampling: each synthetic point interpolates a
/// random minority sample toward one of its k nearest minority neighbors
/// (Euclidean, ties by lower index) until minority/majority reaches
/// target_ratio. Appends synthetic rows after the originals.
LabeledDataset smote(const LabeledDataset& dataset, int k_neighbors, double target_ratio,
                     Rng& rng);

/// Appends one noisy copy of every row: x + N(0, (sigma_frac*sigma_j)^2)
/// per feature, labels copied. sigma_j is the per-feature sample std.
LabeledDataset gaussian_augment(const LabeledDataset& dataset, double sigma_frac, Rng& rng);

}  // namespace twingrid::ml
