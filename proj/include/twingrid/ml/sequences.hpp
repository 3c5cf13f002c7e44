// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "twingrid/ml/dataset.hpp"

namespace twingrid::ml {

/// Turns a time-ordered dataset into overlapping windows for sequence models.
/// Each output row is a window of `window` consecutive input rows flattened
/// time-major (step 0 first), so the row length is window * features. The
/// window label is the label of its last step. Windows start every `stride`
/// rows; the count is floor((n - window) / stride) + 1.
LabeledDataset make_sequences(const LabeledDataset& data, int window, int stride);

}  // namespace twingrid::ml
