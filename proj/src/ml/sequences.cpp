// SPDX-License-Identifier: Apache-2.0
#include "twingrid/ml/sequences.hpp"

#include <string>

#include "twingrid/errors.hpp"

namespace twingrid::ml {

LabeledDataset make_sequences(const LabeledDataset& data, int window, int stride) {
  if (window < 1) throw ValidationError("make_sequences: window must be >= 1");
  if (stride < 1) throw ValidationError("make_sequences: stride must be >= 1");
  const Eigen::Index n = data.x.rows();
  const Eigen::Index d = data.x.cols();
  if (n < window) {
    throw ValidationError("make_sequences: dataset shorter than one window");
  }

  const Eigen::Index count = (n - window) / stride + 1;
  LabeledDataset out;
  out.x.resize(count, static_cast<Eigen::Index>(window) * d);
  out.y.resize(count);
  for (Eigen::Index s = 0; s < count; ++s) {
    const Eigen::Index start = s * stride;
    for (Eigen::Index t = 0; t < window; ++t) {
      out.x.block(s, t * d, 1, d) = data.x.row(start + t);
    }
    out.y[s] = data.y[start + window - 1];
  }
  out.feature_names.reserve(static_cast<std::size_t>(window) * data.feature_names.size());
  for (int t = 0; t < window; ++t) {
    for (const auto& name : data.feature_names) {
      out.feature_names.push_back(name + "_t" + std::to_string(t));
    }
  }
  return out;
}

}  // namespace twingrid::ml
