// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>

namespace twingrid {

template <typename Scalar>
using Vector = Eigen::Vector<Scalar, Eigen::Dynamic>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Vectord = Vector<double>;
using Matrixd = Matrix<double>;

}  // namespace twingrid
