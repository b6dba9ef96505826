#pragma once

#include <Eigen/Dense>

namespace artsim {

// Dense row-major matrices; float for storage, double for oracles and
// gradient checks.
template <class S>
using MatT = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using MatF = MatT<float>;
using MatD = MatT<double>;

}  // namespace artsim
