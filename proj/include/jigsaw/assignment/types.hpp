#pragma once

#include <Eigen/Core>

namespace jigsaw {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Similarity convention throughout: larger entries are better matches.
template <typename Scalar>
using CostMatrix = MatrixX<Scalar>;

}  // namespace jigsaw
