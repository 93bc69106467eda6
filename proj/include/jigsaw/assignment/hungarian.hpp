#pragma once

#include <limits>
#include <vector>

#include "jigsaw/assignment/types.hpp"
#include "jigsaw/error.hpp"
#include "jigsaw/puzzle.hpp"

namespace jigsaw {

namespace detail {

// Kuhn-Munkres with row potentials and shortest augmenting paths, O(n^2 m).
// Rows are inserted in index order and the lowest column wins every tie on the
// minimum slack, so equal-cost instances always resolve the same way.
// Requires rows <= cols; returns row -> column.
template <typename Scalar>
std::vector<int> kuhn_munkres_min(const MatrixX<Scalar>& cost) {
  const auto n = static_cast<int>(cost.rows());
  const auto m = static_cast<int>(cost.cols());
  const Scalar inf = std::numeric_limits<Scalar>::infinity();
  std::vector<Scalar> u(n + 1, 0), v(m + 1, 0), minv(m + 1);
  std::vector<int> match(m + 1, 0), way(m + 1, 0);  // match[j]: row (1-based) owning column j
  std::vector<char> used(m + 1);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = match[j0];
      Scalar delta = inf;
      int j1 = 0;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const Scalar reduced = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (reduced < minv[j]) {
          minv[j] = reduced;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> assignment(n, Permutation::kUnassigned);
  for (int j = 1; j <= m; ++j) {
    if (match[j] != 0) assignment[match[j] - 1] = j - 1;
  }
  return assignment;
}

template <typename Scalar>
void check_finite(const MatrixX<Scalar>& m) {
  if (!m.allFinite()) throw Error(Errc::InvalidArgument, "assignment matrix has non-finite entries");
}

}  // namespace detail

// Optimal linear assignment of rows to columns of a square matrix.
// Errors: NonSquare, InvalidArgument (non-finite).
template <typename Derived>
Permutation hungarian_solve(const Eigen::MatrixBase<Derived>& scores, bool maximize) {
  using Scalar = typename Derived::Scalar;
  if (scores.rows() != scores.cols()) throw Error(Errc::NonSquare, "hungarian_solve needs a square matrix");
  MatrixX<Scalar> cost = maximize ? MatrixX<Scalar>(-scores) : MatrixX<Scalar>(scores);
  detail::check_finite(cost);
  return Permutation(detail::kuhn_munkres_min(cost));
}

// Injective assignment of n rows into m >= n columns. The matrix is padded to
// m x m with constant worst-score rows, solved, and the padding dropped.
// Errors: MoreRowsThanColumns, InvalidArgument (non-finite).
template <typename Derived>
Permutation solve_rectangular(const Eigen::MatrixBase<Derived>& scores, bool maximize) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = scores.rows();
  const Eigen::Index m = scores.cols();
  if (n > m) throw Error(Errc::MoreRowsThanColumns, std::to_string(n) + " rows, " + std::to_string(m) + " columns");
  MatrixX<Scalar> cost = maximize ? MatrixX<Scalar>(-scores) : MatrixX<Scalar>(scores);
  detail::check_finite(cost);
  MatrixX<Scalar> padded(m, m);
  padded.topRows(n) = cost;
  if (m > n) padded.bottomRows(m - n).setConstant(n > 0 ? cost.maxCoeff() : Scalar(0));
  std::vector<int> full = detail::kuhn_munkres_min(padded);
  full.resize(static_cast<std::size_t>(n));
  return Permutation(std::move(full), static_cast<int>(m));
}

// Sum of scores(i, perm[i]) over assigned rows, accumulated in row order.
template <typename Derived>
typename Derived::Scalar assignment_score(const Eigen::MatrixBase<Derived>& scores, const Permutation& perm) {
  typename Derived::Scalar total = 0;
  for (int i = 0; i < perm.size(); ++i) {
    if (perm[i] != Permutation::kUnassigned) total += scores(i, perm[i]);
  }
  return total;
}

// Dense one-hot form: entry (i, perm[i]) = 1.
template <typename Scalar = double>
MatrixX<Scalar> one_hot(const Permutation& perm) {
  MatrixX<Scalar> m = MatrixX<Scalar>::Zero(perm.size(), perm.slots());
  for (int i = 0; i < perm.size(); ++i) {
    if (perm[i] != Permutation::kUnassigned) m(i, perm[i]) = Scalar(1);
  }
  return m;
}

}  // namespace jigsaw
