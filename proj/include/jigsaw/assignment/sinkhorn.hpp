#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "jigsaw/assignment/types.hpp"
#include "jigsaw/error.hpp"

namespace jigsaw {

struct SinkhornOptions {
  int max_iters = 100;
  double tol = 1e-6;
};

template <typename Scalar>
struct DoublyStochasticMatrix {
  MatrixX<Scalar> values;
  Scalar achieved_tolerance = 0;
  // Number of F_c(F_r(.)) sweeps applied; 0 means no record.
  int iterations_used = 0;
};

namespace detail {

// Kernel range (max - min of the finite costs) above which the scaling-vector
// form could overflow its potentials; such inputs run in pure log domain.
inline constexpr double kScalingRangeLimit = 200.0;

template <typename Scalar>
void check_cost(const MatrixX<Scalar>& cost) {
  if (cost.rows() != cost.cols()) throw Error(Errc::NonSquare, "sinkhorn needs a square matrix");
  if (cost.size() == 0) throw Error(Errc::InvalidArgument, "empty cost matrix");
  for (Eigen::Index k = 0; k < cost.size(); ++k) {
    const Scalar v = cost.data()[k];
    if (std::isnan(v) || v == std::numeric_limits<Scalar>::infinity()) {
      throw Error(Errc::InvalidArgument, "cost matrix has NaN or +inf entries");
    }
  }
}

// Subtracts log-sum-exp from a row or column view. A slice with no finite
// entry has zero mass and is reported as Degenerate.
template <typename Slice>
void log_normalize_slice(Slice slice) {
  using Scalar = typename Slice::Scalar;
  const Scalar peak = slice.maxCoeff();
  if (!std::isfinite(peak)) throw Error(Errc::Degenerate, "a row or column has no mass");
  slice.array() -= peak + std::log((slice.array() - peak).exp().sum());
}

template <typename Scalar>
void log_normalize(MatrixX<Scalar>& log_s, bool rowwise) {
  if (rowwise) {
    for (Eigen::Index i = 0; i < log_s.rows(); ++i) log_normalize_slice(log_s.row(i));
  } else {
    for (Eigen::Index j = 0; j < log_s.cols(); ++j) log_normalize_slice(log_s.col(j));
  }
}

template <typename Scalar>
Scalar max_marginal_deviation(const MatrixX<Scalar>& s) {
  const Scalar rows = (s.rowwise().sum().array() - Scalar(1)).abs().maxCoeff();
  const Scalar cols = (s.colwise().sum().array() - Scalar(1)).abs().maxCoeff();
  return std::max(rows, cols);
}

template <typename Scalar>
DoublyStochasticMatrix<Scalar> sinkhorn_log_domain(const MatrixX<Scalar>& cost, const SinkhornOptions& opts) {
  MatrixX<Scalar> log_s = cost;
  int iters = 0;
  while (iters < opts.max_iters) {
    log_normalize(log_s, true);
    log_normalize(log_s, false);
    ++iters;
    const Scalar row_dev = (log_s.array().exp().rowwise().sum() - Scalar(1)).abs().maxCoeff();
    if (row_dev < opts.tol) break;
  }
  MatrixX<Scalar> s = log_s.unaryExpr([](Scalar v) { return std::exp(v); });
  return {s, max_marginal_deviation(s), iters};
}

// S = diag(u) K diag(v) with K = exp(C - max C); each sweep sets u = 1 / (K v)
// then v = 1 / (K^T u), which is exactly F_c(F_r(S)).
template <typename Scalar>
DoublyStochasticMatrix<Scalar> sinkhorn_scaling(const MatrixX<Scalar>& cost, const SinkhornOptions& opts) {
  const Eigen::Index n = cost.rows();
  const MatrixX<Scalar> kernel = (cost.array() - cost.maxCoeff()).exp().matrix();
  VectorX<Scalar> u = VectorX<Scalar>::Ones(n);
  VectorX<Scalar> v = VectorX<Scalar>::Ones(n);
  VectorX<Scalar> kv = kernel * v;
  int iters = 0;
  while (iters < opts.max_iters) {
    u = kv.cwiseInverse();
    v = (kernel.transpose() * u).cwiseInverse();
    kv = kernel * v;
    ++iters;
    if ((u.cwiseProduct(kv).array() - Scalar(1)).abs().maxCoeff() < opts.tol) break;
  }
  MatrixX<Scalar> s = u.asDiagonal() * kernel * v.asDiagonal();
  return {s, max_marginal_deviation(s), iters};
}

}  // namespace detail

// Alternating row/column normalization of exp(C) until the largest row-sum
// deviation (columns are exact after each sweep) drops below opts.tol, or
// opts.max_iters sweeps have run. -inf entries carry zero mass.
// Errors: NonSquare, InvalidArgument (NaN/+inf), Degenerate (empty row/column).
template <typename Derived>
DoublyStochasticMatrix<typename Derived::Scalar> sinkhorn_normalize(const Eigen::MatrixBase<Derived>& cost,
                                                                     const SinkhornOptions& opts = {}) {
  using Scalar = typename Derived::Scalar;
  const MatrixX<Scalar> c = cost;
  detail::check_cost(c);
  if (opts.max_iters < 1) throw Error(Errc::InvalidArgument, "sinkhorn needs at least one iteration");
  const bool all_finite = c.allFinite();
  if (all_finite && c.maxCoeff() - c.minCoeff() <= Scalar(detail::kScalingRangeLimit)) {
    return detail::sinkhorn_scaling(c, opts);
  }
  return detail::sinkhorn_log_domain(c, opts);
}

// Exact gradient of the unrolled normalization w.r.t. C, for the
// S.iterations_used sweeps that produced S. The iterates are recomputed in log
// domain; each normalization Y = X / rowsum(X) back-propagates in log space as
//   dL/dlogX = H - Y * rowsum(H),   H = dL/dlogY.
template <typename DerivedC, typename DerivedG>
MatrixX<typename DerivedC::Scalar> sinkhorn_backward(const Eigen::MatrixBase<DerivedC>& cost,
                                                    const DoublyStochasticMatrix<typename DerivedC::Scalar>& s,
                                                    const Eigen::MatrixBase<DerivedG>& upstream) {
  using Scalar = typename DerivedC::Scalar;
  if (s.iterations_used <= 0) throw Error(Errc::IterationRecordMissing, "S carries no iteration count");
  const MatrixX<Scalar> c = cost;
  detail::check_cost(c);
  if (upstream.rows() != c.rows() || upstream.cols() != c.cols() || s.values.rows() != c.rows()) {
    throw Error(Errc::SizeMismatch, "sinkhorn_backward operand shapes differ");
  }

  std::vector<MatrixX<Scalar>> outputs;  // normalized iterates, two per sweep
  outputs.reserve(2 * static_cast<std::size_t>(s.iterations_used));
  MatrixX<Scalar> log_s = c;
  for (int l = 0; l < s.iterations_used; ++l) {
    detail::log_normalize(log_s, true);
    outputs.push_back(log_s.array().exp().matrix());
    detail::log_normalize(log_s, false);
    outputs.push_back(log_s.array().exp().matrix());
  }

  MatrixX<Scalar> h = outputs.back().cwiseProduct(upstream.template cast<Scalar>());
  for (std::size_t k = outputs.size(); k-- > 0;) {
    const MatrixX<Scalar>& y = outputs[k];
    const bool row_step = (k % 2) == 0;
    if (row_step) {
      h -= (y.array().colwise() * h.rowwise().sum().array()).matrix();
    } else {
      h -= (y.array().rowwise() * h.colwise().sum().array()).matrix();
    }
  }
  return h;
}

}  // namespace jigsaw
