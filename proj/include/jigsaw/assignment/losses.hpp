#pragma once

#include <algorithm>
#include <cmath>

#include "jigsaw/assignment/hungarian.hpp"
#include "jigsaw/assignment/sinkhorn.hpp"
#include "jigsaw/assignment/types.hpp"

namespace jigsaw {

inline constexpr double kBceEpsilon = 1e-7;

template <typename Scalar>
struct AttentionMask {
  MatrixX<Scalar> values;  // binary

  Eigen::Index popcount() const { return static_cast<Eigen::Index>(values.sum()); }
};

template <typename Scalar>
struct LossAndGradient {
  Scalar loss = 0;
  MatrixX<Scalar> gradient;
};

template <typename Scalar>
struct ContrastiveResult {
  Scalar loss = 0;
  MatrixX<Scalar> piece_gradient;  // same layout as the inputs: one column per item
  MatrixX<Scalar> slot_gradient;
};

// Z = OR(Hung(S), S^G): one-hot of the maximizing assignment on S, or-ed with the ground truth.
template <typename Scalar>
AttentionMask<Scalar> hungarian_attention_mask(const MatrixX<Scalar>& s, const Permutation& gt) {
  if (s.rows() != s.cols() || gt.size() != s.rows() || gt.slots() != s.cols()) {
    throw Error(Errc::SizeMismatch, "mask operands differ in order");
  }
  if (!gt.is_bijection()) throw Error(Errc::InvalidArgument, "ground truth must be a bijection");
  const Permutation predicted = hungarian_solve(s, true);
  return {one_hot<Scalar>(predicted).cwiseMax(one_hot<Scalar>(gt))};
}

template <typename Scalar>
AttentionMask<Scalar> hungarian_attention_mask(const DoublyStochasticMatrix<Scalar>& s, const Permutation& gt) {
  return hungarian_attention_mask(s.values, gt);
}

// L = -sum_ij Z_ij (G_ij log S_ij + (1 - G_ij) log(1 - S_ij)) with S clamped to
// [eps, 1 - eps]. The gradient is taken w.r.t. S and vanishes off the mask and
// where the clamp is active.
template <typename Scalar>
LossAndGradient<Scalar> attended_bce_loss(const MatrixX<Scalar>& s, const Permutation& gt,
                                          const AttentionMask<Scalar>& mask) {
  if (s.rows() != s.cols() || gt.size() != s.rows() || mask.values.rows() != s.rows() ||
      mask.values.cols() != s.cols()) {
    throw Error(Errc::SizeMismatch, "attended_bce_loss operands differ in shape");
  }
  const Scalar eps = Scalar(kBceEpsilon);
  const MatrixX<Scalar> target = one_hot<Scalar>(gt);
  LossAndGradient<Scalar> out{Scalar(0), MatrixX<Scalar>::Zero(s.rows(), s.cols())};
  for (Eigen::Index j = 0; j < s.cols(); ++j) {
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
      const Scalar z = mask.values(i, j);
      if (z == Scalar(0)) continue;
      const Scalar raw = s(i, j);
      const Scalar p = std::clamp(raw, eps, Scalar(1) - eps);
      const Scalar g = target(i, j);
      out.loss -= z * (g * std::log(p) + (Scalar(1) - g) * std::log(Scalar(1) - p));
      if (raw > eps && raw < Scalar(1) - eps) {
        out.gradient(i, j) = -z * (g / p - (Scalar(1) - g) / (Scalar(1) - p));
      }
    }
  }
  return out;
}

// InfoNCE over one puzzle: mean_i of -log softmax_k(p_i . s_k / tau)[gt(i)].
// Embeddings are stored one per column (dim x n); every non-corresponding slot
// of the same puzzle is a negative.
// Errors: SizeMismatch, NonPositiveTemperature.
template <typename Scalar>
ContrastiveResult<Scalar> contrastive_loss(const MatrixX<Scalar>& pieces, const MatrixX<Scalar>& slots,
                                           const Permutation& gt, Scalar tau) {
  if (!(tau > Scalar(0))) throw Error(Errc::NonPositiveTemperature, "tau must be positive");
  if (pieces.cols() != slots.cols() || pieces.rows() != slots.rows() || gt.size() != pieces.cols() ||
      gt.slots() != slots.cols()) {
    throw Error(Errc::SizeMismatch, "contrastive_loss needs equal counts and dimensions");
  }
  const Eigen::Index n = pieces.cols();
  const MatrixX<Scalar> logits = pieces.transpose() * slots / tau;
  MatrixX<Scalar> dlogits(n, n);
  Scalar loss = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Scalar peak = logits.row(i).maxCoeff();
    const auto shifted = (logits.row(i).array() - peak).exp().eval();
    const Scalar total = shifted.sum();
    const Eigen::Index target = gt[static_cast<int>(i)];
    loss += peak + std::log(total) - logits(i, target);
    dlogits.row(i) = shifted / total;
    dlogits(i, target) -= Scalar(1);
  }
  const Scalar scale = Scalar(1) / (static_cast<Scalar>(n) * tau);
  dlogits *= scale;
  return {loss / static_cast<Scalar>(n), slots * dlogits.transpose(), pieces * dlogits};
}

}  // namespace jigsaw
