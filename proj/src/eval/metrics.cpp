#include "jigsaw/eval/metrics.hpp"

#include "jigsaw/error.hpp"

namespace jigsaw {

double direct_accuracy(const Permutation& pred, const Permutation& gt, const std::vector<bool>& present) {
  if (pred.size() != gt.size() || static_cast<int>(present.size()) != gt.size()) {
    throw Error(Errc::SizeMismatch, "prediction, ground truth and mask lengths differ");
  }
  int counted = 0, correct = 0;
  for (int i = 0; i < gt.size(); ++i) {
    if (!present[static_cast<std::size_t>(i)]) continue;
    ++counted;
    if (pred[i] == gt[i]) ++correct;
  }
  if (counted == 0) throw Error(Errc::EmptyPresentSet, "no present pieces to score");
  return static_cast<double>(correct) / counted;
}

double direct_accuracy(const Permutation& pred, const Permutation& gt) {
  return direct_accuracy(pred, gt, std::vector<bool>(static_cast<std::size_t>(gt.size()), true));
}

double neighbor_accuracy(const Permutation& pred, const Permutation& gt, GridShape grid) {
  if (pred.size() != gt.size() || gt.size() != grid.slots() || !pred.is_bijection() || !gt.is_bijection()) {
    throw Error(Errc::SizeMismatch, "neighbor accuracy needs full bijections over the grid");
  }
  const std::vector<int> gt_piece_at = gt.inverse();
  int pairs = 0, kept = 0;
  for (int slot = 0; slot < grid.slots(); ++slot) {
    const int r = slot / grid.cols, c = slot % grid.cols;
    const int i = gt_piece_at[static_cast<std::size_t>(slot)];
    const int pr = pred[i] / grid.cols, pc = pred[i] % grid.cols;
    if (c + 1 < grid.cols) {
      const int j = gt_piece_at[static_cast<std::size_t>(slot + 1)];
      ++pairs;
      if (pred[j] / grid.cols == pr && pred[j] % grid.cols == pc + 1) ++kept;
    }
    if (r + 1 < grid.rows) {
      const int j = gt_piece_at[static_cast<std::size_t>(slot + grid.cols)];
      ++pairs;
      if (pred[j] / grid.cols == pr + 1 && pred[j] % grid.cols == pc) ++kept;
    }
  }
  return pairs == 0 ? 1.0 : static_cast<double>(kept) / pairs;
}

}  // namespace jigsaw
