#include "jigsaw/matcher/training.hpp"

#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <utility>

#include <spdlog/spdlog.h>

#include "jigsaw/assignment/losses.hpp"
#include "jigsaw/assignment/sinkhorn.hpp"
#include "jigsaw/error.hpp"
#include "jigsaw/matcher/matcher.hpp"
#include "jigsaw/matcher/roi.hpp"
#include "jigsaw/rng.hpp"

namespace jigsaw {

EmbeddingGradients EmbeddingGradients::zeros_like(const EmbeddingNetWeights& w) {
  return {w.piece_branch.zeros_like(), w.slot_branch.zeros_like(), w.shared_head.zeros_like()};
}

LossBreakdown matcher_loss(const EmbeddingNetWeights& weights, const Eigen::MatrixXd& piece_features,
                           const Eigen::MatrixXd& slot_features, const Permutation& gt, const TrainConfig& config,
                           EmbeddingGradients* grads) {
  if (piece_features.cols() != slot_features.cols() || gt.size() != piece_features.cols()) {
    throw Error(Errc::SizeMismatch, "matcher_loss needs one slot per piece");
  }
  Mlp::Cache piece_branch_cache, piece_head_cache, slot_branch_cache, slot_head_cache;
  const Eigen::MatrixXd piece_mid = weights.piece_branch.forward(piece_features, &piece_branch_cache);
  const Eigen::MatrixXd piece_raw = weights.shared_head.forward(piece_mid, &piece_head_cache);
  const Embeddings pieces = normalize_columns(piece_raw);
  const Eigen::MatrixXd slot_mid = weights.slot_branch.forward(slot_features, &slot_branch_cache);
  const Eigen::MatrixXd slot_raw = weights.shared_head.forward(slot_mid, &slot_head_cache);
  const Embeddings slots = normalize_columns(slot_raw);

  const Eigen::MatrixXd logits = cost_matrix(pieces.vectors, slots.vectors) / config.tau;
  const auto doubly = sinkhorn_normalize(logits, SinkhornOptions{config.sinkhorn_iters, config.sinkhorn_tol});
  const auto mask = hungarian_attention_mask(doubly, gt);
  const auto bce = attended_bce_loss(doubly.values, gt, mask);
  const auto contr = contrastive_loss(pieces.vectors, slots.vectors, gt, config.tau);
  LossBreakdown loss{bce.loss, contr.loss};
  if (!grads) return loss;

  const Eigen::MatrixXd dcost = sinkhorn_backward(logits, doubly, bce.gradient) / config.tau;
  const Eigen::MatrixXd dpieces = slots.vectors * dcost.transpose() + contr.piece_gradient;
  const Eigen::MatrixXd dslots = pieces.vectors * dcost + contr.slot_gradient;

  const Eigen::MatrixXd dpiece_mid =
      weights.shared_head.backward(piece_head_cache, normalize_backward(piece_raw, pieces, dpieces), grads->shared_head);
  weights.piece_branch.backward(piece_branch_cache, dpiece_mid, grads->piece_branch);
  const Eigen::MatrixXd dslot_mid =
      weights.shared_head.backward(slot_head_cache, normalize_backward(slot_raw, slots, dslots), grads->shared_head);
  weights.slot_branch.backward(slot_branch_cache, dslot_mid, grads->slot_branch);
  return loss;
}

namespace {

struct PreparedPuzzle {
  Eigen::MatrixXd piece_features;
  Eigen::MatrixXd slot_features;
  Permutation gt;
};

PreparedPuzzle prepare(const PuzzleInstance& puzzle, const MentalImageProvider& provider, int input_side) {
  if (puzzle.present_count() != puzzle.size()) {
    throw Error(Errc::MissingPieces, "training puzzle '" + puzzle.source_id + "' has missing pieces");
  }
  std::vector<Raster> pieces;
  pieces.reserve(puzzle.pieces.size());
  for (const Piece& p : puzzle.pieces) pieces.push_back(p.content);
  const MentalImage mental = provider.provide(puzzle);
  const std::vector<Raster> slots = roi_crop_slots(mental.raster, puzzle.grid, puzzle.piece_side());
  return {raster_features(pieces, input_side), raster_features(slots, input_side), puzzle.gt_permutation};
}

template <typename T>
void fisher_yates(std::vector<T>& items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) std::swap(items[i - 1], items[rng.below(i)]);
}

}  // namespace

TrainResult train_matcher(std::span<const PuzzleInstance> dataset, const MentalImageProvider& provider,
                          const TrainConfig& config, const EpochCallback& on_epoch) {
  if (dataset.empty()) throw Error(Errc::EmptyDataset, "no training puzzles");
  if (!(config.tau > 0)) throw Error(Errc::NonPositiveTemperature, "tau must be positive");
  if (!(config.learning_rate >= 0) || config.batch_size < 1 || config.epochs < 0) {
    throw Error(Errc::InvalidArgument, "bad training configuration");
  }

  const int channels = dataset.front().channels();
  EmbeddingDims dims{config.input_side, channels, config.hidden, config.branch_out, config.embedding_dim};
  TrainResult result{EmbeddingNetWeights::create(dims, derive_seed(config.seed, "init")), {}};

  std::vector<PreparedPuzzle> prepared;
  std::map<std::pair<int, int>, std::vector<std::size_t>> by_grid;
  for (const PuzzleInstance& puzzle : dataset) {
    if (puzzle.channels() != channels) throw Error(Errc::ShapeMismatch, "mixed channel counts in dataset");
    by_grid[{puzzle.grid.rows, puzzle.grid.cols}].push_back(prepared.size());
    prepared.push_back(prepare(puzzle, provider, config.input_side));
  }

  EmbeddingNetWeights& w = result.weights;
  Adam adam({&w.piece_branch, &w.slot_branch, &w.shared_head}, Adam::Options{config.learning_rate});

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Rng rng(derive_seed(config.seed, "epoch:" + std::to_string(epoch)));
    std::vector<std::vector<std::size_t>> batches;
    for (auto& [grid, members] : by_grid) {
      std::vector<std::size_t> order = members;
      fisher_yates(order, rng);
      for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
        const auto end = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
        batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                             order.begin() + static_cast<std::ptrdiff_t>(end));
      }
    }
    fisher_yates(batches, rng);

    double epoch_total = 0;
    for (const auto& batch : batches) {
      EmbeddingGradients grads = EmbeddingGradients::zeros_like(w);
      for (std::size_t index : batch) {
        const PreparedPuzzle& p = prepared[index];
        const LossBreakdown loss = matcher_loss(w, p.piece_features, p.slot_features, p.gt, config, &grads);
        if (!std::isfinite(loss.total())) {
          throw Error(Errc::NaNLoss, "epoch " + std::to_string(epoch) + ", puzzle '" + dataset[index].source_id +
                                         "': L_hung=" + std::to_string(loss.hungarian) +
                                         " L_contr=" + std::to_string(loss.contrastive));
        }
        epoch_total += loss.total();
      }
      const double scale = 1.0 / static_cast<double>(batch.size());
      for (Mlp* g : {&grads.piece_branch, &grads.slot_branch, &grads.shared_head}) {
        for (DenseLayer& layer : g->layers()) {
          layer.weight *= scale;
          layer.bias *= scale;
        }
      }
      adam.step({&grads.piece_branch, &grads.slot_branch, &grads.shared_head});
    }
    const double mean = epoch_total / static_cast<double>(prepared.size());
    result.epoch_losses.push_back(mean);
    spdlog::debug("matcher epoch {} loss {:.6f}", epoch, mean);
    if (on_epoch) on_epoch(epoch, mean);
  }
  return result;
}

}  // namespace jigsaw
