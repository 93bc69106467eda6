#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "jigsaw/matcher/embedding.hpp"
#include "jigsaw/matcher/providers.hpp"
#include "jigsaw/puzzle.hpp"

namespace jigsaw {

struct TrainConfig {
  double tau = 0.1;
  double learning_rate = 1e-3;
  int epochs = 50;
  int batch_size = 8;
  std::uint64_t seed = 0;
  int sinkhorn_iters = 100;
  double sinkhorn_tol = 1e-6;
  int embedding_dim = 64;
  int hidden = 256;
  int branch_out = 128;
  int input_side = 16;
};

struct LossBreakdown {
  double hungarian = 0;    // attended BCE through Sinkhorn
  double contrastive = 0;
  double total() const { return hungarian + contrastive; }
};

// Gradients laid out like EmbeddingNetWeights' three networks.
struct EmbeddingGradients {
  Mlp piece_branch;
  Mlp slot_branch;
  Mlp shared_head;

  static EmbeddingGradients zeros_like(const EmbeddingNetWeights& w);
};

// L_hung + L_contr for one puzzle given network inputs (features x n, already
// resampled) and the ground truth. Accumulates into `grads` when non-null.
LossBreakdown matcher_loss(const EmbeddingNetWeights& weights, const Eigen::MatrixXd& piece_features,
                           const Eigen::MatrixXd& slot_features, const Permutation& gt, const TrainConfig& config,
                           EmbeddingGradients* grads);

struct TrainResult {
  EmbeddingNetWeights weights;
  std::vector<double> epoch_losses;  // mean total loss per puzzle
};

using EpochCallback = std::function<void(int epoch, double mean_loss)>;

// Adam on L_hung + L_contr. Batches only hold puzzles of one grid size; puzzle
// order within a size and the batch order are reshuffled every epoch from
// the seed. Errors: EmptyDataset, MissingPieces, NaNLoss.
TrainResult train_matcher(std::span<const PuzzleInstance> dataset, const MentalImageProvider& provider,
                          const TrainConfig& config, const EpochCallback& on_epoch = {});

}  // namespace jigsaw
