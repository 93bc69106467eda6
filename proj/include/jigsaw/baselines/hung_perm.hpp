#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "jigsaw/assignment/sinkhorn.hpp"
#include "jigsaw/matcher/mlp.hpp"
#include "jigsaw/matcher/training.hpp"
#include "jigsaw/puzzle.hpp"

namespace jigsaw {

// Permutation-regression baseline without a mental image: every piece is
// encoded independently (Linear-ReLU-Linear on 16x16 inputs to `embedding`
// dims), the embeddings are concatenated in piece order and one dense layer
// emits the n x n cost matrix, row-major. One model per grid size.
struct HungPermModel {
  GridShape grid;
  int input_side = 16;
  int channels = 3;
  int hidden = 256;
  int embedding = 256;
  Mlp encoder;
  Mlp head;

  static HungPermModel create(GridShape grid, int channels, std::uint64_t seed, int input_side = 16, int hidden = 256,
                              int embedding = 256);

  Eigen::MatrixXd cost(const Eigen::MatrixXd& piece_features) const;
  bool operator==(const HungPermModel&) const = default;
};

// Attended BCE through Sinkhorn for one puzzle; accumulates into `grads` when non-null.
double hung_perm_loss(const HungPermModel& model, const Eigen::MatrixXd& piece_features, const Permutation& gt,
                      const SinkhornOptions& sinkhorn, HungPermModel* grads);

struct HungPermTrainResult {
  HungPermModel model;
  std::vector<double> epoch_losses;
};

// Same optimizer, batching and seeding scheme as train_matcher.
// Errors: EmptyDataset, SizeMismatch (mixed grid sizes), MissingPieces, NaNLoss.
HungPermTrainResult train_hung_perm(std::span<const PuzzleInstance> dataset, const TrainConfig& config,
                                    const EpochCallback& on_epoch = {});

// cost -> Sinkhorn -> Hungarian; missing pieces stay unassigned. Errors: SizeMismatch.
Permutation solve_hung_perm(const PuzzleInstance& puzzle, const HungPermModel& model,
                            const SinkhornOptions& sinkhorn = {});

// "GZP1", u32 count (6), u32 {rows, cols, input_side, channels, hidden, embedding},
// then float32 little-endian encoder and head parameters as in the GZW1 layout.
void save_hung_perm(const std::filesystem::path& path, const HungPermModel& model);
HungPermModel load_hung_perm(const std::filesystem::path& path);

}  // namespace jigsaw
