#pragma once

#include <Eigen/Core>

#include "jigsaw/assignment/sinkhorn.hpp"
#include "jigsaw/matcher/embedding.hpp"
#include "jigsaw/matcher/providers.hpp"
#include "jigsaw/puzzle.hpp"

namespace jigsaw {

// C(i, j) = piece_i . slot_j for column-stacked embeddings. Errors: SizeMismatch (dimensions).
Eigen::MatrixXd cost_matrix(const Eigen::MatrixXd& piece_embs, const Eigen::MatrixXd& slot_embs);

struct SolveOptions {
  double tau = 0.1;  // C / tau is exponentiated by Sinkhorn
  SinkhornOptions sinkhorn;
};

struct SolveTrace {
  Eigen::MatrixXd cost;     // present pieces x slots
  Eigen::MatrixXd doubly;   // Sinkhorn output over the same shape
  int sinkhorn_iterations = 0;
  std::string provider_tag;
};

// provider -> roi_crop_slots -> embed -> cost_matrix -> Sinkhorn -> Hungarian.
// With missing pieces the present rows are padded with zero-logit rows for
// Sinkhorn, the padding is dropped and the rectangular assignment is solved;
// missing pieces stay unassigned.
Permutation solve_puzzle(const PuzzleInstance& puzzle, const MentalImageProvider& provider, const Embedder& embedder,
                         const SolveOptions& opts = {}, SolveTrace* trace = nullptr);

}  // namespace jigsaw
