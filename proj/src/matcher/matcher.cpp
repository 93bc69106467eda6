#include "jigsaw/matcher/matcher.hpp"

#include <vector>

#include "jigsaw/assignment/hungarian.hpp"
#include "jigsaw/error.hpp"
#include "jigsaw/matcher/roi.hpp"

namespace jigsaw {

Eigen::MatrixXd cost_matrix(const Eigen::MatrixXd& piece_embs, const Eigen::MatrixXd& slot_embs) {
  if (piece_embs.rows() != slot_embs.rows()) throw Error(Errc::SizeMismatch, "embedding dimensions differ");
  return piece_embs.transpose() * slot_embs;
}

Permutation solve_puzzle(const PuzzleInstance& puzzle, const MentalImageProvider& provider, const Embedder& embedder,
                         const SolveOptions& opts, SolveTrace* trace) {
  if (!(opts.tau > 0)) throw Error(Errc::NonPositiveTemperature, "tau must be positive");
  const MentalImage mental = provider.provide(puzzle);
  const std::vector<Raster> slots = roi_crop_slots(mental.raster, puzzle.grid, puzzle.piece_side());

  std::vector<int> present_index;
  std::vector<Raster> present_pieces;
  for (int i = 0; i < puzzle.size(); ++i) {
    const Piece& piece = puzzle.pieces[static_cast<std::size_t>(i)];
    if (!piece.present) continue;
    present_index.push_back(i);
    present_pieces.push_back(piece.content);
  }
  const int m = puzzle.grid.slots();
  const int n = static_cast<int>(present_index.size());
  std::vector<int> mapping(static_cast<std::size_t>(puzzle.size()), Permutation::kUnassigned);
  if (n == 0) return Permutation(std::move(mapping), m);

  const Eigen::MatrixXd cost = cost_matrix(embedder.embed_pieces(present_pieces).vectors,
                                           embedder.embed_slots(slots).vectors);
  Eigen::MatrixXd logits = Eigen::MatrixXd::Zero(m, m);
  logits.topRows(n) = cost / opts.tau;
  const auto doubly = sinkhorn_normalize(logits, opts.sinkhorn);
  const Eigen::MatrixXd s = doubly.values.topRows(n);
  const Permutation partial = n == m ? hungarian_solve(s, true) : solve_rectangular(s, true);
  for (int k = 0; k < n; ++k) mapping[static_cast<std::size_t>(present_index[static_cast<std::size_t>(k)])] = partial[k];

  if (trace) {
    trace->cost = cost;
    trace->doubly = s;
    trace->sinkhorn_iterations = doubly.iterations_used;
    trace->provider_tag = mental.provider_tag;
  }
  return Permutation(std::move(mapping), m);
}

}  // namespace jigsaw
