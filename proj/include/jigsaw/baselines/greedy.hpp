#pragma once

#include <span>

#include "jigsaw/baselines/compatibility.hpp"
#include "jigsaw/puzzle.hpp"

namespace jigsaw {

// Greedy placer in the spirit of the classical best-first assemblers. Starting
// from `seed_piece`, it repeatedly commits the (frontier cell, unplaced piece)
// pair with the lowest mean dissimilarity to the already placed 4-neighbours.
// Frontier cells are restricted so the occupied bounding box never exceeds
// rows x cols; once every piece is placed the box is exactly the grid.
// Ties go to the lowest piece index, then the top-most, left-most cell.
// Errors: MissingPieces, SizeMismatch.
Permutation greedy_place(std::span<const Piece> pieces, const CompatibilityTable& table, GridShape grid,
                         int seed_piece);

// Seed = the piece taking part in the most best-buddy relations (lowest index on ties).
int choose_seed_piece(const CompatibilityTable& table);

Permutation solve_greedy(const PuzzleInstance& puzzle);

}  // namespace jigsaw
