#pragma once

#include <vector>

#include "jigsaw/puzzle.hpp"

namespace jigsaw {

// Fraction of present pieces placed in their ground-truth slot.
// Errors: SizeMismatch, EmptyPresentSet.
double direct_accuracy(const Permutation& pred, const Permutation& gt, const std::vector<bool>& present);
double direct_accuracy(const Permutation& pred, const Permutation& gt);

// Over ordered piece pairs (i, j) where j sits right of / below i in the
// ground truth, the fraction whose predicted slots keep the same relation.
// Direction-sensitive: a pair that merely stays adjacent does not count.
// Errors: SizeMismatch (lengths, grid, or non-bijective input).
double neighbor_accuracy(const Permutation& pred, const Permutation& gt, GridShape grid);

}  // namespace jigsaw
