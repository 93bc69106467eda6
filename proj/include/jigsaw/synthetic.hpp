#pragma once

#include <cstdint>
#include <span>

#include "jigsaw/puzzle.hpp"

namespace jigsaw {

// Procedural test image: a random smooth colour gradient, a handful of soft
// blobs, lattice value-noise texture and fine per-pixel grain, quantized to
// 8 bits. Deterministic in `seed`.
Raster synthetic_image(int height, int width, std::uint64_t seed, int channels = 3);

// Largest cosine similarity between flattened piece contents over all distinct pairs.
double max_pairwise_cosine(std::span<const Piece> pieces);

// Pieces are treated as distinct when no two flattened contents are parallel
// within `max_cosine`.
bool pieces_pairwise_distinct(std::span<const Piece> pieces, double max_cosine = 0.999);

}  // namespace jigsaw
