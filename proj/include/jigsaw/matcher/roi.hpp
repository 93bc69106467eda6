#pragma once

#include <vector>

#include "jigsaw/puzzle.hpp"
#include "jigsaw/raster.hpp"

namespace jigsaw {

// Axis-aligned region in pixel units; (y0, x0) is the top-left pixel edge.
struct Roi {
  double y0 = 0;
  double x0 = 0;
  double height = 0;
  double width = 0;
};

// RoiAlign with one bilinear sample per output bin, taken at the bin centre
// (half-pixel convention, clamped at the border). A pixel-aligned region
// sampled at its own size is copied exactly; at half size every output is the
// mean of a 2x2 input block.
Raster roi_align(const Raster& image, const Roi& roi, int out_height, int out_width);

inline Raster resize_bilinear(const Raster& image, int out_height, int out_width) {
  return roi_align(image, {0, 0, static_cast<double>(image.height), static_cast<double>(image.width)}, out_height,
                   out_width);
}

// One out_side x out_side crop per grid cell, row-major. Errors: DimensionMismatch.
std::vector<Raster> roi_crop_slots(const Raster& mental, GridShape grid, int out_side);

}  // namespace jigsaw
