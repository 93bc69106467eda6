#include "jigsaw/matcher/roi.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "jigsaw/error.hpp"

namespace jigsaw {

Raster roi_align(const Raster& image, const Roi& roi, int out_height, int out_width) {
  if (out_height <= 0 || out_width <= 0 || image.empty()) {
    throw Error(Errc::DimensionMismatch, "roi_align needs a non-empty image and output");
  }
  Raster out(out_height, out_width, image.channels);
  const double bin_h = roi.height / out_height;
  const double bin_w = roi.width / out_width;
  for (int oy = 0; oy < out_height; ++oy) {
    // Sample position in pixel-centre coordinates.
    const double sy = std::clamp(roi.y0 + (oy + 0.5) * bin_h - 0.5, 0.0, image.height - 1.0);
    const int y0 = static_cast<int>(std::floor(sy));
    const int y1 = std::min(y0 + 1, image.height - 1);
    const double fy = sy - y0;
    for (int ox = 0; ox < out_width; ++ox) {
      const double sx = std::clamp(roi.x0 + (ox + 0.5) * bin_w - 0.5, 0.0, image.width - 1.0);
      const int x0 = static_cast<int>(std::floor(sx));
      const int x1 = std::min(x0 + 1, image.width - 1);
      const double fx = sx - x0;
      for (int c = 0; c < image.channels; ++c) {
        const double top = (1 - fx) * image.at(y0, x0, c) + fx * image.at(y0, x1, c);
        const double bottom = (1 - fx) * image.at(y1, x0, c) + fx * image.at(y1, x1, c);
        out.at(oy, ox, c) = static_cast<float>((1 - fy) * top + fy * bottom);
      }
    }
  }
  return out;
}

std::vector<Raster> roi_crop_slots(const Raster& mental, GridShape grid, int out_side) {
  if (grid.rows <= 0 || grid.cols <= 0 || mental.height % grid.rows != 0 || mental.width % grid.cols != 0) {
    throw Error(Errc::DimensionMismatch, std::to_string(mental.height) + "x" + std::to_string(mental.width) +
                                             " mental image is not divisible by the grid");
  }
  const int slot_h = mental.height / grid.rows;
  const int slot_w = mental.width / grid.cols;
  std::vector<Raster> crops;
  crops.reserve(static_cast<std::size_t>(grid.slots()));
  for (int r = 0; r < grid.rows; ++r) {
    for (int c = 0; c < grid.cols; ++c) {
      if (out_side == slot_h && out_side == slot_w) {
        crops.push_back(crop(mental, r * slot_h, c * slot_w, slot_h, slot_w));
      } else {
        const Roi roi{static_cast<double>(r * slot_h), static_cast<double>(c * slot_w), static_cast<double>(slot_h),
                      static_cast<double>(slot_w)};
        crops.push_back(roi_align(mental, roi, out_side, out_side));
      }
    }
  }
  return crops;
}

}  // namespace jigsaw
