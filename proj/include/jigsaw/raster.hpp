#pragma once

#include <cstddef>
#include <vector>

namespace jigsaw {

// H x W x C pixel grid, row-major with interleaved channels, values in [0, 1].
struct Raster {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<float> data;

  Raster() = default;
  Raster(int height, int width, int channels, float fill = 0.0f);

  std::size_t index(int y, int x, int c) const {
    return (static_cast<std::size_t>(y) * width + x) * channels + c;
  }
  float& at(int y, int x, int c) { return data[index(y, x, c)]; }
  float at(int y, int x, int c) const { return data[index(y, x, c)]; }

  std::size_t size() const { return data.size(); }
  bool empty() const { return data.empty(); }
  bool same_shape(const Raster& other) const {
    return height == other.height && width == other.width && channels == other.channels;
  }

  bool operator==(const Raster&) const = default;
};

// Copies the h x w window whose top-left corner is (y0, x0).
Raster crop(const Raster& image, int y0, int x0, int h, int w);

// Writes `tile` into `canvas` with its top-left corner at (y0, x0).
void paste(Raster& canvas, const Raster& tile, int y0, int x0);

// Throws InvalidArgument unless the buffer length matches the shape and all values lie in [0, 1].
void validate(const Raster& image);

// Snaps every value to the nearest multiple of 1/255.
void quantize_8bit(Raster& image);

}  // namespace jigsaw
