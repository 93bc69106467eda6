#include "jigsaw/raster.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "jigsaw/error.hpp"

namespace jigsaw {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::NonDivisibleGrid: return "NonDivisibleGrid";
    case Errc::NonSquareTile: return "NonSquareTile";
    case Errc::SlotCollision: return "SlotCollision";
    case Errc::ErosionTooLarge: return "ErosionTooLarge";
    case Errc::SizeMismatch: return "SizeMismatch";
    case Errc::NonSquare: return "NonSquare";
    case Errc::Degenerate: return "Degenerate";
    case Errc::IterationRecordMissing: return "IterationRecordMissing";
    case Errc::MoreRowsThanColumns: return "MoreRowsThanColumns";
    case Errc::NonPositiveTemperature: return "NonPositiveTemperature";
    case Errc::SourceUnavailable: return "SourceUnavailable";
    case Errc::DecodeError: return "DecodeError";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::EmptyDataset: return "EmptyDataset";
    case Errc::NaNLoss: return "NaNLoss";
    case Errc::MissingPieces: return "MissingPieces";
    case Errc::EmptyPresentSet: return "EmptyPresentSet";
    case Errc::TooFewSamples: return "TooFewSamples";
    case Errc::IoError: return "IoError";
    case Errc::NoImagesFound: return "NoImagesFound";
  }
  return "Unknown";
}

Raster::Raster(int h, int w, int c, float fill) : height(h), width(w), channels(c) {
  if (h < 0 || w < 0 || c < 0) throw Error(Errc::InvalidArgument, "negative raster dimension");
  data.assign(static_cast<std::size_t>(h) * w * c, fill);
}

Raster crop(const Raster& image, int y0, int x0, int h, int w) {
  if (y0 < 0 || x0 < 0 || y0 + h > image.height || x0 + w > image.width) {
    throw Error(Errc::DimensionMismatch, "crop window outside raster");
  }
  Raster out(h, w, image.channels);
  const std::size_t row = static_cast<std::size_t>(w) * image.channels;
  for (int y = 0; y < h; ++y) {
    const auto src = image.data.begin() + static_cast<std::ptrdiff_t>(image.index(y0 + y, x0, 0));
    std::copy(src, src + static_cast<std::ptrdiff_t>(row), out.data.begin() + static_cast<std::ptrdiff_t>(out.index(y, 0, 0)));
  }
  return out;
}

void paste(Raster& canvas, const Raster& tile, int y0, int x0) {
  if (tile.channels != canvas.channels || y0 < 0 || x0 < 0 || y0 + tile.height > canvas.height ||
      x0 + tile.width > canvas.width) {
    throw Error(Errc::DimensionMismatch, "paste window outside canvas");
  }
  const std::size_t row = static_cast<std::size_t>(tile.width) * tile.channels;
  for (int y = 0; y < tile.height; ++y) {
    const auto src = tile.data.begin() + static_cast<std::ptrdiff_t>(tile.index(y, 0, 0));
    std::copy(src, src + static_cast<std::ptrdiff_t>(row),
              canvas.data.begin() + static_cast<std::ptrdiff_t>(canvas.index(y0 + y, x0, 0)));
  }
}

void validate(const Raster& image) {
  if (image.data.size() != static_cast<std::size_t>(image.height) * image.width * image.channels) {
    throw Error(Errc::InvalidArgument, "raster buffer length does not match its shape");
  }
  for (float v : image.data) {
    if (!(v >= 0.0f && v <= 1.0f)) throw Error(Errc::InvalidArgument, "raster value outside [0,1]");
  }
}

void quantize_8bit(Raster& image) {
  for (float& v : image.data) {
    v = static_cast<float>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f)) / 255.0f;
  }
}

}  // namespace jigsaw
