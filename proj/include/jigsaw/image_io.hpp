#pragma once

#include <filesystem>

#include "jigsaw/raster.hpp"

namespace jigsaw {

// Format is chosen by extension: .png (8-bit, gray or RGB; alpha dropped) or
// .ppm/.pgm (P3/P2 ASCII on write, P2/P3/P5/P6 on read). Errors: DecodeError, IoError.
Raster read_image(const std::filesystem::path& path);
void write_image(const std::filesystem::path& path, const Raster& image);

bool is_image_file(const std::filesystem::path& path);

}  // namespace jigsaw
