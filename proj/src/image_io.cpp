#include "jigsaw/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "jigsaw/error.hpp"

namespace jigsaw {

namespace fs = std::filesystem;

namespace {

std::string lower_extension(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

std::uint8_t to_byte(float v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
}

Raster read_png(const fs::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw Error(Errc::DecodeError, path.string() + ": " + image.message);
  }
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    png_image_free(&image);
    throw Error(Errc::DecodeError, path.string() + ": " + image.message);
  }
  Raster out(static_cast<int>(image.height), static_cast<int>(image.width), color ? 3 : 1);
  std::transform(buffer.begin(), buffer.end(), out.data.begin(),
                 [](std::uint8_t b) { return static_cast<float>(b) / 255.0f; });
  return out;
}

void write_png(const fs::path& path, const Raster& raster) {
  if (raster.channels != 1 && raster.channels != 3) {
    throw Error(Errc::IoError, "png output supports 1 or 3 channels");
  }
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(raster.width);
  image.height = static_cast<png_uint_32>(raster.height);
  image.format = raster.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<std::uint8_t> buffer(raster.data.size());
  std::transform(raster.data.begin(), raster.data.end(), buffer.begin(), to_byte);
  if (!png_image_write_to_file(&image, path.c_str(), 0, buffer.data(), 0, nullptr)) {
    throw Error(Errc::IoError, path.string() + ": " + image.message);
  }
}

// Netpbm header tokens may be separated by whitespace and '#' comments.
std::string next_token(std::istream& in) {
  std::string token;
  char c;
  while (in.get(c)) {
    if (c == '#') {
      std::string skip;
      std::getline(in, skip);
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      if (!token.empty()) return token;
    } else {
      token.push_back(c);
    }
  }
  return token;
}

int parse_int(const std::string& token, const fs::path& path) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(token, &used);
    if (used != token.size()) throw std::invalid_argument(token);
    return v;
  } catch (const std::exception&) {
    throw Error(Errc::DecodeError, path.string() + ": bad netpbm token '" + token + "'");
  }
}

Raster read_pnm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  const std::string magic = next_token(in);
  if (magic != "P2" && magic != "P3" && magic != "P5" && magic != "P6") {
    throw Error(Errc::DecodeError, path.string() + ": unsupported netpbm magic '" + magic + "'");
  }
  const int width = parse_int(next_token(in), path);
  const int height = parse_int(next_token(in), path);
  const int maxval = parse_int(next_token(in), path);
  if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 255) {
    throw Error(Errc::DecodeError, path.string() + ": bad netpbm header");
  }
  const int channels = (magic == "P3" || magic == "P6") ? 3 : 1;
  Raster out(height, width, channels);
  const bool binary = magic == "P5" || magic == "P6";
  for (float& v : out.data) {
    int value = 0;
    if (binary) {
      char byte;
      if (!in.get(byte)) throw Error(Errc::DecodeError, path.string() + ": truncated pixel data");
      value = static_cast<unsigned char>(byte);
    } else {
      const std::string token = next_token(in);
      if (token.empty()) throw Error(Errc::DecodeError, path.string() + ": truncated pixel data");
      value = parse_int(token, path);
    }
    if (value < 0 || value > maxval) throw Error(Errc::DecodeError, path.string() + ": sample out of range");
    v = static_cast<float>(value) / static_cast<float>(maxval);
  }
  return out;
}

void write_pnm(const fs::path& path, const Raster& raster) {
  if (raster.channels != 1 && raster.channels != 3) {
    throw Error(Errc::IoError, "netpbm output supports 1 or 3 channels");
  }
  std::ofstream out(path);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  out << (raster.channels == 3 ? "P3" : "P2") << '\n' << raster.width << ' ' << raster.height << "\n255\n";
  for (int y = 0; y < raster.height; ++y) {
    for (int x = 0; x < raster.width * raster.channels; ++x) {
      out << static_cast<int>(to_byte(raster.data[static_cast<std::size_t>(y) * raster.width * raster.channels + x]))
          << (x + 1 == raster.width * raster.channels ? '\n' : ' ');
    }
  }
  if (!out) throw Error(Errc::IoError, "write failed for " + path.string());
}

}  // namespace

bool is_image_file(const fs::path& path) {
  const std::string ext = lower_extension(path);
  return ext == ".png" || ext == ".ppm" || ext == ".pgm";
}

Raster read_image(const fs::path& path) {
  if (!fs::exists(path)) throw Error(Errc::IoError, "no such file " + path.string());
  const std::string ext = lower_extension(path);
  if (ext == ".png") return read_png(path);
  if (ext == ".ppm" || ext == ".pgm") return read_pnm(path);
  throw Error(Errc::DecodeError, "unsupported image extension " + path.string());
}

void write_image(const fs::path& path, const Raster& image) {
  const std::string ext = lower_extension(path);
  if (ext == ".png") return write_png(path, image);
  if (ext == ".ppm" || ext == ".pgm") return write_pnm(path, image);
  throw Error(Errc::IoError, "unsupported image extension " + path.string());
}

}  // namespace jigsaw
