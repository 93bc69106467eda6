#include "jigsaw/matcher/providers.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "jigsaw/error.hpp"
#include "jigsaw/image_io.hpp"
#include "jigsaw/matcher/roi.hpp"

namespace jigsaw {

namespace {

Raster target_canvas_check(const PuzzleInstance& puzzle, Raster image, const std::string& what) {
  const int h = puzzle.grid.rows * puzzle.piece_side();
  const int w = puzzle.grid.cols * puzzle.piece_side();
  if (image.height != h || image.width != w || image.channels != puzzle.channels()) {
    std::ostringstream msg;
    msg << what << " is " << image.height << "x" << image.width << "x" << image.channels << ", puzzle needs " << h
        << "x" << w << "x" << puzzle.channels();
    throw Error(Errc::DimensionMismatch, msg.str());
  }
  return image;
}

std::vector<double> gaussian_kernel(double sigma) {
  const int half = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * half + 1));
  double total = 0;
  for (int i = -half; i <= half; ++i) {
    k[static_cast<std::size_t>(i + half)] = std::exp(-0.5 * i * i / (sigma * sigma));
    total += k[static_cast<std::size_t>(i + half)];
  }
  for (double& v : k) v /= total;
  return k;
}

}  // namespace

Raster gaussian_blur(const Raster& image, double sigma) {
  if (!(sigma >= 0.0)) throw Error(Errc::InvalidArgument, "blur sigma must be non-negative");
  if (sigma == 0.0 || image.empty()) return image;
  const std::vector<double> kernel = gaussian_kernel(sigma);
  const int half = static_cast<int>(kernel.size() / 2);
  const int h = image.height, w = image.width, ch = image.channels;
  std::vector<double> horizontal(image.data.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < ch; ++c) {
        double acc = 0;
        for (int k = -half; k <= half; ++k) {
          acc += kernel[static_cast<std::size_t>(k + half)] * image.at(y, std::clamp(x + k, 0, w - 1), c);
        }
        horizontal[image.index(y, x, c)] = acc;
      }
    }
  }
  Raster out(h, w, ch);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < ch; ++c) {
        double acc = 0;
        for (int k = -half; k <= half; ++k) {
          acc += kernel[static_cast<std::size_t>(k + half)] * horizontal[image.index(std::clamp(y + k, 0, h - 1), x, c)];
        }
        out.at(y, x, c) = static_cast<float>(std::clamp(acc, 0.0, 1.0));
      }
    }
  }
  return out;
}

double mse_image(const Raster& a, const Raster& b) {
  if (!a.same_shape(b)) throw Error(Errc::ShapeMismatch, "mse_image operands differ in shape");
  if (a.empty()) return 0.0;
  double total = 0;
  for (std::size_t k = 0; k < a.data.size(); ++k) {
    const double d = static_cast<double>(a.data[k]) - b.data[k];
    total += d * d;
  }
  return total / static_cast<double>(a.data.size());
}

OracleProvider::OracleProvider(double blur_radius) : blur_radius_(blur_radius) {
  if (!(blur_radius >= 0.0)) throw Error(Errc::InvalidArgument, "blur radius must be non-negative");
}

std::string OracleProvider::tag() const {
  std::ostringstream out;
  out << "oracle:" << blur_radius_;
  return out.str();
}

MentalImage OracleProvider::provide(const PuzzleInstance& puzzle) const {
  Raster exact;
  if (puzzle.source) {
    exact = target_canvas_check(puzzle, *puzzle.source, "attached source");
  } else if (puzzle.perturbations.empty() && puzzle.present_count() == puzzle.size()) {
    exact = reassemble(puzzle, puzzle.gt_permutation);
  } else {
    throw Error(Errc::SourceUnavailable, "perturbed puzzle '" + puzzle.source_id + "' has no attached source");
  }
  return {gaussian_blur(exact, blur_radius_), tag()};
}

MeanProvider MeanProvider::from_puzzles(std::span<const PuzzleInstance> puzzles, int side) {
  if (puzzles.empty()) throw Error(Errc::EmptyDataset, "mean provider needs at least one puzzle");
  const int channels = puzzles.front().channels();
  std::vector<double> acc(static_cast<std::size_t>(side) * side * channels, 0.0);
  const OracleProvider exact(0.0);
  for (const PuzzleInstance& puzzle : puzzles) {
    if (puzzle.channels() != channels) throw Error(Errc::ShapeMismatch, "mixed channel counts");
    const Raster r = resize_bilinear(exact.provide(puzzle).raster, side, side);
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += r.data[k];
  }
  Raster mean(side, side, channels);
  for (std::size_t k = 0; k < acc.size(); ++k) mean.data[k] = static_cast<float>(acc[k] / puzzles.size());
  return MeanProvider(std::move(mean));
}

MentalImage MeanProvider::provide(const PuzzleInstance& puzzle) const {
  if (mean_.channels != puzzle.channels()) throw Error(Errc::DimensionMismatch, "mean image channel count differs");
  return {resize_bilinear(mean_, puzzle.grid.rows * puzzle.piece_side(), puzzle.grid.cols * puzzle.piece_side()),
          tag()};
}

MentalImage ExternalProvider::provide(const PuzzleInstance& puzzle) const {
  return {target_canvas_check(puzzle, read_image(path_), path_.string()), tag()};
}

std::unique_ptr<MentalImageProvider> make_provider(const std::string& spec,
                                                   std::span<const PuzzleInstance> mean_source) {
  if (spec == "oracle") return std::make_unique<OracleProvider>(0.0);
  if (spec.rfind("oracle:", 0) == 0) {
    try {
      return std::make_unique<OracleProvider>(std::stod(spec.substr(7)));
    } catch (const std::logic_error&) {
      throw Error(Errc::InvalidArgument, "bad oracle blur in '" + spec + "'");
    }
  }
  if (spec == "mean") return std::make_unique<MeanProvider>(MeanProvider::from_puzzles(mean_source));
  if (spec.rfind("external:", 0) == 0) return std::make_unique<ExternalProvider>(spec.substr(9));
  throw Error(Errc::InvalidArgument, "unknown provider '" + spec + "'");
}

}  // namespace jigsaw
