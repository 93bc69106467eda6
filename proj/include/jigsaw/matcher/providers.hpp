#pragma once

#include <filesystem>
#include <memory>
#include <span>
#include <string>

#include "jigsaw/puzzle.hpp"
#include "jigsaw/raster.hpp"

namespace jigsaw {

struct MentalImage {
  Raster raster;
  std::string provider_tag;
};

// Supplies the global image a puzzle's pieces are matched against. A trained
// generator plugs in here; implementations must be deterministic in
// (puzzle, configuration). Output resolution is piece_side * grid.
class MentalImageProvider {
 public:
  virtual ~MentalImageProvider() = default;
  virtual MentalImage provide(const PuzzleInstance& puzzle) const = 0;
  virtual std::string tag() const = 0;
};

// Ground-truth reassembly blurred by a Gaussian of standard deviation
// `blur_radius` px (0 = exact). Uses the attached source when present, else
// reassembles unperturbed pieces. Errors: SourceUnavailable.
class OracleProvider final : public MentalImageProvider {
 public:
  explicit OracleProvider(double blur_radius = 0.0);
  MentalImage provide(const PuzzleInstance& puzzle) const override;
  std::string tag() const override;

 private:
  double blur_radius_;
};

// Pixel-wise mean of a set of images, resampled to each puzzle's resolution.
class MeanProvider final : public MentalImageProvider {
 public:
  explicit MeanProvider(Raster mean) : mean_(std::move(mean)) {}
  static MeanProvider from_puzzles(std::span<const PuzzleInstance> puzzles, int side = 128);

  MentalImage provide(const PuzzleInstance& puzzle) const override;
  std::string tag() const override { return "mean"; }
  const Raster& mean() const { return mean_; }

 private:
  Raster mean_;
};

// Loads an image verbatim. Errors: DecodeError, DimensionMismatch, IoError.
class ExternalProvider final : public MentalImageProvider {
 public:
  explicit ExternalProvider(std::filesystem::path path) : path_(std::move(path)) {}
  MentalImage provide(const PuzzleInstance& puzzle) const override;
  std::string tag() const override { return "external"; }

 private:
  std::filesystem::path path_;
};

// Separable Gaussian, kernel half-width ceil(3 sigma), edge pixels replicated.
Raster gaussian_blur(const Raster& image, double sigma);

// Mean squared difference over all values. Errors: ShapeMismatch.
double mse_image(const Raster& a, const Raster& b);

// "oracle", "oracle:<radius>", "mean" (needs `mean_source`), "external:<path>".
std::unique_ptr<MentalImageProvider> make_provider(const std::string& spec,
                                                   std::span<const PuzzleInstance> mean_source = {});

}  // namespace jigsaw
