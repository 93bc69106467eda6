#include "jigsaw/synthetic.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "jigsaw/rng.hpp"

namespace jigsaw {

Raster synthetic_image(int height, int width, std::uint64_t seed, int channels) {
  Rng rng(seed);
  Raster image(height, width, channels);

  struct Blob {
    double cy, cx, radius;
    std::vector<double> colour;
  };
  std::vector<double> base(static_cast<std::size_t>(channels)), gx(base), gy(base), gxy(base);
  for (int c = 0; c < channels; ++c) {
    base[c] = rng.uniform(0.25, 0.75);
    gx[c] = rng.uniform(-0.35, 0.35);
    gy[c] = rng.uniform(-0.35, 0.35);
    gxy[c] = rng.uniform(-0.3, 0.3);
  }
  const int blob_count = 4 + static_cast<int>(rng.below(6));
  std::vector<Blob> blobs;
  for (int b = 0; b < blob_count; ++b) {
    Blob blob{rng.uniform(0.0, height), rng.uniform(0.0, width),
              rng.uniform(0.08, 0.3) * std::min(height, width), {}};
    for (int c = 0; c < channels; ++c) blob.colour.push_back(rng.uniform(-0.35, 0.35));
    blobs.push_back(std::move(blob));
  }

  // Value noise on an 8 px lattice, bilinearly interpolated.
  constexpr int kCell = 8;
  const int lat_h = height / kCell + 2;
  const int lat_w = width / kCell + 2;
  std::vector<double> lattice(static_cast<std::size_t>(lat_h) * lat_w * channels);
  for (double& v : lattice) v = rng.uniform(-0.15, 0.15);
  auto lat = [&](int ly, int lx, int c) {
    return lattice[(static_cast<std::size_t>(ly) * lat_w + lx) * channels + c];
  };

  for (int y = 0; y < height; ++y) {
    const double v = static_cast<double>(y) / height - 0.5;
    const double ly = static_cast<double>(y) / kCell;
    const int ly0 = static_cast<int>(ly);
    const double fy = ly - ly0;
    for (int x = 0; x < width; ++x) {
      const double u = static_cast<double>(x) / width - 0.5;
      const double lx = static_cast<double>(x) / kCell;
      const int lx0 = static_cast<int>(lx);
      const double fx = lx - lx0;
      for (int c = 0; c < channels; ++c) {
        double value = base[c] + gx[c] * u + gy[c] * v + gxy[c] * u * v;
        for (const Blob& blob : blobs) {
          const double d2 = ((y - blob.cy) * (y - blob.cy) + (x - blob.cx) * (x - blob.cx)) / (blob.radius * blob.radius);
          value += blob.colour[c] * std::exp(-0.5 * d2);
        }
        value += (1 - fy) * ((1 - fx) * lat(ly0, lx0, c) + fx * lat(ly0, lx0 + 1, c)) +
                 fy * ((1 - fx) * lat(ly0 + 1, lx0, c) + fx * lat(ly0 + 1, lx0 + 1, c));
        value += rng.uniform(-0.08, 0.08);
        image.at(y, x, c) = static_cast<float>(std::clamp(value, 0.0, 1.0));
      }
    }
  }
  quantize_8bit(image);
  return image;
}

double max_pairwise_cosine(std::span<const Piece> pieces) {
  if (pieces.size() < 2) return 0.0;
  const auto dim = static_cast<Eigen::Index>(pieces.front().content.size());
  Eigen::MatrixXd features(dim, static_cast<Eigen::Index>(pieces.size()));
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const auto& data = pieces[i].content.data;
    for (Eigen::Index k = 0; k < dim; ++k) features(k, static_cast<Eigen::Index>(i)) = data[static_cast<std::size_t>(k)];
    const double norm = features.col(static_cast<Eigen::Index>(i)).norm();
    if (norm > 0) features.col(static_cast<Eigen::Index>(i)) /= norm;
  }
  Eigen::MatrixXd gram = features.transpose() * features;
  gram.diagonal().setConstant(-1.0);
  return gram.maxCoeff();
}

bool pieces_pairwise_distinct(std::span<const Piece> pieces, double max_cosine) {
  return max_pairwise_cosine(pieces) < max_cosine;
}

}  // namespace jigsaw
