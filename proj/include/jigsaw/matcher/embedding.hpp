#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "jigsaw/matcher/mlp.hpp"
#include "jigsaw/raster.hpp"

namespace jigsaw {

struct EmbeddingDims {
  int input_side = 16;
  int channels = 3;
  int hidden = 256;
  int branch_out = 128;
  int embedding = 64;

  int input_width() const { return input_side * input_side * channels; }
  bool operator==(const EmbeddingDims&) const = default;
};

// Piece branch (psi_e), slot branch (psi_d) and shared head (psi_s).
// Branches are Linear-ReLU-Linear-ReLU, the head is a single linear layer.
struct EmbeddingNetWeights {
  static constexpr std::uint32_t kVersion = 1;

  EmbeddingDims dims;
  Mlp piece_branch;
  Mlp slot_branch;
  Mlp shared_head;

  static EmbeddingNetWeights create(const EmbeddingDims& dims, std::uint64_t seed);

  bool all_finite() const {
    return piece_branch.all_finite() && slot_branch.all_finite() && shared_head.all_finite();
  }
  bool operator==(const EmbeddingNetWeights&) const = default;
};

// Unit-norm embeddings, one per column. A zero pre-normalization vector maps to
// the zero vector and is flagged degenerate.
struct Embeddings {
  Eigen::MatrixXd vectors;
  std::vector<bool> degenerate;

  bool any_degenerate() const;
};

// Flattened HWC pixels, one column per raster, resized bilinearly to side x side
// when needed (side <= 0 keeps the native size). Errors: ShapeMismatch.
Eigen::MatrixXd raster_features(std::span<const Raster> rasters, int side);

// Column-wise L2 normalization with the degenerate rule above.
Embeddings normalize_columns(const Eigen::MatrixXd& raw);

// Back-propagates d(loss)/d(normalized) through the normalization.
Eigen::MatrixXd normalize_backward(const Eigen::MatrixXd& raw, const Embeddings& normalized,
                                   const Eigen::MatrixXd& grad_normalized);

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual Embeddings embed_pieces(std::span<const Raster> pieces) const = 0;
  virtual Embeddings embed_slots(std::span<const Raster> slots) const = 0;
};

// psi_s(psi_e(x)) for pieces and psi_s(psi_d(x)) for slots on 16x16 resampled inputs.
class LearnedEmbedder final : public Embedder {
 public:
  explicit LearnedEmbedder(const EmbeddingNetWeights& weights) : weights_(weights) {}
  Embeddings embed_pieces(std::span<const Raster> pieces) const override;
  Embeddings embed_slots(std::span<const Raster> slots) const override;

 private:
  const EmbeddingNetWeights& weights_;
};

// Raw full-resolution flattened pixels, L2-normalized; no learned parameters.
class RawPixelEmbedder final : public Embedder {
 public:
  Embeddings embed_pieces(std::span<const Raster> pieces) const override;
  Embeddings embed_slots(std::span<const Raster> slots) const override;
};

Embeddings embed_pieces(std::span<const Raster> pieces, const EmbeddingNetWeights& weights);
Embeddings embed_slots(std::span<const Raster> slots, const EmbeddingNetWeights& weights);

// "GZW1", u32 dim count (5), u32 dims {input_side, channels, hidden, branch_out,
// embedding}, then little-endian float32 arrays: for psi_e, psi_d, psi_s in
// turn, each layer's weight (row-major, out x in) followed by its bias.
void save_weights(const std::filesystem::path& path, const EmbeddingNetWeights& weights);
EmbeddingNetWeights load_weights(const std::filesystem::path& path);

namespace binio {

void write_u32(std::ostream& out, std::uint32_t v);
std::uint32_t read_u32(std::istream& in);
void write_f32(std::ostream& out, double v);
double read_f32(std::istream& in);
void write_mlp(std::ostream& out, const Mlp& mlp);
void read_mlp(std::istream& in, Mlp& mlp);

}  // namespace binio

}  // namespace jigsaw
