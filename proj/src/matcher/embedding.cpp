#include "jigsaw/matcher/embedding.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>

#include "jigsaw/error.hpp"
#include "jigsaw/matcher/roi.hpp"
#include "jigsaw/rng.hpp"

namespace jigsaw {

EmbeddingNetWeights EmbeddingNetWeights::create(const EmbeddingDims& dims, std::uint64_t seed) {
  EmbeddingNetWeights w;
  w.dims = dims;
  w.piece_branch = Mlp({dims.input_width(), dims.hidden, dims.branch_out}, true);
  w.slot_branch = Mlp({dims.input_width(), dims.hidden, dims.branch_out}, true);
  w.shared_head = Mlp({dims.branch_out, dims.embedding}, false);
  Rng rng(seed);
  w.piece_branch.initialize(rng);
  w.slot_branch.initialize(rng);
  w.shared_head.initialize(rng);
  return w;
}

bool Embeddings::any_degenerate() const {
  return std::find(degenerate.begin(), degenerate.end(), true) != degenerate.end();
}

Eigen::MatrixXd raster_features(std::span<const Raster> rasters, int side) {
  if (rasters.empty()) return {};
  const Raster& first = rasters.front();
  const int h = side > 0 ? side : first.height;
  const int w = side > 0 ? side : first.width;
  const Eigen::Index dim = static_cast<Eigen::Index>(h) * w * first.channels;
  Eigen::MatrixXd features(dim, static_cast<Eigen::Index>(rasters.size()));
  for (std::size_t k = 0; k < rasters.size(); ++k) {
    const Raster& r = rasters[k];
    if (r.channels != first.channels || (side <= 0 && !r.same_shape(first))) {
      throw Error(Errc::ShapeMismatch, "rasters in one batch must share a shape");
    }
    const Raster resized = (r.height == h && r.width == w) ? r : resize_bilinear(r, h, w);
    for (Eigen::Index i = 0; i < dim; ++i) {
      features(i, static_cast<Eigen::Index>(k)) = resized.data[static_cast<std::size_t>(i)];
    }
  }
  return features;
}

Embeddings normalize_columns(const Eigen::MatrixXd& raw) {
  Embeddings out{raw, std::vector<bool>(static_cast<std::size_t>(raw.cols()), false)};
  for (Eigen::Index j = 0; j < raw.cols(); ++j) {
    const double norm = raw.col(j).norm();
    if (norm > 0.0) {
      out.vectors.col(j) /= norm;
    } else {
      out.vectors.col(j).setZero();
      out.degenerate[static_cast<std::size_t>(j)] = true;
    }
  }
  return out;
}

Eigen::MatrixXd normalize_backward(const Eigen::MatrixXd& raw, const Embeddings& normalized,
                                   const Eigen::MatrixXd& grad_normalized) {
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(raw.rows(), raw.cols());
  for (Eigen::Index j = 0; j < raw.cols(); ++j) {
    if (normalized.degenerate[static_cast<std::size_t>(j)]) continue;
    const auto e = normalized.vectors.col(j);
    const auto g = grad_normalized.col(j);
    grad.col(j) = (g - e * e.dot(g)) / raw.col(j).norm();
  }
  return grad;
}

namespace {

void check_input(const EmbeddingNetWeights& w, std::span<const Raster> rasters) {
  for (const Raster& r : rasters) {
    if (r.channels != w.dims.channels) throw Error(Errc::ShapeMismatch, "raster channels differ from network input");
  }
}

Embeddings run_path(const Mlp& branch, const Mlp& head, const EmbeddingNetWeights& w, std::span<const Raster> rasters) {
  check_input(w, rasters);
  if (rasters.empty()) return {Eigen::MatrixXd(w.dims.embedding, 0), {}};
  const Eigen::MatrixXd x = raster_features(rasters, w.dims.input_side);
  return normalize_columns(head.forward(branch.forward(x)));
}

}  // namespace

Embeddings embed_pieces(std::span<const Raster> pieces, const EmbeddingNetWeights& weights) {
  return run_path(weights.piece_branch, weights.shared_head, weights, pieces);
}

Embeddings embed_slots(std::span<const Raster> slots, const EmbeddingNetWeights& weights) {
  return run_path(weights.slot_branch, weights.shared_head, weights, slots);
}

Embeddings LearnedEmbedder::embed_pieces(std::span<const Raster> pieces) const {
  return jigsaw::embed_pieces(pieces, weights_);
}

Embeddings LearnedEmbedder::embed_slots(std::span<const Raster> slots) const {
  return jigsaw::embed_slots(slots, weights_);
}

Embeddings RawPixelEmbedder::embed_pieces(std::span<const Raster> pieces) const {
  return normalize_columns(raster_features(pieces, 0));
}

Embeddings RawPixelEmbedder::embed_slots(std::span<const Raster> slots) const {
  return normalize_columns(raster_features(slots, 0));
}

namespace binio {

void write_u32(std::ostream& out, std::uint32_t v) {
  const unsigned char bytes[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                                  static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(bytes), 4);
}

std::uint32_t read_u32(std::istream& in) {
  unsigned char bytes[4];
  if (!in.read(reinterpret_cast<char*>(bytes), 4)) throw Error(Errc::DecodeError, "truncated weights file");
  return static_cast<std::uint32_t>(bytes[0]) | (static_cast<std::uint32_t>(bytes[1]) << 8) |
         (static_cast<std::uint32_t>(bytes[2]) << 16) | (static_cast<std::uint32_t>(bytes[3]) << 24);
}

void write_f32(std::ostream& out, double v) { write_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v))); }

double read_f32(std::istream& in) { return static_cast<double>(std::bit_cast<float>(read_u32(in))); }

void write_mlp(std::ostream& out, const Mlp& mlp) {
  for (const DenseLayer& layer : mlp.layers()) {
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) write_f32(out, layer.weight(r, c));
    }
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) write_f32(out, layer.bias(r));
  }
}

void read_mlp(std::istream& in, Mlp& mlp) {
  for (DenseLayer& layer : mlp.layers()) {
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) layer.weight(r, c) = read_f32(in);
    }
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) layer.bias(r) = read_f32(in);
  }
}

}  // namespace binio

void save_weights(const std::filesystem::path& path, const EmbeddingNetWeights& weights) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  out.write("GZW1", 4);
  const EmbeddingDims& d = weights.dims;
  binio::write_u32(out, 5);
  for (int v : {d.input_side, d.channels, d.hidden, d.branch_out, d.embedding}) {
    binio::write_u32(out, static_cast<std::uint32_t>(v));
  }
  binio::write_mlp(out, weights.piece_branch);
  binio::write_mlp(out, weights.slot_branch);
  binio::write_mlp(out, weights.shared_head);
  if (!out) throw Error(Errc::IoError, "write failed for " + path.string());
}

EmbeddingNetWeights load_weights(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "GZW1", 4) != 0) {
    throw Error(Errc::DecodeError, path.string() + " is not a GZW1 weights file");
  }
  if (binio::read_u32(in) != 5) throw Error(Errc::DecodeError, "unexpected weights header length");
  EmbeddingDims d;
  for (int* field : {&d.input_side, &d.channels, &d.hidden, &d.branch_out, &d.embedding}) {
    *field = static_cast<int>(binio::read_u32(in));
    if (*field <= 0 || *field > (1 << 16)) throw Error(Errc::DecodeError, "implausible weights dimension");
  }
  EmbeddingNetWeights w = EmbeddingNetWeights::create(d, 0);
  binio::read_mlp(in, w.piece_branch);
  binio::read_mlp(in, w.slot_branch);
  binio::read_mlp(in, w.shared_head);
  if (in.peek() != std::char_traits<char>::eof()) throw Error(Errc::DecodeError, "trailing bytes in weights file");
  if (!w.all_finite()) throw Error(Errc::DecodeError, "non-finite weights");
  return w;
}

}  // namespace jigsaw
