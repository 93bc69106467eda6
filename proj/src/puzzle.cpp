#include "jigsaw/puzzle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "jigsaw/error.hpp"
#include "jigsaw/rng.hpp"

namespace jigsaw {

Permutation::Permutation(std::vector<int> mapping, std::optional<int> slots)
    : mapping_(std::move(mapping)), slots_(slots.value_or(static_cast<int>(mapping_.size()))) {
  std::vector<char> used(static_cast<std::size_t>(slots_), 0);
  for (int slot : mapping_) {
    if (slot == kUnassigned) continue;
    if (slot < 0 || slot >= slots_) {
      throw Error(Errc::InvalidArgument, "slot index " + std::to_string(slot) + " out of range");
    }
    if (used[static_cast<std::size_t>(slot)]) {
      throw Error(Errc::SlotCollision, "slot " + std::to_string(slot) + " assigned twice");
    }
    used[static_cast<std::size_t>(slot)] = 1;
  }
}

Permutation Permutation::identity(int n) {
  std::vector<int> mapping(static_cast<std::size_t>(n));
  std::iota(mapping.begin(), mapping.end(), 0);
  return Permutation(std::move(mapping));
}

bool Permutation::is_bijection() const {
  return size() == slots_ && std::none_of(mapping_.begin(), mapping_.end(), [](int s) { return s == kUnassigned; });
}

std::vector<int> Permutation::inverse() const {
  std::vector<int> inv(static_cast<std::size_t>(slots_), kUnassigned);
  for (int i = 0; i < size(); ++i) {
    if (mapping_[static_cast<std::size_t>(i)] != kUnassigned) inv[static_cast<std::size_t>(mapping_[static_cast<std::size_t>(i)])] = i;
  }
  return inv;
}

std::vector<bool> PuzzleInstance::present_mask() const {
  std::vector<bool> mask(pieces.size());
  std::transform(pieces.begin(), pieces.end(), mask.begin(), [](const Piece& p) { return p.present; });
  return mask;
}

int PuzzleInstance::present_count() const {
  return static_cast<int>(std::count_if(pieces.begin(), pieces.end(), [](const Piece& p) { return p.present; }));
}

std::vector<Piece> slice_image(const Raster& image, GridShape grid) {
  if (grid.rows <= 0 || grid.cols <= 0 || image.height % grid.rows != 0 || image.width % grid.cols != 0) {
    throw Error(Errc::NonDivisibleGrid, std::to_string(image.height) + "x" + std::to_string(image.width) +
                                            " image does not split into " + std::to_string(grid.rows) + "x" +
                                            std::to_string(grid.cols));
  }
  const int tile_h = image.height / grid.rows;
  const int tile_w = image.width / grid.cols;
  if (tile_h != tile_w) {
    throw Error(Errc::NonSquareTile, std::to_string(tile_h) + "x" + std::to_string(tile_w) + " tiles");
  }
  std::vector<Piece> pieces;
  pieces.reserve(static_cast<std::size_t>(grid.slots()));
  for (int k = 0; k < grid.slots(); ++k) {
    const int r = k / grid.cols;
    const int c = k % grid.cols;
    pieces.push_back(Piece{crop(image, r * tile_h, c * tile_w, tile_h, tile_w), k, true});
  }
  return pieces;
}

PuzzleInstance shuffle(std::span<const Piece> pieces, GridShape grid, std::uint64_t seed, std::string source_id) {
  if (pieces.empty()) throw Error(Errc::InvalidArgument, "cannot shuffle an empty piece list");
  if (static_cast<int>(pieces.size()) != grid.slots()) {
    throw Error(Errc::SizeMismatch, "piece count does not match grid");
  }
  const int n = static_cast<int>(pieces.size());
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (int i = n - 1; i > 0; --i) {
    const auto j = static_cast<int>(rng.below(static_cast<std::uint64_t>(i) + 1));
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
  }
  PuzzleInstance out;
  out.grid = grid;
  out.seed = seed;
  out.source_id = std::move(source_id);
  out.pieces.reserve(pieces.size());
  for (int k : order) out.pieces.push_back(pieces[static_cast<std::size_t>(k)]);
  out.gt_permutation = Permutation(order);
  return out;
}

PuzzleInstance make_puzzle(const Raster& image, GridShape grid, std::uint64_t seed, std::string source_id) {
  PuzzleInstance puzzle = shuffle(slice_image(image, grid), grid, seed, std::move(source_id));
  puzzle.source = std::make_shared<const Raster>(image);
  return puzzle;
}

Raster reassemble(const PuzzleInstance& puzzle, const Permutation& perm) {
  if (perm.size() != puzzle.size()) throw Error(Errc::SizeMismatch, "permutation length differs from piece count");
  if (perm.slots() != puzzle.grid.slots()) throw Error(Errc::SizeMismatch, "permutation slot count differs from grid");
  const int side = puzzle.piece_side();
  Raster canvas(puzzle.grid.rows * side, puzzle.grid.cols * side, puzzle.channels());
  for (int i = 0; i < puzzle.size(); ++i) {
    const Piece& piece = puzzle.pieces[static_cast<std::size_t>(i)];
    const int slot = perm[i];
    if (!piece.present || slot == Permutation::kUnassigned) continue;
    paste(canvas, piece.content, (slot / puzzle.grid.cols) * side, (slot % puzzle.grid.cols) * side);
  }
  return canvas;
}

int missing_count(double fraction, int n) {
  return static_cast<int>(std::floor(fraction * n + 0.5));
}

PuzzleInstance perturb_missing(const PuzzleInstance& puzzle, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction < 1.0)) throw Error(Errc::InvalidArgument, "missing fraction must be in [0,1)");
  PuzzleInstance out = puzzle;
  std::vector<int> candidates;
  for (int i = 0; i < puzzle.size(); ++i) {
    if (puzzle.pieces[static_cast<std::size_t>(i)].present) candidates.push_back(i);
  }
  const int k = std::min(missing_count(fraction, puzzle.size()), static_cast<int>(candidates.size()));
  Rng rng(seed);
  // Partial Fisher-Yates: the first k entries are a uniform k-subset.
  for (int i = 0; i < k; ++i) {
    const auto j = i + static_cast<int>(rng.below(candidates.size() - static_cast<std::size_t>(i)));
    std::swap(candidates[static_cast<std::size_t>(i)], candidates[static_cast<std::size_t>(j)]);
    Piece& piece = out.pieces[static_cast<std::size_t>(candidates[static_cast<std::size_t>(i)])];
    piece.present = false;
    std::fill(piece.content.data.begin(), piece.content.data.end(), 0.0f);
  }
  out.perturbations.push_back({"missing", fraction, seed});
  return out;
}

PuzzleInstance perturb_noise(const PuzzleInstance& puzzle, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw Error(Errc::InvalidArgument, "noise sigma must be non-negative");
  PuzzleInstance out = puzzle;
  out.perturbations.push_back({"noise", sigma, seed});
  if (sigma == 0.0) return out;
  Rng rng(seed);
  for (Piece& piece : out.pieces) {
    if (!piece.present) continue;
    for (float& v : piece.content.data) {
      v = static_cast<float>(std::clamp(static_cast<double>(v) + sigma * rng.normal(), 0.0, 1.0));
    }
  }
  return out;
}

PuzzleInstance perturb_erode(const PuzzleInstance& puzzle, int border_px) {
  const int side = puzzle.piece_side();
  if (border_px < 0 || 2 * border_px >= side) {
    throw Error(Errc::ErosionTooLarge, std::to_string(border_px) + " px border on " + std::to_string(side) + " px pieces");
  }
  PuzzleInstance out = puzzle;
  out.perturbations.push_back({"erode", static_cast<double>(border_px), 0});
  for (Piece& piece : out.pieces) {
    Raster& r = piece.content;
    for (int y = 0; y < r.height; ++y) {
      for (int x = 0; x < r.width; ++x) {
        const bool interior = y >= border_px && y < r.height - border_px && x >= border_px && x < r.width - border_px;
        if (interior) continue;
        for (int c = 0; c < r.channels; ++c) r.at(y, x, c) = 0.0f;
      }
    }
  }
  return out;
}

}  // namespace jigsaw
