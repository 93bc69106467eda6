#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "jigsaw/raster.hpp"

namespace jigsaw {

struct GridShape {
  int rows = 0;
  int cols = 0;

  int slots() const { return rows * cols; }
  bool operator==(const GridShape&) const = default;
};

struct Piece {
  Raster content;
  std::optional<int> origin_index;
  bool present = true;

  int side() const { return content.height; }
  bool operator==(const Piece&) const = default;
};

// Piece index -> slot index. Unassigned pieces (missing ones) hold kUnassigned.
// Assigned entries are always distinct and inside [0, slots); the constructor
// enforces this and throws SlotCollision on a repeated slot.
class Permutation {
 public:
  static constexpr int kUnassigned = -1;

  Permutation() = default;
  explicit Permutation(std::vector<int> mapping, std::optional<int> slots = std::nullopt);

  static Permutation identity(int n);

  int size() const { return static_cast<int>(mapping_.size()); }
  int slots() const { return slots_; }
  int operator[](int piece) const { return mapping_[static_cast<std::size_t>(piece)]; }
  const std::vector<int>& mapping() const { return mapping_; }

  bool is_bijection() const;
  // slot -> piece; slots with no piece hold kUnassigned.
  std::vector<int> inverse() const;

  bool operator==(const Permutation&) const = default;

 private:
  std::vector<int> mapping_;
  int slots_ = 0;
};

struct Perturbation {
  std::string kind;  // "missing", "noise" or "erode"
  double value = 0.0;
  std::uint64_t seed = 0;

  bool operator==(const Perturbation&) const = default;
};

struct PuzzleInstance {
  std::vector<Piece> pieces;  // shuffled order
  GridShape grid;
  Permutation gt_permutation;
  std::uint64_t seed = 0;
  std::string source_id;
  std::vector<Perturbation> perturbations;
  // Unperturbed source image, kept in memory only; absent for loaded puzzles.
  std::shared_ptr<const Raster> source;

  int size() const { return static_cast<int>(pieces.size()); }
  int piece_side() const { return pieces.empty() ? 0 : pieces.front().side(); }
  int channels() const { return pieces.empty() ? 0 : pieces.front().content.channels; }
  std::vector<bool> present_mask() const;
  int present_count() const;
};

// Row-major tiles in ground-truth order. Errors: NonDivisibleGrid, NonSquareTile.
std::vector<Piece> slice_image(const Raster& image, GridShape grid);

// Deterministic descending Fisher-Yates over `pieces` driven by Rng(seed).
// Position k of the result holds original piece order[k]; gt_permutation[k] = order[k].
PuzzleInstance shuffle(std::span<const Piece> pieces, GridShape grid, std::uint64_t seed,
                       std::string source_id = {});

// slice_image + shuffle, with the source attached.
PuzzleInstance make_puzzle(const Raster& image, GridShape grid, std::uint64_t seed, std::string source_id);

// Pastes piece i into slot perm[i]; empty slots are black.
Raster reassemble(const PuzzleInstance& puzzle, const Permutation& perm);

PuzzleInstance perturb_missing(const PuzzleInstance& puzzle, double fraction, std::uint64_t seed);
PuzzleInstance perturb_noise(const PuzzleInstance& puzzle, double sigma, std::uint64_t seed);
PuzzleInstance perturb_erode(const PuzzleInstance& puzzle, int border_px);

// round(fraction * n), halves rounding up.
int missing_count(double fraction, int n);

}  // namespace jigsaw
