#pragma once

#include <filesystem>
#include <vector>

#include "jigsaw/puzzle.hpp"

namespace jigsaw {

inline constexpr int kManifestSchema = 1;

// Writes <dir>/manifest.json plus one PNG per piece (piece_000.png, ...).
// Manifest fields: schema, source_id, rows, cols, seed, piece_side, channels,
// gt_permutation, present, perturbations[{kind,value,seed}], pieces[file names].
void save_puzzle(const std::filesystem::path& dir, const PuzzleInstance& puzzle);

// Accepts the puzzle directory or the manifest file itself.
PuzzleInstance load_puzzle(const std::filesystem::path& path);

// One permutation per line, space-separated slot indices; unassigned pieces are written as -1.
void write_permutations(const std::filesystem::path& path, const std::vector<Permutation>& perms);
std::vector<Permutation> read_permutations(const std::filesystem::path& path);

}  // namespace jigsaw
