#include "jigsaw/baselines/greedy.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <vector>

#include "jigsaw/error.hpp"

namespace jigsaw {

namespace {

struct Cell {
  int y = 0;
  int x = 0;
  auto operator<=>(const Cell&) const = default;
};

struct Neighbour {
  int dy, dx;
  Relation relation;  // relation of the candidate as seen from the placed neighbour
};

// A placed piece at (y + dy, x + dx) sees the candidate at (y, x) in `relation`.
constexpr std::array<Neighbour, 4> kNeighbours{{
    {0, -1, Relation::Right},  // neighbour on the left: candidate is to its right
    {0, 1, Relation::Left},
    {-1, 0, Relation::Down},   // neighbour above
    {1, 0, Relation::Up},
}};

}  // namespace

Permutation greedy_place(std::span<const Piece> pieces, const CompatibilityTable& table, GridShape grid,
                         int seed_piece) {
  const int n = static_cast<int>(pieces.size());
  if (n != grid.slots() || table.size() != n) throw Error(Errc::SizeMismatch, "pieces, table and grid disagree");
  if (std::any_of(pieces.begin(), pieces.end(), [](const Piece& p) { return !p.present; })) {
    throw Error(Errc::MissingPieces, "greedy placement needs every piece");
  }
  if (seed_piece < 0 || seed_piece >= n) throw Error(Errc::InvalidArgument, "seed piece out of range");

  std::map<Cell, int> placed;
  std::vector<char> used(static_cast<std::size_t>(n), 0);
  placed[{0, 0}] = seed_piece;
  used[static_cast<std::size_t>(seed_piece)] = 1;
  int min_y = 0, max_y = 0, min_x = 0, max_x = 0;

  for (int step = 1; step < n; ++step) {
    std::vector<Cell> frontier;
    for (const auto& [cell, piece] : placed) {
      for (const Neighbour& nb : kNeighbours) {
        const Cell candidate{cell.y - nb.dy, cell.x - nb.dx};
        if (placed.count(candidate)) continue;
        const int h = std::max(max_y, candidate.y) - std::min(min_y, candidate.y) + 1;
        const int w = std::max(max_x, candidate.x) - std::min(min_x, candidate.x) + 1;
        if (h > grid.rows || w > grid.cols) continue;
        frontier.push_back(candidate);
      }
    }
    std::sort(frontier.begin(), frontier.end());
    frontier.erase(std::unique(frontier.begin(), frontier.end()), frontier.end());

    double best_score = std::numeric_limits<double>::infinity();
    int best_piece = -1;
    Cell best_cell{};
    for (int p = 0; p < n; ++p) {
      if (used[static_cast<std::size_t>(p)]) continue;
      for (const Cell& cell : frontier) {
        double total = 0;
        int count = 0;
        for (const Neighbour& nb : kNeighbours) {
          const auto it = placed.find({cell.y + nb.dy, cell.x + nb.dx});
          if (it == placed.end()) continue;
          total += table[nb.relation](it->second, p);
          ++count;
        }
        const double score = total / count;
        if (score < best_score || best_piece < 0) {
          best_score = score;
          best_piece = p;
          best_cell = cell;
        }
      }
    }
    placed[best_cell] = best_piece;
    used[static_cast<std::size_t>(best_piece)] = 1;
    min_y = std::min(min_y, best_cell.y);
    max_y = std::max(max_y, best_cell.y);
    min_x = std::min(min_x, best_cell.x);
    max_x = std::max(max_x, best_cell.x);
  }

  std::vector<int> mapping(static_cast<std::size_t>(n), Permutation::kUnassigned);
  for (const auto& [cell, piece] : placed) {
    mapping[static_cast<std::size_t>(piece)] = (cell.y - min_y) * grid.cols + (cell.x - min_x);
  }
  return Permutation(std::move(mapping));
}

int choose_seed_piece(const CompatibilityTable& table) {
  std::vector<int> counts(static_cast<std::size_t>(table.size()), 0);
  for (const BestBuddy& bb : best_buddies(table)) ++counts[static_cast<std::size_t>(bb.first)];
  return counts.empty() ? 0 : static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

Permutation solve_greedy(const PuzzleInstance& puzzle) {
  const CompatibilityTable table = build_compatibility(puzzle.pieces);
  return greedy_place(puzzle.pieces, table, puzzle.grid, choose_seed_piece(table));
}

}  // namespace jigsaw
