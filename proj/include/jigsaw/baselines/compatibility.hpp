#pragma once

#include <Eigen/Core>
#include <array>
#include <span>
#include <vector>

#include "jigsaw/puzzle.hpp"

namespace jigsaw {

// Where the second piece sits relative to the first.
enum class Relation { Right = 0, Left = 1, Up = 2, Down = 3 };

inline constexpr std::array<Relation, 4> kRelations{Relation::Right, Relation::Left, Relation::Up, Relation::Down};

Relation opposite(Relation r);
const char* relation_name(Relation r);

// Sum of squared differences between a's edge facing b and b's adjoining
// edge, over all channels. Errors: SizeMismatch.
double boundary_dissimilarity(const Piece& a, const Piece& b, Relation relation);

// scores[r](i, j) = boundary_dissimilarity(piece i, piece j, r). Self pairs
// hold +inf so they never win a minimum. scores[Right](i, j) == scores[Left](j, i),
// and likewise for Up/Down.
struct CompatibilityTable {
  std::array<Eigen::MatrixXd, 4> scores;

  int size() const { return static_cast<int>(scores[0].rows()); }
  const Eigen::MatrixXd& operator[](Relation r) const { return scores[static_cast<std::size_t>(r)]; }
  Eigen::MatrixXd& operator[](Relation r) { return scores[static_cast<std::size_t>(r)]; }
};

CompatibilityTable build_compatibility(std::span<const Piece> pieces);

struct BestBuddy {
  int first = 0;
  int second = 0;
  Relation relation = Relation::Right;

  bool operator==(const BestBuddy&) const = default;
};

// (i, j, r) with j = argmin_k scores[r](i, k) and i = argmin_k scores[opposite(r)](j, k);
// argmin ties go to the lowest index. Ordered by relation, then i.
std::vector<BestBuddy> best_buddies(const CompatibilityTable& table);

}  // namespace jigsaw
