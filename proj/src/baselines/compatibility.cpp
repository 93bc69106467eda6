#include "jigsaw/baselines/compatibility.hpp"

#include <limits>

#include "jigsaw/error.hpp"

namespace jigsaw {

Relation opposite(Relation r) {
  switch (r) {
    case Relation::Right: return Relation::Left;
    case Relation::Left: return Relation::Right;
    case Relation::Up: return Relation::Down;
    case Relation::Down: return Relation::Up;
  }
  return r;
}

const char* relation_name(Relation r) {
  switch (r) {
    case Relation::Right: return "right";
    case Relation::Left: return "left";
    case Relation::Up: return "up";
    case Relation::Down: return "down";
  }
  return "?";
}

double boundary_dissimilarity(const Piece& a, const Piece& b, Relation relation) {
  const Raster& ra = a.content;
  const Raster& rb = b.content;
  if (!ra.same_shape(rb)) throw Error(Errc::SizeMismatch, "pieces differ in size");
  const int side = ra.height;
  double total = 0;
  for (int k = 0; k < side; ++k) {
    for (int c = 0; c < ra.channels; ++c) {
      double d = 0;
      switch (relation) {
        case Relation::Right: d = ra.at(k, side - 1, c) - rb.at(k, 0, c); break;
        case Relation::Left: d = ra.at(k, 0, c) - rb.at(k, side - 1, c); break;
        case Relation::Up: d = ra.at(0, k, c) - rb.at(side - 1, k, c); break;
        case Relation::Down: d = ra.at(side - 1, k, c) - rb.at(0, k, c); break;
      }
      total += d * d;
    }
  }
  return total;
}

CompatibilityTable build_compatibility(std::span<const Piece> pieces) {
  const auto n = static_cast<Eigen::Index>(pieces.size());
  CompatibilityTable table;
  for (auto& m : table.scores) m = Eigen::MatrixXd::Constant(n, n, std::numeric_limits<double>::infinity());
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      // Fill Right/Down directly and mirror them into Left/Up.
      const double right = boundary_dissimilarity(pieces[static_cast<std::size_t>(i)], pieces[static_cast<std::size_t>(j)], Relation::Right);
      const double down = boundary_dissimilarity(pieces[static_cast<std::size_t>(i)], pieces[static_cast<std::size_t>(j)], Relation::Down);
      table[Relation::Right](i, j) = right;
      table[Relation::Left](j, i) = right;
      table[Relation::Down](i, j) = down;
      table[Relation::Up](j, i) = down;
    }
  }
  return table;
}

namespace {

int argmin_row(const Eigen::MatrixXd& m, Eigen::Index row) {
  int best = -1;
  double best_value = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    if (m(row, j) < best_value) {
      best_value = m(row, j);
      best = static_cast<int>(j);
    }
  }
  return best;
}

}  // namespace

std::vector<BestBuddy> best_buddies(const CompatibilityTable& table) {
  std::vector<BestBuddy> out;
  const int n = table.size();
  for (Relation r : kRelations) {
    for (int i = 0; i < n; ++i) {
      const int j = argmin_row(table[r], i);
      if (j < 0) continue;
      if (argmin_row(table[opposite(r)], j) == i) out.push_back({i, j, r});
    }
  }
  return out;
}

}  // namespace jigsaw
