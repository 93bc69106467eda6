#include <cmath>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "doctest.h"
#include "jigsaw/error.hpp"
#include "jigsaw/image_io.hpp"
#include "jigsaw/manifest.hpp"
#include "jigsaw/puzzle.hpp"
#include "jigsaw/rng.hpp"
#include "jigsaw/synthetic.hpp"
#include "test_support.hpp"

using namespace jigsaw;
using jigsaw::testing::random_raster;
namespace fs = std::filesystem;

namespace {

PuzzleInstance unshuffled(const Raster& image, GridShape grid) {
  PuzzleInstance p;
  p.pieces = slice_image(image, grid);
  p.grid = grid;
  p.gt_permutation = Permutation::identity(grid.slots());
  return p;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("jigsaw_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

template <typename F>
Errc error_code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected jigsaw::Error");
  return Errc::InvalidArgument;
}

}  // namespace

TEST_CASE("rng draws are bounded and reproducible") {
  Rng a(42), b(42);
  for (int k = 0; k < 1000; ++k) {
    const auto x = a.below(7);
    CHECK(x < 7);
    CHECK(x == b.below(7));
  }
  Rng c(1);
  for (int k = 0; k < 1000; ++k) {
    const double u = c.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  CHECK(derive_seed(1, "a") != derive_seed(1, "b"));
  CHECK(derive_seed(1, "a") != derive_seed(2, "a"));
  CHECK(derive_seed(9, "x") == derive_seed(9, "x"));
}

TEST_CASE("slice_image cuts row-major square tiles") {
  Rng rng(3);
  const Raster image = random_raster(64, 64, 3, rng);
  const auto pieces = slice_image(image, {2, 2});
  REQUIRE(pieces.size() == 4);
  for (const Piece& p : pieces) {
    CHECK(p.content.height == 32);
    CHECK(p.content.width == 32);
    CHECK(p.content.channels == 3);
  }

  const Raster big = random_raster(96, 96, 1, rng);
  const auto nine = slice_image(big, {3, 3});
  REQUIRE(nine.size() == 9);
  CHECK(nine[5].origin_index == 5);
  CHECK(nine[5].content == crop(big, 32, 64, 32, 32));

  CHECK(error_code_of([&] { slice_image(random_raster(65, 64, 1, rng), {2, 2}); }) == Errc::NonDivisibleGrid);
  CHECK(error_code_of([&] { slice_image(random_raster(64, 96, 1, rng), {2, 2}); }) == Errc::NonSquareTile);
}

TEST_CASE("slice then reassemble with identity is bit-exact") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const int grid = 1 + static_cast<int>(rng.below(6));
    const int side = 4 + static_cast<int>(rng.below(12));
    const Raster image = random_raster(grid * side, grid * side, trial % 2 ? 3 : 1, rng);
    CHECK(reassemble(unshuffled(image, {grid, grid}), Permutation::identity(grid * grid)) == image);
    // The same holds through a shuffle and its recorded ground truth.
    const PuzzleInstance shuffled = make_puzzle(image, {grid, grid}, rng.next(), "img");
    CHECK(reassemble(shuffled, shuffled.gt_permutation) == image);
  }
}

TEST_CASE("shuffle is a deterministic Fisher-Yates") {
  Rng rng(5);
  const Raster image = random_raster(128, 128, 3, rng);
  const auto pieces = slice_image(image, {4, 4});
  const PuzzleInstance a = shuffle(pieces, {4, 4}, 7);
  const PuzzleInstance b = shuffle(pieces, {4, 4}, 7);
  CHECK(a.gt_permutation == b.gt_permutation);
  for (int i = 0; i < 16; ++i) CHECK(a.pieces[static_cast<std::size_t>(i)] == b.pieces[static_cast<std::size_t>(i)]);

  // Frozen from tests/oracles/fisher_yates_reference.py 16 7 (independent mt19937_64).
  const std::vector<int> expected{6, 2, 5, 3, 14, 12, 15, 13, 11, 9, 10, 1, 4, 8, 0, 7};
  CHECK(a.gt_permutation.mapping() == expected);
  for (int i = 0; i < 16; ++i) CHECK(a.pieces[static_cast<std::size_t>(i)].origin_index == expected[static_cast<std::size_t>(i)]);

  const auto single = slice_image(random_raster(8, 8, 1, rng), {1, 1});
  CHECK(shuffle(single, {1, 1}, 123).gt_permutation.mapping() == std::vector<int>{0});
}

TEST_CASE("reassemble pastes pieces into their assigned slots") {
  Rng rng(8);
  const Raster image = random_raster(16, 16, 3, rng);
  const PuzzleInstance puzzle = unshuffled(image, {2, 2});

  SUBCASE("reversed permutation rotates tiles by 180 degrees") {
    const Raster out = reassemble(puzzle, Permutation({3, 2, 1, 0}));
    for (int slot = 0; slot < 4; ++slot) {
      const int src = 3 - slot;
      CHECK(crop(out, (slot / 2) * 8, (slot % 2) * 8, 8, 8) == crop(image, (src / 2) * 8, (src % 2) * 8, 8, 8));
    }
  }
  SUBCASE("a missing piece leaves its slot black") {
    PuzzleInstance holed = puzzle;
    holed.pieces[2].present = false;
    const Raster out = reassemble(holed, Permutation::identity(4));
    const Raster slot = crop(out, 8, 0, 8, 8);
    CHECK(std::all_of(slot.data.begin(), slot.data.end(), [](float v) { return v == 0.0f; }));
    CHECK(crop(out, 0, 0, 8, 8) == crop(image, 0, 0, 8, 8));
  }
  SUBCASE("two pieces into one slot is a collision") {
    CHECK(error_code_of([&] { reassemble(puzzle, Permutation({0, 0, 1, 2})); }) == Errc::SlotCollision);
  }
}

TEST_CASE("perturb_missing removes round(fraction * n) pieces") {
  Rng rng(2);
  const PuzzleInstance puzzle = make_puzzle(random_raster(36, 36, 3, rng), {6, 6}, 1, "p");
  const PuzzleInstance same = perturb_missing(puzzle, 0.0, 9);
  CHECK(same.present_count() == 36);
  for (int i = 0; i < 36; ++i) CHECK(same.pieces[static_cast<std::size_t>(i)] == puzzle.pieces[static_cast<std::size_t>(i)]);

  CHECK(missing_count(0.10, 36) == 4);
  CHECK(missing_count(0.30, 36) == 11);
  CHECK(missing_count(0.125, 4) == 1);  // exact half rounds up
  const PuzzleInstance ten = perturb_missing(puzzle, 0.10, 9);
  CHECK(ten.present_count() == 32);
  const PuzzleInstance thirty = perturb_missing(puzzle, 0.30, 9);
  CHECK(thirty.present_count() == 25);
  CHECK(perturb_missing(puzzle, 0.30, 9).present_mask() == thirty.present_mask());
  for (const Piece& p : thirty.pieces) {
    if (!p.present) CHECK(std::all_of(p.content.data.begin(), p.content.data.end(), [](float v) { return v == 0.0f; }));
  }
  CHECK(error_code_of([&] { perturb_missing(puzzle, 1.0, 1); }) == Errc::InvalidArgument);
}

TEST_CASE("perturb_noise is deterministic, clamped and has the expected energy") {
  Rng rng(4);
  const PuzzleInstance puzzle = make_puzzle(random_raster(64, 64, 3, rng), {2, 2}, 3, "n");
  const PuzzleInstance zero = perturb_noise(puzzle, 0.0, 5);
  for (int i = 0; i < 4; ++i) CHECK(zero.pieces[static_cast<std::size_t>(i)].content == puzzle.pieces[static_cast<std::size_t>(i)].content);

  const PuzzleInstance a = perturb_noise(puzzle, 0.1, 77);
  const PuzzleInstance b = perturb_noise(puzzle, 0.1, 77);
  for (int i = 0; i < 4; ++i) CHECK(a.pieces[static_cast<std::size_t>(i)].content == b.pieces[static_cast<std::size_t>(i)].content);

  const double sigma = 0.2;
  const PuzzleInstance noisy = perturb_noise(puzzle, sigma, 31);
  double measured = 0, expected = 0;
  std::size_t count = 0;
  // Oracle: E[(clamp(v + sigma z) - v)^2] by Simpson quadrature over z in [-8, 8].
  auto expected_sq = [&](double v) {
    const int steps = 800;
    const double lo = -8, hi = 8, h = (hi - lo) / steps;
    double acc = 0;
    for (int k = 0; k <= steps; ++k) {
      const double z = lo + k * h;
      const double d = std::clamp(v + sigma * z, 0.0, 1.0) - v;
      const double w = (k == 0 || k == steps) ? 1 : (k % 2 ? 4 : 2);
      acc += w * d * d * std::exp(-0.5 * z * z) / std::sqrt(2 * std::numbers::pi);
    }
    return acc * h / 3;
  };
  for (int i = 0; i < 4; ++i) {
    const auto& before = puzzle.pieces[static_cast<std::size_t>(i)].content.data;
    const auto& after = noisy.pieces[static_cast<std::size_t>(i)].content.data;
    for (std::size_t k = 0; k < before.size(); ++k) {
      CHECK_UNARY(after[k] >= 0.0f && after[k] <= 1.0f);
      measured += (after[k] - before[k]) * (after[k] - before[k]);
      expected += expected_sq(before[k]);
      ++count;
    }
  }
  measured /= count;
  expected /= count;
  CHECK(expected < sigma * sigma);  // clamping removes energy
  CHECK(std::abs(measured - expected) < 0.2 * expected);
}

TEST_CASE("perturb_erode zeroes the outer ring") {
  Raster bright(32, 32, 3, 0.5f);
  const PuzzleInstance puzzle = shuffle(slice_image(bright, {1, 1}), {1, 1}, 0);
  CHECK(perturb_erode(puzzle, 0).pieces[0].content == puzzle.pieces[0].content);

  const Raster one = perturb_erode(puzzle, 1).pieces[0].content;
  int zeroed = 0;
  for (int y = 0; y < 32; ++y) {
    for (int x = 0; x < 32; ++x) zeroed += one.at(y, x, 0) == 0.0f;
  }
  CHECK(zeroed == 124);

  const Raster five = perturb_erode(puzzle, 5).pieces[0].content;
  CHECK(crop(five, 5, 5, 22, 22) == crop(bright, 5, 5, 22, 22));
  CHECK(five.at(4, 16, 1) == 0.0f);
  CHECK(error_code_of([&] { perturb_erode(puzzle, 16); }) == Errc::ErosionTooLarge);
}

TEST_CASE("images round-trip through png and ascii ppm") {
  const fs::path dir = scratch_dir("image_io");
  Raster image = synthetic_image(24, 40, 17);
  write_image(dir / "a.png", image);
  CHECK(read_image(dir / "a.png") == image);
  write_image(dir / "a.ppm", image);
  CHECK(read_image(dir / "a.ppm") == image);

  Raster gray(5, 7, 1);
  for (std::size_t k = 0; k < gray.data.size(); ++k) gray.data[k] = static_cast<float>(k % 256) / 255.0f;
  write_image(dir / "g.pgm", gray);
  CHECK(read_image(dir / "g.pgm") == gray);

  std::ofstream(dir / "bad.png") << "not a png";
  CHECK(error_code_of([&] { read_image(dir / "bad.png"); }) == Errc::DecodeError);
}

TEST_CASE("puzzle manifests and permutation files round-trip") {
  const fs::path dir = scratch_dir("manifest");
  const PuzzleInstance puzzle = make_puzzle(synthetic_image(64, 64, 3), {2, 2}, 99, "img_0003");
  const PuzzleInstance holed = perturb_missing(puzzle, 0.25, 4);
  save_puzzle(dir / "p", holed);
  const PuzzleInstance loaded = load_puzzle(dir / "p");
  CHECK(loaded.source_id == "img_0003");
  CHECK((loaded.grid == GridShape{2, 2}));
  CHECK(loaded.seed == 99);
  CHECK(loaded.gt_permutation == puzzle.gt_permutation);
  CHECK(loaded.present_mask() == holed.present_mask());
  CHECK(loaded.perturbations == holed.perturbations);
  for (int i = 0; i < 4; ++i) CHECK(loaded.pieces[static_cast<std::size_t>(i)].content == holed.pieces[static_cast<std::size_t>(i)].content);

  const std::vector<Permutation> perms{Permutation({2, 0, 1}), Permutation({1, Permutation::kUnassigned, 0}, 3)};
  write_permutations(dir / "perm.txt", perms);
  const auto back = read_permutations(dir / "perm.txt");
  REQUIRE(back.size() == 2);
  CHECK(back[0] == perms[0]);
  CHECK(back[1].mapping() == perms[1].mapping());
}
