#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "jigsaw/error.hpp"
#include "jigsaw/eval/harness.hpp"
#include "jigsaw/eval/metrics.hpp"
#include "jigsaw/eval/report.hpp"
#include "jigsaw/matcher/matcher.hpp"
#include "jigsaw/matcher/providers.hpp"
#include "jigsaw/matcher/embedding.hpp"
#include "jigsaw/puzzle.hpp"
#include "jigsaw/rng.hpp"
#include "jigsaw/synthetic.hpp"
#include "test_support.hpp"

using namespace jigsaw;
using namespace jigsaw::testing;
namespace fs = std::filesystem;

namespace {

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

Permutation random_permutation(int n, Rng& rng) {
  std::vector<int> p(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) p[static_cast<std::size_t>(i)] = i;
  for (int i = n - 1; i > 0; --i) std::swap(p[static_cast<std::size_t>(i)], p[rng.below(static_cast<std::uint64_t>(i) + 1)]);
  return Permutation(p);
}

std::vector<PuzzleInstance> puzzles(int count, int grid, std::uint64_t seed, int side = 8) {
  std::vector<PuzzleInstance> out;
  for (int i = 0; i < count; ++i) {
    const auto s = derive_seed(seed, std::to_string(i));
    char id[16];
    std::snprintf(id, sizeof id, "p%03d", i);
    out.push_back(make_puzzle(synthetic_image(grid * side, grid * side, s), {grid, grid}, s, id));
  }
  return out;
}

Solver identity_solver() {
  return {"identity", [](const PuzzleInstance& p) { return Permutation::identity(p.size()); }};
}

Solver oracle_solver() {
  return {"oracle", [](const PuzzleInstance& p) {
            return solve_puzzle(p, OracleProvider(0), RawPixelEmbedder{}, {0.005, {}});
          }};
}

}  // namespace

TEST_CASE("direct accuracy examples") {
  const Permutation gt({2, 0, 3, 1});
  CHECK(direct_accuracy(gt, gt) == 1.0);
  CHECK(direct_accuracy(Permutation({0, 2, 3, 1}), gt) == 0.5);
  CHECK(direct_accuracy(Permutation({3, 2, 1, 0}), Permutation::identity(4)) == 0.0);

  const std::vector<bool> present{true, false, true, true};
  CHECK(direct_accuracy(Permutation({2, Permutation::kUnassigned, 0, 1}, 4), gt, present) == doctest::Approx(2.0 / 3));
  CHECK(error_code_of([&] { direct_accuracy(Permutation::identity(3), gt); }) == Errc::SizeMismatch);
  CHECK(error_code_of([&] { direct_accuracy(gt, gt, std::vector<bool>(4, false)); }) == Errc::EmptyPresentSet);
}

TEST_CASE("neighbor accuracy examples") {
  const GridShape g{2, 2};
  const Permutation id = Permutation::identity(4);
  CHECK(neighbor_accuracy(id, id, g) == 1.0);
  CHECK(neighbor_accuracy(Permutation({1, 0, 3, 2}), id, g) == 0.5);
  CHECK(neighbor_accuracy(Permutation({3, 2, 1, 0}), id, g) == 0.0);

  const GridShape wide{2, 3};
  const Permutation gt6({4, 1, 5, 0, 3, 2});
  CHECK(neighbor_accuracy(gt6, gt6, wide) == 1.0);
  CHECK(error_code_of([&] { neighbor_accuracy(id, id, wide); }) == Errc::SizeMismatch);
}

TEST_CASE("metrics are invariant to a common slot relabeling and bounded") {
  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const int rows = 1 + static_cast<int>(rng.below(5)), cols = 1 + static_cast<int>(rng.below(5));
    const int n = rows * cols;
    const Permutation pred = random_permutation(n, rng), gt = random_permutation(n, rng);
    const Permutation sigma = random_permutation(n, rng);
    std::vector<int> sp(static_cast<std::size_t>(n)), sg(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      sp[static_cast<std::size_t>(i)] = sigma[pred[i]];
      sg[static_cast<std::size_t>(i)] = sigma[gt[i]];
    }
    const double d = direct_accuracy(pred, gt);
    CHECK(d == direct_accuracy(Permutation(sp), Permutation(sg)));
    CHECK(d >= 0);
    CHECK(d <= 1);
    if (n > 1) {
      const double nb = neighbor_accuracy(pred, gt, {rows, cols});
      CHECK(nb >= 0);
      CHECK(nb <= 1);
      CHECK(neighbor_accuracy(gt, gt, {rows, cols}) == 1.0);
    }
  }
}

TEST_CASE("regimes") {
  CHECK(Regime::parse("noise:0.05") == Regime{Regime::Kind::Noise, 0.05});
  CHECK(Regime::parse("erode:2").label() == "erode:2");
  CHECK(Regime::parse("clean").kind == Regime::Kind::Clean);
  CHECK(standard_regimes().size() == 9);
  CHECK(error_code_of([] { Regime::parse("blur:1"); }) == Errc::InvalidArgument);
  CHECK(perturbation_seed(1, "a", Regime::Kind::Noise) == perturbation_seed(1, "a", Regime::Kind::Noise));
  CHECK(perturbation_seed(1, "a", Regime::Kind::Noise) != perturbation_seed(1, "b", Regime::Kind::Noise));
}

TEST_CASE("robustness sweep") {
  const auto set = puzzles(6, 3, 2, 16);
  const Solver solver = oracle_solver();
  const EvalReport clean = robustness_sweep(set, solver, std::span<const Regime>{}, 7);
  REQUIRE(clean.records.size() == 6);
  for (const auto& r : clean.records) {
    CHECK(r.perturbation == "clean");
    CHECK(r.direct_accuracy == 1.0);
    CHECK(r.neighbor_accuracy == 1.0);
  }

  const auto regimes = standard_regimes();
  EvalReport a = robustness_sweep(set, solver, regimes, 7);
  EvalReport b = robustness_sweep(set, solver, regimes, 7, 3);
  CHECK(a.records.size() == 60);
  for (auto* r : {&a, &b}) {
    for (auto& rec : r->records) rec.time_ms = 0;
  }
  CHECK(a == b);
  for (std::size_t k = 1; k < a.records.size(); ++k) CHECK(a.records[k - 1].puzzle_id <= a.records[k].puzzle_id);
  for (const auto& rec : a.records) {
    if (rec.perturbation.rfind("missing", 0) == 0) CHECK_FALSE(rec.neighbor_accuracy.has_value());
  }
}

TEST_CASE("timing") {
  const auto set = puzzles(12, 2, 3);
  const TimingStats stub = time_solver(set, identity_solver(), 2);
  CHECK(stub.samples == 10);
  CHECK(stub.mean_ms < 1.0);
  CHECK(error_code_of([&] { time_solver(std::span(set).first(3), identity_solver(), 2); }) == Errc::TooFewSamples);

  const TimingStats t{25.16, 1.1, 24};
  CHECK(t.format() == "25.16 ± 1.10");

  const auto six = puzzles(26, 6, 4);
  const TimingStats first = time_solver(six, oracle_solver(), 2);
  const TimingStats second = time_solver(six, oracle_solver(), 2);
  const double combined = std::sqrt((first.std_ms * first.std_ms + second.std_ms * second.std_ms) / 24);
  MESSAGE("run 1 " << first.format() << " ms, run 2 " << second.format() << " ms");
  CHECK(std::abs(first.mean_ms - second.mean_ms) <= 3 * combined + 0.05 * first.mean_ms);
}

TEST_CASE("report emission") {
  const fs::path dir = fs::temp_directory_path() / "jigsaw_test_reports";
  fs::create_directories(dir);
  EvalReport empty{default_report_metadata(), {}};
  CHECK(report_to_csv(empty) == std::string(kCsvHeader) + "\n");

  const EvalReport report =
      robustness_sweep(puzzles(4, 2, 5), oracle_solver(), std::vector<Regime>{Regime::parse("missing:0.3")}, 1);
  const std::string csv = report_to_csv(report);
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  CHECK(line == kCsvHeader);
  int rows = 0, cells = 0;
  while (std::getline(lines, line)) {
    ++rows;
    cells += static_cast<int>(std::count(line.begin(), line.end(), ',')) + 1;
  }
  CHECK(rows == static_cast<int>(report.records.size()));
  CHECK(cells == rows * kCsvFields);

  emit_report(report, dir / "r.json", ReportFormat::Json);
  CHECK(read_report_json(dir / "r.json") == report);
  emit_report(report, dir / "r.csv", ReportFormat::Csv);
  std::ifstream in(dir / "r.csv");
  CHECK(std::string((std::istreambuf_iterator<char>(in)), {}) == csv);

  const auto cells_agg = aggregate(report);
  REQUIRE(cells_agg.size() == 2);
  CHECK(cells_agg[0].perturbation == "clean");
  CHECK(cells_agg[0].count == 4);
  CHECK(cells_agg[0].mean_direct == 1.0);
  CHECK(cells_agg[0].stderr_direct == 0.0);
  CHECK(report_to_json(report).find("\"2x2\"") != std::string::npos);
}
