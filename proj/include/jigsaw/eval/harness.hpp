#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "jigsaw/eval/report.hpp"
#include "jigsaw/puzzle.hpp"

namespace jigsaw {

struct Solver {
  std::string tag;
  std::function<Permutation(const PuzzleInstance&)> solve;
};

struct Regime {
  enum class Kind { Clean, Missing, Noise, Erode };
  Kind kind = Kind::Clean;
  double value = 0;

  // "clean", "missing:0.1", "noise:0.05", "erode:2"
  std::string label() const;
  static Regime parse(const std::string& label);
  bool operator==(const Regime&) const = default;
};

// Missing {10,20,30}%, noise sigma {0.05,0.1,0.2}, erosion {1,2,5} px.
std::vector<Regime> standard_regimes();

// Perturbation seed for one puzzle under one regime kind. The level is left out
// so every level of a sweep reuses the same random draws.
std::uint64_t perturbation_seed(std::uint64_t global_seed, const std::string& puzzle_id, Regime::Kind kind);

PuzzleInstance apply_regime(const PuzzleInstance& puzzle, const Regime& regime, std::uint64_t global_seed);

// Solves and scores one puzzle; `perturbation` is copied into the record.
EvalRecord evaluate(const PuzzleInstance& puzzle, const Solver& solver, const std::string& perturbation);

// Clean condition plus every regime, for every puzzle. `jobs` > 1 solves
// puzzles on worker threads; records come back sorted by puzzle id, then in
// regime order.
EvalReport robustness_sweep(std::span<const PuzzleInstance> puzzles, const Solver& solver,
                            std::span<const Regime> regimes, std::uint64_t global_seed, int jobs = 1);

struct TimingStats {
  double mean_ms = 0;
  double std_ms = 0;  // sample standard deviation
  int samples = 0;

  // "25.16 ± 1.10"
  std::string format() const;
};

// Wall-clock per solve over puzzles[warmup..], after solving the first `warmup`
// puzzles untimed. Runs serially. Errors: TooFewSamples.
TimingStats time_solver(std::span<const PuzzleInstance> puzzles, const Solver& solver, int warmup);

}  // namespace jigsaw
