#include "jigsaw/eval/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "jigsaw/error.hpp"
#include "jigsaw/eval/metrics.hpp"
#include "jigsaw/rng.hpp"

namespace jigsaw {

namespace {

const char* kind_name(Regime::Kind kind) {
  switch (kind) {
    case Regime::Kind::Clean: return "clean";
    case Regime::Kind::Missing: return "missing";
    case Regime::Kind::Noise: return "noise";
    case Regime::Kind::Erode: return "erode";
  }
  return "?";
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

std::string Regime::label() const {
  if (kind == Kind::Clean) return "clean";
  std::ostringstream out;
  out << kind_name(kind) << ':' << value;
  return out.str();
}

Regime Regime::parse(const std::string& label) {
  if (label == "clean") return {};
  const auto colon = label.find(':');
  if (colon == std::string::npos) throw Error(Errc::InvalidArgument, "regime '" + label + "' needs kind:value");
  const std::string kind = label.substr(0, colon);
  double value = 0;
  try {
    std::size_t used = 0;
    value = std::stod(label.substr(colon + 1), &used);
    if (used != label.size() - colon - 1) throw std::invalid_argument(label);
  } catch (const std::logic_error&) {
    throw Error(Errc::InvalidArgument, "bad regime value in '" + label + "'");
  }
  if (kind == "missing") return {Kind::Missing, value};
  if (kind == "noise") return {Kind::Noise, value};
  if (kind == "erode") return {Kind::Erode, value};
  throw Error(Errc::InvalidArgument, "unknown regime kind '" + kind + "'");
}

std::vector<Regime> standard_regimes() {
  using K = Regime::Kind;
  return {{K::Missing, 0.1}, {K::Missing, 0.2}, {K::Missing, 0.3}, {K::Noise, 0.05}, {K::Noise, 0.1},
          {K::Noise, 0.2},   {K::Erode, 1},     {K::Erode, 2},     {K::Erode, 5}};
}

std::uint64_t perturbation_seed(std::uint64_t global_seed, const std::string& puzzle_id, Regime::Kind kind) {
  return derive_seed(global_seed, puzzle_id + "/" + kind_name(kind));
}

PuzzleInstance apply_regime(const PuzzleInstance& puzzle, const Regime& regime, std::uint64_t global_seed) {
  const std::uint64_t seed = perturbation_seed(global_seed, puzzle.source_id, regime.kind);
  switch (regime.kind) {
    case Regime::Kind::Clean: return puzzle;
    case Regime::Kind::Missing: return perturb_missing(puzzle, regime.value, seed);
    case Regime::Kind::Noise: return perturb_noise(puzzle, regime.value, seed);
    case Regime::Kind::Erode: return perturb_erode(puzzle, static_cast<int>(std::lround(regime.value)));
  }
  return puzzle;
}

EvalRecord evaluate(const PuzzleInstance& puzzle, const Solver& solver, const std::string& perturbation) {
  const auto start = std::chrono::steady_clock::now();
  const Permutation pred = solver.solve(puzzle);
  const double ms = elapsed_ms(start);
  EvalRecord record{puzzle.source_id, solver.tag, puzzle.grid.rows, puzzle.grid.cols, perturbation,
                    direct_accuracy(pred, puzzle.gt_permutation, puzzle.present_mask()), std::nullopt, ms};
  if (pred.is_bijection() && puzzle.present_count() == puzzle.size()) {
    record.neighbor_accuracy = neighbor_accuracy(pred, puzzle.gt_permutation, puzzle.grid);
  }
  return record;
}

EvalReport robustness_sweep(std::span<const PuzzleInstance> puzzles, const Solver& solver,
                            std::span<const Regime> regimes, std::uint64_t global_seed, int jobs) {
  std::vector<Regime> conditions{Regime{}};
  for (const Regime& r : regimes) {
    if (r.kind != Regime::Kind::Clean) conditions.push_back(r);
  }
  std::vector<std::vector<EvalRecord>> per_puzzle(puzzles.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t k = next++; k < puzzles.size(); k = next++) {
      try {
        for (const Regime& regime : conditions) {
          per_puzzle[k].push_back(evaluate(apply_regime(puzzles[k], regime, global_seed), solver, regime.label()));
        }
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int threads = std::max(1, std::min<int>(jobs, static_cast<int>(puzzles.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  EvalReport report{default_report_metadata(), {}};
  report.metadata["solver"] = solver.tag;
  report.metadata["global_seed"] = std::to_string(global_seed);
  for (auto& records : per_puzzle) {
    for (auto& r : records) report.records.push_back(std::move(r));
  }
  canonicalize(report);
  return report;
}

std::string TimingStats::format() const {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.2f \xC2\xB1 %.2f", mean_ms, std_ms);
  return buffer;
}

TimingStats time_solver(std::span<const PuzzleInstance> puzzles, const Solver& solver, int warmup) {
  warmup = std::max(0, warmup);
  if (puzzles.size() < static_cast<std::size_t>(warmup) + 2) {
    throw Error(Errc::TooFewSamples, "need at least two timed puzzles after warmup");
  }
  for (int k = 0; k < warmup; ++k) solver.solve(puzzles[static_cast<std::size_t>(k)]);
  std::vector<double> times;
  for (std::size_t k = static_cast<std::size_t>(warmup); k < puzzles.size(); ++k) {
    const auto start = std::chrono::steady_clock::now();
    const Permutation pred = solver.solve(puzzles[k]);
    times.push_back(elapsed_ms(start));
    if (pred.size() != puzzles[k].size()) throw Error(Errc::SizeMismatch, "solver returned a wrong-length result");
  }
  TimingStats stats;
  stats.samples = static_cast<int>(times.size());
  for (double t : times) stats.mean_ms += t;
  stats.mean_ms /= stats.samples;
  double var = 0;
  for (double t : times) var += (t - stats.mean_ms) * (t - stats.mean_ms);
  stats.std_ms = std::sqrt(var / (stats.samples - 1));
  return stats;
}

}  // namespace jigsaw
