#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "jigsaw/baselines/greedy.hpp"
#include "jigsaw/baselines/hung_perm.hpp"
#include "jigsaw/error.hpp"
#include "jigsaw/eval/harness.hpp"
#include "jigsaw/eval/metrics.hpp"
#include "jigsaw/eval/report.hpp"
#include "jigsaw/image_io.hpp"
#include "jigsaw/log.hpp"
#include "jigsaw/manifest.hpp"
#include "jigsaw/matcher/embedding.hpp"
#include "jigsaw/matcher/matcher.hpp"
#include "jigsaw/matcher/providers.hpp"
#include "jigsaw/matcher/training.hpp"
#include "jigsaw/puzzle.hpp"
#include "jigsaw/rng.hpp"
#include "jigsaw/synthetic.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace jigsaw;

namespace {

GridShape parse_grid(const std::string& text) {
  const auto x = text.find('x');
  try {
    if (x == std::string::npos) {
      const int g = std::stoi(text);
      if (g > 0) return {g, g};
    } else {
      const GridShape g{std::stoi(text.substr(0, x)), std::stoi(text.substr(x + 1))};
      if (g.rows > 0 && g.cols > 0) return g;
    }
  } catch (const std::exception&) {
  }
  throw Error(Errc::InvalidArgument, "bad grid size '" + text + "'");
}

std::string grid_label(GridShape g) { return std::to_string(g.rows) + "x" + std::to_string(g.cols); }

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

void write_lines(const fs::path& path, const std::vector<std::string>& lines) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  for (const auto& l : lines) out << l << '\n';
}

// ---- generate

Raster fit_to_grid(const Raster& image, GridShape grid) {
  const int tile = std::min(image.height / grid.rows, image.width / grid.cols);
  return crop(image, (image.height - tile * grid.rows) / 2, (image.width - tile * grid.cols) / 2, tile * grid.rows,
              tile * grid.cols);
}

struct GenerateArgs {
  std::string input_dir;
  int synthetic = 0;
  int image_size = 120;
  std::string sizes = "2,4,6,8,10,12";
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_generate(const GenerateArgs& a) {
  if (a.input_dir.empty() == (a.synthetic == 0)) {
    throw Error(Errc::InvalidArgument, "give exactly one of --input-dir and --synthetic");
  }
  std::vector<GridShape> grids;
  for (const std::string& size_text : split_list(a.sizes)) grids.push_back(parse_grid(size_text));
  const fs::path out(a.out);
  fs::create_directories(out);

  std::vector<std::pair<std::string, Raster>> images;
  if (a.synthetic > 0) {
    fs::create_directories(out / "images");
    for (int i = 0; i < a.synthetic; ++i) {
      char id[32];
      std::snprintf(id, sizeof id, "syn_%05d", i);
      // Redraw until every requested grid cuts the image into pairwise distinct pieces.
      Raster r;
      for (int attempt = 0;; ++attempt) {
        r = synthetic_image(a.image_size, a.image_size,
                            derive_seed(a.seed, "image/" + std::string(id) + "/" + std::to_string(attempt)));
        if (std::all_of(grids.begin(), grids.end(),
                        [&](GridShape g) { return pieces_pairwise_distinct(slice_image(fit_to_grid(r, g), g)); })) {
          break;
        }
        if (attempt == 99) throw Error(Errc::Degenerate, std::string("cannot draw distinct pieces for ") + id);
      }
      write_image(out / "images" / (std::string(id) + ".png"), r);
      images.emplace_back(id, std::move(r));
    }
  } else {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(a.input_dir)) {
      if (entry.is_regular_file() && is_image_file(entry.path())) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      try {
        Raster r = read_image(f);
        images.emplace_back(f.stem().string(), std::move(r));
      } catch (const Error& e) {
        spdlog::warn("skipping {}: {}", f.string(), e.what());
      }
    }
    if (images.empty()) throw Error(Errc::NoImagesFound, "no decodable images in " + a.input_dir);
  }
  std::sort(images.begin(), images.end(), [](const auto& l, const auto& r) { return l.first < r.first; });

  std::vector<std::string> ids;
  for (const auto& [id, _] : images) ids.push_back(id);
  std::vector<std::string> order = ids;
  Rng split_rng(derive_seed(a.seed, "split"));
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[split_rng.below(i)]);
  const auto train_count = static_cast<std::size_t>(0.8 * static_cast<double>(order.size()) + 0.5);
  std::vector<std::string> train(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(train_count));
  std::vector<std::string> test(order.begin() + static_cast<std::ptrdiff_t>(train_count), order.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  {
    std::ofstream split(out / "split.json");
    split << json{{"seed", a.seed}, {"train", train}, {"test", test}}.dump(2) << '\n';
  }

  int manifests = 0;
  for (const GridShape grid : grids) {
    const fs::path dir = out / grid_label(grid);
    fs::create_directories(dir);
    std::map<std::string, Permutation> gt;
    for (const auto& [id, image] : images) {
      const PuzzleInstance p =
          make_puzzle(fit_to_grid(image, grid), grid, derive_seed(a.seed, id + "/" + grid_label(grid)), id);
      save_puzzle(dir / id, p);
      gt.emplace(id, p.gt_permutation);
      ++manifests;
    }
    for (const auto& [name, list] :
         {std::pair{"all", ids}, std::pair{"train", train}, std::pair{"test", test}}) {
      write_lines(dir / (std::string(name) + ".txt"), list);
      std::vector<Permutation> perms;
      for (const auto& id : list) perms.push_back(gt.at(id));
      write_permutations(dir / ("permutations_" + std::string(name) + ".txt"), perms);
    }
  }
  std::cout << "generated " << manifests << " puzzles from " << images.size() << " images (" << train.size()
            << " train / " << test.size() << " test) in " << out.string() << '\n';
  return 0;
}

// ---- puzzle sets

struct PuzzleSet {
  std::vector<PuzzleInstance> puzzles;
  fs::path size_dir;  // empty for a single puzzle
};

// A puzzle directory, or a generated size directory filtered by split.
PuzzleSet load_puzzle_set(const fs::path& path, const std::string& split) {
  if (fs::exists(path / "manifest.json") || path.filename() == "manifest.json") return {{load_puzzle(path)}, {}};
  const fs::path list = path / (split + ".txt");
  if (!fs::exists(list)) throw Error(Errc::IoError, "no puzzle manifest or " + list.string());
  PuzzleSet set{{}, path};
  for (const auto& id : read_lines(list)) set.puzzles.push_back(load_puzzle(path / id));
  if (set.puzzles.empty()) throw Error(Errc::EmptyDataset, list.string() + " lists no puzzles");
  return set;
}

// Training-split puzzles for the mean provider; empty for other providers.
std::vector<PuzzleInstance> mean_source(const PuzzleSet& set, const std::string& provider) {
  if (provider != "mean") return {};
  if (!set.size_dir.empty() && fs::exists(set.size_dir / "train.txt")) {
    std::vector<PuzzleInstance> train;
    for (const auto& id : read_lines(set.size_dir / "train.txt")) train.push_back(load_puzzle(set.size_dir / id));
    if (!train.empty()) return train;
  }
  return set.puzzles;
}

struct SolverArgs {
  std::string provider = "oracle";
  std::string weights;
  std::string hung_perm_weights;
  double tau = 0.1;
  int sinkhorn_iters = 100;
};

Solver make_solver(const std::string& tag, const SolverArgs& a, std::span<const PuzzleInstance> mean_from) {
  const SinkhornOptions sinkhorn{a.sinkhorn_iters, 1e-6};
  if (tag == "greedy") return {tag, [](const PuzzleInstance& p) { return solve_greedy(p); }};
  if (tag == "hung-perm") {
    const std::string path = a.hung_perm_weights.empty() ? a.weights : a.hung_perm_weights;
    if (path.empty()) throw Error(Errc::InvalidArgument, "hung-perm needs --weights");
    auto model = std::make_shared<const HungPermModel>(load_hung_perm(path));
    return {tag, [model, sinkhorn](const PuzzleInstance& p) { return solve_hung_perm(p, *model, sinkhorn); }};
  }
  if (tag == "matcher") {
    std::shared_ptr<const MentalImageProvider> provider = make_provider(a.provider, mean_from);
    const SolveOptions opts{a.tau, sinkhorn};
    if (a.weights.empty()) {
      spdlog::info("matcher without --weights: using raw-pixel embeddings");
      return {tag, [provider, opts](const PuzzleInstance& p) {
                return solve_puzzle(p, *provider, RawPixelEmbedder{}, opts);
              }};
    }
    auto weights = std::make_shared<const EmbeddingNetWeights>(load_weights(a.weights));
    return {tag, [provider, weights, opts](const PuzzleInstance& p) {
              return solve_puzzle(p, *provider, LearnedEmbedder(*weights), opts);
            }};
  }
  throw Error(Errc::InvalidArgument, "unknown solver '" + tag + "'");
}

void add_solver_options(CLI::App* cmd, SolverArgs& a) {
  cmd->add_option("--provider", a.provider, "oracle[:blur] | mean | external:<path>");
  cmd->add_option("--weights", a.weights, "matcher (GZW1) or hung-perm (GZP1) weights");
  cmd->add_option("--tau", a.tau, "temperature on the cost matrix");
  cmd->add_option("--sinkhorn-iters", a.sinkhorn_iters, "Sinkhorn iteration cap");
}

// ---- train

struct TrainArgs {
  std::string data;
  std::string sizes;
  std::string model = "matcher";
  std::string provider = "oracle";
  std::string out;
  TrainConfig config;
};

int cmd_train(const TrainArgs& a) {
  const fs::path root(a.data);
  std::vector<fs::path> size_dirs;
  if (a.sizes.empty()) {
    for (const auto& entry : fs::directory_iterator(root)) {
      if (entry.is_directory() && fs::exists(entry.path() / "train.txt")) size_dirs.push_back(entry.path());
    }
    std::sort(size_dirs.begin(), size_dirs.end());
  } else {
    for (const auto& s : split_list(a.sizes)) size_dirs.push_back(root / grid_label(parse_grid(s)));
  }
  std::vector<PuzzleInstance> dataset;
  for (const auto& dir : size_dirs) {
    for (auto& p : load_puzzle_set(dir, "train").puzzles) dataset.push_back(std::move(p));
  }
  if (dataset.empty()) throw Error(Errc::EmptyDataset, "no training puzzles under " + a.data);
  spdlog::info("training {} on {} puzzles", a.model, dataset.size());
  auto log_epoch = [&](int epoch, double loss) { spdlog::info("epoch {}/{} loss {:.6f}", epoch + 1, a.config.epochs, loss); };

  if (a.model == "matcher") {
    const auto provider = make_provider(a.provider, dataset);
    const TrainResult result = train_matcher(dataset, *provider, a.config, log_epoch);
    save_weights(a.out, result.weights);
  } else if (a.model == "hung-perm") {
    const HungPermTrainResult result = train_hung_perm(dataset, a.config, log_epoch);
    save_hung_perm(a.out, result.model);
  } else {
    throw Error(Errc::InvalidArgument, "unknown model '" + a.model + "'");
  }
  std::cout << "wrote " << a.out << '\n';
  return 0;
}

// ---- solve

struct SolveArgs {
  std::string puzzle;
  std::string solver = "matcher";
  std::string split = "test";
  std::string out;
  std::string png;
  SolverArgs solver_args;
};

int cmd_solve(const SolveArgs& a) {
  const PuzzleSet set = load_puzzle_set(a.puzzle, a.split);
  const auto mean_from = mean_source(set, a.solver_args.provider);
  const Solver solver = make_solver(a.solver, a.solver_args, mean_from);
  std::vector<Permutation> predictions;
  for (const auto& p : set.puzzles) predictions.push_back(solver.solve(p));
  write_permutations(a.out, predictions);
  if (!a.png.empty()) {
    if (set.size_dir.empty()) {
      write_image(a.png, reassemble(set.puzzles.front(), predictions.front()));
    } else {
      fs::create_directories(a.png);
      for (std::size_t k = 0; k < predictions.size(); ++k) {
        write_image(fs::path(a.png) / (set.puzzles[k].source_id + ".png"), reassemble(set.puzzles[k], predictions[k]));
      }
    }
  }
  std::cout << "solved " << predictions.size() << " puzzle(s) with " << a.solver << " -> " << a.out << '\n';
  return 0;
}

// ---- eval

struct EvalArgs {
  std::vector<std::string> pred;
  std::vector<std::string> gt;
  std::string metrics = "direct,neighbor";
  std::string grid;
  std::string solver_tag = "pred";
  std::string puzzles;
  std::string solver;
  std::string split = "test";
  std::string regimes = "standard";
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string out;
  SolverArgs solver_args;
};

GridShape infer_grid(int n) {
  for (int g = 1; g * g <= n; ++g) {
    if (g * g == n) return {g, g};
  }
  throw Error(Errc::InvalidArgument, "cannot infer a square grid for " + std::to_string(n) + " pieces; pass --grid");
}

void print_summary(const EvalReport& report) {
  for (const auto& cell : aggregate(report)) {
    std::printf("%-10s %5s %-12s n=%-4d direct %.4f ± %.4f", cell.solver.c_str(),
                grid_label({cell.rows, cell.cols}).c_str(), cell.perturbation.c_str(), cell.count, cell.mean_direct,
                cell.stderr_direct);
    if (cell.mean_neighbor) std::printf("  neighbor %.4f ± %.4f", *cell.mean_neighbor, *cell.stderr_neighbor);
    std::printf("\n");
  }
}

void write_report(const EvalReport& report, const std::string& out) {
  if (out.empty()) return;
  const bool csv = fs::path(out).extension() == ".csv";
  emit_report(report, out, csv ? ReportFormat::Csv : ReportFormat::Json);
}

int cmd_eval(const EvalArgs& a) {
  EvalReport report{default_report_metadata(), {}};
  if (!a.puzzles.empty()) {
    const PuzzleSet set = load_puzzle_set(a.puzzles, a.split);
    const auto mean_from = mean_source(set, a.solver_args.provider);
    const Solver solver = make_solver(a.solver, a.solver_args, mean_from);
    std::vector<Regime> regimes;
    if (a.regimes == "standard") {
      regimes = standard_regimes();
    } else {
      for (const auto& r : split_list(a.regimes)) {
        if (r != "clean") regimes.push_back(Regime::parse(r));
      }
    }
    report = robustness_sweep(set.puzzles, solver, regimes, a.seed, a.jobs);
  } else {
    if (a.pred.empty() || a.pred.size() != a.gt.size()) {
      throw Error(Errc::SizeMismatch, "--pred and --gt need the same number of files (" + std::to_string(a.pred.size()) +
                                          " vs " + std::to_string(a.gt.size()) + ")");
    }
    const auto metrics = split_list(a.metrics);
    const bool neighbor = std::find(metrics.begin(), metrics.end(), "neighbor") != metrics.end();
    for (const auto& m : metrics) {
      if (m != "direct" && m != "neighbor") throw Error(Errc::InvalidArgument, "unknown metric '" + m + "'");
    }
    for (std::size_t f = 0; f < a.pred.size(); ++f) {
      const auto pred = read_permutations(a.pred[f]);
      const auto gt = read_permutations(a.gt[f]);
      if (pred.size() != gt.size()) {
        throw Error(Errc::SizeMismatch, a.pred[f] + " has " + std::to_string(pred.size()) + " permutations, " + a.gt[f] +
                                            " has " + std::to_string(gt.size()));
      }
      for (std::size_t k = 0; k < pred.size(); ++k) {
        // A -1 in the ground truth marks a missing piece.
        std::vector<bool> present(static_cast<std::size_t>(gt[k].size()));
        std::vector<int> full = gt[k].mapping();
        bool complete = true;
        for (std::size_t i = 0; i < full.size(); ++i) {
          present[i] = full[i] != Permutation::kUnassigned;
          complete = complete && present[i];
        }
        const GridShape grid = a.grid.empty() ? infer_grid(gt[k].slots()) : parse_grid(a.grid);
        char id[16];
        std::snprintf(id, sizeof id, ":%06zu", k);
        EvalRecord rec;
        rec.puzzle_id = fs::path(a.pred[f]).stem().string() + id;
        rec.solver = a.solver_tag;
        rec.rows = grid.rows;
        rec.cols = grid.cols;
        rec.perturbation = complete ? "clean" : "missing";
        rec.direct_accuracy = direct_accuracy(pred[k], gt[k], present);
        if (neighbor && complete) rec.neighbor_accuracy = neighbor_accuracy(pred[k], gt[k], grid);
        report.records.push_back(std::move(rec));
      }
    }
    canonicalize(report);
  }
  print_summary(report);
  write_report(report, a.out);
  return 0;
}

// ---- bench

struct BenchArgs {
  std::string puzzles;
  std::string solvers = "matcher";
  std::string split = "test";
  int samples = 24;
  int warmup = 2;
  std::string out;
  SolverArgs solver_args;
};

int cmd_bench(const BenchArgs& a) {
  const PuzzleSet set = load_puzzle_set(a.puzzles, a.split);
  const auto mean_from = mean_source(set, a.solver_args.provider);
  std::vector<PuzzleInstance> run;
  for (int k = 0; k < a.samples + a.warmup; ++k) run.push_back(set.puzzles[static_cast<std::size_t>(k) % set.puzzles.size()]);
  json out = json::object();
  std::printf("%-10s %s (ms per puzzle, %d samples, %s)\n", "solver", "mean ± std", a.samples,
              grid_label(run.front().grid).c_str());
  for (const auto& tag : split_list(a.solvers)) {
    const Solver solver = make_solver(tag, a.solver_args, mean_from);
    const TimingStats t = time_solver(run, solver, a.warmup);
    std::printf("%-10s %s\n", tag.c_str(), t.format().c_str());
    out[tag] = {{"mean_ms", t.mean_ms}, {"std_ms", t.std_ms}, {"samples", t.samples}, {"formatted", t.format()}};
  }
  if (!a.out.empty()) {
    std::ofstream file(a.out);
    if (!file) throw Error(Errc::IoError, "cannot write " + a.out);
    file << out.dump(2) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  init_logging();
  CLI::App app{"Jigsaw puzzle solving with a mental-image matcher"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Build puzzle manifests from images");
  generate->add_option("--input-dir", gen.input_dir, "directory of PNG/PPM/PGM images");
  generate->add_option("--synthetic", gen.synthetic, "generate N procedural images instead");
  generate->add_option("--image-size", gen.image_size, "side of synthetic images in px");
  generate->add_option("--sizes", gen.sizes, "grid sizes, e.g. 2,4,6 or 3x5");
  generate->add_option("--seed", gen.seed);
  generate->add_option("--out", gen.out)->required();

  TrainArgs tr;
  auto* train = app.add_subcommand("train", "Train matcher or hung-perm weights");
  train->add_option("--data", tr.data, "output directory of generate")->required();
  train->add_option("--sizes", tr.sizes, "grid sizes to train on (default: all)");
  train->add_option("--model", tr.model, "matcher | hung-perm");
  train->add_option("--provider", tr.provider, "mental-image provider for the matcher");
  train->add_option("--epochs", tr.config.epochs);
  train->add_option("--lr", tr.config.learning_rate);
  train->add_option("--tau", tr.config.tau);
  train->add_option("--batch-size", tr.config.batch_size);
  train->add_option("--embedding-dim", tr.config.embedding_dim);
  train->add_option("--sinkhorn-iters", tr.config.sinkhorn_iters);
  train->add_option("--seed", tr.config.seed);
  train->add_option("--out", tr.out)->required();

  SolveArgs sv;
  auto* solve = app.add_subcommand("solve", "Solve one puzzle or a generated size directory");
  solve->add_option("--puzzle", sv.puzzle, "puzzle directory, or a size directory of generate")->required();
  solve->add_option("--solver", sv.solver, "matcher | hung-perm | greedy");
  solve->add_option("--split", sv.split, "all | train | test, for size directories");
  solve->add_option("--out", sv.out, "permutation file to write")->required();
  solve->add_option("--png", sv.png, "reassembled image (directory for batches)");
  add_solver_options(solve, sv.solver_args);

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "Score predictions or run a robustness sweep");
  eval->add_option("--pred", ev.pred, "prediction permutation files")->delimiter(',');
  eval->add_option("--gt", ev.gt, "ground-truth permutation files")->delimiter(',');
  eval->add_option("--metrics", ev.metrics, "direct,neighbor");
  eval->add_option("--grid", ev.grid, "grid shape, inferred when square");
  eval->add_option("--solver-tag", ev.solver_tag, "solver name recorded for --pred files");
  eval->add_option("--puzzles", ev.puzzles, "size directory to sweep instead of --pred/--gt");
  eval->add_option("--solver", ev.solver, "solver for the sweep");
  eval->add_option("--split", ev.split, "all | train | test");
  eval->add_option("--regimes", ev.regimes, "standard, or e.g. noise:0.05,erode:2");
  eval->add_option("--seed", ev.seed);
  eval->add_option("--jobs", ev.jobs, "worker threads for the sweep");
  eval->add_option("--out", ev.out, "report path (.json or .csv)");
  add_solver_options(eval, ev.solver_args);

  BenchArgs bn;
  auto* bench = app.add_subcommand("bench", "Time solvers per puzzle");
  bench->add_option("--puzzles", bn.puzzles, "size directory or puzzle directory")->required();
  bench->add_option("--solvers", bn.solvers, "comma-separated solver tags");
  bench->add_option("--samples", bn.samples);
  bench->add_option("--warmup", bn.warmup);
  bench->add_option("--split", bn.split);
  bench->add_option("--hung-perm-weights", bn.solver_args.hung_perm_weights);
  bench->add_option("--out", bn.out, "JSON timing report");
  add_solver_options(bench, bn.solver_args);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*generate) return cmd_generate(gen);
    if (*train) return cmd_train(tr);
    if (*solve) return cmd_solve(sv);
    if (*eval) return cmd_eval(ev);
    if (*bench) return cmd_bench(bn);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
