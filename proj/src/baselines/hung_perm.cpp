#include "jigsaw/baselines/hung_perm.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

#include <spdlog/spdlog.h>

#include "jigsaw/assignment/losses.hpp"
#include "jigsaw/error.hpp"
#include "jigsaw/matcher/embedding.hpp"
#include "jigsaw/rng.hpp"

namespace jigsaw {

HungPermModel HungPermModel::create(GridShape grid, int channels, std::uint64_t seed, int input_side, int hidden,
                                    int embedding) {
  HungPermModel m;
  m.grid = grid;
  m.input_side = input_side;
  m.channels = channels;
  m.hidden = hidden;
  m.embedding = embedding;
  const int n = grid.slots();
  m.encoder = Mlp({input_side * input_side * channels, hidden, embedding}, false);
  m.head = Mlp({n * embedding, n * n}, false);
  Rng rng(seed);
  m.encoder.initialize(rng);
  m.head.initialize(rng);
  return m;
}

Eigen::MatrixXd HungPermModel::cost(const Eigen::MatrixXd& piece_features) const {
  const Eigen::Index n = grid.slots();
  const Eigen::MatrixXd embeddings = encoder.forward(piece_features);
  const Eigen::VectorXd flat = head.forward(embeddings.reshaped()).col(0);
  return flat.reshaped<Eigen::RowMajor>(n, n);
}

double hung_perm_loss(const HungPermModel& model, const Eigen::MatrixXd& piece_features, const Permutation& gt,
                      const SinkhornOptions& sinkhorn, HungPermModel* grads) {
  const Eigen::Index n = model.grid.slots();
  if (piece_features.cols() != n || gt.size() != n) throw Error(Errc::SizeMismatch, "puzzle size differs from model");
  Mlp::Cache encoder_cache, head_cache;
  const Eigen::MatrixXd embeddings = model.encoder.forward(piece_features, &encoder_cache);
  const Eigen::MatrixXd flat = model.head.forward(embeddings.reshaped(), &head_cache);
  const Eigen::MatrixXd logits = flat.col(0).reshaped<Eigen::RowMajor>(n, n);
  const auto doubly = sinkhorn_normalize(logits, sinkhorn);
  const auto mask = hungarian_attention_mask(doubly, gt);
  const auto bce = attended_bce_loss(doubly.values, gt, mask);
  if (!grads) return bce.loss;

  const Eigen::MatrixXd dlogits = sinkhorn_backward(logits, doubly, bce.gradient);
  const Eigen::MatrixXd dflat = dlogits.reshaped<Eigen::RowMajor>(n * n, 1);
  const Eigen::MatrixXd dconcat = model.head.backward(head_cache, dflat, grads->head);
  model.encoder.backward(encoder_cache, dconcat.reshaped(model.embedding, n), grads->encoder);
  return bce.loss;
}

namespace {

Eigen::MatrixXd piece_features(const PuzzleInstance& puzzle, int side) {
  std::vector<Raster> rasters;
  rasters.reserve(puzzle.pieces.size());
  for (const Piece& p : puzzle.pieces) rasters.push_back(p.content);
  return raster_features(rasters, side);
}

template <typename T>
void fisher_yates(std::vector<T>& items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) std::swap(items[i - 1], items[rng.below(i)]);
}

}  // namespace

HungPermTrainResult train_hung_perm(std::span<const PuzzleInstance> dataset, const TrainConfig& config,
                                    const EpochCallback& on_epoch) {
  if (dataset.empty()) throw Error(Errc::EmptyDataset, "no training puzzles");
  const GridShape grid = dataset.front().grid;
  const int channels = dataset.front().channels();
  HungPermTrainResult result{
      HungPermModel::create(grid, channels, derive_seed(config.seed, "init"), config.input_side, config.hidden), {}};
  HungPermModel& model = result.model;

  std::vector<Eigen::MatrixXd> features;
  for (const PuzzleInstance& puzzle : dataset) {
    if (puzzle.grid != grid) throw Error(Errc::SizeMismatch, "hung-perm trains one grid size per model");
    if (puzzle.present_count() != puzzle.size()) throw Error(Errc::MissingPieces, "training puzzle has missing pieces");
    features.push_back(piece_features(puzzle, config.input_side));
  }

  const SinkhornOptions sinkhorn{config.sinkhorn_iters, config.sinkhorn_tol};
  Adam adam({&model.encoder, &model.head}, Adam::Options{config.learning_rate});
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Rng rng(derive_seed(config.seed, "epoch:" + std::to_string(epoch)));
    std::vector<std::size_t> order(dataset.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    fisher_yates(order, rng);
    double epoch_total = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
      const auto end = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      HungPermModel grads = model;
      grads.encoder = model.encoder.zeros_like();
      grads.head = model.head.zeros_like();
      for (std::size_t k = start; k < end; ++k) {
        const std::size_t index = order[k];
        const double loss = hung_perm_loss(model, features[index], dataset[index].gt_permutation, sinkhorn, &grads);
        if (!std::isfinite(loss)) {
          throw Error(Errc::NaNLoss, "hung-perm epoch " + std::to_string(epoch) + ", puzzle '" +
                                         dataset[index].source_id + "'");
        }
        epoch_total += loss;
      }
      const double scale = 1.0 / static_cast<double>(end - start);
      for (Mlp* g : {&grads.encoder, &grads.head}) {
        for (DenseLayer& layer : g->layers()) {
          layer.weight *= scale;
          layer.bias *= scale;
        }
      }
      adam.step({&grads.encoder, &grads.head});
    }
    const double mean = epoch_total / static_cast<double>(dataset.size());
    result.epoch_losses.push_back(mean);
    spdlog::debug("hung-perm epoch {} loss {:.6f}", epoch, mean);
    if (on_epoch) on_epoch(epoch, mean);
  }
  return result;
}

Permutation solve_hung_perm(const PuzzleInstance& puzzle, const HungPermModel& model, const SinkhornOptions& sinkhorn) {
  if (puzzle.grid != model.grid) {
    throw Error(Errc::SizeMismatch, "model trained for " + std::to_string(model.grid.rows) + "x" +
                                        std::to_string(model.grid.cols) + ", puzzle is " +
                                        std::to_string(puzzle.grid.rows) + "x" + std::to_string(puzzle.grid.cols));
  }
  const auto doubly = sinkhorn_normalize(model.cost(piece_features(puzzle, model.input_side)), sinkhorn);
  std::vector<int> present;
  for (int i = 0; i < puzzle.size(); ++i) {
    if (puzzle.pieces[static_cast<std::size_t>(i)].present) present.push_back(i);
  }
  const int m = puzzle.grid.slots();
  if (static_cast<int>(present.size()) == m) return hungarian_solve(doubly.values, true);
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(present.size()), m);
  for (std::size_t k = 0; k < present.size(); ++k) rows.row(static_cast<Eigen::Index>(k)) = doubly.values.row(present[k]);
  const Permutation partial = solve_rectangular(rows, true);
  std::vector<int> mapping(static_cast<std::size_t>(puzzle.size()), Permutation::kUnassigned);
  for (std::size_t k = 0; k < present.size(); ++k) mapping[static_cast<std::size_t>(present[k])] = partial[static_cast<int>(k)];
  return Permutation(std::move(mapping), m);
}

void save_hung_perm(const std::filesystem::path& path, const HungPermModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  out.write("GZP1", 4);
  binio::write_u32(out, 6);
  for (int v : {model.grid.rows, model.grid.cols, model.input_side, model.channels, model.hidden, model.embedding}) {
    binio::write_u32(out, static_cast<std::uint32_t>(v));
  }
  binio::write_mlp(out, model.encoder);
  binio::write_mlp(out, model.head);
  if (!out) throw Error(Errc::IoError, "write failed for " + path.string());
}

HungPermModel load_hung_perm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "GZP1", 4) != 0) {
    throw Error(Errc::DecodeError, path.string() + " is not a GZP1 model file");
  }
  if (binio::read_u32(in) != 6) throw Error(Errc::DecodeError, "unexpected hung-perm header length");
  int dims[6];
  for (int& d : dims) {
    d = static_cast<int>(binio::read_u32(in));
    if (d <= 0 || d > (1 << 16)) throw Error(Errc::DecodeError, "implausible hung-perm dimension");
  }
  HungPermModel model = HungPermModel::create({dims[0], dims[1]}, dims[3], 0, dims[2], dims[4], dims[5]);
  binio::read_mlp(in, model.encoder);
  binio::read_mlp(in, model.head);
  if (in.peek() != std::char_traits<char>::eof()) throw Error(Errc::DecodeError, "trailing bytes in model file");
  return model;
}

}  // namespace jigsaw
