#include "jigsaw/manifest.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "jigsaw/error.hpp"
#include "jigsaw/image_io.hpp"
#include "json.hpp"

namespace jigsaw {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string piece_file(int index) {
  char name[32];
  std::snprintf(name, sizeof name, "piece_%03d.png", index);
  return name;
}

}  // namespace

void save_puzzle(const fs::path& dir, const PuzzleInstance& puzzle) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(Errc::IoError, "cannot create " + dir.string() + ": " + ec.message());

  json manifest;
  manifest["schema"] = kManifestSchema;
  manifest["source_id"] = puzzle.source_id;
  manifest["rows"] = puzzle.grid.rows;
  manifest["cols"] = puzzle.grid.cols;
  manifest["seed"] = puzzle.seed;
  manifest["piece_side"] = puzzle.piece_side();
  manifest["channels"] = puzzle.channels();
  manifest["gt_permutation"] = puzzle.gt_permutation.mapping();
  manifest["present"] = puzzle.present_mask();
  json perturbations = json::array();
  for (const auto& p : puzzle.perturbations) {
    perturbations.push_back({{"kind", p.kind}, {"value", p.value}, {"seed", p.seed}});
  }
  manifest["perturbations"] = perturbations;
  json files = json::array();
  for (int i = 0; i < puzzle.size(); ++i) {
    files.push_back(piece_file(i));
    write_image(dir / piece_file(i), puzzle.pieces[static_cast<std::size_t>(i)].content);
  }
  manifest["pieces"] = files;

  std::ofstream out(dir / "manifest.json");
  out << manifest.dump(2) << '\n';
  if (!out) throw Error(Errc::IoError, "cannot write manifest in " + dir.string());
}

PuzzleInstance load_puzzle(const fs::path& path) {
  const fs::path manifest_path = fs::is_directory(path) ? path / "manifest.json" : path;
  const fs::path dir = manifest_path.parent_path();
  std::ifstream in(manifest_path);
  if (!in) throw Error(Errc::IoError, "cannot open " + manifest_path.string());
  json manifest;
  try {
    in >> manifest;
  } catch (const json::exception& e) {
    throw Error(Errc::DecodeError, manifest_path.string() + ": " + e.what());
  }
  try {
    if (manifest.at("schema").get<int>() != kManifestSchema) {
      throw Error(Errc::DecodeError, manifest_path.string() + ": unsupported schema");
    }
    PuzzleInstance puzzle;
    puzzle.source_id = manifest.at("source_id").get<std::string>();
    puzzle.grid = {manifest.at("rows").get<int>(), manifest.at("cols").get<int>()};
    puzzle.seed = manifest.at("seed").get<std::uint64_t>();
    puzzle.gt_permutation = Permutation(manifest.at("gt_permutation").get<std::vector<int>>());
    const auto present = manifest.at("present").get<std::vector<bool>>();
    const auto files = manifest.at("pieces").get<std::vector<std::string>>();
    if (files.size() != present.size() || static_cast<int>(files.size()) != puzzle.grid.slots() ||
        puzzle.gt_permutation.size() != puzzle.grid.slots()) {
      throw Error(Errc::DecodeError, manifest_path.string() + ": inconsistent piece counts");
    }
    for (std::size_t i = 0; i < files.size(); ++i) {
      Piece piece{read_image(dir / files[i]), puzzle.gt_permutation[static_cast<int>(i)], present[i]};
      puzzle.pieces.push_back(std::move(piece));
    }
    for (const auto& p : manifest.at("perturbations")) {
      puzzle.perturbations.push_back(
          {p.at("kind").get<std::string>(), p.at("value").get<double>(), p.at("seed").get<std::uint64_t>()});
    }
    return puzzle;
  } catch (const json::exception& e) {
    throw Error(Errc::DecodeError, manifest_path.string() + ": " + e.what());
  }
}

void write_permutations(const fs::path& path, const std::vector<Permutation>& perms) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  for (const auto& perm : perms) {
    for (int i = 0; i < perm.size(); ++i) out << (i ? " " : "") << perm[i];
    out << '\n';
  }
  if (!out) throw Error(Errc::IoError, "write failed for " + path.string());
}

std::vector<Permutation> read_permutations(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  std::vector<Permutation> perms;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream fields(line);
    std::vector<int> mapping;
    std::string token;
    while (fields >> token) {
      try {
        std::size_t used = 0;
        mapping.push_back(std::stoi(token, &used));
        if (used != token.size()) throw std::invalid_argument(token);
      } catch (const std::exception&) {
        throw Error(Errc::DecodeError, path.string() + ":" + std::to_string(line_no) + ": bad index '" + token + "'");
      }
    }
    perms.emplace_back(std::move(mapping));
  }
  return perms;
}

}  // namespace jigsaw
