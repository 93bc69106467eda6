#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace jigsaw {

// Seedable generator with a platform-independent stream.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the C++
// standard. The standard distributions are implementation-defined, so bounded
// integers, uniforms and normals are derived here from raw 64-bit draws:
//   below(n)  : rejection sampling, accept x >= (2^64 - n) mod n, return x mod n
//   uniform() : (x >> 11) * 2^-53, in [0, 1)
//   normal()  : Box-Muller cosine branch, two draws per sample
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  std::uint64_t below(std::uint64_t bound);
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();

 private:
  std::mt19937_64 engine_;
};

// Mixes a base seed with a label (FNV-1a over the label, splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t base, std::string_view label);

}  // namespace jigsaw
