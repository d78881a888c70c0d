#pragma once

#include <cstdint>
#include <random>

namespace ripless {

/// Seedable, splittable pseudo-random generator.
///
/// Every stream is fully described by its 64-bit seed: constructing an Rng
/// from `seed()` replays the stream bit-for-bit. `split(k)` derives an
/// independent child stream by hashing (seed, k) with SplitMix64, so trial
/// `j` of cell `i` can be addressed as `Rng(seed).split(i).split(j)` without
/// touching any shared state.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t seed() const { return seed_; }
  Rng split(std::uint64_t stream) const;

  double uniform();                                  // [0, 1)
  double normal();                                   // N(0, 1)
  std::uint64_t uniform_index(std::uint64_t count);  // {0, ..., count-1}
  double rademacher();                               // +-1

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace ripless
