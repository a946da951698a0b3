#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include "dfrc/types.hpp"

namespace dfrc {

/// Seedable, splittable random source.
///
/// Streams are derived from a root seed and a path of integer ids
/// (e.g. {trial, sweep_index}) by SplitMix64 mixing, so independent Monte Carlo
/// tasks get reproducible, uncorrelated generators regardless of scheduling.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  static Rng stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path);
  Rng split(std::uint64_t id) const;

  double uniform();
  int uniform_int(int lo, int hi);
  double normal();
  /// Circularly-symmetric complex Gaussian with total variance `var`.
  cdouble complex_normal(double var = 1.0);

  std::uint64_t seed() const { return seed_; }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace dfrc
