#include "dfrc/rng.hpp"

namespace dfrc {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

Rng Rng::stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = splitmix64(seed);
  for (auto id : path) s = splitmix64(s ^ splitmix64(id + 0x632BE59BD9B4E019ull));
  return Rng(s);
}

Rng Rng::split(std::uint64_t id) const { return stream(seed_, {id}); }

double Rng::uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

int Rng::uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }

double Rng::normal() { return normal_(engine_); }

cdouble Rng::complex_normal(double var) {
  const double s = std::sqrt(var / 2.0);
  const double re = normal_(engine_);
  const double im = normal_(engine_);
  return {s * re, s * im};
}

}  // namespace dfrc
