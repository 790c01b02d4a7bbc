#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace branchz {

// Seed derivation and the uniform/normal draws are implemented by hand so
// that study results are bit-identical no matter how work is split across
// threads or which standard library is in use (std distributions are
// implementation defined).

/// One round of the splitmix64 output function.
constexpr uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Collapses (seed, key...) into a single stream seed. Used to derive
/// independent, reproducible RNG streams: study seed -> run seed -> purpose.
constexpr uint64_t mix_seed(std::initializer_list<uint64_t> keys) {
  uint64_t acc = 0x8f1bbcdcbfa53e0bULL;
  for (uint64_t k : keys) acc = splitmix64(acc ^ k);
  return acc;
}

/// Deterministic random stream. mt19937_64 is bit-stable by the standard;
/// all variate transforms below avoid std::*_distribution on purpose.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(splitmix64(seed)) {}

  static Rng stream(std::initializer_list<uint64_t> keys) {
    return Rng(mix_seed(keys));
  }

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform index in [0, n). n must be >= 1.
  size_t index(size_t n) {
    size_t i = static_cast<size_t>(uniform() * static_cast<double>(n));
    return i < n ? i : n - 1;
  }

  /// Standard normal via Box-Muller. Draws two uniforms per call and keeps
  /// no cached spare, so the stream position stays predictable.
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  uint64_t raw() { return eng_(); }

 private:
  std::mt19937_64 eng_;
};

}  // namespace branchz
