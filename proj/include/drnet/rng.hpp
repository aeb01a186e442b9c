#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace drnet {

/// Deterministic pseudo-random generator with a pinned algorithm
/// (xoshiro256** seeded via splitmix64), so streams are bit-identical
/// across platforms and compilers for a fixed seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }

  /// Next raw 64-bit value of the stream.
  std::uint64_t next_u64();

  /// Uniform double in [0, 1), 53-bit resolution.
  double next_double();

  /// Uniform double in [lo, hi). Throws ArgumentError unless lo < hi.
  double uniform(double lo, double hi);

  /// Sequence of `count` uniform draws from [lo, hi).
  std::vector<double> uniform_sequence(double lo, double hi, std::size_t count);

  /// Unbiased integer in [0, bound) via power-of-two rejection.
  /// Throws ArgumentError if bound == 0.
  std::uint64_t below(std::uint64_t bound);

  /// A single random bit as 0 or 1.
  int bit() { return static_cast<int>(next_u64() >> 63); }

  /// In-place Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& values) {
    if (values.size() < 2) return;
    for (std::size_t i = values.size() - 1; i > 0; --i) {
      std::size_t j = static_cast<std::size_t>(below(i + 1));
      using std::swap;
      swap(values[i], values[j]);
    }
  }

 private:
  std::array<std::uint64_t, 4> state_;
  std::uint64_t seed_;
};

/// Deterministic seed derivation for sub-streams (data vs. init vs. shuffle).
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt);

}  // namespace drnet
