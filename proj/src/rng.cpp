#include "drnet/rng.hpp"

#include "drnet/errors.hpp"

namespace drnet {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t splitmix64(std::uint64_t& state) {
  state += kGolden;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

Rng::Rng(std::uint64_t seed) : seed_(seed) {
  std::uint64_t sm = seed;
  for (auto& word : state_) word = splitmix64(sm);
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double Rng::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
  if (!(lo < hi)) throw ArgumentError("uniform: requires lo < hi");
  return lo + (hi - lo) * next_double();
}

std::vector<double> Rng::uniform_sequence(double lo, double hi, std::size_t count) {
  if (!(lo < hi)) throw ArgumentError("uniform_sequence: requires lo < hi");
  std::vector<double> out(count);
  for (auto& v : out) v = lo + (hi - lo) * next_double();
  return out;
}

std::uint64_t Rng::below(std::uint64_t bound) {
  if (bound == 0) throw ArgumentError("below: bound must be positive");
  if ((bound & (bound - 1)) == 0) return next_u64() & (bound - 1);
  std::uint64_t mask = bound - 1;
  mask |= mask >> 1;
  mask |= mask >> 2;
  mask |= mask >> 4;
  mask |= mask >> 8;
  mask |= mask >> 16;
  mask |= mask >> 32;
  std::uint64_t draw;
  do {
    draw = next_u64() & mask;
  } while (draw >= bound);
  return draw;
}

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt) {
  std::uint64_t state = base + kGolden * (salt + 1);
  return splitmix64(state);
}

}  // namespace drnet
