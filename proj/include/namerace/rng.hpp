#pragma once

// Seedable random source with a fully specified algorithm.
//
// Raw bits come from std::mt19937_64, whose output sequence is fixed by the
// C++ standard. The std::*_distribution adaptors are implementation-defined,
// so every conversion below is done by hand:
//   uniform01      (x >> 11) * 2^-53, a double in [0, 1)
//   uniform_index  rejection sampling on the top of the 64-bit range
//   bernoulli(p)   uniform01() < p
//   shuffle        Fisher-Yates, i = n-1 .. 1, j = uniform_index(i + 1)
//   derive(k)      new generator seeded with splitmix64(seed ^ splitmix64(k))
// Given a seed, every draw is bit-identical across compilers and platforms.

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace namerace {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_index(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % n);
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % n;
  }

  bool bernoulli(double p) { return uniform01() < p; }

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_index(i));
      using std::swap;
      swap(items[i - 1], items[j]);
    }
  }

  /// Independent stream keyed by `stream`; does not advance this generator.
  Rng derive(std::uint64_t stream) const { return Rng(splitmix64(seed_ ^ splitmix64(stream))); }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace namerace
