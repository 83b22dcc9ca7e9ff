#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace humancorpus {

// Portable seeded randomness. std::mt19937_64 is bit-specified by the
// standard; the std distributions are not, so all draws used for outputs go
// through the helpers below.

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

/// Independent per-key stream seed, e.g. one per record id.
constexpr std::uint64_t derive_seed(std::uint64_t seed,
                                    std::string_view key) noexcept {
  return splitmix64(seed ^ splitmix64(fnv1a64(key)));
}

/// Deterministic value in [0, 1) for (seed, key).
constexpr double unit_hash(std::uint64_t seed, std::string_view key) noexcept {
  return static_cast<double>(derive_seed(seed, key) >> 11) * 0x1.0p-53;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = (~std::uint64_t{0}) - (~std::uint64_t{0}) % n;
    std::uint64_t v;
    do {
      v = engine_();
    } while (v >= limit);
    return v % n;
  }

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
};

template <class T>
void shuffle(std::vector<T>& items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    using std::swap;
    swap(items[i - 1], items[j]);
  }
}

/// n distinct indices from [0, population) in sampled order (partial
/// Fisher-Yates). Requires n <= population.
std::vector<std::size_t> sample_indices(std::size_t population, std::size_t n,
                                        Rng& rng);

}  // namespace humancorpus
