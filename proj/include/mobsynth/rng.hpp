#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace mobsynth {

// SplitMix64 finalizer. Used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// FNV-1a, stable across platforms (std::hash is not).
constexpr std::uint64_t stable_hash(std::string_view text) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ull;
  }
  return h;
}

// Seed of an independent sub-stream: seed XOR mix64(hash(tag)).
constexpr std::uint64_t derive_seed(std::uint64_t seed,
                                    std::string_view tag) noexcept {
  return seed ^ mix64(stable_hash(tag));
}

// mt19937_64 with platform-independent derived draws (the std
// distributions are implementation-defined, so they are avoided).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1), 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform in (0, 1), never 0.
  double open_uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Uniform integer in [lo, hi] by rejection (no modulo bias).
  std::int64_t between(std::int64_t lo, std::int64_t hi);

  // Index drawn proportionally to non-negative weights; throws if all zero.
  std::size_t weighted(std::span<const double> weights);

  bool bernoulli(double p) { return uniform() < p; }

  // Standard normal via inverse CDF.
  double normal();

 private:
  std::mt19937_64 engine_;
};

}  // namespace mobsynth
