#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

namespace causagen {

// SplitMix64 finalizer. A bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// FNV-1a; used to turn purpose tags into seed material.
constexpr std::uint64_t tag_hash(std::string_view tag) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Derives a child seed. For fixed (seed, tag) the map index -> seed is
// injective: the argument to the final mix64 is affine in index with an odd
// multiplier.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index,
                                    std::string_view tag = {}) noexcept {
  const std::uint64_t base = mix64(mix64(seed ^ tag_hash(tag)) + kGolden);
  return mix64(base + index * kGolden);
}

// Counter-based SplitMix64 stream. Satisfies UniformRandomBitGenerator, so it
// plugs into <random> distributions. Cheap to construct, so one stream per
// (seed, column, row) cell is affordable.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit constexpr Rng(std::uint64_t seed) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  constexpr result_type operator()() noexcept {
    state_ += kGolden;
    return mix64(state_);
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  // Uniform index in [0, n). floor(uniform() * n); the bridge protocol
  // documents this exact rule so external samplers can reproduce draws.
  std::size_t index(std::size_t n) noexcept {
    auto i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
    return i < n ? i : n - 1;
  }

  double normal() noexcept;

 private:
  std::uint64_t state_;
};

// Stream for one generated cell.
inline Rng cell_rng(std::uint64_t seed, std::uint64_t column,
                    std::uint64_t row) noexcept {
  return Rng(derive_seed(derive_seed(seed, column, "column"), row, "row"));
}

}  // namespace causagen
