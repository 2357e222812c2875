#pragma once

// Seedable, splittable 64-bit uniform generator.
//
// The bit generator is xoshiro256** (Blackman & Vigna) whose 256-bit state is
// filled from a SplitMix64 sequence started at the user seed. Independent
// streams are derived by hashing a seed together with a list of integer keys
// (for example cell and replication indices):
//
//   key_0 = seed
//   key_{i+1} = mix64(key_i ^ mix64(k_i + 0x9e3779b97f4a7c15))
//
// and seeding a fresh generator with the final key. A stream is therefore a
// pure function of (seed, keys) and does not depend on scheduling.

#include <array>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <string_view>

namespace lehmann {

inline constexpr std::string_view kGeneratorName = "xoshiro256**/splitmix64";

inline constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  constexpr std::uint64_t next() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

 private:
  std::uint64_t state_;
};

class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit constexpr Xoshiro256(std::uint64_t seed) noexcept {
    SplitMix64 sm(seed);
    for (auto& word : s_) word = sm.next();
  }

  // Generator for the stream identified by (seed, keys...).
  static constexpr Xoshiro256 stream(
      std::uint64_t seed, std::initializer_list<std::uint64_t> keys) noexcept {
    std::uint64_t key = seed;
    for (std::uint64_t k : keys) key = mix64(key ^ mix64(k + 0x9e3779b97f4a7c15ULL));
    return Xoshiro256(key);
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  constexpr result_type operator()() noexcept {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform on the open interval (0, 1): 53-bit lattice shifted by half a
  // step, so neither endpoint is ever produced.
  constexpr double uniform_open() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> s_{};
};

}  // namespace lehmann
