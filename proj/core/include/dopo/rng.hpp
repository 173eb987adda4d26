#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace dopo {

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Key of one trajectory's random stream.
constexpr std::uint64_t trajectory_key(std::uint64_t seed, std::uint64_t trajectory) noexcept {
  return splitmix64(splitmix64(seed) ^ splitmix64(trajectory + 0x632be59bd9b4e019ULL));
}

/// Sequential SplitMix64 generator; satisfies UniformRandomBitGenerator.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit constexpr SplitMix64(std::uint64_t state) noexcept : state_(state) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  constexpr result_type operator()() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// Counter-based normal source. The draws for (key, step) depend on nothing
/// else, so any step of any trajectory can be regenerated independently.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t key) noexcept : key_(key) {}

  std::uint64_t key() const noexcept { return key_; }

  /// Fill `out` with independent N(0,1) draws belonging to `step`.
  void fill(std::uint64_t step, std::span<double> out) const;

 private:
  std::uint64_t key_;
};

/// Per-point seed for sweeps: a pure function of the master seed and a
/// content key, so reordering a grid does not change any point's stream.
constexpr std::uint64_t derive_point_seed(std::uint64_t master, std::uint64_t point_key) noexcept {
  return splitmix64(splitmix64(master ^ 0xd1b54a32d192ed03ULL) + point_key);
}

}  // namespace dopo
