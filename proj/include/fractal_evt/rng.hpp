#pragma once

#include <cstdint>

namespace fractal_evt {

// SplitMix64 finalizer. Every random quantity in the library is a pure
// function of (seed, counter) through this mixer, so results never depend
// on thread scheduling or on std:: distribution implementations.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of the index-th child stream of `seed`.
constexpr std::uint64_t derive_seed(std::uint64_t seed,
                                    std::uint64_t index) noexcept {
  return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

/// Uniform double in [0, 1) from the top 53 bits.
constexpr double to_unit_interval(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Unbiased-enough bounded integer in [0, bound) (Lemire multiply-shift).
constexpr std::uint64_t to_bounded(std::uint64_t bits,
                                   std::uint64_t bound) noexcept {
  return static_cast<std::uint64_t>(
      (static_cast<unsigned __int128>(bits) * bound) >> 64);
}

/// Sequential counter-based generator.
class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t seed) noexcept : seed_(seed) {}

  constexpr std::uint64_t next() noexcept {
    return splitmix64(seed_ ^ splitmix64(counter_++));
  }
  constexpr double uniform() noexcept { return to_unit_interval(next()); }
  constexpr std::uint64_t below(std::uint64_t bound) noexcept {
    return to_bounded(next(), bound);
  }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

}  // namespace fractal_evt
