#pragma once

#include <cstdint>

namespace gridao {

// Counter-based generator. Every draw is a pure function of
// (seed, stream, counter), so independent streams can be evaluated in any
// order, on any thread, and still produce identical sequences. The stream key
// is hashed into a splitmix64 starting state; draws then walk that state with
// the usual odd gamma increment.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : key_(mix(mix(seed + kGamma) ^ (stream * 0xd1342543de82ef95ULL))) {}

  std::uint64_t next_u64() {
    return mix(key_ + (counter_++) * kGamma);
  }

  // Unbiased integer in [0, n) via modulo rejection. n must be >= 1.
  std::uint64_t uniform_index(std::uint64_t n) {
    const std::uint64_t rem = (UINT64_MAX % n + 1) % n;  // 2^64 mod n
    const std::uint64_t bound = UINT64_MAX - rem;
    std::uint64_t v = next_u64();
    while (v > bound) v = next_u64();
    return v % n;
  }

  // Uniform double in [0, 1) with 53 random bits.
  double double01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace gridao
