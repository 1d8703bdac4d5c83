#pragma once

#include <cstdint>
#include <random>

namespace adjwalk {

// SplitMix64 step: advances state and returns a well-mixed 64-bit word.
std::uint64_t splitmix64(std::uint64_t& state) noexcept;

// Per-task random stream. Owned by exactly one task; never shared across threads.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t bits() { return engine_(); }

  // Uniform on the open interval (0,1), 53 random bits.
  double uniform() { return (static_cast<double>(bits() >> 11) + 0.5) * 0x1.0p-53; }

  // Uniform integer in [0, n), n > 0 (multiply-shift; bias below n / 2^64).
  std::uint64_t below(std::uint64_t n) {
    __extension__ using u128 = unsigned __int128;
    return static_cast<std::uint64_t>((static_cast<u128>(bits()) * n) >> 64);
  }

  double normal();
  double exponential();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Stream i of a master seed; depends only on (master_seed, index), never on scheduling.
Rng seed_stream(std::uint64_t master_seed, std::uint64_t index);

}  // namespace adjwalk
