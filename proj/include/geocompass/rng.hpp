#pragma once

// Counter-based pseudo-random numbers for reproducible, order-independent
// parallel simulation.  Each (master_seed, stream_id) pair yields an
// independent SplitMix64 stream; replica r of an experiment draws from
// stream r regardless of which worker executes it, so estimates are
// bit-identical for any worker count.

#include <cmath>
#include <cstdint>

namespace geocompass {

namespace detail {

// 64-bit finalizer from the SplitMix64 generator (Steele, Lea & Flood).
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_id = 0;
};

class SplitMix64 {
 public:
  explicit SplitMix64(SeedSpec s)
      : state_(detail::mix64(detail::mix64(s.master_seed) ^
                             detail::mix64(~s.stream_id * 0x9e3779b97f4a7c15ULL))) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform on (0, 1]: top 53 bits shifted into [1, 2^53], scaled by 2^-53.
  // Never returns 0, so log() of it is always finite.
  double next_uniform() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1p-53;
  }

  // Exponential(rate) via inversion; rate must be positive.
  double next_exponential(double rate) { return -std::log(next_uniform()) / rate; }

 private:
  std::uint64_t state_;
};

}  // namespace geocompass
