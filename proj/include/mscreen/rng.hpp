#pragma once

#include <cmath>
#include <cstdint>

namespace mscreen {

// Counter-based generator: the i-th output is a pure function of (key, i).
// Streams can be forked without sharing state, which keeps per-cell seeding
// in the experiment harness reproducible regardless of execution order.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : key_(splitmix(seed ^ kKeyInit)) {}

  /// Independent stream derived from this generator's key and a stream id.
  Rng fork(std::uint64_t stream) const {
    Rng r;
    r.key_ = splitmix(key_ ^ splitmix(stream + kStreamSalt));
    return r;
  }

  std::uint64_t next_u64() { return splitmix(key_ + kGamma * ++counter_); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1]; safe as a log() argument.
  double uniform_pos() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller. Two uniforms per draw, no cached spare,
  /// so the stream position is a fixed function of the number of calls.
  double normal() {
    const double u1 = uniform_pos();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  /// Integer uniform on {0, ..., bound-1} (bound > 0), unbiased by rejection.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = bound * (UINT64_MAX / bound);
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % bound;
  }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  static constexpr std::uint64_t kKeyInit = 0x8f5c1a2b3d4e5f60ULL;
  static constexpr std::uint64_t kStreamSalt = 0x9e3779b97f4a7c15ULL;
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
  static constexpr double kPi = 3.141592653589793238462643383279502884;

  static std::uint64_t splitmix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace mscreen
