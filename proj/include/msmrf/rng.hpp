#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace msmrf {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based generator: output k of a stream is mix64(key + k * golden).
/// Streams are keyed by (seed, a, b), so every (sweep, site) pair can own an
/// independent substream regardless of the order sites are visited in.
class Rng {
 public:
  using result_type = std::uint64_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  explicit Rng(std::uint64_t seed = 0) : key_(mix64(seed ^ 0x6a09e667f3bcc908ULL)) {}

  static Rng stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    Rng r(seed);
    r.key_ = mix64(r.key_ ^ mix64(a + 0x3c6ef372fe94f82bULL));
    r.key_ = mix64(r.key_ ^ mix64(b + 0xa54ff53a5f1d36f1ULL));
    return r;
  }

  result_type operator()() { return mix64(key_ + (++counter_) * 0x9e3779b97f4a7c15ULL); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }
  /// Uniform on (0, 1).
  double uniform_open() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

  /// Standard normal by Box-Muller; no cached second variate, so the stream
  /// position depends only on the number of calls.
  double normal() {
    const double u1 = uniform_open();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::uint64_t position() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace msmrf
