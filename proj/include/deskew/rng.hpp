#pragma once

#include <cstdint>

#include "deskew/stats.hpp"

namespace deskew {

/// Counter-based 64-bit generator (splitmix64). The whole state is one
/// word, so independent per-episode streams are cheap to derive and the
/// sequence is identical on every platform. Gaussian draws go through the
/// normal inverse CDF, again for cross-implementation determinism.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  /// Independent stream for (seed, stream_index).
  static SplitMix64 stream(std::uint64_t seed, std::uint64_t index) {
    return SplitMix64(mix(seed ^ mix(index * 0xA24BAED4963EE407ULL + 1)));
  }

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  /// Uniform in (0, 1), never returning either endpoint.
  double uniform01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform01();
  }

  /// Standard normal via inverse CDF.
  double normal() { return normal_quantile(uniform01()); }

  double normal(double mean, double stddev) {
    return mean + stddev * normal();
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t state_;
};

}  // namespace deskew
