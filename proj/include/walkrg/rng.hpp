#pragma once

#include <cstdint>
#include <limits>

namespace walkrg {

/// Counter-based random stream. Output i of stream (seed, id) is a pure
/// function of (seed, id, i): the SplitMix64 finalizer applied to a Weyl
/// sequence whose origin is derived from the key. Streams with different ids
/// are statistically independent for all practical purposes.
///
/// Satisfies UniformRandomBitGenerator, so std distributions work on it.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0, std::uint64_t stream = 0)
      : origin_(mix(seed ^ mix(stream + 0x632BE59BD9B4E019ull))), counter_(0) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return mix(origin_ + (++counter_) * kGamma); }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Lemire's multiply-shift; the bias is < n / 2^64 and irrelevant here.
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>((*this)()) * n) >> 64);
  }

  std::uint64_t position() const { return counter_; }

  /// Independent child stream, e.g. one per sample path or replica.
  Rng split(std::uint64_t id) const { return Rng(origin_, id); }

 private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t origin_;
  std::uint64_t counter_;
};

}  // namespace walkrg
