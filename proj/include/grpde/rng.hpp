#pragma once

#include <cstdint>
#include <random>

namespace grpde {

/// Portable random stream: std::mt19937_64 (bit-exact across standard
/// libraries) seeded through SplitMix64, with hand-written uniform/normal/
/// integer draws so results do not depend on a library's distribution code.
///
/// Independent streams are addressed by (seed, stream) pairs, e.g. one stream
/// per dataset sample index.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform();

  /// Standard normal via Box-Muller; pairs are cached.
  double normal();

  /// Uniform integer in [0, bound), rejection sampled.
  std::uint64_t below(std::uint64_t bound);

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace grpde
