#pragma once

#include <cstdint>
#include <random>

namespace storyline {

// std::mt19937_64 output is fully specified by the standard; the standard
// distributions are not, so every draw below is built from raw engine output
// to keep results identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n). Rejection sampling, no modulo bias.
  std::uint64_t below(std::uint64_t n);

  /// Standard normal via Box-Muller (one draw per call, the pair partner is discarded).
  double normal();

 private:
  std::mt19937_64 engine_;
};

/// SplitMix64 finalizer. Derives independent stream seeds from (base, stream).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept;

}  // namespace storyline
