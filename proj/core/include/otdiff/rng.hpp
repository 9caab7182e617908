#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>

namespace otdiff {

/// Finalizing mixer from SplitMix64 (Vigna / Stafford mix13).
inline std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ull;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebull;
  x ^= x >> 31;
  return x;
}

/// Named sub-streams of the master seed. Every stage and every per-item draw
/// hangs off (seed, lane, counter), so results do not depend on evaluation
/// order or worker count.
enum class SeedLane : std::uint64_t {
  DataDraw = 1,
  LatentDiffusion = 2,
  VolumeEstimate = 3,
  SamplerInit = 4,
  SamplerTail = 5,
  EvalFresh = 6,
  Permutation = 7,
  OracleRecount = 8,
  McRate = 9,
  BatchOt = 10,
  BatchVanillaFull = 11,
  BatchVanillaTrunc = 12,
};

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t lane, std::uint64_t counter = 0) {
  constexpr std::uint64_t golden = 0x9e3779b97f4a7c15ull;
  std::uint64_t h = mix64(seed + golden);
  h = mix64(h ^ (lane + golden));
  h = mix64(h ^ (counter + golden));
  return h;
}

inline std::uint64_t derive_seed(std::uint64_t seed, SeedLane lane, std::uint64_t counter = 0) {
  return derive_seed(seed, static_cast<std::uint64_t>(lane), counter);
}

/// SplitMix64 stream with Box-Muller normals. Self-contained so draws are
/// bit-reproducible across platforms, unlike std::normal_distribution.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix64(state_);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform01();  // (0, 1], keeps log finite
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  void fill_normal(std::span<double> out) {
    for (double& v : out) v = normal();
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace otdiff
