#pragma once

#include <cstdint>

#include "csd/dense.hpp"

namespace csd {

/// Deterministic 64-bit generator: xoshiro256++ seeded through splitmix64.
/// Update rule (Blackman & Vigna):
///   result = rotl(s0 + s3, 23) + s0
///   t = s1 << 17; s2 ^= s0; s3 ^= s1; s1 ^= s2; s0 ^= s3; s2 ^= t; s3 = rotl(s3, 45)
/// Uniform doubles take the top 53 bits; standard normals come from the
/// Marsaglia polar transform (one spare value cached between calls).
/// Identical seeds give identical streams on any IEEE-754 platform, up to
/// the last-ulp behaviour of sqrt/log in the polar transform.
class SeededRng {
 public:
  explicit SeededRng(uint64_t seed);

  /// Independent substream for a (seed, stream index) pair; used to make
  /// parallel experiment trials reproducible regardless of scheduling.
  static SeededRng forStream(uint64_t seed, uint64_t streamIndex);

  uint64_t nextU64();
  double uniform01();        // [0, 1)
  double standardNormal();   // N(0, 1)
  int uniformInt(int n);     // {0, ..., n-1}

 private:
  uint64_t state_[4];
  bool hasSpare_ = false;
  double spare_ = 0.0;
};

Matrix randnMatrix(SeededRng& rng, int rows, int cols);

}  // namespace csd
