#include "csd/rng.hpp"

#include <cmath>

namespace csd {

namespace {

uint64_t splitmix64(uint64_t& x) {
  x += 0x9E3779B97F4A7C15ULL;
  uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

SeededRng::SeededRng(uint64_t seed) {
  uint64_t s = seed;
  for (auto& w : state_) w = splitmix64(s);
}

SeededRng SeededRng::forStream(uint64_t seed, uint64_t streamIndex) {
  uint64_t s = seed;
  uint64_t a = splitmix64(s);
  uint64_t t = streamIndex + 1;
  uint64_t b = splitmix64(t);
  return SeededRng(a ^ (b + 0x9E3779B97F4A7C15ULL * (streamIndex + 1)));
}

uint64_t SeededRng::nextU64() {
  uint64_t* s = state_;
  uint64_t result = rotl(s[0] + s[3], 23) + s[0];
  uint64_t t = s[1] << 17;
  s[2] ^= s[0];
  s[3] ^= s[1];
  s[1] ^= s[2];
  s[0] ^= s[3];
  s[2] ^= t;
  s[3] = rotl(s[3], 45);
  return result;
}

double SeededRng::uniform01() { return (nextU64() >> 11) * 0x1.0p-53; }

double SeededRng::standardNormal() {
  if (hasSpare_) {
    hasSpare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform01() - 1.0;
    v = 2.0 * uniform01() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  hasSpare_ = true;
  return u * f;
}

int SeededRng::uniformInt(int n) {
  // Rejection to avoid modulo bias; n is always tiny here.
  uint64_t bound = ~0ULL - ~0ULL % static_cast<uint64_t>(n);
  uint64_t x;
  do {
    x = nextU64();
  } while (x >= bound);
  return static_cast<int>(x % static_cast<uint64_t>(n));
}

Matrix randnMatrix(SeededRng& rng, int rows, int cols) {
  if (rows < 1 || cols < 1) throw InvalidInputError("randnMatrix: dimensions must be >= 1");
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = rng.standardNormal();
  return m;
}

}  // namespace csd
