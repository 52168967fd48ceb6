#pragma once

#include <cmath>

#include "csd/dense.hpp"
#include "csd/rng.hpp"

namespace csd {

struct SpectralNormResult {
  double value = 0.0;
  bool converged = true;
};

/// Largest-singular-value estimate by power iteration on A*A.
/// Iteration cap 2000, relative tolerance 1e-12 (two consecutive stagnant
/// Rayleigh estimates); non-convergence falls back to the Frobenius norm,
/// a conservative upper bound, with converged = false.  The returned value
/// never exceeds ||A||_F.
template <typename T>
SpectralNormResult spectralNormStatus(const DenseMatrix<T>& a) {
  if (!a.isFinite()) throw InvalidInputError("spectralNorm: non-finite matrix");
  SpectralNormResult out;
  int m = a.rows(), n = a.cols();
  if (m == 0 || n == 0) return out;

  double frob = frobeniusNorm(a);
  if (frob == 0.0) return out;

  constexpr int kMaxIter = 2000;
  constexpr double kRelTol = 1e-12;

  SeededRng start(0x9E3779B97F4A7C15ULL);
  std::vector<T> v(n);
  for (int j = 0; j < n; ++j) v[j] = T(start.standardNormal());
  double vn = vectorNorm(v);
  for (T& x : v) x *= (1.0 / vn);

  std::vector<T> w(m);
  double sigma = 0.0, sigmaPrev = -1.0;
  int stagnant = 0;
  for (int iter = 0; iter < kMaxIter; ++iter) {
    // w = A v
    for (int i = 0; i < m; ++i) {
      T s{};
      for (int j = 0; j < n; ++j) s += a(i, j) * v[j];
      w[i] = s;
    }
    sigma = vectorNorm(w);
    if (sigma == 0.0) {
      // Start vector landed in the null space; redraw.
      for (int j = 0; j < n; ++j) v[j] = T(start.standardNormal());
      vn = vectorNorm(v);
      for (T& x : v) x *= (1.0 / vn);
      sigmaPrev = -1.0;
      stagnant = 0;
      continue;
    }
    // v = A* w, normalized
    for (int j = 0; j < n; ++j) {
      T s{};
      for (int i = 0; i < m; ++i) s += conj_scalar(a(i, j)) * w[i];
      v[j] = s;
    }
    vn = vectorNorm(v);
    for (T& x : v) x *= (1.0 / vn);

    if (sigmaPrev >= 0.0 && std::abs(sigma - sigmaPrev) <= kRelTol * sigma) {
      if (++stagnant >= 2) {
        out.value = std::min(sigma, frob);
        return out;
      }
    } else {
      stagnant = 0;
    }
    sigmaPrev = sigma;
  }
  out.value = frob;
  out.converged = false;
  return out;
}

template <typename T>
double spectralNorm(const DenseMatrix<T>& a) {
  return spectralNormStatus(a).value;
}

/// ||U*U - I||_2, the orthogonality defect used by the stability criteria.
template <typename T>
double orthogonalityDefect(const DenseMatrix<T>& u) {
  DenseMatrix<T> g = u.adjoint() * u;
  for (int i = 0; i < g.rows(); ++i) g(i, i) -= T{1};
  return spectralNorm(g);
}

}  // namespace csd
