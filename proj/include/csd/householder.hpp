#pragma once

#include <cmath>
#include <vector>

#include "csd/dense.hpp"

namespace csd {

/// Reflector F = omega (I - beta v v*), with |omega| = 1 and v a unit vector.
/// Built so that F x = (||x||, 0, ..., 0)^T with a real nonnegative leading
/// entry.  For the zero vector F = I; dim 0 marks the empty-input identity.
template <typename T>
struct HouseholderReflector {
  int dim = 0;
  std::vector<T> v;   // unit vector, or empty when the reflector is I
  double beta = 0.0;  // 2 when v is active, 0 otherwise
  T omega = T{1};

  bool isIdentity() const { return beta == 0.0 && omega == T{1}; }

  /// F applied to a dim-vector.
  std::vector<T> apply(const std::vector<T>& x) const {
    std::vector<T> y = x;
    if (dim == 0) return y;
    if (beta != 0.0) {
      T dot{};
      for (int r = 0; r < dim; ++r) dot += conj_scalar(v[r]) * y[r];
      dot *= beta;
      for (int r = 0; r < dim; ++r) y[r] -= dot * v[r];
    }
    if (omega != T{1})
      for (int r = 0; r < dim; ++r) y[r] *= omega;
    return y;
  }

  /// M(i0:i0+dim-1, :) := F * M(i0:i0+dim-1, :)   (i0 0-based).
  void applyToRowsLeft(DenseMatrix<T>& m, int i0) const {
    if (dim == 0) return;
    for (int c = 0; c < m.cols(); ++c) {
      if (beta != 0.0) {
        T dot{};
        for (int r = 0; r < dim; ++r) dot += conj_scalar(v[r]) * m(i0 + r, c);
        dot *= beta;
        for (int r = 0; r < dim; ++r) m(i0 + r, c) -= dot * v[r];
      }
      if (omega != T{1})
        for (int r = 0; r < dim; ++r) m(i0 + r, c) *= omega;
    }
  }

  /// M(:, j0:j0+dim-1) := M(:, j0:j0+dim-1) * F^*   (j0 0-based).
  void applyAdjointToColsRight(DenseMatrix<T>& m, int j0) const {
    if (dim == 0) return;
    T omegaBar = conj_scalar(omega);
    for (int r = 0; r < m.rows(); ++r) {
      if (beta != 0.0) {
        T dot{};
        for (int c = 0; c < dim; ++c) dot += m(r, j0 + c) * v[c];
        dot *= beta;
        for (int c = 0; c < dim; ++c) m(r, j0 + c) -= dot * conj_scalar(v[c]);
      }
      if (omegaBar != T{1})
        for (int c = 0; c < dim; ++c) m(r, j0 + c) *= omegaBar;
    }
  }

  DenseMatrix<T> toDense() const {
    DenseMatrix<T> f(dim, dim);
    for (int j = 0; j < dim; ++j) {
      std::vector<T> e(dim, T{});
      e[j] = T{1};
      e = apply(e);
      for (int i = 0; i < dim; ++i) f(i, j) = e[i];
    }
    return f;
  }
};

/// house(x): F x = (||x||, 0, ..., 0)^T, leading entry real and nonnegative.
/// Empty input gives the 0-dimensional identity marker; the zero vector gives I.
template <typename T>
HouseholderReflector<T> house(const std::vector<T>& x) {
  HouseholderReflector<T> f;
  f.dim = static_cast<int>(x.size());
  if (f.dim == 0) return f;
  for (const T& xi : x)
    if (!is_finite_scalar(xi)) throw InvalidInputError("house: non-finite entry");

  double r = vectorNorm(x);
  if (r == 0.0) return f;  // F = I

  // Phase that makes x_1 real nonnegative, then the classic no-cancellation
  // choice u = w + ||x|| e_1 with w = conj(phase) x, and F = -conj(phase) H.
  double a1 = std::sqrt(abs2(x[0]));
  T phase = (a1 == 0.0) ? T{1} : x[0] * (1.0 / a1);
  std::vector<T> u(x.size());
  for (size_t i = 0; i < x.size(); ++i) u[i] = conj_scalar(phase) * x[i];
  u[0] += T{r};
  double un = vectorNorm(u);
  for (T& ui : u) ui *= (1.0 / un);

  f.v = std::move(u);
  f.beta = 2.0;
  f.omega = -conj_scalar(phase);
  return f;
}

}  // namespace csd
