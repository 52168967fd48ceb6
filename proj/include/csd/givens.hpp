#pragma once

#include <array>
#include <cmath>
#include <complex>

#include "csd/dense.hpp"

namespace csd {

namespace detail {

/// a*x + b*y with a single rounding on the accumulation.
inline double fmaMix(double a, double x, double b, double y) { return std::fma(a, x, b * y); }
inline std::complex<double> fmaMix(double a, const std::complex<double>& x, double b,
                                   const std::complex<double>& y) {
  return {std::fma(a, x.real(), b * y.real()), std::fma(a, x.imag(), b * y.imag())};
}

}  // namespace detail

/// Planar rotation in coordinates (i1, i2), 1-based, i1 < i2.  The embedded
/// 2x2 block is [c -s; s c] with angle in [0, pi): either s > 0, or s = 0 and
/// c = 1.  That normalization makes the Givens factorization of a preferred
/// QR factor unique.
struct GivensRotation {
  int dim = 0;
  int i1 = 1;
  int i2 = 2;
  double c = 1.0;
  double s = 0.0;

  double angle() const;
  bool isIdentity() const { return s == 0.0 && c == 1.0; }

  Matrix toDense() const;

  /// A := G^T A (rows i1, i2).
  template <typename T>
  void applyTransposeLeft(DenseMatrix<T>& a) const {
    T* r1 = &a(i1 - 1, 0);
    T* r2 = &a(i2 - 1, 0);
    for (int j = 0; j < a.cols(); ++j) {
      T x = r1[j], y = r2[j];
      r1[j] = detail::fmaMix(c, x, s, y);
      r2[j] = detail::fmaMix(c, y, -s, x);
    }
  }

  /// A := G A (rows i1, i2).
  template <typename T>
  void applyLeft(DenseMatrix<T>& a) const {
    T* r1 = &a(i1 - 1, 0);
    T* r2 = &a(i2 - 1, 0);
    for (int j = 0; j < a.cols(); ++j) {
      T x = r1[j], y = r2[j];
      r1[j] = detail::fmaMix(c, x, -s, y);
      r2[j] = detail::fmaMix(c, y, s, x);
    }
  }

  /// A := A G (columns i1, i2).
  template <typename T>
  void applyRight(DenseMatrix<T>& a) const {
    for (int i = 0; i < a.rows(); ++i) {
      T x = a(i, i1 - 1), y = a(i, i2 - 1);
      a(i, i1 - 1) = detail::fmaMix(c, x, s, y);
      a(i, i2 - 1) = detail::fmaMix(c, y, -s, x);
    }
  }

  /// A := A G^T (columns i1, i2).
  template <typename T>
  void applyTransposeRight(DenseMatrix<T>& a) const {
    for (int i = 0; i < a.rows(); ++i) {
      T x = a(i, i1 - 1), y = a(i, i2 - 1);
      a(i, i1 - 1) = detail::fmaMix(c, x, -s, y);
      a(i, i2 - 1) = detail::fmaMix(c, y, s, x);
    }
  }
};

/// givens(m, i1, i2, x): G^T x = (+-||x||, 0)^T in coordinates (i1, i2),
/// angle normalized into [0, pi).  The corner case x = (0,0)^T is defined to
/// rotate through pi/2, which is what lets one loop handle both cases of the
/// preferred QR factorization.
GivensRotation givens(int m, int i1, int i2, const std::array<double, 2>& x);

/// Dense product G_1 * G_2 * ... * G_k.
Matrix givensProduct(int m, const std::vector<GivensRotation>& rotations);

}  // namespace csd
