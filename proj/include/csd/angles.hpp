#pragma once

#include <vector>

#include "csd/dense.hpp"

namespace csd {

/// An angle in [0, pi/2] stored together with its complement pi/2 - psi.
/// Angles near pi/2 are represented as accurately as angles near 0, which is
/// what the deflation tests need; trig values are always taken from the
/// smaller member.
struct AnglePair {
  double value = 0.0;
  double complement = 1.5707963267948966;  // pi/2

  static AnglePair fromValue(double v);
  /// atan2-based constructor: both members computed independently from the
  /// nonnegative legs (y, x).
  static AnglePair fromAtan2(double y, double x);
  static AnglePair zero() { return AnglePair{}; }
  static AnglePair right() { return AnglePair{1.5707963267948966, 0.0}; }

  double cos() const;
  double sin() const;
  bool isZero() const { return value == 0.0; }
  bool isRight() const { return complement == 0.0; }
};

/// Implicit representation (theta, phi) of a matrix in bidiagonal block form.
struct AngleSet {
  int q = 0;
  std::vector<AnglePair> theta;  // q entries
  std::vector<AnglePair> phi;    // q-1 entries (empty when q <= 1)

  AngleSet() = default;
  AngleSet(std::vector<AnglePair> thetaIn, std::vector<AnglePair> phiIn);

  void validate() const;
};

/// Diagonal signature matrices (D1, D2, E1, E2) as +-1 vectors.
struct SignatureQuadruple {
  std::vector<double> d1, d2, e1, e2;
};

/// The 2q-by-2q matrix [B11 B12; B21 B22] of the bidiagonal block form.
Matrix materialize(const AngleSet& angles);

/// The m-by-m orthogonal matrix embedding the four blocks plus I_{p-q} and
/// I_{m-p-q}: rows (q, p-q, q, m-p-q) by columns (q, q, p-q, m-p-q).
Matrix embed(const AngleSet& angles, int m, int p, int q);

/// Structural + sign check against the bidiagonal block form pattern.
/// Entries that are exactly zero may carry either sign.
bool validateSignPattern(const Matrix& m, int q, double zeroTol = 0.0);

/// Recovers (theta, phi) from a matrix in bidiagonal block form.  Each angle
/// is taken from whichever of its two redundant sources has the larger
/// magnitude, so no cosine/sine chain products are ever divided out.
AngleSet extractAngles(const Matrix& m, int q, double zeroTol = 0.0);

/// Given four bidiagonal blocks whose combined matrix is orthogonal with the
/// right zero structure but arbitrary band signs, computes signatures with
/// diag(D1,D2) * M * diag(E1,E2) in bidiagonal block form, plus its angles.
/// This is the degenerate bidiagonalization pass: every reflector collapses
/// to a sign.
std::pair<SignatureQuadruple, AngleSet> fixSigns(const Matrix& b11, const Matrix& b12,
                                                 const Matrix& b21, const Matrix& b22,
                                                 double zeroTol = 1e-8);

/// Band-level core of fixSigns; the d/e vectors are applied to the band
/// arrays in place.  b11d/b11e: diagonal and superdiagonal of B11, etc.;
/// b12e/b22e are subdiagonals.
std::pair<SignatureQuadruple, AngleSet> fixSignsBands(int q, std::vector<double>& b11d,
                                                      std::vector<double>& b11e,
                                                      std::vector<double>& b21d,
                                                      std::vector<double>& b21e,
                                                      std::vector<double>& b12d,
                                                      std::vector<double>& b12e,
                                                      std::vector<double>& b22d,
                                                      std::vector<double>& b22e);

}  // namespace csd
