#pragma once

#include <array>
#include <optional>
#include <vector>

#include "csd/givens.hpp"

namespace csd {

struct SymTridiagonal {
  int n = 0;
  std::vector<double> diag;     // n
  std::vector<double> offdiag;  // n-1

  SymTridiagonal() = default;
  SymTridiagonal(std::vector<double> d, std::vector<double> e);

  Matrix toDense() const;
  void validate() const;
};

enum class BidiagonalKind { Upper, Lower };

struct Bidiagonal {
  int n = 0;
  BidiagonalKind orientation = BidiagonalKind::Upper;
  std::vector<double> diag;     // n
  std::vector<double> offdiag;  // n-1

  Bidiagonal() = default;
  Bidiagonal(BidiagonalKind kind, std::vector<double> d, std::vector<double> e);

  Matrix toDense() const;
  void validate() const;
  Bidiagonal transposed() const;

  /// B^T B and B B^T as symmetric tridiagonal matrices (formed explicitly;
  /// oracle/test use only).
  SymTridiagonal gram() const;
  SymTridiagonal gramTransposed() const;
};

/// The unique preferred QR factorization of A - lambda I (Definition of the
/// block-diagonal Hessenberg form with positive subdiagonals; singular inputs
/// get the zero row permuted to the bottom with det(P) = 1).
struct PreferredQr {
  std::vector<GivensRotation> rotations;  // Q = G_1 ... G_{n-1}
  Matrix Q;                               // dense orthogonal factor
  Matrix R;                               // upper triangular
  std::vector<int> blockStarts;           // 1-based start of each unreduced block
  std::optional<std::pair<int, int>> singularBlockIndex;  // (k, l), 1-based
  bool permutationApplied = false;
};

/// Explicit preferred QR of A - lambda I.  Block detection keys on exact-zero
/// offdiagonals and singularity on exact-zero R diagonals, matching the
/// paper's exact-arithmetic block semantics.  This is the oracle the implicit
/// step is tested against.
PreferredQr preferredQrExplicit(const SymTridiagonal& a, double lambda);

struct QrStepResult {
  std::vector<GivensRotation> rotations;  // G_1 ... G_{n-1}
  SymTridiagonal Abar;                    // = Q^T A Q
};

/// One implicit QR step on a symmetric tridiagonal matrix: bulge chasing with
/// a uniform rule.  Each rotation comes from the chase vector
/// (W(i,i-1), W(i+1,i-1)) when it is nonzero and from the restart vector
/// (W(i,i), W(i+1,i)) otherwise; givens((0,0)) = pi/2 makes the singular case
/// slide its zero row to the bottom without special handling.
QrStepResult qrStep(const SymTridiagonal& a, double lambda);

/// A vector colinear with (x1^2 - sigma^2, x1 x2)^T, computed with the
/// factorization (x1 - sigma)(x1 + sigma) after scaling by the largest
/// magnitude.  Returns (0, 0) exactly when the target vector is zero.
std::array<double, 2> bulgeStart(const std::array<double, 2>& x, double sigma);

struct SvdStepResult {
  std::vector<GivensRotation> S;  // left rotations
  std::vector<GivensRotation> T;  // right rotations
  Bidiagonal Bbar;                // = S^T B T, same orientation as B
};

/// One SVD step on a bidiagonal matrix with shift sigma >= 0, i.e. the
/// simultaneous QR steps on B^T B - sigma^2 I and B B^T - sigma^2 I executed
/// through Givens rotations on B itself.  Handles any number of zeros on the
/// band; lower bidiagonal inputs go through the transpose.
SvdStepResult svdStep(const Bidiagonal& b, double sigma);

/// Smaller and larger singular values of [f g; 0 h], LAPACK dlas2 style.
std::pair<double, double> singularValues2x2(double f, double g, double h);

/// All singular values, ascending, via one-sided Jacobi.  Small dense inputs
/// only; used for perfect shifts.
std::vector<double> singularValuesJacobi(const Matrix& a);

}  // namespace csd
