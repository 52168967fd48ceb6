#pragma once

#include <functional>

#include "csd/angles.hpp"
#include "csd/dense.hpp"
#include "csd/householder.hpp"
#include "csd/norms.hpp"

namespace csd {

/// A partitioned (near-)unitary matrix: X is m-by-m, split at row p and
/// column q, with 0 <= q <= p and p + q <= m.
template <typename T>
struct CsdProblem {
  DenseMatrix<T> X;
  int p = 0;
  int q = 0;

  int m() const { return X.rows(); }

  void validate() const {
    if (X.rows() != X.cols()) throw InvalidInputError("CsdProblem: X must be square");
    if (!(0 <= q && q <= p && p + q <= X.rows()))
      throw InvalidInputError("CsdProblem: need 0 <= q <= p and p + q <= m");
    if (!X.isFinite()) throw InvalidInputError("CsdProblem: non-finite entries");
  }
};

template <typename T>
struct BidiagonalizationResult {
  AngleSet angles;
  DenseMatrix<T> P1, P2, Q1, Q2;
};

/// Weighted average of two (nearly) colinear vectors, the longer one weighted
/// more heavily:  w = ||a|| a + ||b|| sigma b, normalized, where sigma is the
/// sign (unit phase) of <a, b>.  Zero only when both inputs are zero.
template <typename T>
std::vector<T> weightedColinearAverage(const std::vector<T>& a, const std::vector<T>& b) {
  if (a.size() != b.size()) throw InvalidInputError("weightedColinearAverage: length mismatch");
  double na = vectorNorm(a), nb = vectorNorm(b);
  if (na == 0.0 && nb == 0.0) return std::vector<T>(a.size(), T{});
  T ip = innerProduct(a, b);
  double aip = std::sqrt(abs2(ip));
  T sigma = (aip == 0.0) ? T{1} : conj_scalar(ip) * (1.0 / aip);
  std::vector<T> w(a.size());
  for (size_t i = 0; i < w.size(); ++i) w[i] = na * a[i] + nb * (sigma * b[i]);
  double nw = vectorNorm(w);
  if (nw == 0.0) {
    // Exact cancellation of equally weighted anti-aligned inputs; keep the
    // longer input's direction.
    const std::vector<T>& src = (na >= nb) ? a : b;
    double ns = vectorNorm(src);
    for (size_t i = 0; i < w.size(); ++i) w[i] = src[i] * (1.0 / ns);
    return w;
  }
  for (T& x : w) x *= (1.0 / nw);
  return w;
}

namespace detail {

/// One Householder source vector, combined from its two redundant origins:
/// the literal ca * a + cb * b when a and b are colinear to 1e-13 relative,
/// otherwise the norm-weighted average of the weighted terms themselves,
/// rescaled to the literal length.  Averaging ca * a with cb * b (rather than
/// a with b) keeps the output oriented like the literal combination even when
/// the shorter term is pure roundoff noise, which is what the sign pattern of
/// the reduction relies on.
template <typename T>
std::vector<T> combineSources(double ca, const std::vector<T>& a, double cb,
                              const std::vector<T>& b) {
  std::vector<T> u(a.size());
  for (size_t k = 0; k < u.size(); ++k) u[k] = ca * a[k] + cb * b[k];
  double na = vectorNorm(a), nb = vectorNorm(b);
  if (na == 0.0 || nb == 0.0) return u;
  double misalignment = na * nb - std::sqrt(abs2(innerProduct(a, b)));
  if (misalignment <= 1e-13 * na * nb) return u;
  std::vector<T> wa(a.size()), wb(b.size());
  for (size_t k = 0; k < u.size(); ++k) {
    wa[k] = ca * a[k];
    wb[k] = cb * b[k];
  }
  // The average anchors its orientation on the first argument, so the longer
  // term goes first: a noise-level term must never flip the signal's sign.
  std::vector<T> dir = std::abs(ca) * na >= std::abs(cb) * nb
                           ? weightedColinearAverage(wa, wb)
                           : weightedColinearAverage(wb, wa);
  double len = std::abs(ca) * na + std::abs(cb) * nb;
  for (size_t k = 0; k < u.size(); ++k) u[k] = len * dir[k];
  return u;
}

}  // namespace detail

/// Per-iteration observer for instrumented runs; receives the working matrix
/// after each loop iteration i = 1..q.
template <typename T>
using BidiagonalizeTrace = std::function<void(const DenseMatrix<T>&, int)>;

/// Phase I.  Reduces X to bidiagonal block form with paired Householder
/// reflectors:
///   X = diag(P1, P2) * embed(angles, m, p, q) * diag(Q1, Q2)^*.
template <typename T>
BidiagonalizationResult<T> bidiagonalize(const CsdProblem<T>& problem,
                                         double unitarityBound = 0.1,
                                         const BidiagonalizeTrace<T>& trace = nullptr) {
  problem.validate();
  const int m = problem.m(), p = problem.p, q = problem.q;

  {
    DenseMatrix<T> g = problem.X.adjoint() * problem.X;
    for (int i = 0; i < m; ++i) g(i, i) -= T{1};
    double defect = spectralNorm(g);
    if (defect > unitarityBound)
      throw RejectedInputError("bidiagonalize: input is too far from unitary", defect);
  }

  BidiagonalizationResult<T> out;
  out.P1 = DenseMatrix<T>::identity(p);
  out.P2 = DenseMatrix<T>::identity(m - p);
  out.Q1 = DenseMatrix<T>::identity(q);
  out.Q2 = DenseMatrix<T>::identity(m - q);

  DenseMatrix<T> Y = problem.X;
  std::vector<AnglePair> theta(q), phi(q > 1 ? q - 1 : 0);
  double cp = 1.0, sp = 0.0;  // cos/sin of phi_{i-1}

  for (int i = 1; i <= q; ++i) {
    // Column stage: u1 spans rows i..p, u2 spans rows p+i..m.
    std::vector<T> u1, u2;
    if (i == 1) {
      u1 = Y.colSegment(1, p, 1);
      u2 = Y.colSegment(p + 1, m, 1);
      for (T& x : u2) x = -x;
    } else {
      u1 = detail::combineSources(cp, Y.colSegment(i, p, i), sp, Y.colSegment(i, p, q - 1 + i));
      u2 = detail::combineSources(-cp, Y.colSegment(p + i, m, i), -sp,
                                  Y.colSegment(p + i, m, q - 1 + i));
    }
    theta[i - 1] = AnglePair::fromAtan2(vectorNorm(u2), vectorNorm(u1));

    HouseholderReflector<T> f1 = house(u1);
    HouseholderReflector<T> f2 = house(u2);
    f1.applyToRowsLeft(Y, i - 1);      // Y(i:p, :)   := F1 Y(i:p, :)
    f2.applyToRowsLeft(Y, p + i - 1);  // Y(p+i:m, :) := F2 Y(p+i:m, :)
    f1.applyAdjointToColsRight(out.P1, i - 1);
    f2.applyAdjointToColsRight(out.P2, i - 1);

    // Row stage: v1 spans columns i+1..q, v2 spans columns q+i..m.
    double ci = theta[i - 1].cos(), si = theta[i - 1].sin();
    if (i < q) {
      std::vector<T> v1 =
          detail::combineSources(-si, Y.rowSegment(i, i + 1, q), -ci, Y.rowSegment(p + i, i + 1, q));
      std::vector<T> v2 =
          detail::combineSources(si, Y.rowSegment(i, q + i, m), ci, Y.rowSegment(p + i, q + i, m));
      phi[i - 1] = AnglePair::fromAtan2(vectorNorm(v1), vectorNorm(v2));

      for (T& x : v1) x = conj_scalar(x);
      HouseholderReflector<T> g1 = house(v1);
      g1.applyAdjointToColsRight(Y, i);  // Y(:, i+1:q) := Y(:, i+1:q) G1^*
      g1.applyAdjointToColsRight(out.Q1, i);

      for (T& x : v2) x = conj_scalar(x);
      HouseholderReflector<T> g2 = house(v2);
      g2.applyAdjointToColsRight(Y, q + i - 1);  // Y(:, q+i:m) := Y(:, q+i:m) G2^*
      g2.applyAdjointToColsRight(out.Q2, i - 1);

      cp = phi[i - 1].cos();
      sp = phi[i - 1].sin();
    } else {
      std::vector<T> v2 =
          detail::combineSources(si, Y.rowSegment(i, q + i, m), ci, Y.rowSegment(p + i, q + i, m));
      for (T& x : v2) x = conj_scalar(x);
      HouseholderReflector<T> g2 = house(v2);
      g2.applyAdjointToColsRight(Y, q + i - 1);
      g2.applyAdjointToColsRight(out.Q2, i - 1);
    }

    if (trace) trace(Y, i);
  }

  // The loop leaves an arbitrary orthogonal block W in the rows and columns
  // of the middle factor that must carry I_{p-q} and I_{m-p-q}; folding W*
  // into Q2 pins those identities exactly.  W is re-orthonormalized through
  // its Householder QR factor first so Q2 keeps reflector-level orthogonality.
  if (m > 2 * q) {
    std::vector<int> wRows;  // 0-based
    for (int r = q; r < p; ++r) wRows.push_back(r);
    for (int r = p + q; r < m; ++r) wRows.push_back(r);
    int w = m - 2 * q;
    DenseMatrix<T> W(w, w);
    for (int r = 0; r < w; ++r)
      for (int c = 0; c < w; ++c) W(r, c) = Y(wRows[r], 2 * q + c);
    DenseMatrix<T> Wq = DenseMatrix<T>::identity(w);
    for (int j = 1; j <= w; ++j) {
      HouseholderReflector<T> f = house(W.colSegment(j, w, j));
      f.applyToRowsLeft(W, j - 1);
      f.applyAdjointToColsRight(Wq, j - 1);
    }
    // Q2 columns q+1..m-q (0-based q..m-q-1) pick up W*.
    DenseMatrix<T> tail = out.Q2.sub(1, m - q, q + 1, m - q) * Wq.adjoint();
    out.Q2.setSub(1, q + 1, tail);
  }

  out.angles = AngleSet(std::move(theta), std::move(phi));
  return out;
}

}  // namespace csd
