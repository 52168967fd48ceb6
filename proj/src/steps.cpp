#include "csd/steps.hpp"

#include <algorithm>
#include <cmath>

namespace csd {

namespace {

void requireFinite(const std::vector<double>& v, const char* what) {
  for (double x : v)
    if (!std::isfinite(x)) throw InvalidInputError(std::string(what) + ": non-finite entry");
}

}  // namespace

SymTridiagonal::SymTridiagonal(std::vector<double> d, std::vector<double> e)
    : n(static_cast<int>(d.size())), diag(std::move(d)), offdiag(std::move(e)) {
  validate();
}

void SymTridiagonal::validate() const {
  if (static_cast<int>(diag.size()) != n ||
      static_cast<int>(offdiag.size()) != std::max(n - 1, 0))
    throw InvalidInputError("SymTridiagonal: inconsistent sizes");
  requireFinite(diag, "SymTridiagonal");
  requireFinite(offdiag, "SymTridiagonal");
}

Matrix SymTridiagonal::toDense() const {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = diag[i];
  for (int i = 0; i + 1 < n; ++i) {
    m(i, i + 1) = offdiag[i];
    m(i + 1, i) = offdiag[i];
  }
  return m;
}

Bidiagonal::Bidiagonal(BidiagonalKind kind, std::vector<double> d, std::vector<double> e)
    : n(static_cast<int>(d.size())), orientation(kind), diag(std::move(d)), offdiag(std::move(e)) {
  validate();
}

void Bidiagonal::validate() const {
  if (static_cast<int>(diag.size()) != n ||
      static_cast<int>(offdiag.size()) != std::max(n - 1, 0))
    throw InvalidInputError("Bidiagonal: inconsistent sizes");
  requireFinite(diag, "Bidiagonal");
  requireFinite(offdiag, "Bidiagonal");
}

Matrix Bidiagonal::toDense() const {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = diag[i];
  for (int i = 0; i + 1 < n; ++i) {
    if (orientation == BidiagonalKind::Upper)
      m(i, i + 1) = offdiag[i];
    else
      m(i + 1, i) = offdiag[i];
  }
  return m;
}

Bidiagonal Bidiagonal::transposed() const {
  Bidiagonal t = *this;
  t.orientation =
      orientation == BidiagonalKind::Upper ? BidiagonalKind::Lower : BidiagonalKind::Upper;
  return t;
}

SymTridiagonal Bidiagonal::gram() const {
  // B^T B for upper orientation; for lower, gram of the transpose's transpose.
  if (orientation == BidiagonalKind::Lower) return transposed().gramTransposed();
  std::vector<double> d(n), e(std::max(n - 1, 0));
  for (int i = 0; i < n; ++i) {
    double prev = (i > 0) ? offdiag[i - 1] : 0.0;
    d[i] = diag[i] * diag[i] + prev * prev;
  }
  for (int i = 0; i + 1 < n; ++i) e[i] = diag[i] * offdiag[i];
  return SymTridiagonal(std::move(d), std::move(e));
}

SymTridiagonal Bidiagonal::gramTransposed() const {
  // B B^T for upper orientation.
  if (orientation == BidiagonalKind::Lower) return transposed().gram();
  std::vector<double> d(n), e(std::max(n - 1, 0));
  for (int i = 0; i < n; ++i) {
    double next = (i + 1 < n) ? offdiag[i] : 0.0;
    d[i] = diag[i] * diag[i] + next * next;
  }
  for (int i = 0; i + 1 < n; ++i) e[i] = offdiag[i] * diag[i + 1];
  return SymTridiagonal(std::move(d), std::move(e));
}

namespace {

/// Peels the unique Givens factorization G_1 ... G_{n-1} off an orthogonal
/// matrix whose column j, after removing G_1..G_{j-1}, is (c_j, s_j) in rows
/// (j, j+1).  Constructive form of the uniqueness argument.
std::vector<GivensRotation> peelGivensSequence(Matrix q) {
  int m = q.rows();
  std::vector<GivensRotation> out;
  out.reserve(std::max(m - 1, 0));
  for (int j = 1; j <= m - 1; ++j) {
    double c = q(j - 1, j - 1);
    double s = q(j, j - 1);
    double r = std::hypot(c, s);
    GivensRotation g;
    g.dim = m;
    g.i1 = j;
    g.i2 = j + 1;
    if (r == 0.0) {
      g.c = 1.0;
      g.s = 0.0;
    } else {
      c /= r;
      s /= r;
      if (s < 0.0) {
        c = -c;
        s = -s;
      }
      if (s == 0.0) c = (c < 0.0) ? -1.0 : 1.0;
      g.c = c;
      g.s = s;
    }
    g.applyTransposeLeft(q);
    out.push_back(g);
  }
  return out;
}

}  // namespace

PreferredQr preferredQrExplicit(const SymTridiagonal& a, double lambda) {
  a.validate();
  if (!std::isfinite(lambda)) throw InvalidInputError("preferredQrExplicit: non-finite shift");
  const int m = a.n;

  PreferredQr out;
  out.Q = Matrix::identity(m);
  out.R = a.toDense();
  for (int i = 0; i < m; ++i) out.R(i, i) -= lambda;
  if (m == 0) return out;

  // Unreduced blocks of A - lambda I (same offdiagonal zeros as A).
  out.blockStarts.push_back(1);
  for (int i = 0; i + 1 < m; ++i)
    if (a.offdiag[i] == 0.0) out.blockStarts.push_back(i + 2);
  int r = static_cast<int>(out.blockStarts.size());
  auto blockEnd = [&](int bi) { return bi + 1 < r ? out.blockStarts[bi + 1] - 1 : m; };

  // Per-block Givens QR with positive-subdiagonal normalization.
  std::vector<std::vector<GivensRotation>> blockRots(r);
  Matrix R = out.R;
  for (int bi = 0; bi < r; ++bi) {
    for (int i = out.blockStarts[bi]; i <= blockEnd(bi) - 1; ++i) {
      GivensRotation g = givens(m, i, i + 1, {R(i - 1, i - 1), R(i, i - 1)});
      g.applyTransposeLeft(R);
      R(i, i - 1) = 0.0;
      blockRots[bi].push_back(g);
    }
  }

  // Least noninvertible block: first exact zero on the R diagonal.
  int l = 0, k = -1;
  for (int bi = 0; bi < r && k < 0; ++bi)
    for (int i = out.blockStarts[bi]; i <= blockEnd(bi); ++i)
      if (R(i - 1, i - 1) == 0.0) {
        k = bi;
        l = blockEnd(bi);  // zero diagonal can only sit in the block's last row
        break;
      }

  if (k < 0) {
    for (auto& rots : blockRots)
      for (auto& g : rots) g.applyRight(out.Q);
    out.R = R;
    out.rotations = peelGivensSequence(out.Q);
    return out;
  }

  // Case 2: Q = (Q_1 + ... + Q_k + I) P and R = P^T (R_1 + ... + R_k +
  // (A_{k+1} - lambda I) + ...), with the cyclic P chosen so det(P) = 1.
  out.singularBlockIndex = std::make_pair(k + 1, l);
  out.permutationApplied = true;

  Matrix Rbuild = a.toDense();
  for (int i = 0; i < m; ++i) Rbuild(i, i) -= lambda;
  for (int bi = 0; bi <= k; ++bi)
    for (int i = out.blockStarts[bi]; i <= blockEnd(bi); ++i)
      for (int j = 1; j <= m; ++j) Rbuild(i - 1, j - 1) = R(i - 1, j - 1);

  Matrix Rp(m, m);
  for (int i = 1; i <= m; ++i) {
    int src = (i < l) ? i : (i < m ? i + 1 : l);  // P^T moves row l to the bottom
    for (int j = 1; j <= m; ++j) Rp(i - 1, j - 1) = Rbuild(src - 1, j - 1);
  }
  double sign = ((m - l) % 2 == 0) ? 1.0 : -1.0;
  for (int j = 1; j <= m; ++j) Rp(m - 1, j - 1) *= sign;

  Matrix Qb = Matrix::identity(m);
  for (int bi = 0; bi <= k; ++bi)
    for (auto& g : blockRots[bi]) g.applyRight(Qb);
  Matrix Qp(m, m);
  for (int j = 1; j <= m; ++j) {
    int src = (j < l) ? j : (j < m ? j + 1 : l);  // columns of Q P
    double colSign = (j == m) ? sign : 1.0;
    for (int i = 1; i <= m; ++i) Qp(i - 1, j - 1) = colSign * Qb(i - 1, src - 1);
  }

  out.Q = Qp;
  out.R = Rp;
  out.rotations = peelGivensSequence(out.Q);
  return out;
}

QrStepResult qrStep(const SymTridiagonal& a, double lambda) {
  a.validate();
  if (!std::isfinite(lambda)) throw InvalidInputError("qrStep: non-finite shift");
  const int m = a.n;

  Matrix w = a.toDense();
  for (int i = 0; i < m; ++i) w(i, i) -= lambda;

  QrStepResult out;
  out.rotations.reserve(std::max(m - 1, 0));
  for (int i = 1; i <= m - 1; ++i) {
    std::array<double, 2> x;
    if (i == 1) {
      x = {w(0, 0), w(1, 0)};
    } else {
      std::array<double, 2> chase = {w(i - 1, i - 2), w(i, i - 2)};
      if (chase[0] != 0.0 || chase[1] != 0.0)
        x = chase;
      else
        x = {w(i - 1, i - 1), w(i, i - 1)};
    }
    GivensRotation g = givens(m, i, i + 1, x);
    g.applyTransposeLeft(w);
    g.applyRight(w);
    if (i >= 2) {
      w(i, i - 2) = 0.0;  // annihilated bulge (i+1, i-1) and its mirror
      w(i - 2, i) = 0.0;
    }
    out.rotations.push_back(g);
  }

  std::vector<double> d(m), e(std::max(m - 1, 0));
  for (int i = 0; i < m; ++i) d[i] = w(i, i) + lambda;
  for (int i = 0; i + 1 < m; ++i) e[i] = 0.5 * (w(i + 1, i) + w(i, i + 1));
  out.Abar = SymTridiagonal(std::move(d), std::move(e));
  return out;
}

std::array<double, 2> bulgeStart(const std::array<double, 2>& x, double sigma) {
  if (!(sigma >= 0.0)) throw InvalidInputError("bulgeStart: shift must be nonnegative");
  if (!std::isfinite(x[0]) || !std::isfinite(x[1]))
    throw InvalidInputError("bulgeStart: non-finite input");
  double scale = std::max({std::abs(x[0]), std::abs(x[1]), sigma});
  if (scale == 0.0) return {0.0, 0.0};
  double a = x[0] / scale, b = x[1] / scale, t = sigma / scale;
  double f = (a - t) * (a + t);
  double g = a * b;
  return {f, g};
}

namespace {

SvdStepResult svdStepUpper(const Bidiagonal& b, double sigma) {
  const int m = b.n;
  Matrix w = b.toDense();

  SvdStepResult out;
  out.S.reserve(std::max(m - 1, 0));
  out.T.reserve(std::max(m - 1, 0));

  for (int i = 1; i <= m - 1; ++i) {
    // Right rotation T_i on columns (i, i+1): chases the row bulge at
    // (i-1, i+1) or starts a fresh bulge from row i.
    std::array<double, 2> x;
    if (i == 1) {
      x = bulgeStart({w(0, 0), w(0, 1)}, sigma);
    } else {
      std::array<double, 2> chase = {w(i - 2, i - 1), w(i - 2, i)};
      if (chase[0] != 0.0 || chase[1] != 0.0)
        x = chase;
      else
        x = bulgeStart({w(i - 1, i - 1), w(i - 1, i)}, sigma);
    }
    GivensRotation t = givens(m, i, i + 1, x);
    t.applyRight(w);
    if (i >= 2) w(i - 2, i) = 0.0;
    out.T.push_back(t);

    // Left rotation S_i on rows (i, i+1): chases the column pair
    // (B(i,i), B(i+1,i)) or starts a fresh bulge from column i+1.
    std::array<double, 2> xs;
    {
      std::array<double, 2> chase = {w(i - 1, i - 1), w(i, i - 1)};
      if (chase[0] != 0.0 || chase[1] != 0.0)
        xs = chase;
      else
        xs = bulgeStart({w(i - 1, i), w(i, i)}, sigma);
    }
    GivensRotation s = givens(m, i, i + 1, xs);
    s.applyTransposeLeft(w);
    w(i, i - 1) = 0.0;
    out.S.push_back(s);
  }

  std::vector<double> d(m), e(std::max(m - 1, 0));
  for (int i = 0; i < m; ++i) d[i] = w(i, i);
  for (int i = 0; i + 1 < m; ++i) e[i] = w(i, i + 1);
  out.Bbar = Bidiagonal(BidiagonalKind::Upper, std::move(d), std::move(e));
  return out;
}

}  // namespace

SvdStepResult svdStep(const Bidiagonal& b, double sigma) {
  b.validate();
  if (!(sigma >= 0.0)) throw InvalidInputError("svdStep: shift must be nonnegative");
  if (b.orientation == BidiagonalKind::Upper) return svdStepUpper(b, sigma);
  SvdStepResult t = svdStepUpper(b.transposed(), sigma);
  SvdStepResult out;
  out.S = std::move(t.T);
  out.T = std::move(t.S);
  out.Bbar = t.Bbar.transposed();
  return out;
}

std::pair<double, double> singularValues2x2(double f, double g, double h) {
  // LAPACK dlas2.
  double fa = std::abs(f), ga = std::abs(g), ha = std::abs(h);
  double fhmn = std::min(fa, ha), fhmx = std::max(fa, ha);
  double ssmin, ssmax;
  if (fhmn == 0.0) {
    ssmin = 0.0;
    if (fhmx == 0.0) {
      ssmax = ga;
    } else {
      double mn = std::min(fhmx, ga), mx = std::max(fhmx, ga);
      double ratio = mn / mx;
      ssmax = mx * std::sqrt(1.0 + ratio * ratio);
    }
  } else {
    if (ga < fhmx) {
      double as = 1.0 + fhmn / fhmx;
      double at = (fhmx - fhmn) / fhmx;
      double au = (ga / fhmx) * (ga / fhmx);
      double c = 2.0 / (std::sqrt(as * as + au) + std::sqrt(at * at + au));
      ssmin = fhmn * c;
      ssmax = fhmx / c;
    } else {
      double au = fhmx / ga;
      if (au == 0.0) {
        ssmin = (fhmn * fhmx) / ga;
        ssmax = ga;
      } else {
        double as = 1.0 + fhmn / fhmx;
        double at = (fhmx - fhmn) / fhmx;
        double c =
            1.0 / (std::sqrt(1.0 + (as * au) * (as * au)) + std::sqrt(1.0 + (at * au) * (at * au)));
        ssmin = 2.0 * ((fhmn * c) * au);
        ssmax = ga / (c + c);
      }
    }
  }
  return {ssmin, ssmax};
}

std::vector<double> singularValuesJacobi(const Matrix& a) {
  // One-sided Jacobi: orthogonalize columns of a working copy; singular
  // values are the final column norms.
  Matrix w = a;
  int n = w.cols();
  const int maxSweeps = 60;
  for (int sweep = 0; sweep < maxSweeps; ++sweep) {
    bool rotated = false;
    for (int p = 0; p < n - 1; ++p)
      for (int q = p + 1; q < n; ++q) {
        double app = 0.0, aqq = 0.0, apq = 0.0;
        for (int i = 0; i < w.rows(); ++i) {
          app += w(i, p) * w(i, p);
          aqq += w(i, q) * w(i, q);
          apq += w(i, p) * w(i, q);
        }
        if (apq == 0.0 || apq * apq <= 1e-32 * app * aqq) continue;
        rotated = true;
        double tau = (aqq - app) / (2.0 * apq);
        double t = (tau >= 0.0) ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                                : -1.0 / (-tau + std::sqrt(1.0 + tau * tau));
        double c = 1.0 / std::sqrt(1.0 + t * t);
        double s = t * c;
        for (int i = 0; i < w.rows(); ++i) {
          double wp = w(i, p), wq = w(i, q);
          w(i, p) = c * wp - s * wq;
          w(i, q) = s * wp + c * wq;
        }
      }
    if (!rotated) break;
  }
  std::vector<double> sv(n);
  for (int j = 0; j < n; ++j) {
    double s = 0.0;
    for (int i = 0; i < w.rows(); ++i) s += w(i, j) * w(i, j);
    sv[j] = std::sqrt(s);
  }
  std::sort(sv.begin(), sv.end());
  return sv;
}

}  // namespace csd
