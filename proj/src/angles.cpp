#include "csd/angles.hpp"

#include <cmath>

namespace csd {

namespace {
constexpr double kHalfPi = 1.5707963267948966;
}

AnglePair AnglePair::fromValue(double v) {
  if (!(v >= 0.0 && v <= kHalfPi)) throw InvalidInputError("AnglePair: value outside [0, pi/2]");
  AnglePair p;
  p.value = v;
  p.complement = kHalfPi - v;
  return p;
}

AnglePair AnglePair::fromAtan2(double y, double x) {
  if (!(y >= 0.0) || !(x >= 0.0)) throw InvalidInputError("AnglePair::fromAtan2: negative leg");
  if (y == 0.0 && x == 0.0) return AnglePair::zero();
  AnglePair p;
  p.value = std::atan2(y, x);
  p.complement = std::atan2(x, y);
  return p;
}

double AnglePair::cos() const {
  return value <= complement ? std::cos(value) : std::sin(complement);
}

double AnglePair::sin() const {
  return value <= complement ? std::sin(value) : std::cos(complement);
}

AngleSet::AngleSet(std::vector<AnglePair> thetaIn, std::vector<AnglePair> phiIn)
    : q(static_cast<int>(thetaIn.size())), theta(std::move(thetaIn)), phi(std::move(phiIn)) {
  validate();
}

void AngleSet::validate() const {
  if (static_cast<int>(theta.size()) != q) throw InvalidInputError("AngleSet: theta size != q");
  size_t wantPhi = q > 0 ? static_cast<size_t>(q - 1) : 0;
  if (phi.size() != wantPhi) throw InvalidInputError("AngleSet: phi size != q-1");
  auto checkPair = [](const AnglePair& p) {
    if (!(p.value >= 0.0 && p.value <= kHalfPi) ||
        !(p.complement >= 0.0 && p.complement <= kHalfPi))
      throw InvalidInputError("AngleSet: angle outside [0, pi/2]");
    if (std::abs(p.value + p.complement - kHalfPi) > 4.0 * kEps)
      throw InvalidInputError("AngleSet: angle pair members are inconsistent");
  };
  for (const AnglePair& p : theta) checkPair(p);
  for (const AnglePair& p : phi) checkPair(p);
}

Matrix materialize(const AngleSet& angles) {
  angles.validate();
  int q = angles.q;
  Matrix m(2 * q, 2 * q);
  if (q == 0) return m;

  std::vector<double> c(q), s(q), cp(q > 1 ? q - 1 : 0), sp(q > 1 ? q - 1 : 0);
  for (int i = 0; i < q; ++i) {
    c[i] = angles.theta[i].cos();
    s[i] = angles.theta[i].sin();
  }
  for (int i = 0; i + 1 < q; ++i) {
    cp[i] = angles.phi[i].cos();
    sp[i] = angles.phi[i].sin();
  }

  auto b11 = [&](int i, int j) -> double& { return m(i, j); };
  auto b12 = [&](int i, int j) -> double& { return m(i, q + j); };
  auto b21 = [&](int i, int j) -> double& { return m(q + i, j); };
  auto b22 = [&](int i, int j) -> double& { return m(q + i, q + j); };

  for (int i = 0; i < q; ++i) {
    double chain = (i == 0) ? 1.0 : cp[i - 1];
    b11(i, i) = c[i] * chain;
    b21(i, i) = -s[i] * chain;
    double tail = (i == q - 1) ? 1.0 : cp[i];
    b12(i, i) = s[i] * tail;
    b22(i, i) = c[i] * tail;
  }
  for (int i = 0; i + 1 < q; ++i) {
    b11(i, i + 1) = -s[i] * sp[i];
    b21(i, i + 1) = -c[i] * sp[i];
    b12(i + 1, i) = c[i + 1] * sp[i];
    b22(i + 1, i) = -s[i + 1] * sp[i];
  }
  return m;
}

Matrix embed(const AngleSet& angles, int m, int p, int q) {
  if (q != angles.q) throw InvalidInputError("embed: q does not match the angle set");
  if (!(0 <= q && q <= p && p + q <= m)) throw InvalidInputError("embed: need 0 <= q <= p, p+q <= m");
  Matrix out(m, m);
  Matrix blocks = materialize(angles);
  // Row blocks (q, p-q, q, m-p-q) by column blocks (q, q, p-q, m-p-q).
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j) {
      out(i, j) = blocks(i, j);
      out(i, q + j) = blocks(i, q + j);
      out(p + i, j) = blocks(q + i, j);
      out(p + i, q + j) = blocks(q + i, q + j);
    }
  for (int i = 0; i < p - q; ++i) out(q + i, 2 * q + i) = 1.0;
  for (int i = 0; i < m - p - q; ++i) out(p + q + i, p + q + i) = 1.0;
  return out;
}

bool validateSignPattern(const Matrix& m, int q, double zeroTol) {
  if (m.rows() != 2 * q || m.cols() != 2 * q)
    throw InvalidInputError("validateSignPattern: matrix must be 2q-by-2q");

  auto isZeroOk = [&](double x) { return std::abs(x) <= zeroTol; };
  auto nonneg = [&](double x) { return x >= -zeroTol; };
  auto nonpos = [&](double x) { return x <= zeroTol; };

  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j) {
      double v11 = m(i, j), v12 = m(i, q + j), v21 = m(q + i, j), v22 = m(q + i, q + j);
      bool band11 = (j == i || j == i + 1);
      bool band12 = (j == i || j == i - 1);
      if (!band11 && (!isZeroOk(v11) || !isZeroOk(v21))) return false;
      if (!band12 && (!isZeroOk(v12) || !isZeroOk(v22))) return false;
      if (j == i) {
        if (!nonneg(v11) || !nonpos(v21) || !nonneg(v12) || !nonneg(v22)) return false;
      } else if (j == i + 1) {
        if (!nonpos(v11) || !nonpos(v21)) return false;
      } else if (j == i - 1) {
        if (!nonneg(v12) || !nonpos(v22)) return false;
      }
    }
  return true;
}

AngleSet extractAngles(const Matrix& m, int q, double zeroTol) {
  if (!validateSignPattern(m, q, zeroTol))
    throw StructureError("extractAngles: matrix is not in bidiagonal block form");

  std::vector<AnglePair> theta(q), phi(q > 1 ? q - 1 : 0);
  for (int i = 0; i < q; ++i) {
    // theta_i appears as (c_i, -s_i) * c'_{i-1} in column i of blocks 11/21
    // and as (c_i, -s_i) * s'_{i-1} in column i-1 of blocks 12/22.
    double ya = -m(q + i, i), xa = m(i, i);
    double ha = std::hypot(ya, xa);
    if (i > 0) {
      double yb = -m(q + i, q + i - 1), xb = m(i, q + i - 1);
      if (std::hypot(yb, xb) > ha) {
        ya = yb;
        xa = xb;
      }
    }
    theta[i] = AnglePair::fromAtan2(std::max(ya, 0.0), std::max(xa, 0.0));
  }
  for (int i = 0; i + 1 < q; ++i) {
    // phi_i appears as (-s'_i, c'_i) * s_i in row i of blocks 11/12 and as
    // (-s'_i, c'_i) * c_i in row i of blocks 21/22.
    double ya = -m(i, i + 1), xa = m(i, q + i);
    double yb = -m(q + i, i + 1), xb = m(q + i, q + i);
    if (std::hypot(yb, xb) > std::hypot(ya, xa)) {
      ya = yb;
      xa = xb;
    }
    phi[i] = AnglePair::fromAtan2(std::max(ya, 0.0), std::max(xa, 0.0));
  }
  return AngleSet(std::move(theta), std::move(phi));
}

std::pair<SignatureQuadruple, AngleSet> fixSignsBands(int q, std::vector<double>& b11d,
                                                      std::vector<double>& b11e,
                                                      std::vector<double>& b21d,
                                                      std::vector<double>& b21e,
                                                      std::vector<double>& b12d,
                                                      std::vector<double>& b12e,
                                                      std::vector<double>& b22d,
                                                      std::vector<double>& b22e) {
  SignatureQuadruple sig;
  sig.d1.assign(q, 1.0);
  sig.d2.assign(q, 1.0);
  sig.e1.assign(q, 1.0);
  sig.e2.assign(q, 1.0);
  std::vector<AnglePair> theta(q), phi(q > 1 ? q - 1 : 0);

  // Degenerate run of the bidiagonalization: the input already has the right
  // zero pattern, so every Householder reflector is a sign flip and every
  // u/v vector is a scalar.
  double cp = 1.0, sp = 0.0;  // cos/sin of phi_{i-1}
  for (int i = 0; i < q; ++i) {
    double u1 = cp * b11d[i] + (i > 0 ? sp * b12e[i - 1] : 0.0);
    double u2 = -(cp * b21d[i] + (i > 0 ? sp * b22e[i - 1] : 0.0));
    theta[i] = AnglePair::fromAtan2(std::abs(u2), std::abs(u1));
    if (u1 < 0.0) {  // flip row i of block-row 1
      sig.d1[i] = -1.0;
      b11d[i] = -b11d[i];
      if (i + 1 < q) b11e[i] = -b11e[i];
      b12d[i] = -b12d[i];
      if (i > 0) b12e[i - 1] = -b12e[i - 1];
    }
    if (u2 < 0.0) {  // flip row i of block-row 2
      sig.d2[i] = -1.0;
      b21d[i] = -b21d[i];
      if (i + 1 < q) b21e[i] = -b21e[i];
      b22d[i] = -b22d[i];
      if (i > 0) b22e[i - 1] = -b22e[i - 1];
    }
    double ci = theta[i].cos(), si = theta[i].sin();
    if (i + 1 < q) {
      double v1 = -si * b11e[i] - ci * b21e[i];
      double v2 = si * b12d[i] + ci * b22d[i];
      phi[i] = AnglePair::fromAtan2(std::abs(v1), std::abs(v2));
      if (v1 < 0.0) {  // flip column i+1 of block-column 1
        sig.e1[i + 1] = -1.0;
        b11e[i] = -b11e[i];
        b11d[i + 1] = -b11d[i + 1];
        b21e[i] = -b21e[i];
        b21d[i + 1] = -b21d[i + 1];
      }
      if (v2 < 0.0) {  // flip column i of block-column 2
        sig.e2[i] = -1.0;
        b12d[i] = -b12d[i];
        b12e[i] = -b12e[i];
        b22d[i] = -b22d[i];
        b22e[i] = -b22e[i];
      }
      cp = phi[i].cos();
      sp = phi[i].sin();
    } else {
      double v2 = si * b12d[i] + ci * b22d[i];
      if (v2 < 0.0) {
        sig.e2[i] = -1.0;
        b12d[i] = -b12d[i];
        b22d[i] = -b22d[i];
      }
    }
  }
  return {std::move(sig), AngleSet(std::move(theta), std::move(phi))};
}

std::pair<SignatureQuadruple, AngleSet> fixSigns(const Matrix& b11, const Matrix& b12,
                                                 const Matrix& b21, const Matrix& b22,
                                                 double zeroTol) {
  int q = b11.rows();
  for (const Matrix* b : {&b11, &b12, &b21, &b22})
    if (b->rows() != q || b->cols() != q)
      throw InvalidInputError("fixSigns: blocks must be square with equal sizes");

  auto checkBandZero = [&](const Matrix& b, bool upper, const char* name) {
    for (int i = 0; i < q; ++i)
      for (int j = 0; j < q; ++j) {
        bool onBand = upper ? (j == i || j == i + 1) : (j == i || j == i - 1);
        if (!onBand && std::abs(b(i, j)) > zeroTol)
          throw StructureError(std::string("fixSigns: off-band entry in ") + name);
      }
  };
  checkBandZero(b11, true, "B11");
  checkBandZero(b21, true, "B21");
  checkBandZero(b12, false, "B12");
  checkBandZero(b22, false, "B22");

  std::vector<double> d11(q), e11(std::max(q - 1, 0)), d21(q), e21(std::max(q - 1, 0));
  std::vector<double> d12(q), e12(std::max(q - 1, 0)), d22(q), e22(std::max(q - 1, 0));
  for (int i = 0; i < q; ++i) {
    d11[i] = b11(i, i);
    d21[i] = b21(i, i);
    d12[i] = b12(i, i);
    d22[i] = b22(i, i);
  }
  for (int i = 0; i + 1 < q; ++i) {
    e11[i] = b11(i, i + 1);
    e21[i] = b21(i, i + 1);
    e12[i] = b12(i + 1, i);
    e22[i] = b22(i + 1, i);
  }
  return fixSignsBands(q, d11, e11, d21, e21, d12, e12, d22, e22);
}

}  // namespace csd
