#include "csd/driver.hpp"

#include <algorithm>
#include <cmath>

namespace csd {

namespace {
constexpr double kInvSqrt2 = 0.7071067811865475244;
}

ShiftPair ShiftPair::fromMu(double mu) {
  if (!(mu >= 0.0 && mu <= 1.0)) throw InvalidInputError("ShiftPair: shift outside [0, 1]");
  ShiftPair p;
  p.mu = mu;
  p.nu = std::sqrt((1.0 - mu) * (1.0 + mu));
  return p;
}

ShiftPair ShiftPair::fromNu(double nu) {
  if (!(nu >= 0.0 && nu <= 1.0)) throw InvalidInputError("ShiftPair: shift outside [0, 1]");
  ShiftPair p;
  p.nu = nu;
  p.mu = std::sqrt((1.0 - nu) * (1.0 + nu));
  return p;
}

std::array<double, 2> merge(const std::array<double, 2>& v, const std::array<double, 2>& w,
                            const MergeContext& context) {
  if (context.firstExisting && !context.secondExisting) return v;
  if (!context.firstExisting && context.secondExisting) return w;
  if (context.firstExisting && context.secondExisting) {
    std::vector<double> a{v[0], v[1]}, b{w[0], w[1]};
    std::vector<double> avg = weightedColinearAverage(a, b);
    return {avg[0], avg[1]};
  }
  // Two new bulges: the smaller shift avoids roundoff in bulge_start.
  return context.firstShift <= context.secondShift ? v : w;
}

namespace {

// One source vector for a merge site: the chase pair when an existing bulge
// forces the rotation, otherwise a fresh bulge_start vector.
struct Source {
  std::array<double, 2> vec{0.0, 0.0};
  bool existing = false;
};

// The four blocks of the working 2n-by-2n matrix, as 0-based accessors.
struct Blocks {
  Matrix& m;
  int n;

  double& b11(int i, int j) { return m(i, j); }
  double& b12(int i, int j) { return m(i, n + j); }
  double& b21(int i, int j) { return m(n + i, j); }
  double& b22(int i, int j) { return m(n + i, n + j); }
};

// Upper bidiagonal blocks (B11, B21): right-rotation source at 1-based slot i.
Source upperRightSource(Blocks& bl, bool top, int i, double shift) {
  auto at = [&](int r, int c) { return top ? bl.b11(r, c) : bl.b21(r, c); };
  Source s;
  if (i > 1) {
    std::array<double, 2> chase = {at(i - 2, i - 1), at(i - 2, i)};
    if (chase[0] != 0.0 || chase[1] != 0.0) {
      s.vec = chase;
      s.existing = true;
      return s;
    }
  }
  s.vec = bulgeStart({at(i - 1, i - 1), at(i - 1, i)}, shift);
  return s;
}

// Upper bidiagonal blocks: left-rotation source at slot i.
Source upperLeftSource(Blocks& bl, bool top, int i, double shift) {
  auto at = [&](int r, int c) { return top ? bl.b11(r, c) : bl.b21(r, c); };
  Source s;
  std::array<double, 2> chase = {at(i - 1, i - 1), at(i, i - 1)};
  if (chase[0] != 0.0 || chase[1] != 0.0) {
    s.vec = chase;
    s.existing = true;
    return s;
  }
  s.vec = bulgeStart({at(i - 1, i), at(i, i)}, shift);
  return s;
}

// Lower bidiagonal blocks (B12, B22): left-rotation source at slot i.  These
// are the transposed counterparts of the upper-block right rotations.
Source lowerLeftSource(Blocks& bl, bool top, int i, double shift) {
  auto at = [&](int r, int c) { return top ? bl.b12(r, c) : bl.b22(r, c); };
  Source s;
  if (i > 1) {
    std::array<double, 2> chase = {at(i - 1, i - 2), at(i, i - 2)};
    if (chase[0] != 0.0 || chase[1] != 0.0) {
      s.vec = chase;
      s.existing = true;
      return s;
    }
  }
  s.vec = bulgeStart({at(i - 1, i - 1), at(i, i - 1)}, shift);
  return s;
}

// Lower bidiagonal blocks: right-rotation source at slot i.
Source lowerRightSource(Blocks& bl, bool top, int i, double shift) {
  auto at = [&](int r, int c) { return top ? bl.b12(r, c) : bl.b22(r, c); };
  Source s;
  std::array<double, 2> chase = {at(i - 1, i - 1), at(i - 1, i)};
  if (chase[0] != 0.0 || chase[1] != 0.0) {
    s.vec = chase;
    s.existing = true;
    return s;
  }
  s.vec = bulgeStart({at(i, i - 1), at(i, i)}, shift);
  return s;
}

GivensRotation mergedRotation(int dim, int i1, const Source& a, double shiftA, const Source& b,
                              double shiftB) {
  MergeContext ctx;
  ctx.firstExisting = a.existing;
  ctx.secondExisting = b.existing;
  ctx.firstShift = shiftA;
  ctx.secondShift = shiftB;
  std::array<double, 2> v = merge(a.vec, b.vec, ctx);
  return givens(dim, i1, i1 + 1, v);
}

}  // namespace

CsdStepResult csdStep(const AngleSet& angles, const BlockRange& range, const ShiftPair& shifts,
                      CsdStepRotations* rotations, FactorUpdateListener* listener) {
  angles.validate();
  const int q = angles.q;
  const int lo = range.lo, hi = range.hi;
  if (!(1 <= lo && lo < hi && hi <= q)) throw StructureError("csdStep: bad block range");
  if (lo > 1 && !angles.phi[lo - 2].isZero())
    throw StructureError("csdStep: phi_{lo-1} must be zero for the range to decouple");
  if (hi < q && !angles.phi[hi - 1].isZero())
    throw StructureError("csdStep: phi_hi must be zero for the range to decouple");
  if (std::abs(shifts.mu * shifts.mu + shifts.nu * shifts.nu - 1.0) > 4.0 * kEps ||
      shifts.mu < 0.0 || shifts.nu < 0.0)
    throw InvalidInputError("csdStep: shifts must be nonnegative with mu^2 + nu^2 = 1");

  const int n = hi - lo + 1;
  const double mu = shifts.mu, nu = shifts.nu;

  // Materialize the decoupled range as its own bidiagonal block form matrix.
  std::vector<AnglePair> thetaSub(angles.theta.begin() + (lo - 1), angles.theta.begin() + hi);
  std::vector<AnglePair> phiSub(angles.phi.begin() + (lo - 1), angles.phi.begin() + (hi - 1));
  AngleSet sub(std::move(thetaSub), std::move(phiSub));
  Matrix M = materialize(sub);
  Blocks bl{M, n};

  Matrix u1loc = Matrix::identity(n), u2loc = Matrix::identity(n);
  Matrix v1loc = Matrix::identity(n), v2loc = Matrix::identity(n);

  auto forwardRotation = [&](FactorSide side, const GivensRotation& local) {
    if (!listener) return;
    GivensRotation global{q, lo - 1 + local.i1, lo - 1 + local.i2, local.c, local.s};
    listener->rotate(side, global);
  };

  // Rotation slots.  T1 rotates block-column 1 (shared by B11 and B21), T2
  // block-column 2 (B12, B22), S1 block-row 1 (B11, B12), S2 block-row 2
  // (B21, B22).  Order: T1(1); then for i = 1..n-1: S1(i), S2(i), T1(i+1)
  // when it exists, T2(i).  Every annihilated bulge entry is written back as
  // an exact zero, which keeps the block-boundary semantics exact.
  auto applyT1 = [&](int i) {
    Source a = upperRightSource(bl, true, i, mu);
    Source b = upperRightSource(bl, false, i, nu);
    GivensRotation g = mergedRotation(2 * n, i, a, mu, b, nu);
    g.applyRight(M);
    GivensRotation loc{n, i, i + 1, g.c, g.s};
    loc.applyRight(v1loc);
    if (rotations) rotations->T1.push_back(loc);
    forwardRotation(FactorSide::V1, loc);
    if (i >= 2) {
      bl.b11(i - 2, i) = 0.0;
      bl.b21(i - 2, i) = 0.0;
    }
  };
  auto applyT2 = [&](int i) {
    Source a = lowerRightSource(bl, true, i, nu);
    Source b = lowerRightSource(bl, false, i, mu);
    GivensRotation g = mergedRotation(2 * n, n + i, a, nu, b, mu);
    g.applyRight(M);
    GivensRotation loc{n, i, i + 1, g.c, g.s};
    loc.applyRight(v2loc);
    if (rotations) rotations->T2.push_back(loc);
    forwardRotation(FactorSide::V2, loc);
    bl.b12(i - 1, i) = 0.0;
    bl.b22(i - 1, i) = 0.0;
  };
  auto applyS1 = [&](int i) {
    Source a = upperLeftSource(bl, true, i, mu);
    Source b = lowerLeftSource(bl, true, i, nu);
    GivensRotation g = mergedRotation(2 * n, i, a, mu, b, nu);
    g.applyTransposeLeft(M);
    GivensRotation loc{n, i, i + 1, g.c, g.s};
    loc.applyRight(u1loc);
    if (rotations) rotations->S1.push_back(loc);
    forwardRotation(FactorSide::U1, loc);
    bl.b11(i, i - 1) = 0.0;
    if (i >= 2) bl.b12(i, i - 2) = 0.0;
  };
  auto applyS2 = [&](int i) {
    Source a = upperLeftSource(bl, false, i, nu);
    Source b = lowerLeftSource(bl, false, i, mu);
    GivensRotation g = mergedRotation(2 * n, n + i, a, nu, b, mu);
    g.applyTransposeLeft(M);
    GivensRotation loc{n, i, i + 1, g.c, g.s};
    loc.applyRight(u2loc);
    if (rotations) rotations->S2.push_back(loc);
    forwardRotation(FactorSide::U2, loc);
    bl.b21(i, i - 1) = 0.0;
    if (i >= 2) bl.b22(i, i - 2) = 0.0;
  };

  applyT1(1);
  for (int i = 1; i <= n - 1; ++i) {
    applyS1(i);
    applyS2(i);
    if (i + 1 <= n - 1) applyT1(i + 1);
    applyT2(i);
  }

  // Re-canonicalize signs and read off the new angles; the signatures fold
  // into the accumulated factors.
  Matrix b11 = M.sub(1, n, 1, n), b12 = M.sub(1, n, n + 1, 2 * n);
  Matrix b21 = M.sub(n + 1, 2 * n, 1, n), b22 = M.sub(n + 1, 2 * n, n + 1, 2 * n);
  auto [sig, subNext] = fixSigns(b11, b12, b21, b22, 0.0);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      u1loc(i, j) *= sig.d1[j];
      u2loc(i, j) *= sig.d2[j];
      v1loc(i, j) *= sig.e1[j];
      v2loc(i, j) *= sig.e2[j];
    }
  }
  if (listener) {
    for (int j = 0; j < n; ++j) {
      if (sig.d1[j] < 0.0) listener->negateColumn(FactorSide::U1, lo + j);
      if (sig.d2[j] < 0.0) listener->negateColumn(FactorSide::U2, lo + j);
      if (sig.e1[j] < 0.0) listener->negateColumn(FactorSide::V1, lo + j);
      if (sig.e2[j] < 0.0) listener->negateColumn(FactorSide::V2, lo + j);
    }
  }

  CsdStepResult out;
  out.angles = angles;
  for (int i = 0; i < n; ++i) out.angles.theta[lo - 1 + i] = subNext.theta[i];
  for (int i = 0; i + 1 < n; ++i) out.angles.phi[lo - 1 + i] = subNext.phi[i];
  out.U1upd = Matrix::identity(q);
  out.U2upd = Matrix::identity(q);
  out.V1upd = Matrix::identity(q);
  out.V2upd = Matrix::identity(q);
  out.U1upd.setSub(lo, lo, u1loc);
  out.U2upd.setSub(lo, lo, u2loc);
  out.V1upd.setSub(lo, lo, v1loc);
  out.V2upd.setSub(lo, lo, v2loc);
  return out;
}

std::optional<BlockRange> findBlock(const AngleSet& angles, double zeroTol) {
  angles.validate();
  auto isZero = [&](const AnglePair& p) { return std::abs(p.value) <= zeroTol; };
  int hiIdx = 0;  // 1-based index of the last nonzero phi
  for (int j = angles.q - 1; j >= 1; --j)
    if (!isZero(angles.phi[j - 1])) {
      hiIdx = j;
      break;
    }
  if (hiIdx == 0) return std::nullopt;
  int lo = 1;
  for (int j = hiIdx - 1; j >= 1; --j)
    if (isZero(angles.phi[j - 1])) {
      lo = j + 1;
      break;
    }
  return BlockRange{lo, hiIdx + 1};
}

ShiftPair chooseShifts(const AngleSet& angles, const BlockRange& range, ShiftStrategy strategy) {
  angles.validate();
  const int lo = range.lo, hi = range.hi;
  if (!(1 <= lo && lo < hi && hi <= angles.q))
    throw InvalidInputError("chooseShifts: bad block range");

  // A zero on a block diagonal forces that block's shift to zero.  theta = 0
  // zeroes the B21/B12 diagonals (shift nu), theta = pi/2 the B11/B22 ones
  // (shift mu), and phi = pi/2 zeroes diagonals in both groups.
  bool muZero = false, nuZero = false;
  for (int j = lo; j <= hi; ++j) {
    if (angles.theta[j - 1].isRight()) muZero = true;
    if (angles.theta[j - 1].isZero()) nuZero = true;
  }
  for (int j = lo; j <= hi - 1; ++j)
    if (angles.phi[j - 1].isRight()) muZero = true;
  if (muZero) return ShiftPair::fromMu(0.0);
  if (nuZero) return ShiftPair::fromNu(0.0);

  if (strategy == ShiftStrategy::Zero) return ShiftPair::fromMu(0.0);

  auto cosAt = [&](int j) { return angles.theta[j - 1].cos(); };
  auto sinAt = [&](int j) { return angles.theta[j - 1].sin(); };
  auto cosPhiAt = [&](int j) { return j >= lo ? angles.phi[j - 1].cos() : 1.0; };
  auto sinPhiAt = [&](int j) { return angles.phi[j - 1].sin(); };

  if (strategy == ShiftStrategy::Wilkinson) {
    // Trailing 2x2 of B11 over the range; fall back to B21 whenever the B11
    // shift would exceed 1/sqrt(2), so the complement stays well defined.
    double f = cosAt(hi - 1) * cosPhiAt(hi - 2);
    double g = -sinAt(hi - 1) * sinPhiAt(hi - 1);
    double h = cosAt(hi) * cosPhiAt(hi - 1);
    double smin = singularValues2x2(f, g, h).first;
    if (smin <= kInvSqrt2) return ShiftPair::fromMu(smin);
    double f2 = -sinAt(hi - 1) * cosPhiAt(hi - 2);
    double g2 = -cosAt(hi - 1) * sinPhiAt(hi - 1);
    double h2 = -sinAt(hi) * cosPhiAt(hi - 1);
    return ShiftPair::fromNu(singularValues2x2(f2, g2, h2).first);
  }

  // Perfect shifts: exact CS values of the range block.
  std::vector<AnglePair> thetaSub(angles.theta.begin() + (lo - 1), angles.theta.begin() + hi);
  std::vector<AnglePair> phiSub(angles.phi.begin() + (lo - 1), angles.phi.begin() + (hi - 1));
  Matrix M = materialize(AngleSet(std::move(thetaSub), std::move(phiSub)));
  int n = hi - lo + 1;
  std::vector<double> sv11 = singularValuesJacobi(M.sub(1, n, 1, n));
  double smallCos = std::min(sv11.front(), 1.0);
  if (smallCos <= kInvSqrt2) return ShiftPair::fromMu(smallCos);
  std::vector<double> sv21 = singularValuesJacobi(M.sub(n + 1, 2 * n, 1, n));
  return ShiftPair::fromNu(std::min(sv21.back(), 1.0));
}

AngleSet roundNegligible(const AngleSet& angles, double tau) {
  if (!(tau >= 0.0)) throw InvalidInputError("roundNegligible: tau must be nonnegative");
  AngleSet out = angles;
  auto snap = [&](AnglePair& p) {
    if (p.value <= tau)
      p = AnglePair::zero();
    else if (p.complement <= tau)
      p = AnglePair::right();
  };
  for (AnglePair& p : out.theta) snap(p);
  for (AnglePair& p : out.phi) snap(p);
  return out;
}

namespace {

// Applies updates to the internal q-by-q accumulators and forwards them.
class AccumulatingListener : public FactorUpdateListener {
 public:
  AccumulatingListener(PhaseTwoResult& out, FactorUpdateListener* next) : out_(out), next_(next) {}

  void rotate(FactorSide side, const GivensRotation& g) override {
    g.applyRight(pick(side));
    if (next_) next_->rotate(side, g);
  }

  void negateColumn(FactorSide side, int col) override {
    Matrix& m = pick(side);
    for (int i = 0; i < m.rows(); ++i) m(i, col - 1) = -m(i, col - 1);
    if (next_) next_->negateColumn(side, col);
  }

 private:
  Matrix& pick(FactorSide side) {
    switch (side) {
      case FactorSide::U1:
        return out_.U1;
      case FactorSide::U2:
        return out_.U2;
      case FactorSide::V1:
        return out_.V1;
      default:
        return out_.V2;
    }
  }

  PhaseTwoResult& out_;
  FactorUpdateListener* next_;
};

}  // namespace

PhaseTwoResult iterateAngles(const AngleSet& start, const CsdConfig& config,
                             FactorUpdateListener* listener) {
  start.validate();
  const int q = start.q;
  const int maxIter = config.maxIterations > 0 ? config.maxIterations : 30 * std::max(q, 1);

  PhaseTwoResult out;
  out.angles = roundNegligible(start, config.tau);
  out.U1 = Matrix::identity(q);
  out.U2 = Matrix::identity(q);
  out.V1 = Matrix::identity(q);
  out.V2 = Matrix::identity(q);

  while (true) {
    std::optional<BlockRange> block = findBlock(out.angles, 0.0);
    if (!block) break;
    if (out.iterations >= maxIter) throw ConvergenceFailure(out.angles, out.iterations);

    ShiftPair shifts = chooseShifts(out.angles, *block, config.strategy);
    AccumulatingListener acc(out, listener);
    CsdStepResult step = csdStep(out.angles, *block, shifts, nullptr, &acc);
    if (config.stepObserver) {
      CsdStepRecord rec;
      rec.before = out.angles;
      rec.after = step.angles;
      rec.range = *block;
      rec.shifts = shifts;
      rec.U1upd = step.U1upd;
      rec.U2upd = step.U2upd;
      rec.V1upd = step.V1upd;
      rec.V2upd = step.V2upd;
      config.stepObserver(rec);
    }
    out.angles = roundNegligible(step.angles, config.tau);
    ++out.iterations;
  }
  return out;
}

namespace detail {

Matrix middleBlock11(const std::vector<AnglePair>& theta, int p, int q) {
  Matrix b(p, q);
  for (int i = 0; i < q; ++i) b(i, i) = theta[i].cos();
  return b;
}

Matrix middleBlock12(const std::vector<AnglePair>& theta, int m, int p, int q) {
  Matrix b(p, m - q);
  for (int i = 0; i < q; ++i) b(i, i) = theta[i].sin();
  for (int i = 0; i < p - q; ++i) b(q + i, q + i) = 1.0;
  return b;
}

Matrix middleBlock21(const std::vector<AnglePair>& theta, int m, int p, int q) {
  Matrix b(m - p, q);
  for (int i = 0; i < q; ++i) b(i, i) = -theta[i].sin();
  return b;
}

Matrix middleBlock22(const std::vector<AnglePair>& theta, int m, int p, int q) {
  Matrix b(m - p, m - q);
  for (int i = 0; i < q; ++i) b(i, i) = theta[i].cos();
  for (int i = 0; i < m - p - q; ++i) b(q + i, p + i) = 1.0;
  return b;
}

double reportNorm(const Matrix& a) {
  if (a.rows() == 0 || a.cols() == 0) return 0.0;
  std::vector<double> sv = singularValuesJacobi(a);
  return sv.back();
}

double reportNorm(const ComplexMatrix& a) {
  if (a.rows() == 0 || a.cols() == 0) return 0.0;
  Matrix em(2 * a.rows(), 2 * a.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) {
      em(i, j) = a(i, j).real();
      em(i, a.cols() + j) = -a(i, j).imag();
      em(a.rows() + i, j) = a(i, j).imag();
      em(a.rows() + i, a.cols() + j) = a(i, j).real();
    }
  return reportNorm(em);
}

}  // namespace detail

}  // namespace csd
