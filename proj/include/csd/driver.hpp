#pragma once

#include <functional>
#include <optional>

#include "csd/angles.hpp"
#include "csd/norms.hpp"
#include "csd/reduction.hpp"
#include "csd/steps.hpp"

namespace csd {

/// Current unreduced block, 1-based indices into theta with lo < hi.
struct BlockRange {
  int lo = 1;
  int hi = 2;
};

/// Nonnegative shift pair with mu^2 + nu^2 = 1, the complement always
/// recomputed from the primary shift.
struct ShiftPair {
  double mu = 0.0;
  double nu = 1.0;

  static ShiftPair fromMu(double mu);
  static ShiftPair fromNu(double nu);
};

enum class ShiftStrategy { Wilkinson, Perfect, Zero };

struct CsdStepResult {
  AngleSet angles;
  Matrix U1upd, U2upd, V1upd, V2upd;  // q-by-q, identity outside the range
};

/// How each source block of a merge site relates to the bulge pattern.
struct MergeContext {
  bool firstExisting = false;   // first vector chases an existing bulge
  bool secondExisting = false;  // second vector chases an existing bulge
  double firstShift = 0.0;
  double secondShift = 0.0;
};

/// Combines the two redundant 2-vectors behind one Givens rotation:
/// an existing bulge wins over a new one, two existing bulges are averaged
/// by norm, two new bulges defer to the block with the smaller shift.
std::array<double, 2> merge(const std::array<double, 2>& v, const std::array<double, 2>& w,
                            const MergeContext& context);

/// The shared rotation sequences of one CSD step, in block-local 1-based
/// indices: S1/S2 act on the rows of block-rows 1/2, T1/T2 on the columns of
/// block-columns 1/2.
struct CsdStepRotations {
  std::vector<GivensRotation> S1, S2, T1, T2;
};

enum class FactorSide { U1, U2, V1, V2 };

/// Receives every factor update of a CSD step as it is computed: one Givens
/// rotation or signature flip at a time, in global 1-based theta indices.
/// Applying these directly to accumulating factors keeps their orthogonality
/// at the level of the individual rotations instead of one dense product per
/// step.
class FactorUpdateListener {
 public:
  virtual ~FactorUpdateListener() = default;
  virtual void rotate(FactorSide side, const GivensRotation& g) = 0;
  virtual void negateColumn(FactorSide side, int col) = 0;  // 1-based
};

/// Listener that right-applies every update to four dense factors (any
/// scalar type) whose leading q columns carry the theta indices.
template <typename T>
class FactorApplier : public FactorUpdateListener {
 public:
  FactorApplier(DenseMatrix<T>& u1, DenseMatrix<T>& u2, DenseMatrix<T>& v1, DenseMatrix<T>& v2)
      : f_{&u1, &u2, &v1, &v2} {}

  void rotate(FactorSide side, const GivensRotation& g) override {
    DenseMatrix<T>& m = *f_[static_cast<int>(side)];
    GivensRotation global{m.cols(), g.i1, g.i2, g.c, g.s};
    global.applyRight(m);
  }

  void negateColumn(FactorSide side, int col) override {
    DenseMatrix<T>& m = *f_[static_cast<int>(side)];
    for (int i = 0; i < m.rows(); ++i) m(i, col - 1) = -m(i, col - 1);
  }

 private:
  DenseMatrix<T>* f_[4];
};

/// One CSD step on the deflated range: four interleaved SVD steps (shift mu
/// on blocks 11/22, nu on blocks 12/21) sharing their orthogonal factors,
/// each Givens rotation computed once through merge, signs re-canonicalized
/// at the end.
CsdStepResult csdStep(const AngleSet& angles, const BlockRange& range, const ShiftPair& shifts,
                      CsdStepRotations* rotations = nullptr,
                      FactorUpdateListener* listener = nullptr);

/// Deflation scan: phi_hi = ... = phi_{q-1} = 0, none of phi_lo..phi_{hi-1}
/// zero, lo minimal.  Empty when every phi vanishes.
std::optional<BlockRange> findBlock(const AngleSet& angles, double zeroTol);

/// Zero rule first (a zero anywhere on a block diagonal forces that block's
/// shift to zero), then the requested strategy with the complement recomputed
/// from mu^2 + nu^2 = 1.
ShiftPair chooseShifts(const AngleSet& angles, const BlockRange& range, ShiftStrategy strategy);

/// Snaps angles within tau of 0 or pi/2 onto the endpoint (the complement
/// member decides the pi/2 side).
AngleSet roundNegligible(const AngleSet& angles, double tau);

/// Per-step instrumentation record.
struct CsdStepRecord {
  AngleSet before;
  AngleSet after;
  BlockRange range;
  ShiftPair shifts;
  Matrix U1upd, U2upd, V1upd, V2upd;
};

struct CsdConfig {
  ShiftStrategy strategy = ShiftStrategy::Wilkinson;
  // Snap threshold for deflation.  Every snap perturbs the implicit matrix by
  // up to tau, so the default sits a decade under the tightest experiment
  // bound while still catching converged angles in one extra step at most.
  double tau = 8.0 * kEps;
  int maxIterations = 0;  // 0 selects 30 * q
  double unitarityBound = 0.1;
  bool sortTheta = false;
  std::function<void(const CsdStepRecord&)> stepObserver;
};

/// Phase II iteration failed to deflate within the iteration cap.
struct ConvergenceFailure : std::runtime_error {
  AngleSet partialAngles;
  int iterations;
  ConvergenceFailure(AngleSet partial, int iters)
      : std::runtime_error("csd: iteration cap exceeded before full deflation"),
        partialAngles(std::move(partial)),
        iterations(iters) {}
};

struct PhaseTwoResult {
  AngleSet angles;
  Matrix U1, U2, V1, V2;  // q-by-q accumulated updates
  int iterations = 0;
};

/// round -> find block -> choose shifts -> csd step, until fully deflated.
/// The optional listener sees every factor update alongside the returned
/// q-by-q accumulators.
PhaseTwoResult iterateAngles(const AngleSet& start, const CsdConfig& config,
                             FactorUpdateListener* listener = nullptr);

template <typename T>
struct CsdFactors {
  std::vector<AnglePair> theta;
  DenseMatrix<T> U1, U2, V1, V2;
};

/// The eight stability metrics plus the measured input defect.
struct ResidualReport {
  double epsilonIn = 0.0;
  double orthoU1 = 0.0, orthoU2 = 0.0, orthoV1 = 0.0, orthoV2 = 0.0;
  double e11 = 0.0, e12 = 0.0, e21 = 0.0, e22 = 0.0;
  int iterations = 0;

  double maxMetric() const {
    double m = orthoU1;
    for (double v : {orthoU2, orthoV1, orthoV2, e11, e12, e21, e22}) m = std::max(m, v);
    return m;
  }
};

namespace detail {

/// The middle factor blocks of the decomposition for given (m, p, q, theta).
Matrix middleBlock11(const std::vector<AnglePair>& theta, int p, int q);
Matrix middleBlock12(const std::vector<AnglePair>& theta, int m, int p, int q);
Matrix middleBlock21(const std::vector<AnglePair>& theta, int m, int p, int q);
Matrix middleBlock22(const std::vector<AnglePair>& theta, int m, int p, int q);

/// Spectral norm for the residual metrics.  Power iteration stalls on the
/// tightly clustered spectra of orthogonality-defect matrices, so the report
/// uses the one-sided Jacobi route; a complex matrix goes through its real
/// embedding [re -im; im re], which has the same singular values.
double reportNorm(const Matrix& a);
double reportNorm(const ComplexMatrix& a);

template <typename T>
double reportDefect(const DenseMatrix<T>& u) {
  DenseMatrix<T> g = u.adjoint() * u;
  for (int i = 0; i < g.rows(); ++i) g(i, i) -= T{1};
  return reportNorm(g);
}

}  // namespace detail

/// Backward errors E_ij and orthogonality defects of the computed factors,
/// each measured in the spectral norm: E11 = U1 [C; 0] V1^* - X11 and so on.
template <typename T>
ResidualReport residualReport(const CsdProblem<T>& problem, const CsdFactors<T>& factors) {
  problem.validate();
  const int m = problem.m(), p = problem.p, q = problem.q;
  if (factors.U1.rows() != p || factors.U2.rows() != m - p || factors.V1.rows() != q ||
      factors.V2.rows() != m - q || static_cast<int>(factors.theta.size()) != q)
    throw InvalidInputError("residualReport: factor dimensions do not match the problem");

  ResidualReport rep;
  rep.epsilonIn = detail::reportDefect(problem.X);
  rep.orthoU1 = detail::reportDefect(factors.U1);
  rep.orthoU2 = detail::reportDefect(factors.U2);
  rep.orthoV1 = detail::reportDefect(factors.V1);
  rep.orthoV2 = detail::reportDefect(factors.V2);

  DenseMatrix<T> x11 = problem.X.sub(1, p, 1, q);
  DenseMatrix<T> x12 = problem.X.sub(1, p, q + 1, m);
  DenseMatrix<T> x21 = problem.X.sub(p + 1, m, 1, q);
  DenseMatrix<T> x22 = problem.X.sub(p + 1, m, q + 1, m);

  auto err = [](const DenseMatrix<T>& u, const Matrix& mid, const DenseMatrix<T>& v,
                const DenseMatrix<T>& x) {
    DenseMatrix<T> e = u * toScalarType<T>(mid) * v.adjoint() - x;
    return detail::reportNorm(e);
  };
  rep.e11 = err(factors.U1, detail::middleBlock11(factors.theta, p, q), factors.V1, x11);
  rep.e12 = err(factors.U1, detail::middleBlock12(factors.theta, m, p, q), factors.V2, x12);
  rep.e21 = err(factors.U2, detail::middleBlock21(factors.theta, m, p, q), factors.V1, x21);
  rep.e22 = err(factors.U2, detail::middleBlock22(factors.theta, m, p, q), factors.V2, x22);
  return rep;
}

/// Reorders theta ascending and permutes the factor columns consistently.
template <typename T>
void sortFactorsByTheta(CsdFactors<T>& f) {
  int q = static_cast<int>(f.theta.size());
  std::vector<int> perm(q);
  for (int i = 0; i < q; ++i) perm[i] = i;
  std::stable_sort(perm.begin(), perm.end(),
                   [&](int a, int b) { return f.theta[a].value < f.theta[b].value; });

  auto permuteLeadingCols = [&](DenseMatrix<T>& u) {
    DenseMatrix<T> out = u;
    for (int k = 0; k < q; ++k)
      for (int i = 0; i < u.rows(); ++i) out(i, k) = u(i, perm[k]);
    u = out;
  };
  std::vector<AnglePair> sorted(q);
  for (int k = 0; k < q; ++k) sorted[k] = f.theta[perm[k]];
  f.theta = std::move(sorted);
  permuteLeadingCols(f.U1);
  permuteLeadingCols(f.U2);
  permuteLeadingCols(f.V1);
  permuteLeadingCols(f.V2);
}

/// The complete CS decomposition:
///   X ~ diag(U1, U2) * [C S 0 0; 0 0 I 0; -S C 0 0; 0 0 0 I] * diag(V1, V2)^*.
/// Phase I reduces X to bidiagonal block form; Phase II drives the implicit
/// angles to a fully deflated state; the factors are assembled as
/// U1 = P1 (U1'' + I_{p-q}), etc.
template <typename T>
std::pair<CsdFactors<T>, ResidualReport> computeCsd(const CsdProblem<T>& problem,
                                             const CsdConfig& config = {}) {
  problem.validate();
  const int m = problem.m(), p = problem.p, q = problem.q;

  BidiagonalizationResult<T> bid = bidiagonalize(problem, config.unitarityBound);

  // The Phase II rotations act on the leading q columns of the Phase I
  // factors directly, so the factor orthogonality stays at reflector level.
  CsdFactors<T> f;
  f.U1 = std::move(bid.P1);
  f.U2 = std::move(bid.P2);
  f.V1 = std::move(bid.Q1);
  f.V2 = std::move(bid.Q2);
  FactorApplier<T> applier(f.U1, f.U2, f.V1, f.V2);
  PhaseTwoResult ph2 = iterateAngles(bid.angles, config, &applier);
  f.theta = ph2.angles.theta;
  if (config.sortTheta) sortFactorsByTheta(f);

  ResidualReport rep = residualReport(problem, f);
  rep.iterations = ph2.iterations;
  return {std::move(f), rep};
}

}  // namespace csd
