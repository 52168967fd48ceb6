#include <gtest/gtest.h>

#include <cmath>

#include "csd/driver.hpp"
#include "csd/experiments.hpp"
#include "oracles.hpp"

using namespace csd;
using csd::testing::bidiagonalSingularValues;
using csd::testing::maxAbsDiff;
using csd::testing::randomAngleSet;

namespace {

constexpr double kHalfPi = 1.5707963267948966;

AngleSet makeSet(std::vector<double> theta, std::vector<double> phi) {
  std::vector<AnglePair> t, f;
  for (double v : theta) t.push_back(AnglePair::fromValue(v));
  for (double v : phi) f.push_back(AnglePair::fromValue(v));
  return AngleSet(std::move(t), std::move(f));
}

// Sub-block of a materialized set: (0,0) = B11, (0,1) = B12, and so on.
Matrix block(const Matrix& m, int q, int rowBlock, int colBlock) {
  return m.sub(rowBlock * q + 1, rowBlock * q + q, colBlock * q + 1, colBlock * q + q);
}

double updateEquationResidual(const AngleSet& before, const CsdStepResult& step) {
  Matrix lhs = materialize(step.angles);
  Matrix rhs = blockDiag(step.U1upd, step.U2upd).transpose() * materialize(before) *
               blockDiag(step.V1upd, step.V2upd);
  return maxAbsDiff(lhs, rhs);
}

Bidiagonal upperFromBands(const Matrix& b) {
  int n = b.rows();
  std::vector<double> d(n), e(std::max(n - 1, 0));
  for (int i = 0; i < n; ++i) d[i] = b(i, i);
  for (int i = 0; i + 1 < n; ++i) e[i] = b(i, i + 1);
  return Bidiagonal(BidiagonalKind::Upper, std::move(d), std::move(e));
}

Bidiagonal lowerFromBands(const Matrix& b) {
  int n = b.rows();
  std::vector<double> d(n), e(std::max(n - 1, 0));
  for (int i = 0; i < n; ++i) d[i] = b(i, i);
  for (int i = 0; i + 1 < n; ++i) e[i] = b(i + 1, i);
  return Bidiagonal(BidiagonalKind::Lower, std::move(d), std::move(e));
}

}  // namespace

TEST(Merge, ExistingBulgeWinsOverNewOne) {
  MergeContext ctx{true, false, 0.6, 0.8};
  auto v = merge({3.0, 1.0}, {2.99, 1.01}, ctx);
  EXPECT_EQ(v[0], 3.0);
  EXPECT_EQ(v[1], 1.0);
  MergeContext rev{false, true, 0.6, 0.8};
  auto w = merge({2.99, 1.01}, {3.0, 1.0}, rev);
  EXPECT_EQ(w[0], 3.0);
  EXPECT_EQ(w[1], 1.0);
}

TEST(Merge, TwoExistingBulgesAreAveraged) {
  MergeContext ctx{true, true, 0.6, 0.8};
  auto v = merge({1.0, 2.0}, {1.0, 2.0}, ctx);
  EXPECT_NEAR(v[1] / v[0], 2.0, 1e-14);
}

TEST(Merge, TwoNewBulgesUseTheSmallerShift) {
  MergeContext ctx{false, false, 0.8, 0.6};
  auto v = merge({1.0, 0.0}, {0.0, 1.0}, ctx);
  EXPECT_EQ(v[0], 0.0);
  EXPECT_EQ(v[1], 1.0);
  MergeContext tie{false, false, 0.5, 0.5};
  auto w = merge({1.0, 0.0}, {0.0, 1.0}, tie);
  EXPECT_EQ(w[0], 1.0);
}

TEST(Merge, BothZeroGivesZero) {
  MergeContext ctx{true, true, 0.0, 1.0};
  auto v = merge({0.0, 0.0}, {0.0, 0.0}, ctx);
  EXPECT_EQ(v[0], 0.0);
  EXPECT_EQ(v[1], 0.0);
}

TEST(ShiftPair, ComplementIsRecomputed) {
  SeededRng rng(9);
  for (int i = 0; i < 200; ++i) {
    ShiftPair p = (i % 2) ? ShiftPair::fromMu(rng.uniform01()) : ShiftPair::fromNu(rng.uniform01());
    EXPECT_LE(std::abs(p.mu * p.mu + p.nu * p.nu - 1.0), 4.0 * kEps);
    EXPECT_GE(p.mu, 0.0);
    EXPECT_GE(p.nu, 0.0);
  }
  EXPECT_THROW(ShiftPair::fromMu(1.5), InvalidInputError);
}

TEST(FindBlock, SpecExamples) {
  AngleSet a = makeSet({0.3, 0.3, 0.3, 0.3, 0.3}, {0.0, 0.2, 0.4, 0.0});
  auto b = findBlock(a, 0.0);
  ASSERT_TRUE(b.has_value());
  EXPECT_EQ(b->lo, 2);
  EXPECT_EQ(b->hi, 4);

  AngleSet flat = makeSet({0.3, 0.3, 0.3}, {0.0, 0.0});
  EXPECT_FALSE(findBlock(flat, 0.0).has_value());

  AngleSet whole = makeSet({0.3, 0.3, 0.3}, {0.5, 0.3});
  auto w = findBlock(whole, 0.0);
  ASSERT_TRUE(w.has_value());
  EXPECT_EQ(w->lo, 1);
  EXPECT_EQ(w->hi, 3);
}

TEST(RoundNegligible, SnapsToEndpoints) {
  AngleSet a = makeSet({0.4, kHalfPi - 1e-18}, {1e-18});
  AngleSet r = roundNegligible(a, 1e-15);
  EXPECT_EQ(r.theta[0].value, 0.4);
  EXPECT_TRUE(r.theta[1].isRight());
  EXPECT_EQ(r.theta[1].cos(), 0.0);
  EXPECT_TRUE(r.phi[0].isZero());

  AngleSet b = makeSet({0.4, 0.9}, {0.5});
  AngleSet rb = roundNegligible(b, 1e-15);
  EXPECT_EQ(rb.theta[0].value, 0.4);
  EXPECT_EQ(rb.theta[1].value, 0.9);
  EXPECT_EQ(rb.phi[0].value, 0.5);
}

TEST(ChooseShifts, ZeroOnDiagonalForcesZeroShift) {
  // theta_2 = pi/2 zeroes the B11/B22 diagonals: mu = 0, nu = 1.
  std::vector<AnglePair> t = {AnglePair::fromValue(0.4), AnglePair::right()};
  AngleSet a(t, {AnglePair::fromValue(0.6)});
  ShiftPair p = chooseShifts(a, {1, 2}, ShiftStrategy::Wilkinson);
  EXPECT_EQ(p.mu, 0.0);
  EXPECT_EQ(p.nu, 1.0);

  // theta_1 = 0 zeroes the B21/B12 diagonals: nu = 0, mu = 1.
  std::vector<AnglePair> t2 = {AnglePair::zero(), AnglePair::fromValue(0.7)};
  AngleSet a2(t2, {AnglePair::fromValue(0.6)});
  ShiftPair p2 = chooseShifts(a2, {1, 2}, ShiftStrategy::Wilkinson);
  EXPECT_EQ(p2.nu, 0.0);
  EXPECT_EQ(p2.mu, 1.0);
}

TEST(ChooseShifts, WilkinsonOnDiagonalTrailingBlock) {
  // Trailing 2x2 of B11 = diag(0.6, 0.8): mu = 0.6, nu = 0.8.
  AngleSet a = makeSet({std::acos(0.6), std::acos(0.8)}, {0.0});
  ShiftPair p = chooseShifts(a, {1, 2}, ShiftStrategy::Wilkinson);
  EXPECT_NEAR(p.mu, 0.6, 1e-15);
  EXPECT_NEAR(p.nu, 0.8, 1e-15);
}

TEST(ChooseShifts, WilkinsonFallsBackToB21) {
  // Small angles make the B11 trailing block nearly orthogonal (singular
  // values near 1), so the B21 trailing block supplies nu instead.
  AngleSet a = makeSet({0.05, 0.1, 0.08}, {0.4, 0.3});
  ShiftPair p = chooseShifts(a, {1, 3}, ShiftStrategy::Wilkinson);
  EXPECT_LE(p.nu, 0.7071067811865476);
  EXPECT_LE(std::abs(p.mu * p.mu + p.nu * p.nu - 1.0), 4.0 * kEps);
}

TEST(ChooseShifts, PerfectShiftsMatchTheBlockCsValues) {
  SeededRng rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    AngleSet a = randomAngleSet(rng, 4, 0.15);
    ShiftPair p = chooseShifts(a, {1, 4}, ShiftStrategy::Perfect);
    Matrix m = materialize(a);
    auto sv11 = bidiagonalSingularValues(upperFromBands(block(m, 4, 0, 0)));
    auto sv21 = bidiagonalSingularValues(upperFromBands(block(m, 4, 1, 0)));
    if (sv11.front() <= 0.7071067811865476) {
      EXPECT_NEAR(p.mu, sv11.front(), 1e-10);
    } else {
      EXPECT_NEAR(p.nu, sv21.back(), 1e-10);
    }
    EXPECT_LE(std::abs(p.mu * p.mu + p.nu * p.nu - 1.0), 4.0 * kEps);
  }
}

TEST(CsdStep, UpdateEquationHoldsForArbitraryShifts) {
  AngleSet a = makeSet({kHalfPi / 2.0, kHalfPi / 2.0}, {kHalfPi / 1.5});
  ShiftPair shifts = ShiftPair::fromMu(0.3);
  CsdStepResult step = csdStep(a, {1, 2}, shifts);
  EXPECT_LE(updateEquationResidual(a, step), 1e-12);
  for (const Matrix* u : {&step.U1upd, &step.U2upd, &step.V1upd, &step.V2upd})
    EXPECT_LE(orthogonalityDefectFrobenius(*u), 1e-13);
  EXPECT_TRUE(validateSignPattern(materialize(step.angles), 2));
}

TEST(CsdStep, RandomSetsKeepTheContract) {
  SeededRng rng(42);
  for (int trial = 0; trial < 100; ++trial) {
    int q = 2 + rng.uniformInt(5);
    AngleSet a = randomAngleSet(rng, q, 1e-3);
    ShiftPair shifts = ShiftPair::fromMu(rng.uniform01());
    CsdStepResult step = csdStep(a, {1, q}, shifts);
    EXPECT_LE(updateEquationResidual(a, step), 1e-12 * q);
    step.angles.validate();
    EXPECT_TRUE(validateSignPattern(materialize(step.angles), q));
  }
}

TEST(CsdStep, PerfectShiftDeflatesInOneStep) {
  SeededRng rng(43);
  for (int trial = 0; trial < 20; ++trial) {
    AngleSet a = randomAngleSet(rng, 2, 0.2);
    ShiftPair shifts = chooseShifts(a, {1, 2}, ShiftStrategy::Perfect);
    CsdStepResult step = csdStep(a, {1, 2}, shifts);
    EXPECT_LE(step.angles.phi[0].value, 1e-10);
  }
}

TEST(CsdStep, SubRangeOnlyTouchesItsRows) {
  SeededRng rng(44);
  AngleSet a = randomAngleSet(rng, 5, 0.1);
  a.phi[0] = AnglePair::zero();  // decouple: range (2,5)
  CsdStepResult step = csdStep(a, {2, 5}, ShiftPair::fromMu(0.5));
  EXPECT_LE(updateEquationResidual(a, step), 1e-12 * 5);
  EXPECT_EQ(step.angles.theta[0].value, a.theta[0].value);
  for (int i = 0; i < 5; ++i) {
    EXPECT_EQ(step.U1upd(i, 0), i == 0 ? 1.0 : 0.0);
    EXPECT_EQ(step.U1upd(0, i), i == 0 ? 1.0 : 0.0);
  }
}

TEST(CsdStep, RangeValidation) {
  SeededRng rng(45);
  AngleSet a = randomAngleSet(rng, 4, 0.1);
  EXPECT_THROW(csdStep(a, {2, 4}, ShiftPair::fromMu(0.5)), StructureError);  // phi_1 != 0
  EXPECT_THROW(csdStep(a, {3, 3}, ShiftPair::fromMu(0.5)), StructureError);  // lo == hi
  ShiftPair bad{0.5, 0.5};
  EXPECT_THROW(csdStep(a, {1, 4}, bad), InvalidInputError);
}

TEST(CsdStep, InterleavingMatchesIndependentSvdSteps) {
  // Exact-friendly lattice angles: the four implied SVD steps, run
  // independently, produce the same Givens rotations the interleaved step
  // computes through merge.
  AngleSet a = makeSet({0.3, 0.7, 1.1}, {0.5, 0.9});
  ShiftPair shifts{0.6, 0.8};
  CsdStepRotations rots;
  csdStep(a, {1, 3}, shifts, &rots);

  Matrix m = materialize(a);
  int q = 3;
  SvdStepResult r11 = svdStep(upperFromBands(block(m, q, 0, 0)), 0.6);
  SvdStepResult r21 = svdStep(upperFromBands(block(m, q, 1, 0)), 0.8);
  SvdStepResult r12 = svdStep(lowerFromBands(block(m, q, 0, 1)), 0.8);
  SvdStepResult r22 = svdStep(lowerFromBands(block(m, q, 1, 1)), 0.6);

  auto near = [&](const GivensRotation& x, const GivensRotation& y) {
    EXPECT_LE(std::abs(x.c - y.c) + std::abs(x.s - y.s), 1e-9);
  };
  for (int i = 0; i < q - 1; ++i) {
    near(rots.T1[i], r11.T[i]);  // B11 right factor
    near(rots.T1[i], r21.T[i]);  // shared with B21
    near(rots.S1[i], r11.S[i]);  // B11 left factor
    near(rots.S1[i], r12.S[i]);  // shared with B12
    near(rots.S2[i], r21.S[i]);
    near(rots.S2[i], r22.S[i]);
    near(rots.T2[i], r12.T[i]);
    near(rots.T2[i], r22.T[i]);
  }
}

TEST(CsdStep, BandZeroWithZeroShiftDeflatesWithinTwoSteps) {
  // theta_2 = pi/2 plants a zero on the band; the zero-shift rule then drives
  // some in-range phi to exactly zero within two steps.
  std::vector<AnglePair> t = {AnglePair::fromValue(0.4), AnglePair::right(),
                              AnglePair::fromValue(0.9)};
  AngleSet a(t, {AnglePair::fromValue(0.6), AnglePair::fromValue(0.8)});
  double tau = 64.0 * kEps;

  ShiftPair s1 = chooseShifts(a, {1, 3}, ShiftStrategy::Wilkinson);
  EXPECT_EQ(s1.mu, 0.0);
  CsdStepResult step1 = csdStep(a, {1, 3}, s1);
  AngleSet a1 = roundNegligible(step1.angles, tau);
  bool deflated = a1.phi[0].isZero() || a1.phi[1].isZero();
  if (!deflated) {
    auto blk = findBlock(a1, 0.0);
    ASSERT_TRUE(blk.has_value());
    ShiftPair s2 = chooseShifts(a1, *blk, ShiftStrategy::Wilkinson);
    CsdStepResult step2 = csdStep(a1, *blk, s2);
    AngleSet a2 = roundNegligible(step2.angles, tau);
    deflated = a2.phi[0].isZero() || a2.phi[1].isZero();
  }
  EXPECT_TRUE(deflated);
}

TEST(Csd, IdentityInput) {
  CsdProblem<double> prob{Matrix::identity(7), 4, 3};
  auto [factors, report] = computeCsd(prob);
  EXPECT_EQ(report.iterations, 0);
  for (const auto& t : factors.theta) EXPECT_EQ(t.value, 0.0);
  EXPECT_LE(report.maxMetric(), 16.0 * kEps);
}

TEST(Csd, VanLoanMatchesThePublishedAccuracy) {
  auto [factors, report] = computeCsd(genVanloan());
  EXPECT_LE(report.orthoU1, 1e-14);
  EXPECT_LE(report.orthoU2, 1e-14);
  EXPECT_LE(report.orthoV1, 1e-14);
  EXPECT_LE(report.orthoV2, 1e-14);
  EXPECT_LE(report.e11, 10.0 * 1.3e-12);
  EXPECT_LE(report.e12, 10.0 * 6.1e-13);
  EXPECT_LE(report.e21, 10.0 * 1.6e-12);
  EXPECT_LE(report.e22, 10.0 * 9.3e-13);
}

TEST(Csd, RandomBidiagonalBlockFormInput) {
  SeededRng rng(47);
  AngleSet a = randomAngleSet(rng, 20);
  CsdProblem<double> prob{materialize(a), 20, 20};
  auto [factors, report] = computeCsd(prob);
  double eps = std::max(10.0 * kEps, report.epsilonIn);
  EXPECT_LT(report.maxMetric(), 4.0 * eps);
}

TEST(Csd, StepObserverSeesContractResiduals) {
  SeededRng rng(48);
  AngleSet a = randomAngleSet(rng, 6, 1e-3);
  CsdProblem<double> prob{materialize(a), 6, 6};
  CsdConfig config;
  int steps = 0;
  config.stepObserver = [&](const CsdStepRecord& rec) {
    ++steps;
    // Update equation at every step.
    Matrix lhs = materialize(rec.after);
    Matrix rhs = blockDiag(rec.U1upd, rec.U2upd).transpose() * materialize(rec.before) *
                 blockDiag(rec.V1upd, rec.V2upd);
    EXPECT_LE(maxAbsDiff(lhs, rhs), 1e-12 * 6);
    // Block identities entering the step.
    Matrix m = materialize(rec.before);
    int q = rec.before.q;
    Matrix b11 = block(m, q, 0, 0), b21 = block(m, q, 1, 0);
    Matrix g = b11.transpose() * b11 + b21.transpose() * b21;
    for (int i = 0; i < q; ++i) g(i, i) -= 1.0;
    EXPECT_LE(frobeniusNorm(g), 64.0 * q * kEps);
  };
  auto [factors, report] = computeCsd(prob, config);
  EXPECT_GT(steps, 0);
  EXPECT_EQ(steps, report.iterations);
  EXPECT_LE(report.maxMetric(), 4.0 * std::max(10.0 * kEps, report.epsilonIn));
}

TEST(Csd, AllStrategiesConverge) {
  SeededRng rng(49);
  AngleSet a = randomAngleSet(rng, 8, 1e-3);
  CsdProblem<double> prob{materialize(a), 8, 8};
  for (ShiftStrategy s : {ShiftStrategy::Wilkinson, ShiftStrategy::Perfect, ShiftStrategy::Zero}) {
    CsdConfig config;
    config.strategy = s;
    // Zero shifts converge only linearly, so they get a far larger cap.
    if (s == ShiftStrategy::Zero) config.maxIterations = 500000;
    auto [factors, report] = computeCsd(prob, config);
    EXPECT_LT(report.maxMetric(), 1e-13);
  }
}

TEST(Csd, IterationCapRaisesConvergenceFailure) {
  SeededRng rng(50);
  AngleSet a = randomAngleSet(rng, 8, 0.2);
  CsdProblem<double> prob{materialize(a), 8, 8};
  CsdConfig config;
  config.maxIterations = 1;
  try {
    computeCsd(prob, config);
    FAIL() << "expected ConvergenceFailure";
  } catch (const ConvergenceFailure& e) {
    EXPECT_EQ(e.iterations, 1);
    EXPECT_EQ(e.partialAngles.q, 8);
  }
}

TEST(Csd, SortThetaReordersConsistently) {
  SeededRng rng(51);
  CsdProblem<double> prob{genHaar(rng, 9), 5, 3};
  CsdConfig config;
  config.sortTheta = true;
  auto [factors, report] = computeCsd(prob, config);
  for (size_t i = 0; i + 1 < factors.theta.size(); ++i)
    EXPECT_LE(factors.theta[i].value, factors.theta[i + 1].value);
  EXPECT_LE(report.maxMetric(), 200.0 * 9 * kEps);
}

TEST(Csd, ComplexUnitaryInput) {
  SeededRng rng(52);
  int n = 8;
  ComplexMatrix x = ComplexMatrix::identity(n);
  {
    ComplexMatrix g(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        g(i, j) = std::complex<double>(rng.standardNormal(), rng.standardNormal());
    for (int j = 1; j <= n; ++j) {
      auto f = house(g.colSegment(j, n, j));
      f.applyToRowsLeft(g, j - 1);
      f.applyAdjointToColsRight(x, j - 1);
    }
  }
  CsdProblem<std::complex<double>> prob{x, 4, 3};
  auto [factors, report] = computeCsd(prob);
  EXPECT_LE(report.maxMetric(), 300.0 * n * kEps);
  // The reconstruction X ~ diag(U1,U2) E diag(V1,V2)^* holds.
  AngleSet deflated(factors.theta,
                    std::vector<AnglePair>(factors.theta.empty() ? 0 : factors.theta.size() - 1,
                                           AnglePair::zero()));
  Matrix mid = embed(deflated, n, 4, 3);
  ComplexMatrix rec = blockDiag(factors.U1, factors.U2) *
                      toScalarType<std::complex<double>>(mid) *
                      blockDiag(factors.V1, factors.V2).adjoint();
  ComplexMatrix diff = rec - x;
  EXPECT_LE(spectralNorm(diff), 1e-12);
}

TEST(Csd, QZeroAndQOneEdgeCases) {
  SeededRng rng(53);
  {
    CsdProblem<double> prob{genHaar(rng, 5), 3, 0};
    auto [factors, report] = computeCsd(prob);
    EXPECT_EQ(report.iterations, 0);
    EXPECT_LE(report.maxMetric(), 1e-13);
  }
  {
    CsdProblem<double> prob{genHaar(rng, 4), 2, 1};
    auto [factors, report] = computeCsd(prob);
    EXPECT_EQ(report.iterations, 0);  // q = 1 has no phi to anneal
    EXPECT_LE(report.maxMetric(), 1e-13);
  }
}

TEST(ResidualReport, ExactFactorsGiveRoundoffResiduals) {
  SeededRng rng(54);
  AngleSet a = randomAngleSet(rng, 6);
  for (auto& p : a.phi) p = AnglePair::zero();  // fully deflated set
  Matrix x = embed(a, 14, 6, 6);
  CsdProblem<double> prob{x, 6, 6};
  CsdFactors<double> f;
  f.theta = a.theta;
  f.U1 = Matrix::identity(6);
  f.U2 = Matrix::identity(8);
  f.V1 = Matrix::identity(6);
  f.V2 = Matrix::identity(8);
  ResidualReport rep = residualReport(prob, f);
  EXPECT_LE(rep.maxMetric(), 1e-13);
}

TEST(ResidualReport, IdentityProblem) {
  // With p = q the identity matrix decomposes with identity factors; for
  // p != q the middle factor embeds a permutation, so the factors must come
  // from the solver instead.
  CsdProblem<double> prob{Matrix::identity(4), 2, 2};
  CsdFactors<double> f;
  f.theta = {AnglePair::zero(), AnglePair::zero()};
  f.U1 = Matrix::identity(2);
  f.U2 = Matrix::identity(2);
  f.V1 = Matrix::identity(2);
  f.V2 = Matrix::identity(2);
  ResidualReport rep = residualReport(prob, f);
  EXPECT_LE(rep.maxMetric(), 4.0 * kEps);
  EXPECT_LE(rep.epsilonIn, 4.0 * kEps);
}

TEST(ResidualReport, RotationPerturbationShowsInBackwardErrorOnly) {
  SeededRng rng(56);
  CsdProblem<double> prob{genHaar(rng, 8), 4, 4};
  auto [factors, report] = computeCsd(prob);
  GivensRotation g = givens(4, 1, 2, {std::cos(1e-8), std::sin(1e-8)});
  g.applyRight(factors.U1);
  ResidualReport rep = residualReport(prob, factors);
  EXPECT_LE(rep.orthoU1, 1e-13);
  EXPECT_GE(rep.e11 + rep.e12, 1e-9);
  EXPECT_LE(rep.e11 + rep.e12, 1e-7);
}

TEST(ResidualReport, DimensionValidation) {
  CsdProblem<double> prob{Matrix::identity(5), 3, 2};
  CsdFactors<double> f;
  f.theta = {AnglePair::zero(), AnglePair::zero()};
  f.U1 = Matrix::identity(4);  // wrong
  f.U2 = Matrix::identity(2);
  f.V1 = Matrix::identity(2);
  f.V2 = Matrix::identity(3);
  EXPECT_THROW(residualReport(prob, f), InvalidInputError);
}
