#pragma once

// Test-only oracles, independent of the implementation paths they check.

#include <vector>

#include "csd/angles.hpp"
#include "csd/rng.hpp"
#include "csd/steps.hpp"

namespace csd::testing {

/// All eigenvalues of a symmetric tridiagonal matrix, ascending, by bisection
/// on the Sturm sequence (negcount).  Absolute tolerance tol * spread.
std::vector<double> sturmEigenvalues(const SymTridiagonal& a, double tol = 1e-14);

/// Singular values of a bidiagonal matrix, ascending: square roots of the
/// Sturm eigenvalues of B^T B (clamped at zero).
std::vector<double> bidiagonalSingularValues(const Bidiagonal& b, double tol = 1e-14);

/// Random angle set with every angle in [margin, pi/2 - margin].
AngleSet randomAngleSet(SeededRng& rng, int q, double margin = 0.0);

/// Max |a - b| over all entries.
double maxAbsDiff(const Matrix& a, const Matrix& b);

}  // namespace csd::testing
