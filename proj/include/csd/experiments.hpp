#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "csd/driver.hpp"
#include "csd/rng.hpp"

namespace csd {

enum class AngleMode { Uniform, Grid };

/// The 8x8 test matrix assembled from the four printed 4x4 blocks, p = q = 4.
/// Entries are embedded as 12-decimal string literals so the stored values
/// round-trip the printout exactly.
CsdProblem<double> genVanloan();

/// Floating-point Haar surrogate: QR of an n-by-n standard normal matrix,
/// orthogonal factor times a random +-1 signature.
Matrix genHaar(SeededRng& rng, int n);

/// Clustered CS values: q+1 deltas distributed as 10^(-18 U(0,1)), theta from
/// their cumulative ratios, X = diag(U1,U2) [C S; -S C] diag(V1,V2)^T with
/// Haar factors; p = q.
CsdProblem<double> genClustered(SeededRng& rng, int q);

/// X = materialize(theta, phi) with angles drawn uniformly from [0, pi/2] or
/// from the exact three-element grid {0, pi/4, pi/2}; p = q, m = 2q.
CsdProblem<double> genAngles(SeededRng& rng, int q, AngleMode mode);

struct ExperimentConfig {
  std::string name;  // vanloan | haar | clustered | angles-uniform | angles-grid
  int trials = 1;
  uint64_t seed = 0;
  int p = 0, q = 0, m = 0;
  ShiftStrategy shiftStrategy = ShiftStrategy::Wilkinson;
  double tau = 8.0 * kEps;
};

/// Paper defaults for a named experiment.  Throws on unknown names.
ExperimentConfig defaultExperimentConfig(const std::string& name);

struct TrialResult {
  ResidualReport report;
  double epsilon = 0.0;  // max(10 eps, ||X^T X - I||_2)
  bool converged = true;
  bool pass = false;
  std::string error;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<TrialResult> trials;
  ResidualReport aggregate;  // entrywise maxima over trials
  double maxEpsilon = 0.0;
  double boundMultiplier = 0.0;  // K in "metric < K * epsilon" (0 for vanloan)
  int failures = 0;
  bool pass = false;
  double wallSeconds = 0.0;
};

/// Runs every trial (optionally in parallel, capped by CSD_THREADS), checks
/// each metric against the experiment's bound per trial, and aggregates.
ExperimentReport runExperiment(const ExperimentConfig& config);

/// Versioned JSON rendering of a report ("schemaVersion": 1).  Identical
/// configs give byte-identical output except for the wallSeconds field.
std::string reportToJson(const ExperimentReport& report);

}  // namespace csd
