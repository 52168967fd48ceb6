#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace csd {

// Machine epsilon for IEEE double, spelled out once.
inline constexpr double kEps = 2.220446049250313e-16;

/// Bad argument values (dimension mismatches, non-finite input, ...).
struct InvalidInputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Input matrix is too far from unitary to process.
struct RejectedInputError : std::runtime_error {
  double defect;
  RejectedInputError(const std::string& msg, double measured_defect)
      : std::runtime_error(msg), defect(measured_defect) {}
};

/// A matrix does not have the structural zero/sign pattern an operation requires.
struct StructureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline double conj_scalar(double x) { return x; }
inline std::complex<double> conj_scalar(const std::complex<double>& x) { return std::conj(x); }
inline double real_part(double x) { return x; }
inline double real_part(const std::complex<double>& x) { return x.real(); }
inline double abs2(double x) { return x * x; }
inline double abs2(const std::complex<double>& x) { return std::norm(x); }
inline bool is_finite_scalar(double x) { return std::isfinite(x); }
inline bool is_finite_scalar(const std::complex<double>& x) {
  return std::isfinite(x.real()) && std::isfinite(x.imag());
}

}  // namespace csd
