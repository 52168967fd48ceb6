#pragma once

#include <iosfwd>
#include <string>

#include "csd/dense.hpp"

namespace csd {

/// Whitespace matrix file: header "m n", then m rows of n decimals printed
/// with 17 significant digits (bit-exact round trip for finite doubles).
/// A complex matrix carries a second grid after a line reading "imag".
struct LoadedMatrix {
  Matrix re;
  Matrix im;  // same shape as re when hasImag
  bool hasImag = false;

  ComplexMatrix toComplex() const;
  const Matrix& toReal() const;  // throws when an imaginary grid is present
};

std::string formatDouble(double x);

void writeMatrix(std::ostream& os, const Matrix& m);
void writeMatrix(std::ostream& os, const ComplexMatrix& m);
void writeMatrixFile(const std::string& path, const Matrix& m);
void writeMatrixFile(const std::string& path, const ComplexMatrix& m);

LoadedMatrix readMatrix(std::istream& is);
LoadedMatrix readMatrixFile(const std::string& path);

}  // namespace csd
