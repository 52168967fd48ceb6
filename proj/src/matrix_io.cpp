#include "csd/matrix_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace csd {

ComplexMatrix LoadedMatrix::toComplex() const {
  ComplexMatrix out(re.rows(), re.cols());
  for (int i = 0; i < re.rows(); ++i)
    for (int j = 0; j < re.cols(); ++j)
      out(i, j) = std::complex<double>(re(i, j), hasImag ? im(i, j) : 0.0);
  return out;
}

const Matrix& LoadedMatrix::toReal() const {
  if (hasImag) throw InvalidInputError("matrix file carries an imaginary grid");
  return re;
}

std::string formatDouble(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

void writeGrid(std::ostream& os, const Matrix& m) {
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) {
      if (j) os << ' ';
      os << formatDouble(m(i, j));
    }
    os << '\n';
  }
}

Matrix readGrid(std::istream& is, int rows, int cols) {
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      std::string tok;
      if (!(is >> tok)) throw InvalidInputError("matrix file: unexpected end of data");
      char* end = nullptr;
      double v = std::strtod(tok.c_str(), &end);
      if (end == tok.c_str() || *end != '\0')
        throw InvalidInputError("matrix file: malformed number '" + tok + "'");
      m(i, j) = v;
    }
  return m;
}

}  // namespace

void writeMatrix(std::ostream& os, const Matrix& m) {
  os << m.rows() << ' ' << m.cols() << '\n';
  writeGrid(os, m);
}

void writeMatrix(std::ostream& os, const ComplexMatrix& m) {
  Matrix re(m.rows(), m.cols()), im(m.rows(), m.cols());
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) {
      re(i, j) = m(i, j).real();
      im(i, j) = m(i, j).imag();
    }
  os << m.rows() << ' ' << m.cols() << '\n';
  writeGrid(os, re);
  os << "imag\n";
  writeGrid(os, im);
}

void writeMatrixFile(const std::string& path, const Matrix& m) {
  std::ofstream os(path);
  if (!os) throw InvalidInputError("cannot open for writing: " + path);
  writeMatrix(os, m);
}

void writeMatrixFile(const std::string& path, const ComplexMatrix& m) {
  std::ofstream os(path);
  if (!os) throw InvalidInputError("cannot open for writing: " + path);
  writeMatrix(os, m);
}

LoadedMatrix readMatrix(std::istream& is) {
  long long rows = 0, cols = 0;
  if (!(is >> rows >> cols) || rows < 0 || cols < 0 || rows > 100000 || cols > 100000)
    throw InvalidInputError("matrix file: malformed header");
  LoadedMatrix out;
  out.re = readGrid(is, static_cast<int>(rows), static_cast<int>(cols));
  std::string marker;
  if (is >> marker) {
    if (marker != "imag") throw InvalidInputError("matrix file: trailing garbage '" + marker + "'");
    out.im = readGrid(is, static_cast<int>(rows), static_cast<int>(cols));
    out.hasImag = true;
  }
  return out;
}

LoadedMatrix readMatrixFile(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InvalidInputError("cannot open for reading: " + path);
  return readMatrix(is);
}

}  // namespace csd
