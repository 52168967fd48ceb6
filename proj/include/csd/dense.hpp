#pragma once

#include <cmath>
#include <vector>

#include "csd/types.hpp"

namespace csd {

/// Dense rectangular matrix, row-major.  Entry access is 0-based; the
/// sub-matrix helpers use the paper-style 1-based inclusive ranges A(i:k, j:l).
template <typename T>
class DenseMatrix {
 public:
  DenseMatrix() : rows_(0), cols_(0) {}
  DenseMatrix(int rows, int cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, fill) {
    if (rows < 0 || cols < 0) throw InvalidInputError("DenseMatrix: negative dimension");
  }

  static DenseMatrix identity(int n) {
    DenseMatrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = T{1};
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  T& operator()(int i, int j) { return data_[static_cast<size_t>(i) * cols_ + j]; }
  const T& operator()(int i, int j) const { return data_[static_cast<size_t>(i) * cols_ + j]; }

  /// A(i:k, j:l), 1-based inclusive.  Empty when k < i or l < j.
  DenseMatrix sub(int i, int k, int j, int l) const {
    checkRange(i, k, j, l);
    DenseMatrix out(std::max(0, k - i + 1), std::max(0, l - j + 1));
    for (int r = 0; r < out.rows_; ++r)
      for (int c = 0; c < out.cols_; ++c) out(r, c) = (*this)(i - 1 + r, j - 1 + c);
    return out;
  }

  /// Writes `block` into A(i:.., j:..), 1-based corner.
  void setSub(int i, int j, const DenseMatrix& block) {
    if (i < 1 || j < 1 || i - 1 + block.rows_ > rows_ || j - 1 + block.cols_ > cols_)
      throw InvalidInputError("DenseMatrix::setSub: block out of range");
    for (int r = 0; r < block.rows_; ++r)
      for (int c = 0; c < block.cols_; ++c) (*this)(i - 1 + r, j - 1 + c) = block(r, c);
  }

  /// Column segment A(i:k, j), 1-based inclusive.
  std::vector<T> colSegment(int i, int k, int j) const {
    std::vector<T> v;
    v.reserve(k >= i ? k - i + 1 : 0);
    for (int r = i; r <= k; ++r) v.push_back((*this)(r - 1, j - 1));
    return v;
  }

  /// Row segment A(i, j:l), 1-based inclusive.
  std::vector<T> rowSegment(int i, int j, int l) const {
    std::vector<T> v;
    v.reserve(l >= j ? l - j + 1 : 0);
    for (int c = j; c <= l; ++c) v.push_back((*this)(i - 1, c - 1));
    return v;
  }

  DenseMatrix adjoint() const {
    DenseMatrix out(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) out(j, i) = conj_scalar((*this)(i, j));
    return out;
  }

  DenseMatrix transpose() const {
    DenseMatrix out(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
    return out;
  }

  bool isFinite() const {
    for (const T& x : data_)
      if (!is_finite_scalar(x)) return false;
    return true;
  }

  friend DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols_ != b.rows_) throw InvalidInputError("DenseMatrix: product dimension mismatch");
    DenseMatrix out(a.rows_, b.cols_);
    for (int i = 0; i < a.rows_; ++i)
      for (int k = 0; k < a.cols_; ++k) {
        T aik = a(i, k);
        if (aik == T{}) continue;
        for (int j = 0; j < b.cols_; ++j) out(i, j) += aik * b(k, j);
      }
    return out;
  }

  friend DenseMatrix operator+(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_)
      throw InvalidInputError("DenseMatrix: sum dimension mismatch");
    DenseMatrix out = a;
    for (size_t i = 0; i < out.data_.size(); ++i) out.data_[i] += b.data_[i];
    return out;
  }

  friend DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_)
      throw InvalidInputError("DenseMatrix: difference dimension mismatch");
    DenseMatrix out = a;
    for (size_t i = 0; i < out.data_.size(); ++i) out.data_[i] -= b.data_[i];
    return out;
  }

  friend DenseMatrix operator*(double s, const DenseMatrix& a) {
    DenseMatrix out = a;
    for (T& x : out.data_) x *= s;
    return out;
  }

 private:
  void checkRange(int i, int k, int j, int l) const {
    if (i < 1 || j < 1 || k > rows_ || l > cols_)
      throw InvalidInputError("DenseMatrix::sub: range out of bounds");
  }

  int rows_, cols_;
  std::vector<T> data_;
};

using Matrix = DenseMatrix<double>;
using ComplexMatrix = DenseMatrix<std::complex<double>>;

template <typename T>
double frobeniusNorm(const DenseMatrix<T>& a) {
  double s = 0.0;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) s += abs2(a(i, j));
  return std::sqrt(s);
}

template <typename T>
double vectorNorm(const std::vector<T>& v) {
  double s = 0.0;
  for (const T& x : v) s += abs2(x);
  return std::sqrt(s);
}

template <typename T>
T innerProduct(const std::vector<T>& a, const std::vector<T>& b) {
  if (a.size() != b.size()) throw InvalidInputError("innerProduct: length mismatch");
  T s{};
  for (size_t i = 0; i < a.size(); ++i) s += conj_scalar(a[i]) * b[i];
  return s;
}

/// diag(A, B) block-diagonal assembly.
template <typename T>
DenseMatrix<T> blockDiag(const DenseMatrix<T>& a, const DenseMatrix<T>& b) {
  DenseMatrix<T> out(a.rows() + b.rows(), a.cols() + b.cols());
  if (a.rows() > 0 && a.cols() > 0) out.setSub(1, 1, a);
  if (b.rows() > 0 && b.cols() > 0) out.setSub(a.rows() + 1, a.cols() + 1, b);
  return out;
}

template <typename T>
DenseMatrix<T> toScalarType(const Matrix& a) {
  DenseMatrix<T> out(a.rows(), a.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) out(i, j) = T(a(i, j));
  return out;
}

template <typename T>
double orthogonalityDefectFrobenius(const DenseMatrix<T>& u) {
  DenseMatrix<T> g = u.adjoint() * u;
  for (int i = 0; i < g.rows(); ++i) g(i, i) -= T{1};
  return frobeniusNorm(g);
}

}  // namespace csd
