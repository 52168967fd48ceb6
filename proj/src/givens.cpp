#include "csd/givens.hpp"

#include <cmath>

namespace csd {

double GivensRotation::angle() const { return std::atan2(s, c); }

Matrix GivensRotation::toDense() const {
  Matrix g = Matrix::identity(dim);
  g(i1 - 1, i1 - 1) = c;
  g(i1 - 1, i2 - 1) = -s;
  g(i2 - 1, i1 - 1) = s;
  g(i2 - 1, i2 - 1) = c;
  return g;
}

GivensRotation givens(int m, int i1, int i2, const std::array<double, 2>& x) {
  if (!(1 <= i1 && i1 < i2 && i2 <= m))
    throw InvalidInputError("givens: indices must satisfy 1 <= i1 < i2 <= m");
  if (!std::isfinite(x[0]) || !std::isfinite(x[1]))
    throw InvalidInputError("givens: non-finite input vector");

  GivensRotation g;
  g.dim = m;
  g.i1 = i1;
  g.i2 = i2;
  if (x[0] == 0.0 && x[1] == 0.0) {
    g.c = 0.0;
    g.s = 1.0;  // defined as givens(m, i1, i2, (0,1)^T)
    return g;
  }
  double r = std::hypot(x[0], x[1]);
  double c = x[0] / r;
  double s = x[1] / r;
  if (s < 0.0) {
    c = -c;
    s = -s;
  }
  if (s == 0.0) c = 1.0;
  g.c = c;
  g.s = s;
  return g;
}

Matrix givensProduct(int m, const std::vector<GivensRotation>& rotations) {
  Matrix q = Matrix::identity(m);
  for (const GivensRotation& g : rotations) g.applyRight(q);
  return q;
}

}  // namespace csd
