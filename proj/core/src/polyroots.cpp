#include "znn/polyroots.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace znn {
namespace {

// Parlett-Reinsch balancing: diagonal similarity scaling by machine-radix
// powers so row and column norms match, which sharpens companion-matrix
// eigenvalues without introducing rounding error.
void balance_in_place(RealMatrix& m) {
  const double gamma = 0.9;
  const Eigen::Index n = m.rows();
  bool converged = false;
  while (!converged) {
    converged = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      double row_norm = 0.0, col_norm = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        row_norm += std::abs(m(i, j));
        col_norm += std::abs(m(j, i));
      }
      if (row_norm == 0.0 || col_norm == 0.0) continue;
      int exponent = 0;
      std::frexp(col_norm / row_norm, &exponent);
      exponent /= 2;
      if (exponent == 0) continue;
      const double scale = std::ldexp(1.0, exponent);
      if (std::abs(row_norm * scale) + std::abs(col_norm / scale) <
          gamma * (row_norm + col_norm)) {
        converged = false;
        m.row(i) *= scale;
        m.col(i) /= scale;
      }
    }
  }
}

}  // namespace

std::vector<Complex> polynomial_roots(const RealVector& coeffs) {
  if (coeffs.size() == 0 || coeffs(0) == 0.0)
    throw Error("polynomial_roots: leading coefficient must be nonzero");
  const Eigen::Index degree = coeffs.size() - 1;
  if (degree == 0) return {};
  RealMatrix companion = RealMatrix::Zero(degree, degree);
  companion.diagonal(-1).setOnes();
  // Last column carries the negated monic coefficients: row i corresponds to
  // the power x^i, whose coefficient is coeffs(degree - i).
  for (Eigen::Index i = 0; i < degree; ++i)
    companion(i, degree - 1) = -coeffs(degree - i) / coeffs(0);
  balance_in_place(companion);
  Eigen::EigenSolver<RealMatrix> solver(companion, /*computeEigenvectors=*/false);
  std::vector<Complex> roots(degree);
  for (Eigen::Index i = 0; i < degree; ++i) roots[i] = solver.eigenvalues()(i);
  return roots;
}

}  // namespace znn
