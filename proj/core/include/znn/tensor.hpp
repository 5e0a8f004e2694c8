#ifndef ZNN_TENSOR_HPP_
#define ZNN_TENSOR_HPP_

#include "znn/types.hpp"

namespace znn {

// Diagnostics from a minimum-norm solve: effective numerical rank and the
// condition number sigma_max/sigma_min over the singular values kept.
struct SolveStats {
  Eigen::Index rank = 0;
  double condition = 1.0;
  double sigma_max = 0.0;
};

// Kronecker product A (x) B, the block matrix [a_ij * B].  Throws
// SizeLimitError when the result would exceed max_entries entries.
Matrix kron(const Matrix& a, const Matrix& b,
            Eigen::Index max_entries = Eigen::Index(1) << 26);

// Column-stacking: vec([[a,c],[b,d]]) = (a,b,c,d).
Vector vec(const Matrix& x);

// Inverse of vec; rows*cols must match x.size().
Matrix unvec(const Vector& x, Eigen::Index rows, Eigen::Index cols);

// Minimum-norm least-squares solution of M x = q via SVD.  Singular values
// below rtol * sigma_max are treated as zero, so the pseudoinverse path is
// taken automatically for singular or rectangular M.  For nonsingular square
// M this is the exact solve.
Vector min_norm_solve(const Matrix& m, const Vector& q, double rtol = 1e-12,
                      SolveStats* stats = nullptr);

// Column-wise variant for matrix right-hand sides (one SVD, many solves).
Matrix min_norm_solve(const Matrix& m, const Matrix& q, double rtol = 1e-12,
                      SolveStats* stats = nullptr);

}  // namespace znn

#endif  // ZNN_TENSOR_HPP_
