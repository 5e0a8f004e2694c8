#ifndef ZNN_TAYLOR_HPP_
#define ZNN_TAYLOR_HPP_

#include <string>
#include <vector>

#include <boost/rational.hpp>

#include "znn/types.hpp"

namespace znn {

using Rational = boost::rational<long long>;

// Family label j_s: a look-ahead formula using j+s data instances
// (x_{k+1}, x_k, x_{k-1}, ..., x_{k-(j+s-2)}) whose recursion targets
// truncation order O(tau^{j+2}).
struct FormulaType {
  int j = 0;
  int s = 0;

  int instances() const { return j + s; }
  // Number of Taylor expansions = weight-vector length: every instance
  // except the center x_k.
  int expansions() const { return j + s - 1; }
  std::string id() const { return std::to_string(j) + "_" + std::to_string(s); }

  friend bool operator==(const FormulaType&, const FormulaType&) = default;
};

// Parses "2_3" into {2,3}; throws Error on malformed input.
FormulaType parse_formula_type(const std::string& id);

// Taylor offsets for r expansions around x_k: +1, -1, -2, ..., -(r-1).
std::vector<long long> taylor_offsets(int expansions);

// The coefficient matrix whose left kernel annihilates the second and higher
// derivative terms when Taylor expansions at the offsets above are combined:
// entry(i, p-2) = c_i^p / p! for derivative orders p = 2..max_order, kept in
// exact rational arithmetic so that the downstream rank and echelon
// computations cannot suffer spurious rank loss.
struct TaylorMatrix {
  FormulaType type;
  int rows = 0;           // r = j + s - 1
  int max_order = 0;      // highest derivative order represented (j for the
                          // standard construction)
  std::vector<std::vector<Rational>> entries;  // rows x (max_order - 1)

  int cols() const { return max_order - 1; }
  Rational at(int row, int col) const { return entries[row][col]; }
  // Entries converted to double, for residual checks against float weights.
  RealMatrix as_real() const;
};

// Standard matrix for the type: derivative orders 2..j (j-1 columns).  For
// j = 1 the matrix has zero columns and the kernel is the whole space.
// Throws Error for j < 1 or s < 1.
TaylorMatrix build_taylor_matrix(FormulaType type);

// Extended variant with derivative orders 2..max_order; used to search the
// subspace that also annihilates order j+1, which is what raises the
// recursion truncation from O(tau^{j+1}) to O(tau^{j+2}) (the classic
// five-instance 2_3 formula lies in this subspace).
TaylorMatrix build_taylor_matrix(FormulaType type, int max_order);

// Left-kernel parametrization.  The reduced row echelon form of the
// transposed Taylor matrix has the block shape [I | R]; every kernel vector
// is then w = [-R y ; y] for a free seed y.  Throws RankDeficientError when
// the leading block is singular (never observed for the supported range, but
// checked rather than assumed).
struct KernelMap {
  FormulaType type;
  int seed_dim = 0;                            // rows - pivot count
  std::vector<std::vector<Rational>> r_block;  // pivots x seed_dim, exact

  RealMatrix r_as_real() const;
  // w = [-R y ; y] in double arithmetic.
  RealVector extend(const RealVector& seed) const;
  // Same extension in exact rational arithmetic (for catalog validation).
  std::vector<Rational> extend_exact(const std::vector<Rational>& seed) const;
};

KernelMap kernel_parametrization(const TaylorMatrix& tm);

}  // namespace znn

#endif  // ZNN_TAYLOR_HPP_
