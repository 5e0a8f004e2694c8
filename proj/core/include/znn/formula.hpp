#ifndef ZNN_FORMULA_HPP_
#define ZNN_FORMULA_HPP_

#include <vector>

#include "znn/taylor.hpp"
#include "znn/types.hpp"

namespace znn {

// A look-ahead finite-difference rule in both of its equivalent shapes.
//
// Derivative form (weights act on the instances x_{k+1}, x_{k-1}, ...,
// x_{k-l} with x_k as the expansion center):
//
//   xdot_k ~= [sum_i w_i x_{instance_i} - (sum_i w_i) x_k] / (D tau)
//
// Recursion form, solved for the look-ahead instance:
//
//   x_{k+1} = taucoeff tau xdot_k + sum_{m=0}^{l} polyrest[m] x_{k-m}
//
// Weights are normalized so weights(0) == 1 and the recursion is monic.
struct DifferenceFormula {
  FormulaType type;
  RealVector weights;
  double derivative_denominator = 0.0;  // D = sum_i w_i c_i
  double taucoeff = 0.0;                // D / w_1
  RealVector polyrest;                  // weights on x_k, x_{k-1}, ..., x_{k-l}
  RealVector charpoly;                  // monic, descending powers
  int truncation_order = 0;             // local error exponent target, j + 2

  int history() const { return static_cast<int>(polyrest.size()); }
};

// Root diagnostics for a recursion characteristic polynomial.
struct RootReport {
  std::vector<Complex> roots;  // sorted by magnitude, descending
  double max_magnitude = 0.0;
  double second_magnitude = 0.0;
  int near_unit_count = 0;  // roots with | |rho| - 1 | <= eps_conv
  double min_near_unit_separation = 0.0;  // +inf with fewer than two
  bool convergent = false;
};

inline constexpr double kDefaultEpsConv = 1e-9;

// Builds the normalized formula from a raw weight vector of length
// type.expansions().  Verifies the Taylor-annihilation property
// w * A = 0 within kernel_tolerance (scaled by the weight magnitude) and
// throws DegenerateFormulaError when the leading weight or the derivative
// denominator vanishes.
DifferenceFormula formula_from_weights(FormulaType type,
                                       const RealVector& raw_weights,
                                       double kernel_tolerance = 1e-10);

// Roots of charpoly plus the convergence verdict: spectral radius at most
// 1 + eps_conv and at most one root within eps_conv of the unit circle (the
// principal root at +1).  The two-clause form rejects both repeated unit
// roots and distinct unit-magnitude pairs such as the central-difference
// rule's +-1.
RootReport analyze_roots(const DifferenceFormula& formula,
                         double eps_conv = kDefaultEpsConv);

bool is_convergent(const DifferenceFormula& formula,
                   double eps_conv = kDefaultEpsConv);

// Spectral radius of the solver feedback loop at normalized step gain
// h = tau * eta on the scalar model problem: the recursion plus the
// stipulated error decay shifts the characteristic polynomial to
// charpoly(rho) + taucoeff * h * rho^{r-1}.  A formula is usable at h only
// if this radius is below 1; it tends to 1 as h -> 0 (the open-loop root
// at +1) and exceeds 1 again for h too large.
double loop_spectral_radius(const DifferenceFormula& formula, double h);

// Step gain minimizing the closed-loop spectral radius (grid scan plus
// golden-section refinement; deterministic).  Used as the per-formula
// default when the caller pins neither eta nor h.
double suggest_step_gain(const DifferenceFormula& formula);

}  // namespace znn

#endif  // ZNN_FORMULA_HPP_
