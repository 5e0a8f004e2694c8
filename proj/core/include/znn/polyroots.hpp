#ifndef ZNN_POLYROOTS_HPP_
#define ZNN_POLYROOTS_HPP_

#include <vector>

#include "znn/types.hpp"

namespace znn {

// Roots of a real polynomial given by its coefficients in descending powers,
// coeffs[0] x^n + ... + coeffs[n].  Computed as the eigenvalues of the
// balanced companion matrix.  Leading zero coefficients are rejected; a
// constant polynomial has no roots.
std::vector<Complex> polynomial_roots(const RealVector& coeffs);

}  // namespace znn

#endif  // ZNN_POLYROOTS_HPP_
