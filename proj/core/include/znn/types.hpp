#ifndef ZNN_TYPES_HPP_
#define ZNN_TYPES_HPP_

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace znn {

// Complex scalars throughout; real problems are the zero-imaginary special case.
using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Requested dimensions exceed the configured entry budget.
class SizeLimitError : public Error {
 public:
  using Error::Error;
};

// Operand shapes are incompatible.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A matrix required to have full rank does not (within the singular-value
// threshold in use).
class RankDeficientError : public Error {
 public:
  using Error::Error;
};

// A weight vector cannot be turned into a usable recursion (leading weight
// or derivative denominator vanishes).
class DegenerateFormulaError : public Error {
 public:
  using Error::Error;
};

// Formats a double with enough digits (17 significant) that reading it back
// recovers the identical IEEE value.  Used by every text emitter so repeated
// runs produce byte-identical files.
std::string format_double(double value);

// Formats a complex entry as `re` when the imaginary part is exactly zero,
// otherwise `re+imj` / `re-imj` with no embedded spaces.
std::string format_complex(const Complex& value);

// Parses the `re`, `re+imj`, `re-imj` forms produced by format_complex.
Complex parse_complex(const std::string& token);

}  // namespace znn

#endif  // ZNN_TYPES_HPP_
