#include "znn/tensor.hpp"

#include <Eigen/SVD>

#include <cinttypes>
#include <cstdio>
#include <cstdlib>

namespace znn {

std::string format_double(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

std::string format_complex(const Complex& value) {
  if (value.imag() == 0.0) return format_double(value.real());
  std::string out = format_double(value.real());
  if (value.imag() >= 0.0 || std::isnan(value.imag())) out += '+';
  out += format_double(value.imag());
  out += 'j';
  return out;
}

Complex parse_complex(const std::string& token) {
  if (token.empty()) throw Error("empty complex token");
  if (token.back() != 'j') {
    char* end = nullptr;
    double re = std::strtod(token.c_str(), &end);
    if (end != token.c_str() + token.size())
      throw Error("bad numeric token '" + token + "'");
    return Complex(re, 0.0);
  }
  // re+imj: find the sign that separates the two parts, skipping a leading
  // sign and any exponent signs (preceded by e/E).
  const std::string body = token.substr(0, token.size() - 1);
  std::size_t split = std::string::npos;
  for (std::size_t i = 1; i < body.size(); ++i) {
    if ((body[i] == '+' || body[i] == '-') &&
        body[i - 1] != 'e' && body[i - 1] != 'E') {
      split = i;
    }
  }
  if (split == std::string::npos) throw Error("bad complex token '" + token + "'");
  char* end = nullptr;
  const std::string re_part = body.substr(0, split);
  const std::string im_part = body.substr(split);
  double re = std::strtod(re_part.c_str(), &end);
  if (end != re_part.c_str() + re_part.size())
    throw Error("bad complex token '" + token + "'");
  double im = std::strtod(im_part.c_str(), &end);
  if (end != im_part.c_str() + im_part.size())
    throw Error("bad complex token '" + token + "'");
  return Complex(re, im);
}

Matrix kron(const Matrix& a, const Matrix& b, Eigen::Index max_entries) {
  const Eigen::Index rows = a.rows() * b.rows();
  const Eigen::Index cols = a.cols() * b.cols();
  if (a.rows() != 0 && b.rows() != 0 && rows / b.rows() != a.rows())
    throw SizeLimitError("kron: row count overflow");
  if (a.cols() != 0 && b.cols() != 0 && cols / b.cols() != a.cols())
    throw SizeLimitError("kron: column count overflow");
  if (rows != 0 && cols > max_entries / rows)
    throw SizeLimitError("kron: result exceeds entry budget");
  Matrix out(rows, cols);
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Vector vec(const Matrix& x) {
  return Eigen::Map<const Vector>(x.data(), x.size());
}

Matrix unvec(const Vector& x, Eigen::Index rows, Eigen::Index cols) {
  if (rows * cols != x.size())
    throw DimensionError("unvec: size mismatch");
  return Eigen::Map<const Matrix>(x.data(), rows, cols);
}

Vector min_norm_solve(const Matrix& m, const Vector& q, double rtol,
                      SolveStats* stats) {
  if (m.rows() != q.size())
    throw DimensionError("min_norm_solve: rhs length mismatch");
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  const double cut = rtol * smax;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cut) ++rank;
  // x = V diag(1/s) U^* q over the kept singular directions: the unique
  // least-squares solution of minimal Euclidean norm.
  Vector coef = svd.matrixU().leftCols(rank).adjoint() * q;
  for (Eigen::Index i = 0; i < rank; ++i) coef(i) /= sv(i);
  Vector x = svd.matrixV().leftCols(rank) * coef;
  if (stats) {
    stats->rank = rank;
    stats->sigma_max = smax;
    stats->condition = (rank > 0 && sv(rank - 1) > 0.0) ? smax / sv(rank - 1) : 1.0;
  }
  return x;
}

Matrix min_norm_solve(const Matrix& m, const Matrix& q, double rtol,
                      SolveStats* stats) {
  if (m.rows() != q.rows())
    throw DimensionError("min_norm_solve: rhs row mismatch");
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  const double cut = rtol * smax;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cut) ++rank;
  Matrix coef = svd.matrixU().leftCols(rank).adjoint() * q;
  for (Eigen::Index i = 0; i < rank; ++i) coef.row(i) /= sv(i);
  Matrix x = svd.matrixV().leftCols(rank) * coef;
  if (stats) {
    stats->rank = rank;
    stats->sigma_max = smax;
    stats->condition = (rank > 0 && sv(rank - 1) > 0.0) ? smax / sv(rank - 1) : 1.0;
  }
  return x;
}

}  // namespace znn
