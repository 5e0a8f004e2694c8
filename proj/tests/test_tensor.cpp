#include <cmath>
#include <cstdlib>
#include <random>

#include <Eigen/Dense>
#include <doctest.h>

#include "znn/tensor.hpp"

namespace znn {
namespace {

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols,
                     std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i)
      m(i, j) = Complex(normal(rng), normal(rng));
  return m;
}

TEST_CASE("kron matches the block definition") {
  Matrix a(2, 2), b(2, 2);
  a << Complex(1.0), Complex(2.0), Complex(3.0), Complex(4.0);
  b << Complex(0.0), Complex(1.0), Complex(1.0), Complex(0.0);
  const Matrix k = kron(a, b);
  REQUIRE(k.rows() == 4);
  REQUIRE(k.cols() == 4);
  Matrix expected(4, 4);
  expected << Complex(0.0), Complex(1.0), Complex(0.0), Complex(2.0),
      Complex(1.0), Complex(0.0), Complex(2.0), Complex(0.0), Complex(0.0),
      Complex(3.0), Complex(0.0), Complex(4.0), Complex(3.0), Complex(0.0),
      Complex(4.0), Complex(0.0);
  CHECK((k - expected).norm() == 0.0);
}

TEST_CASE("kron triple product identity over random shapes") {
  std::mt19937_64 rng(20240915);
  std::uniform_int_distribution<int> dim(1, 4);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index m = dim(rng), n = dim(rng), p = dim(rng), q = dim(rng);
    const Matrix a = random_matrix(m, n, rng);
    const Matrix b = random_matrix(p, q, rng);
    const Matrix x = random_matrix(q, n, rng);
    // Column-stacking convention: kron(A, B) vec(X) = vec(B X A^T).
    const Vector lhs = kron(a, b) * vec(x);
    const Vector rhs = vec(Matrix(b * x * a.transpose()));
    const double scale = std::max(1.0, rhs.norm());
    CHECK((lhs - rhs).norm() <= 1e-13 * scale);
  }
}

TEST_CASE("kron rejects results over the entry budget") {
  const Matrix a = Matrix::Identity(4, 4);
  CHECK_THROWS_AS(kron(a, a, 15), SizeLimitError);
  CHECK_NOTHROW(kron(a, a, 256));
}

TEST_CASE("vec stacks columns and unvec undoes it") {
  Matrix x(2, 2);
  x << Complex(1.0), Complex(3.0), Complex(2.0), Complex(4.0);
  const Vector v = vec(x);
  CHECK(v(0) == Complex(1.0));
  CHECK(v(1) == Complex(2.0));
  CHECK(v(2) == Complex(3.0));
  CHECK(v(3) == Complex(4.0));
  CHECK((unvec(v, 2, 2) - x).norm() == 0.0);

  std::mt19937_64 rng(7);
  const Matrix y = random_matrix(3, 5, rng);
  CHECK((unvec(vec(y), 3, 5) - y).norm() == 0.0);
  CHECK_THROWS_AS(unvec(vec(y), 4, 4), DimensionError);
}

TEST_CASE("min_norm_solve picks the minimum-norm solution") {
  Matrix m(2, 2);
  m << Complex(1.0), Complex(0.0), Complex(0.0), Complex(0.0);
  Vector q(2);
  q << Complex(1.0), Complex(1.0);
  SolveStats stats;
  const Vector x = min_norm_solve(m, q, 1e-12, &stats);
  CHECK(std::abs(x(0) - Complex(1.0)) <= 1e-14);
  CHECK(std::abs(x(1)) <= 1e-14);
  CHECK(stats.rank == 1);
  CHECK(stats.condition == doctest::Approx(1.0));
}

TEST_CASE("min_norm_solve equals the direct solve when nonsingular") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix m =
        random_matrix(4, 4, rng) + 4.0 * Matrix::Identity(4, 4);
    const Vector q = random_matrix(4, 1, rng).col(0);
    const Vector x = min_norm_solve(m, q);
    CHECK((m * x - q).norm() <= 1e-12 * q.norm());
  }
}

TEST_CASE("min_norm_solve on a wide system reproduces the data") {
  std::mt19937_64 rng(13);
  const Matrix m = random_matrix(2, 5, rng);
  const Vector q = random_matrix(2, 1, rng).col(0);
  SolveStats stats;
  const Vector x = min_norm_solve(m, q, 1e-12, &stats);
  CHECK(stats.rank == 2);
  CHECK((m * x - q).norm() <= 1e-12 * q.norm());
  // Minimum norm: orthogonal to the kernel, i.e. x lies in the row space.
  const Matrix gram = m * m.adjoint();
  const Vector y = gram.partialPivLu().solve(q);
  CHECK((x - m.adjoint() * y).norm() <= 1e-11 * x.norm());
}

TEST_CASE("matrix right-hand sides solve column by column") {
  std::mt19937_64 rng(17);
  const Matrix m = random_matrix(4, 3, rng);
  const Matrix q = random_matrix(4, 5, rng);
  const Matrix x = min_norm_solve(m, q);
  REQUIRE(x.rows() == 3);
  REQUIRE(x.cols() == 5);
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    const Vector xj = min_norm_solve(m, Vector(q.col(j)));
    CHECK((x.col(j) - xj).norm() <= 1e-13 * std::max(1.0, xj.norm()));
  }
}

TEST_CASE("format_double survives a parse round trip") {
  const double values[] = {0.0,    1.0,        -1.0,   0.1,
                           1.0 / 3.0, 3.141592653589793, 1e300, 1e-300,
                           -2.5e-7};
  for (const double v : values) {
    const std::string text = format_double(v);
    CHECK(std::strtod(text.c_str(), nullptr) == v);
  }
}

TEST_CASE("format_complex and parse_complex are inverse") {
  const Complex values[] = {Complex(1.5, 0.0), Complex(0.0, 1.0),
                            Complex(-0.25, -3.5), Complex(1e-3, 2e10),
                            Complex(-1.0 / 3.0, 1.0 / 7.0)};
  for (const Complex& v : values) {
    const Complex back = parse_complex(format_complex(v));
    CHECK(back.real() == v.real());
    CHECK(back.imag() == v.imag());
  }
  CHECK(format_complex(Complex(2.0, 0.0)) == "2");
  CHECK(format_complex(Complex(1.0, -1.0)) == "1-1j");
  CHECK_THROWS_AS(parse_complex(""), Error);
  CHECK_THROWS_AS(parse_complex("1.0x"), Error);
  CHECK_THROWS_AS(parse_complex("j"), Error);
  CHECK_THROWS_AS(parse_complex("1++2j"), Error);
}

}  // namespace
}  // namespace znn
