#include "znn/taylor.hpp"

#include <cstdlib>

namespace znn {
namespace {

Rational int_pow(long long base, int exp) {
  Rational out(1);
  for (int i = 0; i < exp; ++i) out *= Rational(base);
  return out;
}

Rational factorial(int n) {
  Rational out(1);
  for (int i = 2; i <= n; ++i) out *= Rational(i);
  return out;
}

// In-place Gauss-Jordan over rationals.  Returns the pivot columns.  Row
// swaps only; no column pivoting, because the downstream kernel map needs
// the identity block in the leading columns.
std::vector<int> rref(std::vector<std::vector<Rational>>& m) {
  std::vector<int> pivots;
  const int rows = static_cast<int>(m.size());
  const int cols = rows > 0 ? static_cast<int>(m[0].size()) : 0;
  int row = 0;
  for (int col = 0; col < cols && row < rows; ++col) {
    int sel = -1;
    for (int i = row; i < rows; ++i) {
      if (m[i][col] != Rational(0)) {
        sel = i;
        break;
      }
    }
    if (sel < 0) continue;
    std::swap(m[row], m[sel]);
    const Rational inv = m[row][col];
    for (int j = 0; j < cols; ++j) m[row][j] /= inv;
    for (int i = 0; i < rows; ++i) {
      if (i == row || m[i][col] == Rational(0)) continue;
      const Rational factor = m[i][col];
      for (int j = 0; j < cols; ++j) m[i][j] -= factor * m[row][j];
    }
    pivots.push_back(col);
    ++row;
  }
  return pivots;
}

}  // namespace

FormulaType parse_formula_type(const std::string& id) {
  const auto sep = id.find('_');
  if (sep == std::string::npos || sep == 0 || sep + 1 >= id.size())
    throw Error("formula type must look like 'j_s', got '" + id + "'");
  char* end = nullptr;
  const long j = std::strtol(id.c_str(), &end, 10);
  if (end != id.c_str() + sep) throw Error("bad formula type '" + id + "'");
  const long s = std::strtol(id.c_str() + sep + 1, &end, 10);
  if (end != id.c_str() + id.size()) throw Error("bad formula type '" + id + "'");
  if (j < 1 || s < 1) throw Error("formula type needs j >= 1 and s >= 1");
  return FormulaType{static_cast<int>(j), static_cast<int>(s)};
}

std::vector<long long> taylor_offsets(int expansions) {
  std::vector<long long> offs(expansions);
  offs[0] = 1;
  for (int i = 1; i < expansions; ++i) offs[i] = -i;
  return offs;
}

RealMatrix TaylorMatrix::as_real() const {
  RealMatrix out(rows, cols());
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols(); ++j)
      out(i, j) = boost::rational_cast<double>(entries[i][j]);
  return out;
}

TaylorMatrix build_taylor_matrix(FormulaType type) {
  return build_taylor_matrix(type, type.j);
}

TaylorMatrix build_taylor_matrix(FormulaType type, int max_order) {
  if (type.j < 1 || type.s < 1)
    throw Error("taylor matrix needs j >= 1 and s >= 1");
  if (max_order < 1) throw Error("taylor matrix needs max_order >= 1");
  TaylorMatrix tm;
  tm.type = type;
  tm.rows = type.expansions();
  tm.max_order = max_order;
  const auto offs = taylor_offsets(tm.rows);
  tm.entries.resize(tm.rows);
  for (int i = 0; i < tm.rows; ++i) {
    tm.entries[i].reserve(tm.cols());
    for (int p = 2; p <= max_order; ++p)
      tm.entries[i].push_back(int_pow(offs[i], p) / factorial(p));
  }
  return tm;
}

RealMatrix KernelMap::r_as_real() const {
  const int pivots = static_cast<int>(r_block.size());
  RealMatrix out(pivots, seed_dim);
  for (int i = 0; i < pivots; ++i)
    for (int j = 0; j < seed_dim; ++j)
      out(i, j) = boost::rational_cast<double>(r_block[i][j]);
  return out;
}

RealVector KernelMap::extend(const RealVector& seed) const {
  if (seed.size() != seed_dim)
    throw DimensionError("kernel extension: seed length mismatch");
  const int pivots = static_cast<int>(r_block.size());
  RealVector w(pivots + seed_dim);
  w.head(pivots) = -r_as_real() * seed;
  w.tail(seed_dim) = seed;
  return w;
}

std::vector<Rational> KernelMap::extend_exact(
    const std::vector<Rational>& seed) const {
  if (static_cast<int>(seed.size()) != seed_dim)
    throw DimensionError("kernel extension: seed length mismatch");
  const int pivots = static_cast<int>(r_block.size());
  std::vector<Rational> w(pivots + seed_dim, Rational(0));
  for (int i = 0; i < pivots; ++i)
    for (int j = 0; j < seed_dim; ++j) w[i] -= r_block[i][j] * seed[j];
  for (int j = 0; j < seed_dim; ++j) w[pivots + j] = seed[j];
  return w;
}

KernelMap kernel_parametrization(const TaylorMatrix& tm) {
  if (tm.rows <= tm.cols())
    throw Error("kernel parametrization needs more expansions than columns");
  // Row-reduce the transpose; kernel vectors of the transpose-echelon
  // [I | R] are exactly [-R y ; y].
  std::vector<std::vector<Rational>> at(tm.cols(),
                                        std::vector<Rational>(tm.rows));
  for (int i = 0; i < tm.rows; ++i)
    for (int j = 0; j < tm.cols(); ++j) at[j][i] = tm.entries[i][j];
  const auto pivots = rref(at);
  if (static_cast<int>(pivots.size()) != tm.cols())
    throw RankDeficientError("taylor matrix is rank deficient for type " +
                             tm.type.id());
  for (int i = 0; i < tm.cols(); ++i)
    if (pivots[i] != i)
      throw RankDeficientError(
          "taylor matrix echelon form is not [I | R] for type " + tm.type.id());
  KernelMap map;
  map.type = tm.type;
  map.seed_dim = tm.rows - tm.cols();
  map.r_block.resize(tm.cols());
  for (int i = 0; i < tm.cols(); ++i)
    map.r_block[i].assign(at[i].begin() + tm.cols(), at[i].end());
  return map;
}

}  // namespace znn
