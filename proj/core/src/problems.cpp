#include "znn/problems.hpp"

#include <cmath>

#include <Eigen/Dense>

namespace znn {
namespace {

void fill_solve_free_stats(SolveStats* stats, const Matrix& a) {
  if (!stats) return;
  stats->rank = std::min(a.rows(), a.cols());
  stats->sigma_max = a.norm();
  stats->condition = 1.0;
}

// Solves M Y = Rhs column by column through the rank-revealing path and
// throws when M is rank deficient (full_rank = required rank).
Matrix full_rank_solve(const Matrix& m, const Matrix& rhs,
                       Eigen::Index full_rank, const char* who,
                       SolveStats* stats) {
  SolveStats local;
  const Matrix y = min_norm_solve(m, rhs, 1e-12, &local);
  if (stats) *stats = local;
  if (local.rank < full_rank)
    throw RankDeficientError(std::string(who) +
                             ": system matrix is rank deficient (rank " +
                             std::to_string(local.rank) + " of " +
                             std::to_string(full_rank) + ")");
  return y;
}

}  // namespace

// ---------- eigenpair tracking ----------

EigenSystem eigen_assemble(const Matrix& a, const Matrix& adot,
                           const Vector& z, double eta) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n || adot.rows() != n || adot.cols() != n)
    throw DimensionError("eigen assembly: A and Adot must be square and equal");
  if (z.size() != n + 1)
    throw DimensionError("eigen assembly: z must pack [x; lambda]");
  const Vector x = z.head(n);
  const Complex lambda = z(n);
  if (x.norm() == 0.0) throw Error("eigen assembly: zero eigenvector iterate");

  const Matrix shifted = a - lambda * Matrix::Identity(n, n);
  EigenSystem sys;
  sys.p.resize(n + 1, n + 1);
  sys.p.topLeftCorner(n, n) = shifted;
  sys.p.topRightCorner(n, 1) = -x;
  sys.p.bottomLeftCorner(1, n) = -x.adjoint();
  sys.p(n, n) = Complex(0.0);
  sys.q.resize(n + 1);
  sys.q.head(n) = (-eta * shifted - adot) * x;
  sys.q(n) = eta * (x.squaredNorm() - 1.0);
  return sys;
}

Vector eigen_rate(const Matrix& a, const Matrix& adot, const Vector& z,
                  double eta, SolveStats* stats) {
  const EigenSystem sys = eigen_assemble(a, adot, z, eta);
  // An ill-conditioned P flags an eigenvalue collision; the minimum-norm
  // solve stays defined and the condition estimate is surfaced via stats.
  return min_norm_solve(sys.p, sys.q, 1e-12, stats);
}

Matrix eigen_residual(const Matrix& a, const Vector& z) {
  const Eigen::Index n = a.rows();
  const Vector x = z.head(n);
  return a * x - z(n) * x;
}

// ---------- linear system ----------

Vector linsys_rate(const Matrix& a, const Matrix& adot, const Vector& b,
                   const Vector& bdot, const Vector& x, double eta,
                   bool explicit_inverse, SolveStats* stats) {
  if (a.rows() != a.cols()) throw DimensionError("linsys: A must be square");
  const Vector rhs = -adot * x + bdot + eta * b;
  if (explicit_inverse) {
    // Mirrors the variant that materializes the inverse before applying it.
    const Matrix ainv = a.inverse();
    if (!ainv.allFinite())
      throw RankDeficientError("linsys: explicit inverse is singular");
    if (stats) {
      stats->rank = a.rows();
      stats->sigma_max = a.norm();
      stats->condition = a.norm() * ainv.norm();
    }
    return ainv * rhs - eta * x;
  }
  const Vector solved =
      full_rank_solve(a, rhs, a.rows(), "linsys", stats).col(0);
  return solved - eta * x;
}

Vector linsys_rate_coupled(const Matrix& x_inv, const Matrix& adot,
                           const Vector& b, const Vector& bdot,
                           const Vector& x, double eta) {
  return x_inv * (-adot * x + bdot + eta * b) - eta * x;
}

Matrix linsys_residual(const Matrix& a, const Vector& b, const Vector& x) {
  return a * x - b;
}

// ---------- matrix inverse ----------

Matrix inverse_rate(const Matrix& a, const Matrix& adot, const Matrix& x,
                    double eta) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n || x.rows() != n || x.cols() != n)
    throw DimensionError("inverse: A and X must be square and equal");
  return -x * (adot * x + eta * a * x - eta * Matrix::Identity(n, n));
}

Matrix inverse_residual(const Matrix& a, const Matrix& x) {
  return a * x - Matrix::Identity(a.rows(), a.rows());
}

// ---------- pseudoinverse ----------

Matrix pinv_rate(PinvSide side, const Matrix& a, const Matrix& adot,
                 const Matrix& x, double eta, SolveStats* stats) {
  const Eigen::Index m = a.rows(), n = a.cols();
  if (x.rows() != n || x.cols() != m)
    throw DimensionError("pinv: X must be the transposed shape of A");
  if (side == PinvSide::kRight) {
    if (m >= n) throw DimensionError("right pinv expects a wide matrix");
    // Xdot (A A*) = -X ((Adot + eta A) A* + A Adot*) + Adot* + eta A*;
    // right division by the hermitean Gram matrix is a solve against the
    // adjoint (Y G^{-1} = (G^{-1} Y*)*).
    const Matrix gram = a * a.adjoint();
    const Matrix y = -x * ((adot + eta * a) * a.adjoint() + a * adot.adjoint()) +
                     adot.adjoint() + eta * a.adjoint();
    return full_rank_solve(gram, y.adjoint(), m, "right pinv", stats).adjoint();
  }
  if (m <= n) throw DimensionError("left pinv expects a tall matrix");
  const Matrix gram = a.adjoint() * a;
  const Matrix y = -(adot.adjoint() * a + a.adjoint() * adot + eta * gram) * x +
                   adot.adjoint() + eta * a.adjoint();
  return full_rank_solve(gram, y, n, "left pinv", stats);
}

Matrix pinv_residual(PinvSide side, const Matrix& a, const Matrix& x) {
  if (side == PinvSide::kRight)
    return a * x - Matrix::Identity(a.rows(), a.rows());
  return x * a - Matrix::Identity(a.cols(), a.cols());
}

// ---------- least squares ----------

// Zeroing dynamics on the stationarity defect E = A*(A x - b).  The
// projected variant A*A xdot = A*(-(Adot + eta A) x + bdot + eta b) looks
// natural but leaves dE/dt = -eta E + Adot*(A x - b), and the optimal
// defect A x - b never vanishes for an inconsistent system, so it settles
// at an O(|Adot|/eta) bias instead of the discretization floor.  The full
// product rule removes the bias.
Vector lsq_rate(const Matrix& a, const Matrix& adot, const Vector& b,
                const Vector& bdot, const Vector& x, double eta,
                SolveStats* stats) {
  if (a.rows() <= a.cols()) throw DimensionError("lsq expects a tall matrix");
  const Matrix gram = a.adjoint() * a;
  const Vector rhs =
      -(adot.adjoint() * a + a.adjoint() * adot + eta * gram) * x +
      adot.adjoint() * b + a.adjoint() * (bdot + eta * b);
  return full_rank_solve(gram, rhs, a.cols(), "lsq", stats).col(0);
}

// The raw defect A x - b cannot vanish for an inconsistent tall system;
// what the dynamics drive to zero is the normal-equations (stationarity)
// defect.
Matrix lsq_residual(const Matrix& a, const Vector& b, const Vector& x) {
  return a.adjoint() * (a * x - b);
}

// ---------- constrained optimization ----------

Vector lagrange_rate(const GradientFn& grad_f, const HessianFn& hess_f,
                     const Matrix& a, const Matrix& adot, const Vector& b,
                     const Vector& bdot, const Vector& y, double eta,
                     SolveStats* stats) {
  const Eigen::Index m = a.rows(), n = a.cols();
  if (y.size() != n + m)
    throw DimensionError("lagrange: y must pack [x; lambda]");
  const Vector x = y.head(n);
  const Vector lambda = y.tail(m);

  Vector h(n + m);
  h.head(n) = grad_f(x) + a.transpose() * lambda;
  h.tail(m) = a * x - b;

  Vector hdot_t(n + m);
  hdot_t.head(n) = adot.transpose() * lambda;
  hdot_t.tail(m) = adot * x - bdot;

  Matrix jac = Matrix::Zero(n + m, n + m);
  jac.topLeftCorner(n, n) = hess_f(x);
  jac.topRightCorner(n, m) = a.transpose();
  jac.bottomLeftCorner(m, n) = a;
  // Singular J (constraint qualification failure) is reported through the
  // minimum-norm solve's condition estimate rather than thrown.
  return -min_norm_solve(jac, Vector(eta * h + hdot_t), 1e-12, stats);
}

Matrix lagrange_residual(const GradientFn& grad_f, const Matrix& a,
                         const Vector& b, const Vector& y) {
  const Eigen::Index m = a.rows(), n = a.cols();
  Matrix h(n + m, 1);
  h.col(0).head(n) = grad_f(y.head(n)) + a.transpose() * y.tail(m);
  h.col(0).tail(m) = a * y.head(n) - b;
  return h;
}

// ---------- inequalities ----------

Vector ineq_au_rate(const Matrix& a, const Matrix& adot, const Vector& b,
                    const Vector& bdot, const Vector& x, const Vector& u,
                    double eta, SolveStats* stats) {
  const Eigen::Index m = a.rows(), n = a.cols();
  if (u.size() != m || x.size() != n)
    throw DimensionError("ineq Au: unknown sizes disagree with A");
  Matrix system(m, n + m);
  system.leftCols(n) = a;
  system.rightCols(m) = Matrix(Vector(2.0 * u).asDiagonal());
  const Vector rhs =
      bdot - adot * x - eta * (a * x + u.array().square().matrix() - b);
  return min_norm_solve(system, rhs, 1e-12, stats);
}

Matrix ineq_au_residual(const Matrix& a, const Vector& b, const Vector& x,
                        const Vector& u) {
  return a * x + u.array().square().matrix() - b;
}

Vector ineq_acu_rate(const Matrix& a, const Matrix& adot, const Vector& b,
                     const Vector& bdot, const Matrix& c, const Matrix& cdot,
                     const Vector& d, const Vector& ddot, const Vector& x,
                     const Vector& u, double eta, SolveStats* stats) {
  const Eigen::Index ma = a.rows(), n = a.cols(), mc = c.rows();
  if (c.cols() != n || u.size() != mc || x.size() != n)
    throw DimensionError("ineq ACu: block sizes disagree");

  Matrix dotted = Matrix::Zero(ma + mc, n + mc);
  dotted.topLeftCorner(ma, n) = adot;
  dotted.bottomLeftCorner(mc, n) = cdot;
  dotted.bottomRightCorner(mc, mc) = Matrix(Vector(2.0 * u).asDiagonal());

  Vector model(ma + mc);
  model.head(ma) = a * x - b;
  model.tail(mc) = c * x + u.array().square().matrix() - d;

  Vector rhs(ma + mc);
  rhs.head(ma) = bdot;
  rhs.tail(mc) = ddot;
  rhs -= eta * model;
  return min_norm_solve(dotted, rhs, 1e-12, stats);
}

Matrix ineq_acu_residual(const Matrix& a, const Vector& b, const Matrix& c,
                         const Vector& d, const Vector& x, const Vector& u) {
  Matrix res(a.rows() + c.rows(), 1);
  res.col(0).head(a.rows()) = a * x - b;
  res.col(0).tail(c.rows()) = c * x + u.array().square().matrix() - d;
  return res;
}

// ---------- matrix square root ----------

Vector sqrt_rate(const Matrix& a, const Matrix& adot, const Matrix& x,
                 double eta, SolveStats* stats) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n || x.rows() != n || x.cols() != n)
    throw DimensionError("sqrt: A and X must be square and equal");
  const Matrix identity = Matrix::Identity(n, n);
  const Matrix sum = kron(x.transpose(), identity) + kron(identity, x);
  const Vector rhs = vec(adot + eta * (a - x * x));
  return min_norm_solve(sum, rhs, 1e-12, stats);
}

Matrix sqrt_residual(const Matrix& a, const Matrix& x) { return a - x * x; }

// ---------- Sylvester ----------

Vector sylvester_rate(const Matrix& a, const Matrix& adot, const Matrix& b,
                      const Matrix& bdot, const Matrix& c, const Matrix& cdot,
                      const Matrix& x, double eta, bool kronecker_rhs,
                      SolveStats* stats) {
  const Eigen::Index n = a.rows(), m = b.rows();
  if (a.cols() != n || b.cols() != m || c.rows() != n || c.cols() != m ||
      x.rows() != n || x.cols() != m)
    throw DimensionError("sylvester: shapes disagree");
  const Matrix system = kron(Matrix::Identity(m, m), a) +
                        kron(b.transpose(), Matrix::Identity(n, n));
  Vector rhs;
  if (kronecker_rhs) {
    rhs = -(kron(Matrix::Identity(m, m), adot) * vec(x)) -
          (kron(bdot.transpose(), Matrix::Identity(n, n)) * vec(x)) +
          vec(cdot) - eta * (system * vec(x) - vec(c));
  } else {
    rhs = -vec(adot * x) - vec(x * bdot) + vec(cdot) -
          eta * (vec(a * x) + vec(x * b) - vec(c));
  }
  return min_norm_solve(system, rhs, 1e-12, stats);
}

Matrix sylvester_residual(const Matrix& a, const Matrix& b, const Matrix& c,
                          const Matrix& x) {
  return a * x + x * b - c;
}

// ---------- Stein-Lyapunov ----------

Vector lyapunov_rate(const Matrix& a, const Matrix& adot, const Matrix& q,
                     const Matrix& qdot, const Matrix& x, double eta,
                     SolveStats* stats) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n || q.rows() != n || q.cols() != n || x.rows() != n ||
      x.cols() != n)
    throw DimensionError("lyapunov: all operands must be n-by-n");
  const Matrix identity = Matrix::Identity(n * n, n * n);
  const Matrix stein = identity - kron(a.conjugate(), a);
  const Vector rhs = (kron(adot.conjugate(), a) + kron(a.conjugate(), adot)) *
                         vec(x) -
                     eta * (stein * vec(x)) + eta * vec(q) + vec(qdot);
  return min_norm_solve(stein, rhs, 1e-12, stats);
}

Matrix lyapunov_residual(const Matrix& a, const Matrix& q, const Matrix& x) {
  return a * x * a.adjoint() - x + q;
}

// ---------- field of values ----------

Complex fov_point(const Matrix& a, const Vector& x) {
  const double norm2 = x.squaredNorm();
  if (norm2 == 0.0) throw Error("fov point: zero vector");
  return (x.adjoint() * a * x)(0) / norm2;
}

// ---------- dense oracles ----------

EigenPairOracle dense_eigenpair(const Matrix& a, int index) {
  if ((a - a.adjoint()).norm() > 1e-12 * std::max(1.0, a.norm()))
    throw Error("eigenpair oracle expects a hermitean matrix");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a);
  if (solver.info() != Eigen::Success)
    throw Error("eigenpair oracle: eigensolver failed");
  if (index < 0 || index >= a.rows())
    throw DimensionError("eigenpair oracle: index out of range");
  EigenPairOracle pair;
  pair.lambda = solver.eigenvalues()(index);
  pair.x = solver.eigenvectors().col(index);
  // Deterministic phase: rotate the largest-magnitude entry real-positive.
  Eigen::Index argmax = 0;
  pair.x.cwiseAbs().maxCoeff(&argmax);
  const Complex entry = pair.x(argmax);
  if (std::abs(entry) > 0.0) pair.x *= std::abs(entry) / entry;
  return pair;
}

Vector dense_linsys(const Matrix& a, const Vector& b) {
  return a.partialPivLu().solve(b);
}

Matrix dense_inverse(const Matrix& a) {
  return a.partialPivLu().solve(Matrix::Identity(a.rows(), a.rows()));
}

Matrix dense_pinv(const Matrix& a) {
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double threshold = 1e-12 * svd.singularValues()(0);
  const Eigen::Index k = svd.singularValues().size();
  Vector inverted = Vector::Zero(k);
  for (Eigen::Index i = 0; i < k; ++i)
    if (svd.singularValues()(i) > threshold)
      inverted(i) = Complex(1.0 / svd.singularValues()(i), 0.0);
  return svd.matrixV() * inverted.asDiagonal() * svd.matrixU().adjoint();
}

Vector dense_lsq(const Matrix& a, const Vector& b) {
  return (a.adjoint() * a).partialPivLu().solve(a.adjoint() * b);
}

Vector dense_kkt(const GradientFn& grad_f, const HessianFn& hess_f,
                 const Matrix& a, const Vector& b) {
  const Eigen::Index m = a.rows(), n = a.cols();
  Vector y = Vector::Zero(n + m);
  for (int iter = 0; iter < 50; ++iter) {
    const Vector x = y.head(n);
    Vector h(n + m);
    h.head(n) = grad_f(x) + a.transpose() * y.tail(m);
    h.tail(m) = a * x - b;
    if (h.norm() <= 1e-14 * (1.0 + y.norm())) break;
    Matrix jac = Matrix::Zero(n + m, n + m);
    jac.topLeftCorner(n, n) = hess_f(x);
    jac.topRightCorner(n, m) = a.transpose();
    jac.bottomLeftCorner(m, n) = a;
    y -= jac.partialPivLu().solve(h);
  }
  return y;
}

Matrix dense_sqrt_spd(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a);
  if (solver.info() != Eigen::Success)
    throw Error("sqrt oracle: eigensolver failed");
  if (solver.eigenvalues().minCoeff() <= 0.0)
    throw Error("sqrt oracle expects a positive definite matrix");
  const RealVector roots = solver.eigenvalues().cwiseSqrt();
  return solver.eigenvectors() * roots.cast<Complex>().asDiagonal() *
         solver.eigenvectors().adjoint();
}

Matrix dense_sylvester(const Matrix& a, const Matrix& b, const Matrix& c) {
  const Eigen::Index n = a.rows(), m = b.rows();
  const Matrix system = kron(Matrix::Identity(m, m), a) +
                        kron(b.transpose(), Matrix::Identity(n, n));
  return unvec(system.partialPivLu().solve(vec(c)), n, m);
}

Matrix dense_lyapunov(const Matrix& a, const Matrix& q) {
  const Eigen::Index n = a.rows();
  const Matrix stein =
      Matrix::Identity(n * n, n * n) - kron(a.conjugate(), a);
  return unvec(stein.partialPivLu().solve(vec(q)), n, n);
}

}  // namespace znn
