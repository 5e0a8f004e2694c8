#ifndef ZNN_PROBLEMS_HPP_
#define ZNN_PROBLEMS_HPP_

#include <functional>

#include "znn/tensor.hpp"
#include "znn/types.hpp"

namespace znn {

// Each problem class supplies two things: a residual (the model defect the
// solver drives to zero) and a rate assembly that, given samples, sample
// derivatives, the current unknown, and the decay constant eta, produces
// the instantaneous rate of change of the unknown.  Assemblies are pure;
// SolveStats, when requested, reports the rank/condition of the internal
// least-squares solve (rank n / condition 1 for solve-free assemblies).

// ---------- eigenpair tracking (z packs [x; lambda]) ----------

struct EigenSystem {
  Matrix p;  // [[A - lambda I, -x], [-x*, 0]]; hermitean when A is
  Vector q;
};

EigenSystem eigen_assemble(const Matrix& a, const Matrix& adot,
                           const Vector& z, double eta);
Vector eigen_rate(const Matrix& a, const Matrix& adot, const Vector& z,
                  double eta, SolveStats* stats = nullptr);
Matrix eigen_residual(const Matrix& a, const Vector& z);

// ---------- linear system A x = b ----------

Vector linsys_rate(const Matrix& a, const Matrix& adot, const Vector& b,
                   const Vector& bdot, const Vector& x, double eta,
                   bool explicit_inverse = false, SolveStats* stats = nullptr);
// The inverse-free pairing: a second, interleaved inversion iterate
// x_inv ~ A^{-1} replaces the per-step solve.
Vector linsys_rate_coupled(const Matrix& x_inv, const Matrix& adot,
                           const Vector& b, const Vector& bdot,
                           const Vector& x, double eta);
Matrix linsys_residual(const Matrix& a, const Vector& b, const Vector& x);

// ---------- matrix inverse ----------

// From the error A X - I: Xdot = -X (Adot X + eta A X - eta I), with the
// current iterate X standing in for the inverse of A so the rate needs no
// linear solve at all.
Matrix inverse_rate(const Matrix& a, const Matrix& adot, const Matrix& x,
                    double eta);
Matrix inverse_residual(const Matrix& a, const Matrix& x);

// ---------- Moore-Penrose pseudoinverse (full-rank flows) ----------

enum class PinvSide { kRight, kLeft };  // right: m < n, left: m > n

Matrix pinv_rate(PinvSide side, const Matrix& a, const Matrix& adot,
                 const Matrix& x, double eta, SolveStats* stats = nullptr);
Matrix pinv_residual(PinvSide side, const Matrix& a, const Matrix& x);

// ---------- least squares (tall full-rank A) ----------

Vector lsq_rate(const Matrix& a, const Matrix& adot, const Vector& b,
                const Vector& bdot, const Vector& x, double eta,
                SolveStats* stats = nullptr);
Matrix lsq_residual(const Matrix& a, const Vector& b, const Vector& x);

// ---------- linearly constrained optimization (y packs [x; lambda]) ----------

using GradientFn = std::function<Vector(const Vector&)>;
using HessianFn = std::function<Matrix(const Vector&)>;

Vector lagrange_rate(const GradientFn& grad_f, const HessianFn& hess_f,
                     const Matrix& a, const Matrix& adot, const Vector& b,
                     const Vector& bdot, const Vector& y, double eta,
                     SolveStats* stats = nullptr);
Matrix lagrange_residual(const GradientFn& grad_f, const Matrix& a,
                         const Vector& b, const Vector& y);

// ---------- linear inequalities via entrywise slack squares ----------

// A x + u.^2 = b; the combined unknown is [x; u].
Vector ineq_au_rate(const Matrix& a, const Matrix& adot, const Vector& b,
                    const Vector& bdot, const Vector& x, const Vector& u,
                    double eta, SolveStats* stats = nullptr);
Matrix ineq_au_residual(const Matrix& a, const Vector& b, const Vector& x,
                        const Vector& u);

// Mixed equalities A x = b plus inequalities C x <= d.  The dotted block
// system is assembled exactly in its printed form (the left factor is the
// derivative matrix [[Adot, 0], [Cdot, 2 diag(u)]]); for time-varying
// data this form lacks the product-rule coupling and is therefore only
// guaranteed to hold a feasible point, not to converge toward one.
Vector ineq_acu_rate(const Matrix& a, const Matrix& adot, const Vector& b,
                     const Vector& bdot, const Matrix& c, const Matrix& cdot,
                     const Vector& d, const Vector& ddot, const Vector& x,
                     const Vector& u, double eta, SolveStats* stats = nullptr);
Matrix ineq_acu_residual(const Matrix& a, const Vector& b, const Matrix& c,
                         const Vector& d, const Vector& x, const Vector& u);

// ---------- matrix square root (returns vec(Xdot)) ----------

// Kronecker-sum system (X^T kron I + I kron X) vec(Xdot) =
// vec(Adot + eta (A - X X)); the minimum-norm solve doubles as the
// pseudoinverse fallback when the sum goes singular.
Vector sqrt_rate(const Matrix& a, const Matrix& adot, const Matrix& x,
                 double eta, SolveStats* stats = nullptr);
Matrix sqrt_residual(const Matrix& a, const Matrix& x);

// ---------- Sylvester equation A X + X B = C (returns vec(Xdot)) ----------

Vector sylvester_rate(const Matrix& a, const Matrix& adot, const Matrix& b,
                      const Matrix& bdot, const Matrix& c, const Matrix& cdot,
                      const Matrix& x, double eta, bool kronecker_rhs = false,
                      SolveStats* stats = nullptr);
Matrix sylvester_residual(const Matrix& a, const Matrix& b, const Matrix& c,
                          const Matrix& x);

// ---------- Stein-Lyapunov equation A X A* - X + Q = 0 (vec rate) ----------

Vector lyapunov_rate(const Matrix& a, const Matrix& adot, const Matrix& q,
                     const Matrix& qdot, const Matrix& x, double eta,
                     SolveStats* stats = nullptr);
Matrix lyapunov_residual(const Matrix& a, const Matrix& q, const Matrix& x);

// ---------- field of values ----------

// Rayleigh quotient (x* A x)/(x* x); a boundary point of the field of
// values when x is an extreme eigenvector of the associated hermitean flow.
Complex fov_point(const Matrix& a, const Vector& x);

// ---------- dense oracles ----------
// Direct solutions computed independently of any recursion, used for
// steady-state comparisons.

struct EigenPairOracle {
  Vector x;        // unit norm, largest entry rotated real-positive
  double lambda;   // real: oracle is defined for hermitean flows
};

// index counts eigenvalues in ascending order; hermitean input required.
EigenPairOracle dense_eigenpair(const Matrix& a, int index);
Vector dense_linsys(const Matrix& a, const Vector& b);
Matrix dense_inverse(const Matrix& a);
Matrix dense_pinv(const Matrix& a);
Vector dense_lsq(const Matrix& a, const Vector& b);
// Newton iteration on the stationarity system; exact after one step for
// quadratic objectives.  Returns y = [x; lambda].
Vector dense_kkt(const GradientFn& grad_f, const HessianFn& hess_f,
                 const Matrix& a, const Vector& b);
Matrix dense_sqrt_spd(const Matrix& a);
Matrix dense_sylvester(const Matrix& a, const Matrix& b, const Matrix& c);
Matrix dense_lyapunov(const Matrix& a, const Matrix& q);

}  // namespace znn

#endif  // ZNN_PROBLEMS_HPP_
