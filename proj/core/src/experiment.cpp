#include "znn/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <limits>
#include <memory>
#include <ostream>
#include <utility>

#include "znn/catalog.hpp"
#include "znn/problems.hpp"

namespace znn {
namespace {

// ---------- registry flows ----------

MatrixFlow const_id_flow(Eigen::Index n) {
  return MatrixFlow(
      n, n, [n](double) { return Matrix::Identity(n, n); },
      [n](double) { return Matrix::Zero(n, n); }, "const-id");
}

// Symmetric, diagonally dominant, invertible for all t (eigenvalues
// sin t + 2 +- cos t stay in [1, 3]).
MatrixFlow sym2_flow() {
  auto sample = [](double t) {
    Matrix a(2, 2);
    a << Complex(std::sin(t) + 2.0), Complex(std::cos(t)),
        Complex(std::cos(t)), Complex(std::sin(t) + 2.0);
    return a;
  };
  auto deriv = [](double t) {
    Matrix a(2, 2);
    a << Complex(std::cos(t)), Complex(-std::sin(t)), Complex(-std::sin(t)),
        Complex(std::cos(t));
    return a;
  };
  return MatrixFlow(2, 2, sample, deriv, "sym2");
}

// SPD for all t (diagonal 3..6 versus off-diagonal at most 1.5), with a
// configurable angular frequency so derivative-driven error terms can be
// made large or small.
MatrixFlow spd2_sqrt_flow(double omega) {
  auto sample = [omega](double t) {
    const double w = omega * t;
    Matrix a(2, 2);
    a << Complex(4.0 + std::sin(w)), Complex(1.0 + 0.5 * std::cos(w)),
        Complex(1.0 + 0.5 * std::cos(w)), Complex(5.0 - 0.5 * std::sin(w));
    return a;
  };
  auto deriv = [omega](double t) {
    const double w = omega * t;
    Matrix a(2, 2);
    a << Complex(omega * std::cos(w)), Complex(-0.5 * omega * std::sin(w)),
        Complex(-0.5 * omega * std::sin(w)),
        Complex(-0.5 * omega * std::cos(w));
    return a;
  };
  return MatrixFlow(2, 2, sample, deriv, "spd2-sqrt");
}

// Hermitean 3x3 with Gershgorin disks that never touch, so the three
// eigenvalue curves stay well separated and trackable.
MatrixFlow herm3_flow() {
  auto sample = [](double t) {
    Matrix a(3, 3);
    a(0, 0) = Complex(2.5 + 0.5 * std::sin(0.5 * t));
    a(1, 1) = Complex(5.0 + 0.5 * std::cos(0.3 * t));
    a(2, 2) = Complex(8.0 - 0.5 * std::sin(0.4 * t));
    a(0, 1) = Complex(0.25 * std::cos(0.2 * t), 0.15 * std::sin(0.3 * t));
    a(0, 2) = Complex(0.1 * std::sin(0.3 * t), 0.05 * std::cos(0.5 * t));
    a(1, 2) = Complex(0.2 * std::cos(0.4 * t), 0.1 * std::sin(0.2 * t));
    a(1, 0) = std::conj(a(0, 1));
    a(2, 0) = std::conj(a(0, 2));
    a(2, 1) = std::conj(a(1, 2));
    return a;
  };
  auto deriv = [](double t) {
    Matrix a(3, 3);
    a(0, 0) = Complex(0.25 * std::cos(0.5 * t));
    a(1, 1) = Complex(-0.15 * std::sin(0.3 * t));
    a(2, 2) = Complex(-0.2 * std::cos(0.4 * t));
    a(0, 1) = Complex(-0.05 * std::sin(0.2 * t), 0.045 * std::cos(0.3 * t));
    a(0, 2) = Complex(0.03 * std::cos(0.3 * t), -0.025 * std::sin(0.5 * t));
    a(1, 2) = Complex(-0.08 * std::sin(0.4 * t), 0.02 * std::cos(0.2 * t));
    a(1, 0) = std::conj(a(0, 1));
    a(2, 0) = std::conj(a(0, 2));
    a(2, 1) = std::conj(a(1, 2));
    return a;
  };
  return MatrixFlow(3, 3, sample, deriv, "herm3");
}

// Wide 2x3 with dominant leading 2x2 block: full row rank for all t.
MatrixFlow wide23_flow() {
  auto sample = [](double t) {
    Matrix a(2, 3);
    a << Complex(2.0 + 0.5 * std::sin(t)), Complex(0.3),
        Complex(1.0 + 0.2 * std::cos(0.7 * t)), Complex(0.1),
        Complex(2.0 + 0.5 * std::cos(t)),
        Complex(-0.2 + 0.1 * std::sin(0.4 * t));
    return a;
  };
  auto deriv = [](double t) {
    Matrix a(2, 3);
    a << Complex(0.5 * std::cos(t)), Complex(0.0),
        Complex(-0.14 * std::sin(0.7 * t)), Complex(0.0),
        Complex(-0.5 * std::sin(t)), Complex(0.04 * std::cos(0.4 * t));
    return a;
  };
  return MatrixFlow(2, 3, sample, deriv, "wide23");
}

MatrixFlow tall32_flow() {
  const MatrixFlow wide = wide23_flow();
  auto sample = [wide](double t) { return Matrix(wide.sample(t).transpose()); };
  auto deriv = [wide](double t) {
    return Matrix(wide.derivative(t).transpose());
  };
  return MatrixFlow(3, 2, sample, deriv, "tall32");
}

MatrixFlow fov_registry_flow(const std::vector<double>& params) {
  Matrix a;
  if (params.empty()) {
    a = Matrix::Zero(2, 2);
    a(0, 1) = Complex(1.0);
  } else {
    const auto n = static_cast<Eigen::Index>(std::lround(std::sqrt(
        static_cast<double>(params.size()))));
    if (n * n != static_cast<Eigen::Index>(params.size()))
      throw Error("fov flow needs n*n inline entries (row-major)");
    a.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        a(i, j) = Complex(params[static_cast<std::size_t>(i * n + j)]);
  }
  return fov_flow(a);
}

// ---------- companion data flows ----------

// Entries base + amplitude * sin(t + step * i): smooth, bounded away from
// zero norm, with a closed-form derivative.
MatrixFlow sine_vector_flow(Eigen::Index m, double base, double amplitude,
                            double step, std::string name) {
  auto sample = [=](double t) {
    Matrix v(m, 1);
    for (Eigen::Index i = 0; i < m; ++i)
      v(i, 0) = Complex(base + amplitude * std::sin(t + step * i));
    return v;
  };
  auto deriv = [=](double t) {
    Matrix v(m, 1);
    for (Eigen::Index i = 0; i < m; ++i)
      v(i, 0) = Complex(amplitude * std::cos(t + step * i));
    return v;
  };
  return MatrixFlow(m, 1, sample, deriv, std::move(name));
}

MatrixFlow scaled_flow(const MatrixFlow& inner, double factor) {
  auto sample = [inner, factor](double t) {
    return Matrix(factor * inner.sample(t));
  };
  if (!inner.has_derivative())
    return MatrixFlow(inner.rows(), inner.cols(), sample, nullptr,
                      inner.name());
  auto deriv = [inner, factor](double t) {
    return Matrix(factor * inner.derivative(t));
  };
  return MatrixFlow(inner.rows(), inner.cols(), sample, deriv, inner.name());
}

MatrixFlow constant_flow(Matrix value, std::string name) {
  const Eigen::Index rows = value.rows(), cols = value.cols();
  auto sample = [value](double) { return value; };
  auto deriv = [rows, cols](double) { return Matrix::Zero(rows, cols); };
  return MatrixFlow(rows, cols, sample, deriv, std::move(name));
}

MatrixFlow sylvester_b_flow() {
  auto sample = [](double t) {
    Matrix b(2, 2);
    b << Complex(2.0 + 0.3 * std::sin(t)), Complex(0.1), Complex(0.1),
        Complex(3.0 + 0.3 * std::cos(t));
    return b;
  };
  auto deriv = [](double t) {
    Matrix b(2, 2);
    b << Complex(0.3 * std::cos(t)), Complex(0.0), Complex(0.0),
        Complex(-0.3 * std::sin(t));
    return b;
  };
  return MatrixFlow(2, 2, sample, deriv, "sylvester-b");
}

MatrixFlow sine_matrix_flow(Eigen::Index rows, Eigen::Index cols,
                            std::string name) {
  auto sample = [=](double t) {
    Matrix c(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j)
        c(i, j) = Complex(1.0 + std::sin(t + 0.5 * i + j));
    return c;
  };
  auto deriv = [=](double t) {
    Matrix c(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j)
        c(i, j) = Complex(std::cos(t + 0.5 * i + j));
    return c;
  };
  return MatrixFlow(rows, cols, sample, deriv, std::move(name));
}

MatrixFlow lyapunov_q_flow(Eigen::Index n) {
  auto sample = [n](double t) {
    return Matrix(2.0 * Matrix::Identity(n, n) +
                  0.2 * std::sin(t) * Matrix::Ones(n, n));
  };
  auto deriv = [n](double t) {
    return Matrix(0.2 * std::cos(t) * Matrix::Ones(n, n));
  };
  return MatrixFlow(n, n, sample, deriv, "lyapunov-q");
}

// ---------- derivative provisioning ----------

// Serves a flow's value and derivative under the configured source: the
// analytic derivative when available, otherwise a backward finite
// difference over past samples only (clamped near the start of the grid).
class FlowSource {
 public:
  FlowSource(MatrixFlow flow, const DataSourceConfig& cfg)
      : flow_(std::move(flow)), cfg_(cfg) {}

  Matrix value(double t) const { return flow_.sample(t); }

  Matrix derivative(double t) const {
    if (cfg_.source == DerivativeSource::kAnalytic)
      return flow_.derivative(t);
    const long k = std::max(
        0L, std::lround((t - cfg_.t0) / cfg_.tau));
    const int desired =
        cfg_.backward_order > 0 ? cfg_.backward_order : cfg_.formula_j + 1;
    const int p = static_cast<int>(std::min<long>(desired, k));
    std::vector<Matrix> history;
    history.reserve(p + 1);
    for (int m = p; m >= 0; --m)
      history.push_back(flow_.sample(t - m * cfg_.tau));
    return estimate_derivative(history, cfg_.tau, p);
  }

 private:
  MatrixFlow flow_;
  DataSourceConfig cfg_;
};

using Source = std::shared_ptr<const FlowSource>;

Source bind(MatrixFlow flow, const DataSourceConfig& cfg) {
  return std::make_shared<const FlowSource>(std::move(flow), cfg);
}

void require_square(const MatrixFlow& flow, const std::string& tag) {
  if (flow.rows() != flow.cols())
    throw DimensionError("problem '" + tag + "' needs a square flow, got " +
                         std::to_string(flow.rows()) + "x" +
                         std::to_string(flow.cols()));
}

void solve_free_stats(SolveStats* stats, Eigen::Index dim) {
  if (stats) {
    stats->rank = dim;
    stats->sigma_max = 0.0;
    stats->condition = 1.0;
  }
}

// ---------- per-class wiring ----------

ProblemInstance make_eigen(const MatrixFlow& primary,
                           const DataSourceConfig& cfg, int eigen_index) {
  require_square(primary, "eigen");
  const Eigen::Index n = primary.rows();
  const int index = eigen_index < 0 ? static_cast<int>(n) - 1 : eigen_index;
  if (index >= n) throw DimensionError("eigen: index out of range");
  const Source a = bind(primary, cfg);

  ProblemInstance p;
  p.tag = "eigen";
  p.dim = n + 1;
  p.rate = [a](double t, const Vector& z, double eta, SolveStats* stats) {
    return eigen_rate(a->value(t), a->derivative(t), z, eta, stats);
  };
  p.residual = [a](double t, const Vector& z) {
    return eigen_residual(a->value(t), z);
  };
  p.residual_scale = [n](double, const Vector& z) {
    return std::abs(z(n)) * z.head(n).norm();
  };
  p.oracle = [a, index, n](double t) {
    const EigenPairOracle pair = dense_eigenpair(a->value(t), index);
    Vector z(n + 1);
    z.head(n) = pair.x;
    z(n) = Complex(pair.lambda);
    return z;
  };
  p.random_start = [n](std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector z(n + 1);
    for (Eigen::Index i = 0; i <= n; ++i) z(i) = Complex(normal(rng), 0.0);
    z.head(n).normalize();
    return z;
  };
  return p;
}

ProblemInstance make_linsys(const MatrixFlow& primary,
                            const DataSourceConfig& cfg,
                            bool explicit_inverse) {
  require_square(primary, "linsys");
  const Eigen::Index n = primary.rows();
  const Source a = bind(primary, cfg);
  const Source b = bind(sine_vector_flow(n, 2.0, 1.0, 0.7, "linsys-b"), cfg);

  ProblemInstance p;
  p.tag = explicit_inverse ? "linsys-inv" : "linsys";
  p.dim = n;
  p.rate = [a, b, explicit_inverse](double t, const Vector& x, double eta,
                                    SolveStats* stats) {
    return linsys_rate(a->value(t), a->derivative(t), b->value(t).col(0),
                       b->derivative(t).col(0), x, eta, explicit_inverse,
                       stats);
  };
  p.residual = [a, b](double t, const Vector& x) {
    return linsys_residual(a->value(t), b->value(t).col(0), x);
  };
  p.residual_scale = [b](double t, const Vector&) {
    return b->value(t).norm();
  };
  p.oracle = [a, b](double t) {
    return dense_linsys(a->value(t), b->value(t).col(0));
  };
  return p;
}

ProblemInstance make_linsys_coupled(const MatrixFlow& primary,
                                    const DataSourceConfig& cfg) {
  require_square(primary, "linsys-coupled");
  const Eigen::Index n = primary.rows();
  const Source a = bind(primary, cfg);
  const Source b = bind(sine_vector_flow(n, 2.0, 1.0, 0.7, "linsys-b"), cfg);

  ProblemInstance p;
  p.tag = "linsys-coupled";
  p.dim = n + n * n;
  p.rate = [a, b, n](double t, const Vector& z, double eta,
                     SolveStats* stats) {
    const Vector x = z.head(n);
    const Matrix x_inv = unvec(z.tail(n * n), n, n);
    const Matrix a_t = a->value(t);
    const Matrix adot_t = a->derivative(t);
    Vector rate(n + n * n);
    rate.head(n) = linsys_rate_coupled(x_inv, adot_t, b->value(t).col(0),
                                       b->derivative(t).col(0), x, eta);
    rate.tail(n * n) = vec(inverse_rate(a_t, adot_t, x_inv, eta));
    solve_free_stats(stats, n + n * n);
    return rate;
  };
  p.residual = [a, b, n](double t, const Vector& z) {
    return linsys_residual(a->value(t), b->value(t).col(0), z.head(n));
  };
  p.residual_scale = [b](double t, const Vector&) {
    return b->value(t).norm();
  };
  p.oracle = [a, b, n](double t) {
    Vector z(n + n * n);
    z.head(n) = dense_linsys(a->value(t), b->value(t).col(0));
    z.tail(n * n) = vec(dense_inverse(a->value(t)));
    return z;
  };
  return p;
}

ProblemInstance make_inverse(const MatrixFlow& primary,
                             const DataSourceConfig& cfg) {
  require_square(primary, "inverse");
  const Eigen::Index n = primary.rows();
  const Source a = bind(primary, cfg);

  ProblemInstance p;
  p.tag = "inverse";
  p.dim = n * n;
  p.rate = [a, n](double t, const Vector& z, double eta, SolveStats* stats) {
    solve_free_stats(stats, n * n);
    return vec(inverse_rate(a->value(t), a->derivative(t), unvec(z, n, n),
                            eta));
  };
  p.residual = [a, n](double t, const Vector& z) {
    return inverse_residual(a->value(t), unvec(z, n, n));
  };
  p.residual_scale = [n](double, const Vector&) {
    return std::sqrt(static_cast<double>(n));
  };
  p.oracle = [a, n](double t) { return vec(dense_inverse(a->value(t))); };
  return p;
}

ProblemInstance make_pinv(const MatrixFlow& primary,
                          const DataSourceConfig& cfg, PinvSide side) {
  const Eigen::Index m = primary.rows(), n = primary.cols();
  if (side == PinvSide::kRight && m >= n)
    throw DimensionError("pinv-right needs a wide flow (try wide23)");
  if (side == PinvSide::kLeft && m <= n)
    throw DimensionError("pinv-left needs a tall flow (try tall32)");
  const Source a = bind(primary, cfg);

  ProblemInstance p;
  p.tag = side == PinvSide::kRight ? "pinv-right" : "pinv-left";
  p.dim = m * n;
  p.rate = [a, m, n, side](double t, const Vector& z, double eta,
                           SolveStats* stats) {
    return vec(pinv_rate(side, a->value(t), a->derivative(t), unvec(z, n, m),
                         eta, stats));
  };
  p.residual = [a, m, n, side](double t, const Vector& z) {
    return pinv_residual(side, a->value(t), unvec(z, n, m));
  };
  p.residual_scale = [m, n, side](double, const Vector&) {
    return std::sqrt(static_cast<double>(side == PinvSide::kRight ? m : n));
  };
  p.oracle = [a](double t) { return vec(dense_pinv(a->value(t))); };
  return p;
}

ProblemInstance make_lsq(const MatrixFlow& primary,
                         const DataSourceConfig& cfg) {
  const Eigen::Index m = primary.rows(), n = primary.cols();
  if (m <= n) throw DimensionError("lsq needs a tall flow (try tall32)");
  const Source a = bind(primary, cfg);
  const Source b = bind(sine_vector_flow(m, 2.0, 1.0, 0.7, "lsq-b"), cfg);

  ProblemInstance p;
  p.tag = "lsq";
  p.dim = n;
  p.rate = [a, b](double t, const Vector& x, double eta, SolveStats* stats) {
    return lsq_rate(a->value(t), a->derivative(t), b->value(t).col(0),
                    b->derivative(t).col(0), x, eta, stats);
  };
  p.residual = [a, b](double t, const Vector& x) {
    return lsq_residual(a->value(t), b->value(t).col(0), x);
  };
  p.residual_scale = [a, b](double t, const Vector&) {
    return (a->value(t).adjoint() * b->value(t).col(0)).norm();
  };
  p.oracle = [a, b](double t) {
    return dense_lsq(a->value(t), b->value(t).col(0));
  };
  return p;
}

ProblemInstance make_lagrange(const DataSourceConfig& cfg) {
  // The built-in model: minimize |x|^2 subject to x_1 + x_2 = sin t + 2.
  const Eigen::Index n = 2, m = 1;
  Matrix constraint(m, n);
  constraint << Complex(1.0), Complex(1.0);
  const Source a = bind(constant_flow(constraint, "lagrange-a"), cfg);
  const Source b = bind(sine_vector_flow(m, 2.0, 1.0, 0.0, "lagrange-b"), cfg);
  const GradientFn grad = [](const Vector& x) { return Vector(2.0 * x); };
  const HessianFn hess = [n](const Vector&) {
    return Matrix(2.0 * Matrix::Identity(n, n));
  };

  ProblemInstance p;
  p.tag = "lagrange";
  p.dim = n + m;
  p.rate = [a, b, grad, hess](double t, const Vector& y, double eta,
                              SolveStats* stats) {
    return lagrange_rate(grad, hess, a->value(t), a->derivative(t),
                         b->value(t).col(0), b->derivative(t).col(0), y, eta,
                         stats);
  };
  p.residual = [a, b, grad](double t, const Vector& y) {
    return lagrange_residual(grad, a->value(t), b->value(t).col(0), y);
  };
  p.residual_scale = [b](double t, const Vector&) {
    return b->value(t).norm();
  };
  p.oracle = [a, b, grad, hess](double t) {
    return dense_kkt(grad, hess, a->value(t), b->value(t).col(0));
  };
  return p;
}

ProblemInstance make_ineq_au(const MatrixFlow& primary,
                             const DataSourceConfig& cfg) {
  const Eigen::Index m = primary.rows(), n = primary.cols();
  const Source a = bind(primary, cfg);
  const Source b = bind(sine_vector_flow(m, 3.0, 0.5, 1.0, "ineq-b"), cfg);

  ProblemInstance p;
  p.tag = "ineq-au";
  p.dim = n + m;
  p.rate = [a, b, n, m](double t, const Vector& z, double eta,
                        SolveStats* stats) {
    return ineq_au_rate(a->value(t), a->derivative(t), b->value(t).col(0),
                        b->derivative(t).col(0), z.head(n), z.tail(m), eta,
                        stats);
  };
  p.residual = [a, b, n, m](double t, const Vector& z) {
    return ineq_au_residual(a->value(t), b->value(t).col(0), z.head(n),
                            z.tail(m));
  };
  p.residual_scale = [b](double t, const Vector&) {
    return b->value(t).norm();
  };
  // No unique solution (the slack system is underdetermined), so the
  // model defect is the convergence monitor; the canonical feasible point
  // x = 0, u = sqrt(b) stands in for the oracle.
  p.oracle = [b, n, m](double t) {
    Vector z = Vector::Zero(n + m);
    const Matrix b_t = b->value(t);
    for (Eigen::Index i = 0; i < m; ++i) {
      if (b_t(i, 0).real() < 0.0)
        throw Error("ineq-au: b has a negative entry; x = 0 is infeasible");
      z(n + i) = Complex(std::sqrt(b_t(i, 0).real()));
    }
    return z;
  };
  return p;
}

ProblemInstance make_ineq_acu(const MatrixFlow& primary,
                              const DataSourceConfig& cfg) {
  require_square(primary, "ineq-acu");
  const Eigen::Index n = primary.rows();
  Matrix c_mat = Matrix::Identity(n, n);
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    c_mat(i, i + 1) = Complex(0.5);
    c_mat(i + 1, i) = Complex(0.25);
  }
  const Source a = bind(primary, cfg);
  const Source b = bind(sine_vector_flow(n, 2.0, 1.0, 0.7, "ineq-b"), cfg);
  const Source c = bind(constant_flow(c_mat, "ineq-c"), cfg);
  const Source d = bind(
      constant_flow(10.0 * Matrix::Ones(n, 1), "ineq-d"), cfg);

  ProblemInstance p;
  p.tag = "ineq-acu";
  p.dim = n + n;
  p.rate = [a, b, c, d, n](double t, const Vector& z, double eta,
                           SolveStats* stats) {
    return ineq_acu_rate(a->value(t), a->derivative(t), b->value(t).col(0),
                         b->derivative(t).col(0), c->value(t),
                         c->derivative(t), d->value(t).col(0),
                         d->derivative(t).col(0), z.head(n), z.tail(n), eta,
                         stats);
  };
  p.residual = [a, b, c, d, n](double t, const Vector& z) {
    return ineq_acu_residual(a->value(t), b->value(t).col(0), c->value(t),
                             d->value(t).col(0), z.head(n), z.tail(n));
  };
  p.residual_scale = [b, d](double t, const Vector&) {
    return std::hypot(b->value(t).norm(), d->value(t).norm());
  };
  // Canonical feasible point: the equalities pin x, the slacks absorb the
  // inequality margin (d is sized so the margin stays positive).
  p.oracle = [a, b, c, d, n](double t) {
    const Vector x = dense_linsys(a->value(t), b->value(t).col(0));
    const Vector margin = d->value(t).col(0) - c->value(t) * x;
    Vector z(n + n);
    z.head(n) = x;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (margin(i).real() < 0.0)
        throw Error("ineq-acu: equality solution violates an inequality");
      z(n + i) = Complex(std::sqrt(margin(i).real()));
    }
    return z;
  };
  return p;
}

ProblemInstance make_sqrt(const MatrixFlow& primary,
                          const DataSourceConfig& cfg) {
  require_square(primary, "sqrt");
  const Eigen::Index n = primary.rows();
  const Source a = bind(primary, cfg);

  ProblemInstance p;
  p.tag = "sqrt";
  p.dim = n * n;
  p.rate = [a, n](double t, const Vector& z, double eta, SolveStats* stats) {
    return sqrt_rate(a->value(t), a->derivative(t), unvec(z, n, n), eta,
                     stats);
  };
  p.residual = [a, n](double t, const Vector& z) {
    return sqrt_residual(a->value(t), unvec(z, n, n));
  };
  p.residual_scale = [a](double t, const Vector&) {
    return a->value(t).norm();
  };
  p.oracle = [a](double t) { return vec(dense_sqrt_spd(a->value(t))); };
  return p;
}

ProblemInstance make_sylvester(const MatrixFlow& primary,
                               const DataSourceConfig& cfg) {
  require_square(primary, "sylvester");
  const Eigen::Index n = primary.rows(), m = 2;
  const Source a = bind(primary, cfg);
  const Source b = bind(sylvester_b_flow(), cfg);
  const Source c = bind(sine_matrix_flow(n, m, "sylvester-c"), cfg);

  ProblemInstance p;
  p.tag = "sylvester";
  p.dim = n * m;
  p.rate = [a, b, c, n, m](double t, const Vector& z, double eta,
                           SolveStats* stats) {
    return sylvester_rate(a->value(t), a->derivative(t), b->value(t),
                          b->derivative(t), c->value(t), c->derivative(t),
                          unvec(z, n, m), eta, /*kronecker_rhs=*/false, stats);
  };
  p.residual = [a, b, c, n, m](double t, const Vector& z) {
    return sylvester_residual(a->value(t), b->value(t), c->value(t),
                              unvec(z, n, m));
  };
  p.residual_scale = [c](double t, const Vector&) {
    return c->value(t).norm();
  };
  p.oracle = [a, b, c](double t) {
    return vec(dense_sylvester(a->value(t), b->value(t), c->value(t)));
  };
  return p;
}

ProblemInstance make_lyapunov(const MatrixFlow& primary,
                              const DataSourceConfig& cfg) {
  require_square(primary, "lyapunov");
  const Eigen::Index n = primary.rows();
  // Contraction-scaled so the Stein operator I - conj(A) kron A stays
  // nonsingular along the whole trajectory.  The spectral radius of sym2
  // peaks at 2 + sqrt(2), so 0.25 keeps every eigenvalue product of the
  // scaled flow at or below 0.73.
  const Source a = bind(scaled_flow(primary, 0.25), cfg);
  const Source q = bind(lyapunov_q_flow(n), cfg);

  ProblemInstance p;
  p.tag = "lyapunov";
  p.dim = n * n;
  p.rate = [a, q, n](double t, const Vector& z, double eta,
                     SolveStats* stats) {
    return lyapunov_rate(a->value(t), a->derivative(t), q->value(t),
                         q->derivative(t), unvec(z, n, n), eta, stats);
  };
  p.residual = [a, q, n](double t, const Vector& z) {
    return lyapunov_residual(a->value(t), q->value(t), unvec(z, n, n));
  };
  p.residual_scale = [q](double t, const Vector&) {
    return q->value(t).norm();
  };
  p.oracle = [a, q](double t) {
    return vec(dense_lyapunov(a->value(t), q->value(t)));
  };
  return p;
}

}  // namespace

// ---------- registry surface ----------

FlowSpec parse_flow_spec(const std::string& text) {
  FlowSpec spec;
  if (text.rfind("replay:", 0) == 0) {
    spec.name = "replay";
    spec.replay_path = text.substr(7);
    if (spec.replay_path.empty())
      throw Error("replay flow needs a file path after 'replay:'");
    return spec;
  }
  const auto open = text.find('(');
  if (open == std::string::npos) {
    spec.name = text;
  } else {
    if (text.back() != ')')
      throw Error("flow spec '" + text + "' is missing the closing ')'");
    spec.name = text.substr(0, open);
    std::string list = text.substr(open + 1, text.size() - open - 2);
    std::size_t pos = 0;
    while (pos < list.size()) {
      std::size_t used = 0;
      try {
        spec.params.push_back(std::stod(list.substr(pos), &used));
      } catch (const std::exception&) {
        throw Error("flow spec '" + text + "': bad parameter list");
      }
      pos += used;
      if (pos < list.size()) {
        if (list[pos] != ',')
          throw Error("flow spec '" + text + "': bad parameter list");
        ++pos;
      }
    }
  }
  if (spec.name.empty()) throw Error("empty flow name");
  return spec;
}

MatrixFlow make_flow(const FlowSpec& spec) {
  const auto want_params = [&](std::size_t max_count) {
    if (spec.params.size() > max_count)
      throw Error("flow '" + spec.name + "' takes at most " +
                  std::to_string(max_count) + " parameters");
  };
  if (spec.name == "replay") return replay_flow(read_replay(spec.replay_path));
  if (spec.name == "const-id") {
    want_params(1);
    const Eigen::Index n =
        spec.params.empty()
            ? 2
            : static_cast<Eigen::Index>(std::lround(spec.params[0]));
    if (n < 1) throw Error("const-id flow needs n >= 1");
    return const_id_flow(n);
  }
  if (spec.name == "sym2") {
    want_params(0);
    return sym2_flow();
  }
  if (spec.name == "spd2-sqrt") {
    want_params(1);
    const double omega = spec.params.empty() ? 0.5 : spec.params[0];
    if (!(omega > 0.0)) throw Error("spd2-sqrt flow needs omega > 0");
    return spd2_sqrt_flow(omega);
  }
  if (spec.name == "herm3") {
    want_params(0);
    return herm3_flow();
  }
  if (spec.name == "wide23") {
    want_params(0);
    return wide23_flow();
  }
  if (spec.name == "tall32") {
    want_params(0);
    return tall32_flow();
  }
  if (spec.name == "fov") return fov_registry_flow(spec.params);
  throw Error("unknown flow '" + spec.name + "'");
}

std::vector<std::string> flow_names() {
  return {"const-id", "sym2", "spd2-sqrt", "herm3",
          "wide23",   "tall32", "fov",      "replay:<path>"};
}

std::vector<std::string> problem_tags() {
  return {"eigen",     "linsys",    "linsys-inv", "linsys-coupled",
          "inverse",   "pinv-right", "pinv-left",  "lsq",
          "lagrange",  "ineq-au",   "ineq-acu",   "sqrt",
          "sylvester", "lyapunov"};
}

ProblemInstance make_problem(const std::string& tag, const MatrixFlow& primary,
                             const DataSourceConfig& source, int eigen_index) {
  if (tag == "eigen") return make_eigen(primary, source, eigen_index);
  if (tag == "linsys") return make_linsys(primary, source, false);
  if (tag == "linsys-inv") return make_linsys(primary, source, true);
  if (tag == "linsys-coupled") return make_linsys_coupled(primary, source);
  if (tag == "inverse") return make_inverse(primary, source);
  if (tag == "pinv-right") return make_pinv(primary, source, PinvSide::kRight);
  if (tag == "pinv-left") return make_pinv(primary, source, PinvSide::kLeft);
  if (tag == "lsq") return make_lsq(primary, source);
  if (tag == "lagrange") return make_lagrange(source);
  if (tag == "ineq-au") return make_ineq_au(primary, source);
  if (tag == "ineq-acu") return make_ineq_acu(primary, source);
  if (tag == "sqrt") return make_sqrt(primary, source);
  if (tag == "sylvester") return make_sylvester(primary, source);
  if (tag == "lyapunov") return make_lyapunov(primary, source);
  throw Error("unknown problem '" + tag + "'");
}

// ---------- experiments ----------

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  ExperimentResult result;
  result.formula = catalog_require(spec.formula, spec.catalog_path);
  if (!(spec.tau > 0.0)) throw Error("tau must be positive");
  double eta = spec.eta;
  if (!(eta > 0.0)) {
    const double h = spec.h > 0.0 ? spec.h : suggest_step_gain(result.formula);
    eta = h / spec.tau;
  }
  result.eta = eta;
  result.h = spec.tau * eta;

  const MatrixFlow primary = make_flow(parse_flow_spec(spec.flow));
  DataSourceConfig source;
  source.source = spec.derivative;
  source.backward_order = spec.backward_order;
  source.formula_j = result.formula.type.j;
  source.tau = spec.tau;
  source.t0 = spec.t0;
  const ProblemInstance problem =
      make_problem(spec.problem, primary, source, spec.eigen_index);

  RunConfig config;
  config.grid = SamplingGrid{spec.t0, spec.tf, spec.tau};
  config.eta = eta;
  config.start = spec.start;
  config.rng_seed = spec.rng_seed;
  config.derivative = spec.derivative;
  config.backward_order = spec.backward_order;
  config.record_solution = spec.record_solution;

  const auto begin = std::chrono::steady_clock::now();
  result.trace = run(result.formula, problem, config);
  const std::chrono::duration<double> elapsed =
      std::chrono::steady_clock::now() - begin;
  result.wall_seconds = elapsed.count();
  const double steps_done =
      result.trace.records.empty()
          ? 0.0
          : static_cast<double>(result.trace.records.back().k);
  result.steps_per_second =
      result.wall_seconds > 0.0 ? steps_done / result.wall_seconds : 0.0;

  result.steady_from = std::min(spec.t0 + 5.0 / eta, spec.tf);
  result.steady_residual = steady_residual(result.trace, result.steady_from);
  return result;
}

void write_trace_csv(std::ostream& out, const ExperimentSpec& spec,
                     const ExperimentResult& result) {
  out << "# problem=" << spec.problem << " flow=" << spec.flow
      << " formula=" << result.formula.type.id()
      << " tau=" << format_double(result.trace.tau)
      << " eta=" << format_double(result.trace.eta)
      << " h=" << format_double(result.trace.h)
      << " t0=" << format_double(spec.t0) << " tf=" << format_double(spec.tf)
      << " start="
      << (spec.start == StartPolicy::kOracle ? "oracle" : "random")
      << " rng=" << spec.rng_seed << " derivative="
      << (spec.derivative == DerivativeSource::kAnalytic ? "analytic"
                                                         : "backward")
      << " status="
      << (result.trace.status == RunStatus::kCompleted ? "completed"
                                                       : "diverged");
  if (result.trace.status == RunStatus::kDiverged)
    out << " diverged_at=" << result.trace.diverged_at;
  out << '\n';

  out << "k,t,residual_fro,relative_residual,solve_condition";
  if (spec.record_solution)
    for (Eigen::Index i = 0;
         i < (result.trace.records.empty()
                  ? 0
                  : result.trace.records.front().solution.size());
         ++i)
      out << ",solution_" << i;
  out << '\n';

  for (const TraceRecord& rec : result.trace.records) {
    out << rec.k << ',' << format_double(rec.t) << ','
        << format_double(rec.residual_fro) << ','
        << format_double(rec.relative_residual) << ','
        << format_double(rec.solve_condition);
    if (spec.record_solution)
      for (Eigen::Index i = 0; i < rec.solution.size(); ++i)
        out << ',' << format_complex(rec.solution(i));
    out << '\n';
  }
}

std::vector<SweepRow> sweep_experiment(const ExperimentSpec& base,
                                       const std::string& vary,
                                       const std::vector<double>& values,
                                       int jobs) {
  if (vary != "tau" && vary != "eta" && vary != "h")
    throw Error("sweep can vary tau, eta, or h, not '" + vary + "'");

  const auto one = [&base, &vary](double value) {
    ExperimentSpec spec = base;
    if (vary == "tau") {
      spec.tau = value;
    } else if (vary == "eta") {
      spec.eta = value;
      spec.h = 0.0;
    } else {
      spec.h = value;
      spec.eta = 0.0;
    }
    SweepRow row;
    row.value = value;
    const ExperimentResult result = run_experiment(spec);
    row.diverged = result.trace.status == RunStatus::kDiverged;
    row.steady_residual = row.diverged
                              ? std::numeric_limits<double>::infinity()
                              : result.steady_residual;
    return row;
  };

  std::vector<SweepRow> rows(values.size());
  if (jobs <= 1) {
    for (std::size_t i = 0; i < values.size(); ++i) rows[i] = one(values[i]);
    return rows;
  }
  // Fan out in batches; rows land at their input index regardless of
  // completion order.
  std::size_t next = 0;
  while (next < values.size()) {
    std::vector<std::pair<std::size_t, std::future<SweepRow>>> batch;
    for (int j = 0; j < jobs && next < values.size(); ++j, ++next)
      batch.emplace_back(next, std::async(std::launch::async, one,
                                          values[next]));
    for (auto& [index, future] : batch) rows[index] = future.get();
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::string& vary,
                     const std::vector<SweepRow>& rows) {
  out << vary << ",steady_residual,diverged\n";
  for (const SweepRow& row : rows)
    out << format_double(row.value) << ','
        << format_double(row.steady_residual) << ',' << (row.diverged ? 1 : 0)
        << '\n';
}

}  // namespace znn
