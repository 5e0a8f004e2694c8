#include "znn/flow.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <utility>

#include <Eigen/Dense>

namespace znn {
namespace {

Matrix checked(const Matrix& value, Eigen::Index rows, Eigen::Index cols,
               const std::string& name, const char* what, double t) {
  if (value.rows() != rows || value.cols() != cols)
    throw DimensionError("flow " + name + ": " + what + " at t = " +
                         format_double(t) + " has the wrong shape");
  if (!value.allFinite())
    throw Error("flow " + name + ": " + what + " at t = " + format_double(t) +
                " is not finite");
  return value;
}

}  // namespace

MatrixFlow::MatrixFlow(Eigen::Index rows, Eigen::Index cols, Sampler sample,
                       Sampler derivative, std::string name)
    : rows_(rows),
      cols_(cols),
      sample_(std::move(sample)),
      derivative_(std::move(derivative)),
      name_(std::move(name)) {
  if (rows_ <= 0 || cols_ <= 0) throw DimensionError("flow needs positive dims");
  if (!sample_) throw Error("flow needs a sampler");
}

Matrix MatrixFlow::sample(double t) const {
  return checked(sample_(t), rows_, cols_, name_, "sample", t);
}

Matrix MatrixFlow::derivative(double t) const {
  if (!derivative_)
    throw Error("flow " + name_ + " has no analytic derivative");
  return checked(derivative_(t), rows_, cols_, name_, "derivative", t);
}

ReplayLog record_flow(const MatrixFlow& flow, const SamplingGrid& grid) {
  grid.validate();
  ReplayLog log;
  log.rows = flow.rows();
  log.cols = flow.cols();
  log.tau = grid.tau;
  log.t0 = grid.t0;
  log.samples.reserve(grid.steps() + 1);
  for (int k = 0; k <= grid.steps(); ++k)
    log.samples.push_back(flow.sample(grid.time_at(k)));
  return log;
}

void write_replay(const std::string& path, const ReplayLog& log) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open replay file '" + path + "' for writing");
  out << log.rows << ' ' << log.cols << ' ' << format_double(log.tau) << ' '
      << format_double(log.t0) << '\n';
  for (const Matrix& sample : log.samples) {
    for (Eigen::Index i = 0; i < log.rows; ++i)
      for (Eigen::Index j = 0; j < log.cols; ++j) {
        if (i != 0 || j != 0) out << ' ';
        out << format_complex(sample(i, j));
      }
    out << '\n';
  }
  if (!out) throw Error("write to replay file '" + path + "' failed");
}

ReplayLog read_replay(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open replay file '" + path + "'");
  ReplayLog log;
  std::string header;
  if (!std::getline(in, header)) throw Error("replay file '" + path + "' is empty");
  {
    std::istringstream line(header);
    if (!(line >> log.rows >> log.cols >> log.tau >> log.t0))
      throw Error("replay file '" + path + "': bad header");
  }
  if (log.rows <= 0 || log.cols <= 0 || !(log.tau > 0.0))
    throw Error("replay file '" + path + "': bad header values");
  std::string raw;
  int line_no = 1;
  while (std::getline(in, raw)) {
    ++line_no;
    std::istringstream line(raw);
    std::string token;
    Matrix sample(log.rows, log.cols);
    Eigen::Index count = 0;
    while (line >> token) {
      if (count >= log.rows * log.cols)
        throw Error("replay file '" + path + "':" + std::to_string(line_no) +
                    ": too many entries");
      sample(count / log.cols, count % log.cols) = parse_complex(token);
      ++count;
    }
    if (count == 0) continue;
    if (count != log.rows * log.cols)
      throw Error("replay file '" + path + "':" + std::to_string(line_no) +
                  ": expected " + std::to_string(log.rows * log.cols) +
                  " entries, got " + std::to_string(count));
    log.samples.push_back(std::move(sample));
  }
  if (log.samples.empty())
    throw Error("replay file '" + path + "' holds no samples");
  return log;
}

MatrixFlow replay_flow(ReplayLog log) {
  auto shared = std::make_shared<const ReplayLog>(std::move(log));
  auto sampler = [shared](double t) -> Matrix {
    const double position = (t - shared->t0) / shared->tau;
    const long k = std::lround(position);
    if (std::abs(position - static_cast<double>(k)) >
        1e-6 * std::max(1.0, std::abs(position)))
      throw Error("replay flow: off-grid sample request at t = " +
                  format_double(t));
    if (k < 0 || k >= static_cast<long>(shared->samples.size()))
      throw Error("replay flow: t = " + format_double(t) +
                  " is outside the recorded range");
    return shared->samples[static_cast<std::size_t>(k)];
  };
  return MatrixFlow(shared->rows, shared->cols, std::move(sampler), nullptr,
                    "replay");
}

Matrix estimate_derivative(const std::vector<Matrix>& history, double tau,
                           int order) {
  if (history.empty()) throw Error("derivative estimate needs samples");
  if (!(tau > 0.0)) throw Error("derivative estimate needs tau > 0");
  if (order < 0) throw Error("derivative estimate needs order >= 0");
  const int p = std::min<int>(order, static_cast<int>(history.size()) - 1);
  const Matrix& newest = history.back();
  if (p == 0) return Matrix::Zero(newest.rows(), newest.cols());

  // Weights c_m on f(t - m tau) from the moment conditions
  // sum_m c_m (-m)^q = [q == 1] for q = 0..p, so that
  // sum_m c_m f(t - m tau) = tau f'(t) + O(tau^{p+1}).
  RealMatrix vandermonde(p + 1, p + 1);
  RealVector rhs = RealVector::Zero(p + 1);
  rhs(1) = 1.0;
  for (int q = 0; q <= p; ++q)
    for (int m = 0; m <= p; ++m)
      vandermonde(q, m) = std::pow(static_cast<double>(-m), q);
  const RealVector weights = vandermonde.fullPivLu().solve(rhs);

  Matrix estimate = Matrix::Zero(newest.rows(), newest.cols());
  const int newest_index = static_cast<int>(history.size()) - 1;
  for (int m = 0; m <= p; ++m) {
    const Matrix& sample = history[newest_index - m];
    if (sample.rows() != newest.rows() || sample.cols() != newest.cols())
      throw DimensionError("derivative estimate: mixed sample shapes");
    estimate += weights(m) * sample;
  }
  return estimate / tau;
}

MatrixFlow fov_flow(const Matrix& a) {
  if (a.rows() != a.cols()) throw DimensionError("fov flow needs a square matrix");
  const Matrix h = 0.5 * (a + a.adjoint());
  const Matrix k = (a - a.adjoint()) / Complex(0.0, 2.0);
  const Eigen::Index n = a.rows();
  auto sampler = [h, k](double t) -> Matrix {
    return std::cos(t) * h + std::sin(t) * k;
  };
  auto deriv = [h, k](double t) -> Matrix {
    return -std::sin(t) * h + std::cos(t) * k;
  };
  return MatrixFlow(n, n, std::move(sampler), std::move(deriv), "fov");
}

MatrixFlow guarded_flow(const MatrixFlow& inner,
                        std::shared_ptr<const double> ceiling) {
  auto check = [ceiling](double t) {
    if (t > *ceiling + 1e-9)
      throw Error("guarded flow: request at t = " + format_double(t) +
                  " is ahead of the allowed time " + format_double(*ceiling));
  };
  MatrixFlow copy = inner;
  auto sampler = [copy, check](double t) {
    check(t);
    return copy.sample(t);
  };
  if (!inner.has_derivative())
    return MatrixFlow(inner.rows(), inner.cols(), std::move(sampler), nullptr,
                      inner.name());
  auto deriv = [copy, check](double t) {
    check(t);
    return copy.derivative(t);
  };
  return MatrixFlow(inner.rows(), inner.cols(), std::move(sampler),
                    std::move(deriv), inner.name());
}

MatrixFlow recording_flow(const MatrixFlow& inner,
                          std::shared_ptr<double> high_water) {
  auto note = [high_water](double t) {
    *high_water = std::max(*high_water, t);
  };
  MatrixFlow copy = inner;
  auto sampler = [copy, note](double t) {
    note(t);
    return copy.sample(t);
  };
  if (!inner.has_derivative())
    return MatrixFlow(inner.rows(), inner.cols(), std::move(sampler), nullptr,
                      inner.name());
  auto deriv = [copy, note](double t) {
    note(t);
    return copy.derivative(t);
  };
  return MatrixFlow(inner.rows(), inner.cols(), std::move(sampler),
                    std::move(deriv), inner.name());
}

}  // namespace znn
