#ifndef ZNN_FLOW_HPP_
#define ZNN_FLOW_HPP_

#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "znn/types.hpp"

namespace znn {

// Uniform sampling times t_k = t0 + k * tau for k = 0..steps().
struct SamplingGrid {
  double t0 = 0.0;
  double tf = 1.0;
  double tau = 0.02;  // 50 Hz sensor rate unless overridden

  int steps() const { return static_cast<int>(std::lround((tf - t0) / tau)); }
  double time_at(int k) const { return t0 + k * tau; }
  void validate() const {
    if (!(tau > 0.0)) throw Error("sampling gap must be positive");
    if (!(tf > t0)) throw Error("time span must be nonempty");
  }
};

// A time-varying matrix (vectors are n-by-1 flows).  Sampling is pure and
// reentrant; the optional analytic derivative is exact, otherwise callers
// estimate one from past samples.
class MatrixFlow {
 public:
  using Sampler = std::function<Matrix(double)>;

  MatrixFlow() = default;
  MatrixFlow(Eigen::Index rows, Eigen::Index cols, Sampler sample,
             Sampler derivative = nullptr, std::string name = "");

  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return cols_; }
  const std::string& name() const { return name_; }
  bool has_derivative() const { return static_cast<bool>(derivative_); }

  // Evaluates the flow; a non-finite or wrongly shaped result aborts with
  // the offending time in the message.
  Matrix sample(double t) const;
  Matrix derivative(double t) const;

 private:
  Eigen::Index rows_ = 0, cols_ = 0;
  Sampler sample_;
  Sampler derivative_;
  std::string name_;
};

// Recorded samples at a constant gap, for sensor-style replay.
struct ReplayLog {
  Eigen::Index rows = 0, cols = 0;
  double tau = 0.0;
  double t0 = 0.0;
  std::vector<Matrix> samples;
};

ReplayLog record_flow(const MatrixFlow& flow, const SamplingGrid& grid);

// Text format: line 1 `m n tau t0`; one sample per following line,
// row-major, entries as `re` or `re+imj` with 17 significant digits.
void write_replay(const std::string& path, const ReplayLog& log);
ReplayLog read_replay(const std::string& path);

// Serves recorded samples back.  Requests are sample-synchronous: an
// off-grid or out-of-range time is an error, never interpolated.
MatrixFlow replay_flow(ReplayLog log);

// Backward finite-difference estimate of the derivative at the NEWEST
// sample (history is ordered oldest first).  The requested order is
// clamped to history.size() - 1; the weights come from the usual
// Vandermonde moment conditions, so an order-p rule is exact on
// polynomial flows of degree <= p.
Matrix estimate_derivative(const std::vector<Matrix>& history, double tau,
                           int order);

// The hermitean flow cos(t) H + sin(t) K with H = (A + A*)/2 and
// K = (A - A*)/(2i), whose extreme eigenvectors trace the boundary of the
// field of values of A over one period.
MatrixFlow fov_flow(const Matrix& a);

// Wraps a flow so every sample/derivative request above *ceiling faults.
// Tests drive a solver step by step, raising the ceiling to t_k before
// each step, to prove no future data is read.
MatrixFlow guarded_flow(const MatrixFlow& inner,
                        std::shared_ptr<const double> ceiling);

// Wraps a flow so the largest time ever requested is recorded in *high_water.
MatrixFlow recording_flow(const MatrixFlow& inner,
                          std::shared_ptr<double> high_water);

}  // namespace znn

#endif  // ZNN_FLOW_HPP_
