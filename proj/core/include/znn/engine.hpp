#ifndef ZNN_ENGINE_HPP_
#define ZNN_ENGINE_HPP_

#include <cstdint>
#include <deque>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "znn/flow.hpp"
#include "znn/formula.hpp"
#include "znn/tensor.hpp"

namespace znn {

// Engine-facing view of a problem: pure closures over the bound data
// flows.  rate must only read flow data at times <= t (the look-ahead
// iterate is produced from current and past samples only).
struct ProblemInstance {
  std::string tag;
  Eigen::Index dim = 0;  // vectorized unknown length
  std::function<Vector(double t, const Vector& z, double eta, SolveStats*)>
      rate;
  std::function<Matrix(double t, const Vector& z)> residual;
  // Frobenius norm of the model right-hand side at (t, z), the
  // denominator of the relative residual.
  std::function<double(double t, const Vector& z)> residual_scale;
  // Direct dense solution at t; empty when no unique one exists.
  std::function<Vector(double t)> oracle;
  // Optional override for random starts (default: standard-normal entries).
  std::function<Vector(std::mt19937_64&)> random_start;
};

enum class StartPolicy { kOracle, kRandom };
enum class DerivativeSource { kAnalytic, kBackward };

struct RunConfig {
  SamplingGrid grid;
  double eta = 0.0;  // decay constant; callers resolve it before running
  StartPolicy start = StartPolicy::kRandom;
  std::uint64_t rng_seed = 0;
  // How flow derivatives are obtained.  Consumed when the problem is bound
  // to its flows; carried here so (formula, problem, config) describes a
  // run completely.
  DerivativeSource derivative = DerivativeSource::kAnalytic;
  int backward_order = 0;  // 0 = formula order + 1, clamped to history
  bool record_solution = false;
};

struct TraceRecord {
  long long k = 0;
  double t = 0.0;
  double residual_fro = 0.0;
  double relative_residual = 0.0;
  double solve_condition = 1.0;
  Vector solution;  // present when record_solution is on
};

enum class RunStatus { kCompleted, kDiverged };

struct Trace {
  RunStatus status = RunStatus::kCompleted;
  long long diverged_at = -1;
  double tau = 0.0;
  double eta = 0.0;
  double h = 0.0;  // tau * eta, the loop step gain
  std::vector<TraceRecord> records;
};

// One discretized solver run, driven step by step.  The constructor places
// the start iterate at t0; each advance() computes the next iterate from
// data at times <= t_k.  The first j+s steps are Euler-rule warm-up steps
// that fill the history ring; the full recursion takes over after that.
class Solver {
 public:
  Solver(DifferenceFormula formula, ProblemInstance problem, RunConfig config);

  long long k() const { return k_; }
  double time() const { return config_.grid.time_at(static_cast<int>(k_)); }
  const Vector& iterate() const { return history_.front(); }
  bool warming() const {
    return static_cast<int>(history_.size()) < formula_.type.instances();
  }
  bool diverged() const { return trace_.status == RunStatus::kDiverged; }

  // Records the current iterate, then steps.  Returns false when the grid
  // is exhausted or the run has diverged.
  bool advance();

  // Records the final iterate; run() calls this after the last advance().
  void finalize();

  const Trace& trace() const { return trace_; }
  Trace take_trace() { return std::move(trace_); }

 private:
  void record_current(const SolveStats& stats);

  DifferenceFormula formula_;
  ProblemInstance problem_;
  RunConfig config_;
  std::deque<Vector> history_;  // newest first, capacity j+s
  long long k_ = 0;
  double initial_norm_ = 0.0;
  bool finalized_ = false;
  SolveStats last_stats_;
  Trace trace_;
};

// Warm-up, then one assembly + one recursion per grid step; returns the
// trace (partial, with status kDiverged, if the iterates blow up).
Trace run(const DifferenceFormula& formula, const ProblemInstance& problem,
          const RunConfig& config);

// Largest relative residual over records with t >= from_t; +inf when no
// record qualifies.
double steady_residual(const Trace& trace, double from_t);

}  // namespace znn

#endif  // ZNN_ENGINE_HPP_
