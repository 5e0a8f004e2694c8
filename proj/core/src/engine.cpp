#include "znn/engine.hpp"

#include <cmath>
#include <limits>
#include <utility>

namespace znn {
namespace {

constexpr double kDivergenceFactor = 1e12;

Vector standard_normal(Eigen::Index dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v(i) = Complex(normal(rng), 0.0);
  return v;
}

}  // namespace

Solver::Solver(DifferenceFormula formula, ProblemInstance problem,
               RunConfig config)
    : formula_(std::move(formula)),
      problem_(std::move(problem)),
      config_(std::move(config)) {
  config_.grid.validate();
  if (!(config_.eta > 0.0)) throw Error("run needs a positive decay constant");
  if (!problem_.rate || !problem_.residual || !problem_.residual_scale)
    throw Error("problem instance is incomplete");

  if (config_.start == StartPolicy::kOracle) {
    // An oracle start fills the whole history window with the solution at
    // past grid times, so the recursion runs at full order from the very
    // first step and no warm-up error enters the trace.
    if (!problem_.oracle)
      throw Error("problem '" + problem_.tag +
                  "' has no dense oracle; use a random start");
    for (int m = 0; m < formula_.type.instances(); ++m) {
      Vector past = problem_.oracle(config_.grid.t0 - m * config_.grid.tau);
      if (past.size() != problem_.dim)
        throw DimensionError("start iterate has the wrong length");
      history_.push_back(std::move(past));
    }
  } else {
    std::mt19937_64 rng(config_.rng_seed);
    Vector start = problem_.random_start ? problem_.random_start(rng)
                                         : standard_normal(problem_.dim, rng);
    if (start.size() != problem_.dim)
      throw DimensionError("start iterate has the wrong length");
    history_.push_front(std::move(start));
  }
  initial_norm_ = history_.front().norm();

  trace_.tau = config_.grid.tau;
  trace_.eta = config_.eta;
  trace_.h = config_.grid.tau * config_.eta;
  trace_.records.reserve(config_.grid.steps() + 1);
}

void Solver::record_current(const SolveStats& stats) {
  TraceRecord rec;
  rec.k = k_;
  rec.t = time();
  const Matrix defect = problem_.residual(rec.t, history_.front());
  rec.residual_fro = defect.norm();
  const double scale = problem_.residual_scale(rec.t, history_.front());
  rec.relative_residual =
      rec.residual_fro / std::max(scale, std::numeric_limits<double>::min());
  rec.solve_condition = stats.condition;
  if (config_.record_solution) rec.solution = history_.front();
  trace_.records.push_back(std::move(rec));
}

bool Solver::advance() {
  if (diverged() || k_ >= config_.grid.steps()) return false;

  const double t_k = time();
  const Vector& x_k = history_.front();

  SolveStats stats;
  const Vector rate = problem_.rate(t_k, x_k, config_.eta, &stats);
  if (rate.size() != problem_.dim)
    throw DimensionError("rate assembly returned the wrong length");

  // The trace row for x_k carries the condition of the solve that x_k
  // was produced from; the row is written before any t_{k+1} data could
  // be touched, keeping the whole step causal.
  record_current(last_stats_);
  last_stats_ = stats;

  const double tau = config_.grid.tau;
  Vector next;
  if (warming()) {
    // Euler-rule warm-up step: the type-1_2 recursion x_{k+1} = x_k +
    // tau * rate, which needs no history beyond the current iterate.
    next = x_k + tau * rate;
  } else {
    next = formula_.taucoeff * tau * rate;
    for (int m = 0; m < formula_.history(); ++m)
      next += formula_.polyrest(m) * history_[m];
  }

  if (!next.allFinite() ||
      next.norm() > kDivergenceFactor * (1.0 + initial_norm_)) {
    trace_.status = RunStatus::kDiverged;
    trace_.diverged_at = k_ + 1;
    return false;
  }

  history_.push_front(std::move(next));
  while (static_cast<int>(history_.size()) > formula_.type.instances())
    history_.pop_back();
  ++k_;
  return true;
}

void Solver::finalize() {
  if (finalized_ || diverged()) return;
  record_current(last_stats_);
  finalized_ = true;
}

Trace run(const DifferenceFormula& formula, const ProblemInstance& problem,
          const RunConfig& config) {
  Solver solver(formula, problem, config);
  while (solver.advance()) {
  }
  solver.finalize();
  return solver.take_trace();
}

double steady_residual(const Trace& trace, double from_t) {
  double worst = -1.0;
  for (const TraceRecord& rec : trace.records)
    if (rec.t >= from_t) worst = std::max(worst, rec.relative_residual);
  return worst < 0.0 ? std::numeric_limits<double>::infinity() : worst;
}

}  // namespace znn
