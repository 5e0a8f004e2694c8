#ifndef ZNN_EXPERIMENT_HPP_
#define ZNN_EXPERIMENT_HPP_

#include <iosfwd>
#include <string>
#include <vector>

#include "znn/engine.hpp"

namespace znn {

// ---------- flow registry ----------

// Textual flow references: a registry name with optional inline numeric
// parameters, "sym2" or "spd2-sqrt(3)" or "fov(0,1,0,0)", or a recorded
// file "replay:path/to/log.txt".
struct FlowSpec {
  std::string name;
  std::vector<double> params;
  std::string replay_path;
};

FlowSpec parse_flow_spec(const std::string& text);
MatrixFlow make_flow(const FlowSpec& spec);
std::vector<std::string> flow_names();

// ---------- problem registry ----------

std::vector<std::string> problem_tags();

// How bound flows deliver derivatives to the rate assemblies.
struct DataSourceConfig {
  DerivativeSource source = DerivativeSource::kAnalytic;
  int backward_order = 0;  // 0 = formula_j + 1, clamped to history
  int formula_j = 2;
  double tau = 0.02;
  double t0 = 0.0;
};

// Binds a problem class to the primary flow (and to the class's built-in
// companion data) and returns the engine-facing instance.  eigen_index
// selects the tracked eigenpair, counting eigenvalues in ascending order;
// -1 means the largest.
ProblemInstance make_problem(const std::string& tag, const MatrixFlow& primary,
                             const DataSourceConfig& source,
                             int eigen_index = -1);

// ---------- experiments ----------

struct ExperimentSpec {
  std::string problem = "linsys";
  std::string flow = "sym2";
  std::string formula = "2_3";
  std::string catalog_path;  // extra formulas beyond the built-ins
  double tau = 0.02;
  double eta = 0.0;  // > 0 pins the decay constant directly
  double h = 0.0;    // > 0 pins tau*eta instead; both 0 = per-formula default
  double t0 = 0.0;
  double tf = 10.0;
  StartPolicy start = StartPolicy::kRandom;
  std::uint64_t rng_seed = 0;
  DerivativeSource derivative = DerivativeSource::kAnalytic;
  int backward_order = 0;
  bool record_solution = false;
  int eigen_index = -1;
};

struct ExperimentResult {
  DifferenceFormula formula;
  double eta = 0.0;
  double h = 0.0;
  Trace trace;
  double steady_from = 0.0;  // burn-in boundary used for the summary
  double steady_residual = 0.0;
  double wall_seconds = 0.0;
  double steps_per_second = 0.0;
};

// Resolves the formula and step gain (eta > 0 wins, else h, else the
// formula's suggested gain), builds flow and problem, runs, and summarizes
// the steady state over t >= t0 + 5/eta.
ExperimentResult run_experiment(const ExperimentSpec& spec);

// Deterministic CSV: a # header line with the resolved run parameters,
// then `k,t,residual_fro,relative_residual,solve_condition[,solution_i...]`.
void write_trace_csv(std::ostream& out, const ExperimentSpec& spec,
                     const ExperimentResult& result);

// ---------- sweeps ----------

struct SweepRow {
  double value = 0.0;
  double steady_residual = 0.0;
  bool diverged = false;
};

// Runs the base experiment once per value of the varied quantity
// ("tau", "eta", or "h").  Rows keep input order; diverged runs are
// flagged and do not stop the sweep.  jobs > 1 fans runs out over
// threads (runs share no mutable state).
std::vector<SweepRow> sweep_experiment(const ExperimentSpec& base,
                                       const std::string& vary,
                                       const std::vector<double>& values,
                                       int jobs = 1);

void write_sweep_csv(std::ostream& out, const std::string& vary,
                     const std::vector<SweepRow>& rows);

}  // namespace znn

#endif  // ZNN_EXPERIMENT_HPP_
