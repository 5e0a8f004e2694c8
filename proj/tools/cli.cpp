#include "cli.hpp"

#include <cstdint>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "znn/catalog.hpp"
#include "znn/discover.hpp"
#include "znn/experiment.hpp"

namespace znn {
namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNotFound = 2;
constexpr int kExitDiverged = 3;

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string text;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) text += sep;
    text += parts[i];
  }
  return text;
}

void print_formula_report(std::ostream& out, const DifferenceFormula& formula,
                          const RootReport& report) {
  out << "formula " << formula.type.id() << "\n  weights:";
  for (Eigen::Index i = 0; i < formula.weights.size(); ++i)
    out << ' ' << format_double(formula.weights(i));
  out << "\n  taucoeff: " << format_double(formula.taucoeff)
      << "\n  recursion weights:";
  for (Eigen::Index i = 0; i < formula.polyrest.size(); ++i)
    out << ' ' << format_double(formula.polyrest(i));
  out << "\n  charpoly:";
  for (Eigen::Index i = 0; i < formula.charpoly.size(); ++i)
    out << ' ' << format_double(formula.charpoly(i));
  out << "\n  roots:";
  for (const Complex& root : report.roots) out << ' ' << format_complex(root);
  out << "\n  max |rho|: " << format_double(report.max_magnitude)
      << "\n  second |rho|: " << format_double(report.second_magnitude)
      << "\n  |charpoly(1)|: "
      << format_double(std::abs(formula.charpoly.sum()))
      << "\n  convergent: " << (report.convergent ? "yes" : "no") << "\n";
}

struct RunOptions {
  ExperimentSpec spec;
  std::string start = "random";
  std::string derivative = "analytic";
  std::string out_path;
};

void add_run_options(CLI::App* cmd, RunOptions* opts) {
  // Frees the short -h for the --h step-gain option below.
  cmd->set_help_flag("--help", "Print this help message and exit");
  cmd->fallthrough();
  cmd->add_option("--problem", opts->spec.problem,
                  "Problem class: " + join(problem_tags(), ", "))
      ->capture_default_str();
  cmd->add_option("--flow", opts->spec.flow,
                  "Primary flow: " + join(flow_names(), ", ") +
                      "; parameters inline, e.g. spd2-sqrt(3)")
      ->capture_default_str();
  cmd->add_option("--formula", opts->spec.formula,
                  "Formula id from the built-ins or --catalog")
      ->capture_default_str();
  cmd->add_option("--catalog", opts->spec.catalog_path,
                  "Catalog file with extra formulas");
  cmd->add_option("--tau", opts->spec.tau, "Sampling gap")
      ->capture_default_str();
  cmd->add_option("--eta", opts->spec.eta,
                  "Decay constant (0 = derive from --h or the formula "
                  "default)")
      ->capture_default_str();
  cmd->add_option("--h", opts->spec.h, "Step gain tau*eta (used when --eta=0)")
      ->capture_default_str();
  cmd->add_option("--t0", opts->spec.t0, "Start time")->capture_default_str();
  cmd->add_option("--tf", opts->spec.tf, "Final time")->capture_default_str();
  cmd->add_option("--start", opts->start, "Start iterate: random or oracle")
      ->capture_default_str();
  cmd->add_option("--rng", opts->spec.rng_seed, "Random-start seed")
      ->capture_default_str();
  cmd->add_option("--derivative", opts->derivative,
                  "Flow derivatives: analytic or backward")
      ->capture_default_str();
  cmd->add_option("--order", opts->spec.backward_order,
                  "Backward-difference order (0 = formula order + 1)")
      ->capture_default_str();
  cmd->add_option("--eigen-index", opts->spec.eigen_index,
                  "Tracked eigenpair, ascending order (-1 = largest)")
      ->capture_default_str();
  cmd->add_flag("--solution", opts->spec.record_solution,
                "Record the iterate in the trace CSV");
  cmd->add_option("--out", opts->out_path, "Write the trace CSV here");
}

void resolve_run_options(RunOptions* opts) {
  if (opts->start == "random") {
    opts->spec.start = StartPolicy::kRandom;
  } else if (opts->start == "oracle") {
    opts->spec.start = StartPolicy::kOracle;
  } else {
    throw Error("--start must be 'random' or 'oracle', not '" + opts->start +
                "'");
  }
  if (opts->derivative == "analytic") {
    opts->spec.derivative = DerivativeSource::kAnalytic;
  } else if (opts->derivative == "backward") {
    opts->spec.derivative = DerivativeSource::kBackward;
  } else {
    throw Error("--derivative must be 'analytic' or 'backward', not '" +
                opts->derivative + "'");
  }
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  return out;
}

int run_discover(const std::string& type_id, SearchConfig config,
                 std::uint64_t rng_seed, const std::string& out_path) {
  const FormulaType type = parse_formula_type(type_id);
  const DiscoveryResult result = discover_formula(type, config, rng_seed);
  if (result.status == SearchStatus::kNotFound) {
    std::cout << "no convergent " << type.id() << " formula in "
              << result.seeds_tried
              << " seeds; best max |rho|: " << format_double(
                     result.best_objective)
              << "\n";
    return kExitNotFound;
  }
  std::cout << "found after " << result.seeds_tried << " seed"
            << (result.seeds_tried == 1 ? "" : "s") << "\n";
  print_formula_report(std::cout, result.formula, result.report);
  std::cout << "catalog line: " << catalog_line(result.formula) << "\n";
  if (!out_path.empty()) {
    append_catalog(out_path, result.formula);
    std::cout << "appended to " << out_path << "\n";
  }
  return kExitOk;
}

int run_single(RunOptions* opts) {
  resolve_run_options(opts);
  const ExperimentResult result = run_experiment(opts->spec);
  std::cout << "run: problem=" << opts->spec.problem
            << " flow=" << opts->spec.flow
            << " formula=" << result.formula.type.id()
            << " tau=" << format_double(opts->spec.tau)
            << " eta=" << format_double(result.eta)
            << " h=" << format_double(result.h) << "\n";
  const bool diverged = result.trace.status == RunStatus::kDiverged;
  if (diverged) {
    std::cout << "status: diverged at step " << result.trace.diverged_at
              << "\n";
  } else {
    std::cout << "status: completed, " << result.trace.records.size()
              << " records\n";
    std::cout << "steady relative residual (t >= "
              << format_double(result.steady_from)
              << "): " << format_double(result.steady_residual) << "\n";
  }
  std::cout << "wall: " << result.wall_seconds << " s, "
            << static_cast<long long>(result.steps_per_second)
            << " steps/s\n";
  if (!opts->out_path.empty()) {
    std::ofstream out = open_output(opts->out_path);
    write_trace_csv(out, opts->spec, result);
    std::cout << "trace written to " << opts->out_path << "\n";
  }
  return diverged ? kExitDiverged : kExitOk;
}

int run_sweep(RunOptions* opts, const std::string& vary,
              const std::vector<double>& values, int jobs) {
  resolve_run_options(opts);
  const std::vector<SweepRow> rows =
      sweep_experiment(opts->spec, vary, values, jobs);
  std::cout << "sweep over " << vary << ": problem=" << opts->spec.problem
            << " flow=" << opts->spec.flow
            << " formula=" << opts->spec.formula << "\n";
  for (const SweepRow& row : rows) {
    std::cout << "  " << vary << "=" << format_double(row.value) << "  ";
    if (row.diverged)
      std::cout << "diverged\n";
    else
      std::cout << "steady residual " << format_double(row.steady_residual)
                << "\n";
  }
  if (!opts->out_path.empty()) {
    std::ofstream out = open_output(opts->out_path);
    write_sweep_csv(out, vary, rows);
    std::cout << "table written to " << opts->out_path << "\n";
  }
  return kExitOk;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"Discretized zeroing-dynamics solvers for time-varying "
               "matrix problems"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read options from an INI file (use a\n[run] or [sweep] section for subcommand options)");

  // discover
  auto* discover =
      app.add_subcommand("discover", "Search a formula family for a "
                                     "convergent look-ahead rule");
  std::string type_id;
  SearchConfig search;
  std::uint64_t discover_rng = 0;
  std::string discover_out;
  bool boost_order = false;
  discover->add_option("type", type_id, "Family id j_s, e.g. 2_3")
      ->required();
  discover->add_option("--seeds", search.max_outer,
                       "Seed budget before giving up")
      ->capture_default_str();
  discover->add_option("--rng", discover_rng, "Search RNG seed")
      ->capture_default_str();
  discover->add_option("--eps", search.eps_conv,
                       "Convergence tolerance on root magnitudes")
      ->capture_default_str();
  discover->add_flag("--boost-order", boost_order,
                     "Search the higher-accuracy subspace (needs s >= 2)");
  discover->add_option("--out", discover_out,
                       "Append the found formula to this catalog file");

  // run
  auto* run_cmd = app.add_subcommand(
      "run", "Run one solver experiment and summarize the trace");
  RunOptions run_opts;
  add_run_options(run_cmd, &run_opts);

  // sweep
  auto* sweep_cmd = app.add_subcommand(
      "sweep", "Repeat an experiment while varying tau, eta, or h");
  RunOptions sweep_opts;
  std::string vary = "tau";
  std::vector<double> values;
  int jobs = 1;
  add_run_options(sweep_cmd, &sweep_opts);
  sweep_cmd->add_option("--vary", vary, "Quantity to vary: tau, eta, or h")
      ->capture_default_str();
  sweep_cmd->add_option("--values", values, "Comma-separated values")
      ->delimiter(',')
      ->required();
  sweep_cmd->add_option("--jobs", jobs, "Parallel runs")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*discover) {
      search.boost_order = boost_order;
      return run_discover(type_id, search, discover_rng, discover_out);
    }
    if (*run_cmd) return run_single(&run_opts);
    return run_sweep(&sweep_opts, vary, values, jobs);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace znn
