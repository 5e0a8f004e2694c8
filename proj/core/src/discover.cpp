#include "znn/discover.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace znn {
namespace {

constexpr double kInfeasible = 1e6;

// Stream-splitting constant (the 64-bit golden ratio); seed i works on the
// engine rng_seed + kStreamGap * (i + 1) so streams never collide.
constexpr std::uint64_t kStreamGap = 0x9E3779B97F4A7C15ULL;

RealVector gaussian_vector(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  RealVector v(dim);
  for (int i = 0; i < dim; ++i) v(i) = normal(rng);
  return v;
}

}  // namespace

DiscoveryResult discover_formula(FormulaType type, const SearchConfig& config,
                                 std::uint64_t rng_seed) {
  const TaylorMatrix tm = config.boost_order
                              ? build_taylor_matrix(type, type.j + 1)
                              : build_taylor_matrix(type);
  const KernelMap kernel = kernel_parametrization(tm);

  DiscoveryResult result;
  result.best_objective = std::numeric_limits<double>::infinity();

  // Max root magnitude of the candidate at seed y; large penalty when the
  // weights cannot form a recursion at all.  Tracks the best candidate as
  // a side effect so NotFound can report diagnostics.
  const auto objective = [&](const RealVector& y) {
    try {
      const DifferenceFormula f = formula_from_weights(type, kernel.extend(y));
      const RootReport report = analyze_roots(f, config.eps_conv);
      if (report.max_magnitude < result.best_objective) {
        result.best_objective = report.max_magnitude;
        result.best_weights = f.weights;
        result.report = report;
      }
      return report.max_magnitude;
    } catch (const Error&) {
      return kInfeasible;
    }
  };

  // Checks the convergence verdict at y; fills in the result when it holds.
  const auto accept = [&](const RealVector& y) {
    try {
      DifferenceFormula f = formula_from_weights(type, kernel.extend(y));
      RootReport report = analyze_roots(f, config.eps_conv);
      if (!report.convergent) return false;
      result.status = SearchStatus::kFound;
      result.formula = std::move(f);
      result.report = std::move(report);
      return true;
    } catch (const Error&) {
      return false;
    }
  };

  for (int i = 0; i < config.max_outer; ++i) {
    result.seeds_tried = i + 1;
    std::mt19937_64 rng(rng_seed + kStreamGap * static_cast<std::uint64_t>(i + 1));

    RealVector seed;
    if (i < static_cast<int>(config.seed_queue.size())) {
      seed = config.seed_queue[i];
      if (seed.size() != kernel.seed_dim)
        throw DimensionError("queued discovery seed has wrong length");
    } else {
      seed = gaussian_vector(kernel.seed_dim, rng);
    }

    // The raw seed itself may already parametrize a convergent formula
    // (this is how a replayed known seed is reproduced bit-for-bit).
    objective(seed);
    if (accept(seed)) return result;

    std::uniform_int_distribution<int> restart_count(config.min_restarts,
                                                     config.max_restarts);
    const int restarts = restart_count(rng);
    for (int r = 0; r < restarts; ++r) {
      RealVector start = seed;
      if (r > 0) {
        const double scale =
            config.perturbation * std::max(seed.norm(), 1e-3);
        start += scale * gaussian_vector(kernel.seed_dim, rng);
      }
      const NelderMeadResult nm = nelder_mead(objective, start, config.nm);
      if (accept(nm.x)) return result;
    }
  }

  return result;
}

}  // namespace znn
