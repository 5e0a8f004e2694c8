#ifndef ZNN_DISCOVER_HPP_
#define ZNN_DISCOVER_HPP_

#include <cstdint>
#include <vector>

#include "znn/formula.hpp"
#include "znn/nelder_mead.hpp"

namespace znn {

struct SearchConfig {
  int max_outer = 2000;             // random seeds to try before giving up
  int min_restarts = 3;             // inner randomized restarts per seed
  int max_restarts = 6;
  double eps_conv = kDefaultEpsConv;
  double perturbation = 0.1;        // restart offset, relative to seed norm
  NelderMeadOptions nm;
  // Seeds consumed, in order, before any random ones (each counts against
  // max_outer).  Lets callers replay a known seed exactly.
  std::vector<RealVector> seed_queue;
  // Search the kernel that also cancels the next Taylor column, trading
  // seed dimensions (needs s >= 2) for one extra order of local accuracy.
  bool boost_order = false;
};

enum class SearchStatus { kFound, kNotFound };

struct DiscoveryResult {
  SearchStatus status = SearchStatus::kNotFound;
  DifferenceFormula formula;  // valid when status == kFound
  RootReport report;          // of formula, or of the best candidate seen
  RealVector best_weights;    // best (smallest max-root) candidate, always
  double best_objective = 0.0;
  int seeds_tried = 0;
};

// Two-phase search for a convergent formula of the given type: an outer
// loop over Gaussian random seeds in the kernel parametrization, an inner
// loop of randomized downhill-simplex restarts minimizing the maximum
// root magnitude of the candidate's characteristic polynomial.  Returns on
// the first candidate passing the convergence verdict.  Deterministic for
// a fixed rng_seed and config: every outer seed derives its own RNG
// stream, so the loop could be fanned out across threads without changing
// the result.
DiscoveryResult discover_formula(FormulaType type, const SearchConfig& config,
                                 std::uint64_t rng_seed);

}  // namespace znn

#endif  // ZNN_DISCOVER_HPP_
