#ifndef ZNN_CATALOG_HPP_
#define ZNN_CATALOG_HPP_

#include <string>
#include <vector>

#include "znn/formula.hpp"

namespace znn {

// Built-in formulas shipped with the library: 1_2 (the Euler rule), 2_3
// (the classic five-instance rule), and a high-order 4_5 rule selected
// offline for both open-loop root margin and closed-loop step-gain margin.
// Every entry passes is_convergent.
const std::vector<DifferenceFormula>& builtin_catalog();

// Linear search by type id ("2_3"); nullptr when absent.
const DifferenceFormula* find_formula(const std::vector<DifferenceFormula>& list,
                                      const std::string& id);

// Resolves an id against the built-ins first, then (when catalog_path is
// nonempty and the file exists) against the persisted catalog.  Throws
// Error when the id is nowhere to be found.
DifferenceFormula catalog_require(const std::string& id,
                                  const std::string& catalog_path = "");

// One-line text form `type j s taucoeff polyrest...`, 17 significant
// digits per value, enough to reconstruct the formula exactly.
std::string catalog_line(const DifferenceFormula& formula);

// Parses a catalog file (blank lines and #-comments skipped).  Every line
// is revalidated: the weights recovered from polyrest must annihilate the
// Taylor matrix and reproduce the stored taucoeff.
std::vector<DifferenceFormula> load_catalog(const std::string& path);

void append_catalog(const std::string& path, const DifferenceFormula& formula);

}  // namespace znn

#endif  // ZNN_CATALOG_HPP_
