#include "znn/catalog.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace znn {
namespace {

DifferenceFormula from_weight_list(int j, int s,
                                   std::initializer_list<double> weights) {
  RealVector w(static_cast<Eigen::Index>(weights.size()));
  Eigen::Index i = 0;
  for (double v : weights) w(i++) = v;
  return formula_from_weights(FormulaType{j, s}, w);
}

}  // namespace

const std::vector<DifferenceFormula>& builtin_catalog() {
  static const std::vector<DifferenceFormula> catalog = [] {
    std::vector<DifferenceFormula> list;
    // Euler look-ahead rule: xdot_k = (x_{k+1} - x_k) / tau.
    list.push_back(from_weight_list(1, 2, {1.0, 0.0}));
    // Five-instance rule; weights are the exact binary values of
    // (8, -6, -5, 2) / 8, giving taucoeff 9/4 and
    // polyrest (-1/8, 3/4, 5/8, -1/4).
    list.push_back(from_weight_list(2, 3, {1.0, -0.75, -0.625, 0.25}));
    // High-order rule found by the kernel search with the order-boost
    // column enabled, then polished for small second root (0.9204) and a
    // wide stable step-gain window; frozen at 17 digits.
    list.push_back(from_weight_list(
        4, 5,
        {1.0, -1.1754120683969271, -1.4454939530346336, 0.4196694703471429,
         0.638743659801699, -0.23483631687550777, -0.1684341468924706,
         0.07948982246123776}));
    return list;
  }();
  return catalog;
}

const DifferenceFormula* find_formula(
    const std::vector<DifferenceFormula>& list, const std::string& id) {
  for (const DifferenceFormula& f : list)
    if (f.type.id() == id) return &f;
  return nullptr;
}

DifferenceFormula catalog_require(const std::string& id,
                                  const std::string& catalog_path) {
  if (const DifferenceFormula* f = find_formula(builtin_catalog(), id))
    return *f;
  if (!catalog_path.empty()) {
    std::ifstream probe(catalog_path);
    if (probe.good()) {
      const std::vector<DifferenceFormula> persisted = load_catalog(catalog_path);
      if (const DifferenceFormula* f = find_formula(persisted, id)) return *f;
    }
  }
  throw Error("formula '" + id + "' is not in the catalog");
}

std::string catalog_line(const DifferenceFormula& formula) {
  std::ostringstream line;
  line << formula.type.id() << ' ' << formula.type.j << ' ' << formula.type.s
       << ' ' << format_double(formula.taucoeff);
  for (Eigen::Index i = 0; i < formula.polyrest.size(); ++i)
    line << ' ' << format_double(formula.polyrest(i));
  return line.str();
}

std::vector<DifferenceFormula> load_catalog(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open catalog file '" + path + "'");
  std::vector<DifferenceFormula> list;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto body = raw.substr(0, raw.find('#'));
    std::istringstream line(body);
    std::string id;
    if (!(line >> id)) continue;  // blank or comment-only line
    const auto fail = [&](const std::string& why) -> Error {
      return Error("catalog " + path + ":" + std::to_string(line_no) + ": " +
                   why);
    };
    int j = 0, s = 0;
    double taucoeff = 0.0;
    if (!(line >> j >> s >> taucoeff)) throw fail("short line");
    const FormulaType type = parse_formula_type(id);
    if (type.j != j || type.s != s) throw fail("id disagrees with j s fields");
    const int r = type.expansions();
    RealVector polyrest(r);
    for (int i = 0; i < r; ++i)
      if (!(line >> polyrest(i))) throw fail("missing polyrest entries");
    double extra;
    if (line >> extra) throw fail("trailing fields");

    // Recover the monic weight vector and rebuild through the validating
    // constructor; then cross-check the stored derived fields.
    RealVector w(r);
    w(0) = 1.0;
    for (int i = 1; i < r; ++i) w(i) = -polyrest(i);
    const DifferenceFormula f = formula_from_weights(type, w);
    if (std::abs(f.taucoeff - taucoeff) > 1e-12 * std::max(1.0, std::abs(taucoeff)))
      throw fail("taucoeff disagrees with the weights");
    if (std::abs(f.polyrest(0) - polyrest(0)) > 1e-12)
      throw fail("polyrest head disagrees with the weight sum");
    list.push_back(f);
  }
  return list;
}

void append_catalog(const std::string& path, const DifferenceFormula& formula) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw Error("cannot open catalog file '" + path + "' for append");
  out << catalog_line(formula) << '\n';
  if (!out) throw Error("write to catalog file '" + path + "' failed");
}

}  // namespace znn
