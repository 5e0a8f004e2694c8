#include "znn/formula.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "znn/polyroots.hpp"

namespace znn {

DifferenceFormula formula_from_weights(FormulaType type,
                                       const RealVector& raw_weights,
                                       double kernel_tolerance) {
  const int r = type.expansions();
  if (raw_weights.size() != r)
    throw DimensionError("formula weights: expected " + std::to_string(r) +
                         " entries for type " + type.id());
  const double scale = raw_weights.cwiseAbs().maxCoeff();
  if (scale == 0.0) throw DegenerateFormulaError("all-zero weight vector");
  if (std::abs(raw_weights(0)) <= 1e-14 * scale)
    throw DegenerateFormulaError(
        "leading weight vanishes; x_{k+1} not expressible");

  DifferenceFormula f;
  f.type = type;
  f.weights = raw_weights / raw_weights(0);

  if (type.j >= 2) {
    const RealMatrix a = build_taylor_matrix(type).as_real();
    const double residual =
        (f.weights.transpose() * a).cwiseAbs().maxCoeff();
    if (residual > kernel_tolerance * std::max(1.0, f.weights.cwiseAbs().maxCoeff()))
      throw Error("weights do not annihilate the Taylor matrix for type " +
                  type.id());
  }

  const auto offs = taylor_offsets(r);
  double d = 0.0;
  double d_scale = 0.0;
  for (int i = 0; i < r; ++i) {
    d += f.weights(i) * static_cast<double>(offs[i]);
    d_scale += std::abs(f.weights(i) * static_cast<double>(offs[i]));
  }
  if (std::abs(d) <= 1e-12 * std::max(1.0, d_scale))
    throw DegenerateFormulaError("derivative denominator vanishes");
  f.derivative_denominator = d;
  f.taucoeff = d;  // leading weight is 1 after normalization

  f.polyrest.resize(r);
  f.polyrest(0) = f.weights.sum();
  for (int m = 1; m < r; ++m) f.polyrest(m) = -f.weights(m);

  f.charpoly.resize(r + 1);
  f.charpoly(0) = 1.0;
  for (int m = 0; m < r; ++m) f.charpoly(m + 1) = -f.polyrest(m);

  f.truncation_order = type.j + 2;
  return f;
}

RootReport analyze_roots(const DifferenceFormula& formula, double eps_conv) {
  RootReport report;
  report.roots = polynomial_roots(formula.charpoly);
  std::sort(report.roots.begin(), report.roots.end(),
            [](const Complex& a, const Complex& b) {
              return std::abs(a) > std::abs(b);
            });
  report.max_magnitude = report.roots.empty() ? 0.0 : std::abs(report.roots[0]);
  report.second_magnitude =
      report.roots.size() > 1 ? std::abs(report.roots[1]) : 0.0;

  std::vector<Complex> near_unit;
  for (const Complex& root : report.roots)
    if (std::abs(std::abs(root) - 1.0) <= eps_conv) near_unit.push_back(root);
  report.near_unit_count = static_cast<int>(near_unit.size());
  report.min_near_unit_separation = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < near_unit.size(); ++a)
    for (std::size_t b = a + 1; b < near_unit.size(); ++b)
      report.min_near_unit_separation = std::min(
          report.min_near_unit_separation, std::abs(near_unit[a] - near_unit[b]));

  report.convergent = report.max_magnitude <= 1.0 + eps_conv &&
                      report.near_unit_count <= 1 &&
                      report.min_near_unit_separation > 1e-8;
  return report;
}

bool is_convergent(const DifferenceFormula& formula, double eps_conv) {
  return analyze_roots(formula, eps_conv).convergent;
}

double loop_spectral_radius(const DifferenceFormula& formula, double h) {
  RealVector loop = formula.charpoly;
  loop(1) += formula.taucoeff * h;
  double radius = 0.0;
  for (const Complex& root : polynomial_roots(loop))
    radius = std::max(radius, std::abs(root));
  return radius;
}

double suggest_step_gain(const DifferenceFormula& formula) {
  // Coarse log-spaced scan.  The radius is continuous in h (roots depend
  // continuously on one coefficient), so a local golden-section polish of
  // the best bracket is enough.
  constexpr int kGridPoints = 240;
  const double lo = 1e-3, hi = 2.5;
  double best_h = lo;
  double best_radius = std::numeric_limits<double>::infinity();
  std::vector<double> grid(kGridPoints);
  for (int i = 0; i < kGridPoints; ++i) {
    grid[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (kGridPoints - 1));
    const double radius = loop_spectral_radius(formula, grid[i]);
    if (radius < best_radius) {
      best_radius = radius;
      best_h = grid[i];
    }
  }

  double a = best_h, b = best_h;
  for (int i = 1; i < kGridPoints; ++i) {
    if (grid[i] == best_h) {
      a = grid[i - 1];
      b = i + 1 < kGridPoints ? grid[i + 1] : grid[i];
      break;
    }
  }
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = loop_spectral_radius(formula, x1);
  double f2 = loop_spectral_radius(formula, x2);
  for (int iter = 0; iter < 80 && b - a > 1e-10; ++iter) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = loop_spectral_radius(formula, x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = loop_spectral_radius(formula, x2);
    }
  }
  const double polished = 0.5 * (a + b);
  return loop_spectral_radius(formula, polished) <= best_radius ? polished
                                                                : best_h;
}

}  // namespace znn
