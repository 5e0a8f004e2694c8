#include <cmath>
#include <complex>

#include <doctest.h>

#include "znn/discover.hpp"
#include "znn/formula.hpp"
#include "znn/taylor.hpp"

namespace znn {
namespace {

RealVector five_instance_weights() {
  RealVector w(4);
  w << 1.0, -0.75, -0.625, 0.25;
  return w;
}

double poly_at_one(const DifferenceFormula& f) {
  return std::abs(f.charpoly.sum());
}

// Derivative estimate from the weight form, for order-of-accuracy checks:
// xdot ~= [sum_i w_i x(t + c_i tau) - (sum w) x(t)] / (D tau).
double weighted_derivative(const DifferenceFormula& f, double (*fn)(double),
                           double t, double tau) {
  const auto offsets = taylor_offsets(f.type.expansions());
  double acc = -f.weights.sum() * fn(t);
  for (Eigen::Index i = 0; i < f.weights.size(); ++i)
    acc += f.weights(i) * fn(t + static_cast<double>(offsets[i]) * tau);
  return acc / (f.derivative_denominator * tau);
}

TEST_CASE("formula family ids parse strictly") {
  const FormulaType t = parse_formula_type("2_3");
  CHECK(t.j == 2);
  CHECK(t.s == 3);
  CHECK(t.instances() == 5);
  CHECK(t.expansions() == 4);
  CHECK(t.id() == "2_3");
  CHECK_THROWS_AS(parse_formula_type("23"), Error);
  CHECK_THROWS_AS(parse_formula_type("2_"), Error);
  CHECK_THROWS_AS(parse_formula_type("_3"), Error);
  CHECK_THROWS_AS(parse_formula_type("0_1"), Error);
  CHECK_THROWS_AS(parse_formula_type("a_b"), Error);
  CHECK_THROWS_AS(parse_formula_type("2_3x"), Error);
}

TEST_CASE("Taylor matrices carry c^p/p! in exact rationals") {
  const TaylorMatrix m23 = build_taylor_matrix({2, 3});
  REQUIRE(m23.rows == 4);
  REQUIRE(m23.cols() == 1);
  CHECK(m23.at(0, 0) == Rational(1, 2));
  CHECK(m23.at(1, 0) == Rational(1, 2));
  CHECK(m23.at(2, 0) == Rational(2));
  CHECK(m23.at(3, 0) == Rational(9, 2));

  const TaylorMatrix m12 = build_taylor_matrix({1, 2});
  CHECK(m12.rows == 2);
  CHECK(m12.cols() == 0);

  const TaylorMatrix m33 = build_taylor_matrix({3, 3});
  REQUIRE(m33.rows == 5);
  REQUIRE(m33.cols() == 2);
  CHECK(m33.at(2, 1) == Rational(-8, 6));
  CHECK(m33.at(4, 1) == Rational(-64, 6));

  CHECK_THROWS_AS(build_taylor_matrix({0, 2}), Error);
  CHECK_THROWS_AS(build_taylor_matrix({2, 0}), Error);
}

TEST_CASE("kernel parametrization reduces to [I | R]") {
  const KernelMap k23 = kernel_parametrization(build_taylor_matrix({2, 3}));
  REQUIRE(k23.seed_dim == 3);
  const RealMatrix r23 = k23.r_as_real();
  REQUIRE(r23.rows() == 1);
  REQUIRE(r23.cols() == 3);
  CHECK(r23(0, 0) == 1.0);
  CHECK(r23(0, 1) == 4.0);
  CHECK(r23(0, 2) == 9.0);

  const KernelMap k33 = kernel_parametrization(build_taylor_matrix({3, 3}));
  REQUIRE(k33.seed_dim == 3);
  const RealMatrix r33 = k33.r_as_real();
  REQUIRE(r33.rows() == 2);
  CHECK(r33(0, 0) == -2.0);
  CHECK(r33(0, 1) == -9.0);
  CHECK(r33(0, 2) == -24.0);
  CHECK(r33(1, 0) == 6.0);
  CHECK(r33(1, 1) == 18.0);
  CHECK(r33(1, 2) == 40.0);

  // Every extension annihilates the matrix by construction.
  RealVector seed(3);
  seed << 1.0, 0.0, 0.0;
  const RealVector w = k33.extend(seed);
  const RealMatrix a = build_taylor_matrix({3, 3}).as_real();
  CHECK((w.transpose() * a).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("the classic seed recovers the five-instance rule exactly") {
  const KernelMap k = kernel_parametrization(build_taylor_matrix({2, 3}));
  RealVector seed(3);
  seed << -0.75, -0.625, 0.25;  // (-6, -5, 2) / 8
  const RealVector w = k.extend(seed);
  CHECK(w(0) == 1.0);
  CHECK(w(1) == -0.75);
  CHECK(w(2) == -0.625);
  CHECK(w(3) == 0.25);
}

TEST_CASE("five-instance rule algebra is exact") {
  const DifferenceFormula f =
      formula_from_weights(parse_formula_type("2_3"), five_instance_weights());
  CHECK(f.taucoeff == doctest::Approx(2.25).epsilon(1e-15));
  REQUIRE(f.polyrest.size() == 4);
  CHECK(f.polyrest(0) == doctest::Approx(-0.125).epsilon(1e-15));
  CHECK(f.polyrest(1) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(f.polyrest(2) == doctest::Approx(0.625).epsilon(1e-15));
  CHECK(f.polyrest(3) == doctest::Approx(-0.25).epsilon(1e-15));
  REQUIRE(f.charpoly.size() == 5);
  CHECK(f.charpoly(0) == 1.0);
  CHECK(f.charpoly(1) == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(poly_at_one(f) <= 1e-12);
  CHECK(f.truncation_order == 4);
  CHECK(f.history() == 4);

  const RootReport report = analyze_roots(f);
  REQUIRE(report.roots.size() == 4);
  CHECK(report.max_magnitude == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(report.second_magnitude ==
        doctest::Approx(0.9025012395121704).epsilon(1e-10));
  CHECK(report.near_unit_count == 1);
  CHECK(report.convergent);

  // The full root set, sorted by magnitude.
  CHECK(std::abs(report.roots[0] - Complex(1.0)) <= 1e-10);
  CHECK(std::abs(std::abs(report.roots[1].imag()) - 0.5494543185485113) <=
        1e-9);
  CHECK(report.roots[1].real() == doctest::Approx(-0.7159667863451453));
  CHECK(std::abs(report.roots[3] - Complex(0.30693357269029103)) <= 1e-9);
}

TEST_CASE("the Euler rule is the 1_2 family") {
  RealVector w(2);
  w << 1.0, 0.0;
  const DifferenceFormula f =
      formula_from_weights(parse_formula_type("1_2"), w);
  CHECK(f.taucoeff == 1.0);
  CHECK(f.polyrest(0) == 1.0);
  CHECK(f.polyrest(1) == 0.0);
  CHECK(f.truncation_order == 3);
  CHECK(is_convergent(f));
}

TEST_CASE("the central-difference rule is rejected") {
  RealVector w(2);
  w << 1.0, -1.0;
  const DifferenceFormula f =
      formula_from_weights(parse_formula_type("2_1"), w);
  CHECK(f.taucoeff == doctest::Approx(2.0));
  const RootReport report = analyze_roots(f);
  CHECK(report.near_unit_count == 2);
  CHECK_FALSE(report.convergent);
}

TEST_CASE("a repeated unit root is rejected") {
  DifferenceFormula f;
  f.type = {1, 2};
  f.charpoly = RealVector(3);
  f.charpoly << 1.0, -2.0, 1.0;  // (x - 1)^2
  const RootReport report = analyze_roots(f);
  CHECK(report.near_unit_count == 2);
  CHECK(report.min_near_unit_separation <= 1e-6);
  CHECK_FALSE(report.convergent);
}

TEST_CASE("degenerate weights are refused") {
  RealVector zeros = RealVector::Zero(2);
  CHECK_THROWS_AS(formula_from_weights(parse_formula_type("1_2"), zeros),
                  DegenerateFormulaError);
  RealVector cancel(2);
  cancel << 1.0, 1.0;  // derivative denominator 1*1 + 1*(-1) = 0
  CHECK_THROWS_AS(formula_from_weights(parse_formula_type("1_2"), cancel),
                  DegenerateFormulaError);
  RealVector wrong_len(3);
  wrong_len << 1.0, 0.0, 0.0;
  CHECK_THROWS_AS(formula_from_weights(parse_formula_type("1_2"), wrong_len),
                  DimensionError);
  RealVector off_kernel(4);
  off_kernel << 1.0, 0.0, 0.0, 0.0;
  CHECK_THROWS_AS(formula_from_weights(parse_formula_type("2_3"), off_kernel),
                  Error);
}

TEST_CASE("weight rules differentiate low-degree polynomials exactly") {
  const DifferenceFormula f23 =
      formula_from_weights(parse_formula_type("2_3"), five_instance_weights());
  const double t = 0.3, tau = 0.01;

  // Exact through degree j + 1 = 3.
  const auto cube = [](double x) { return x * x * x; };
  const double d3 = weighted_derivative(f23, cube, t, tau);
  CHECK(std::abs(d3 - 3.0 * t * t) <= 1e-9 * std::abs(3.0 * t * t));

  // Degree j + 2 errs at O(tau^{j+1}): halving tau divides the defect by
  // about 2^{j+1} = 8.
  const auto quartic = [](double x) { return x * x * x * x; };
  const double exact4 = 4.0 * t * t * t;
  const double err1 = std::abs(weighted_derivative(f23, quartic, t, tau) -
                               exact4);
  const double err2 = std::abs(
      weighted_derivative(f23, quartic, t, tau / 2.0) - exact4);
  CHECK(err1 / err2 == doctest::Approx(8.0).epsilon(0.25));

  // The Euler rule is exact only through degree 1.
  RealVector we(2);
  we << 1.0, 0.0;
  const DifferenceFormula f12 =
      formula_from_weights(parse_formula_type("1_2"), we);
  const auto linear = [](double x) { return 2.0 * x - 1.0; };
  CHECK(std::abs(weighted_derivative(f12, linear, t, tau) - 2.0) <= 1e-10);
  const auto square = [](double x) { return x * x; };
  CHECK(std::abs(weighted_derivative(f12, square, t, tau) - 2.0 * t) >
        1e-4 * tau);
}

TEST_CASE("closed-loop radius and the suggested step gain") {
  RealVector we(2);
  we << 1.0, 0.0;
  const DifferenceFormula euler =
      formula_from_weights(parse_formula_type("1_2"), we);
  // Loop polynomial x^2 + (h - 1) x: radius |1 - h|, zero at h = 1.
  CHECK(loop_spectral_radius(euler, 1.0) <= 1e-12);
  CHECK(loop_spectral_radius(euler, 0.5) == doctest::Approx(0.5));
  const double he = suggest_step_gain(euler);
  CHECK(he == doctest::Approx(1.0).epsilon(1e-3));

  const DifferenceFormula f23 =
      formula_from_weights(parse_formula_type("2_3"), five_instance_weights());
  CHECK(loop_spectral_radius(f23, 0.0) == doctest::Approx(1.0));
  const double h23 = suggest_step_gain(f23);
  CHECK(h23 > 0.01);
  CHECK(h23 < 0.3);
  CHECK(loop_spectral_radius(f23, h23) < 1.0);
  CHECK(loop_spectral_radius(f23, h23) <=
        loop_spectral_radius(f23, h23 * 0.5) + 1e-12);
  CHECK(loop_spectral_radius(f23, h23) <=
        loop_spectral_radius(f23, h23 * 2.0) + 1e-12);
}

TEST_CASE("discovery accepts an injected seed before optimizing") {
  SearchConfig config;
  RealVector seed(3);
  seed << -0.75, -0.625, 0.25;
  config.seed_queue.push_back(seed);
  const DiscoveryResult result =
      discover_formula(parse_formula_type("2_3"), config, 0);
  REQUIRE(result.status == SearchStatus::kFound);
  CHECK(result.seeds_tried == 1);
  CHECK(result.formula.weights(0) == 1.0);
  CHECK(result.formula.weights(1) == -0.75);
  CHECK(result.formula.weights(2) == -0.625);
  CHECK(result.formula.weights(3) == 0.25);
  CHECK(result.formula.taucoeff == doctest::Approx(2.25).epsilon(1e-15));
}

TEST_CASE("discovery is deterministic for a fixed seed") {
  SearchConfig config;
  const DiscoveryResult a =
      discover_formula(parse_formula_type("2_3"), config, 123);
  const DiscoveryResult b =
      discover_formula(parse_formula_type("2_3"), config, 123);
  REQUIRE(a.status == SearchStatus::kFound);
  REQUIRE(b.status == SearchStatus::kFound);
  CHECK(a.seeds_tried == b.seeds_tried);
  CHECK((a.formula.weights - b.formula.weights).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("families with no convergent member exhaust the budget") {
  SearchConfig config;
  config.max_outer = 40;
  const DiscoveryResult r21 =
      discover_formula(parse_formula_type("2_1"), config, 5);
  CHECK(r21.status == SearchStatus::kNotFound);
  CHECK(r21.seeds_tried == 40);
  const DiscoveryResult r31 =
      discover_formula(parse_formula_type("3_1"), config, 5);
  CHECK(r31.status == SearchStatus::kNotFound);
}

TEST_CASE("order-boosted search finds the higher-accuracy subspace") {
  SearchConfig config;
  config.boost_order = true;
  const DiscoveryResult result =
      discover_formula(parse_formula_type("2_3"), config, 9);
  REQUIRE(result.status == SearchStatus::kFound);
  // Members of the boosted subspace also cancel the third Taylor order.
  const auto offsets = taylor_offsets(4);
  double third = 0.0;
  for (Eigen::Index i = 0; i < 4; ++i) {
    const double c = static_cast<double>(offsets[i]);
    third += result.formula.weights(i) * c * c * c;
  }
  CHECK(std::abs(third) <= 1e-9);
}

}  // namespace
}  // namespace znn
