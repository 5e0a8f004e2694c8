#include <cmath>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <doctest.h>

#include "znn/experiment.hpp"
#include "znn/flow.hpp"

namespace znn {
namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

struct PathGuard {
  explicit PathGuard(std::string p) : path(std::move(p)) {}
  ~PathGuard() { std::remove(path.c_str()); }
  std::string path;
};

MatrixFlow polynomial_flow(const Matrix& m0, const Matrix& m1,
                           const Matrix& m2) {
  return MatrixFlow(
      m0.rows(), m0.cols(),
      [=](double t) { return Matrix(m0 + t * m1 + t * t * m2); },
      [=](double t) { return Matrix(m1 + 2.0 * t * m2); }, "poly");
}

TEST_CASE("sampling grids count steps by rounding") {
  SamplingGrid grid{0.0, 1.0, 0.1};
  CHECK(grid.steps() == 10);
  CHECK(grid.time_at(3) == doctest::Approx(0.3));
  CHECK_NOTHROW(grid.validate());
  CHECK_THROWS_AS((SamplingGrid{0.0, 1.0, 0.0}.validate()), Error);
  CHECK_THROWS_AS((SamplingGrid{1.0, 1.0, 0.1}.validate()), Error);
}

TEST_CASE("flows validate shape and finiteness") {
  const MatrixFlow bad_shape(2, 2, [](double) { return Matrix::Zero(1, 1); });
  CHECK_THROWS_AS(bad_shape.sample(0.5), Error);
  const MatrixFlow bad_value(1, 1, [](double) {
    Matrix m(1, 1);
    m(0, 0) = Complex(std::nan(""), 0.0);
    return m;
  });
  CHECK_THROWS_AS(bad_value.sample(0.25), Error);
  const MatrixFlow no_deriv(1, 1, [](double) { return Matrix::Zero(1, 1); });
  CHECK_FALSE(no_deriv.has_derivative());
  CHECK_THROWS_AS(no_deriv.derivative(0.0), Error);
}

TEST_CASE("replay logs round-trip bit exactly") {
  const MatrixFlow flow = make_flow(parse_flow_spec("sym2"));
  const SamplingGrid grid{0.25, 1.25, 0.1};
  const ReplayLog log = record_flow(flow, grid);
  REQUIRE(log.samples.size() == 11);

  const PathGuard file(temp_path("znn_replay_test.txt"));
  write_replay(file.path, log);
  const ReplayLog back = read_replay(file.path);
  REQUIRE(back.samples.size() == log.samples.size());
  CHECK(back.tau == log.tau);
  CHECK(back.t0 == log.t0);
  for (std::size_t i = 0; i < log.samples.size(); ++i)
    CHECK((back.samples[i] - log.samples[i]).norm() == 0.0);

  const MatrixFlow served = replay_flow(back);
  CHECK((served.sample(0.55) - flow.sample(0.55)).norm() == 0.0);
  CHECK_FALSE(served.has_derivative());
  // Sample-synchronous: off-grid and out-of-range requests are refused.
  CHECK_THROWS_AS(served.sample(0.5), Error);
  CHECK_THROWS_AS(served.sample(1.45), Error);
  CHECK_THROWS_AS(served.sample(0.15), Error);
}

TEST_CASE("read_replay rejects malformed files") {
  const PathGuard file(temp_path("znn_replay_bad.txt"));
  {
    std::FILE* f = std::fopen(file.path.c_str(), "w");
    std::fputs("2 2 0.1 0\n1 2 3\n", f);  // three entries, four needed
    std::fclose(f);
  }
  CHECK_THROWS_AS(read_replay(file.path), Error);
  CHECK_THROWS_AS(read_replay(temp_path("does_not_exist_znn.txt")), Error);
}

TEST_CASE("backward differences are exact on matching polynomials") {
  Matrix m0(2, 2), m1(2, 2), m2(2, 2);
  m0 << Complex(1.0), Complex(2.0), Complex(-1.0), Complex(0.5);
  m1 << Complex(0.3), Complex(-0.7), Complex(1.1), Complex(0.0);
  m2 << Complex(-0.2), Complex(0.4), Complex(0.9), Complex(-1.3);
  const MatrixFlow flow = polynomial_flow(m0, m1, m2);

  const double tau = 0.05, t = 0.8;
  std::vector<Matrix> history;
  for (int m = 2; m >= 0; --m) history.push_back(flow.sample(t - m * tau));
  const Matrix est = estimate_derivative(history, tau, 2);
  CHECK((est - flow.derivative(t)).norm() <= 1e-10);

  // Order clamps to history size; a single sample estimates zero.
  const std::vector<Matrix> one = {flow.sample(t)};
  CHECK(estimate_derivative(one, tau, 3).norm() == 0.0);
}

TEST_CASE("backward difference error scales at the stated order") {
  const MatrixFlow flow(1, 1,
                        [](double t) {
                          Matrix m(1, 1);
                          m(0, 0) = Complex(std::sin(3.0 * t));
                          return m;
                        },
                        [](double t) {
                          Matrix m(1, 1);
                          m(0, 0) = Complex(3.0 * std::cos(3.0 * t));
                          return m;
                        });
  const double t = 0.9;
  const auto error_at = [&](double tau) {
    std::vector<Matrix> history;
    for (int m = 3; m >= 0; --m) history.push_back(flow.sample(t - m * tau));
    return (estimate_derivative(history, tau, 3) - flow.derivative(t)).norm();
  };
  const double ratio = error_at(0.01) / error_at(0.005);
  CHECK(ratio == doctest::Approx(8.0).epsilon(0.3));
}

TEST_CASE("field-of-values flows are hermitean with exact derivatives") {
  Matrix a(2, 2);
  a << Complex(0.0), Complex(1.0), Complex(0.0), Complex(0.0);
  const MatrixFlow flow = fov_flow(a);
  for (const double t : {0.0, 0.7, 2.0, 5.5}) {
    const Matrix f = flow.sample(t);
    CHECK((f - f.adjoint()).norm() <= 1e-15);
    // Period 2 pi.
    CHECK((f - flow.sample(t + 2.0 * M_PI)).norm() <= 1e-13);
  }
  // cos-weighted hermitean part at t = 0.
  const Matrix h = (a + a.adjoint()) / 2.0;
  CHECK((flow.sample(0.0) - h).norm() <= 1e-15);

  std::vector<Matrix> history;
  const double tau = 1e-3, t = 0.7;
  for (int m = 4; m >= 0; --m) history.push_back(flow.sample(t - m * tau));
  CHECK((estimate_derivative(history, tau, 4) - flow.derivative(t)).norm() <=
        1e-8);
}

TEST_CASE("every registry flow's analytic derivative matches a backward fit") {
  for (const std::string& name : flow_names()) {
    if (name.rfind("replay", 0) == 0) continue;
    CAPTURE(name);
    const MatrixFlow flow = make_flow(parse_flow_spec(name));
    const double tau = 1e-3, t = 0.7;
    std::vector<Matrix> history;
    for (int m = 4; m >= 0; --m) history.push_back(flow.sample(t - m * tau));
    const Matrix est = estimate_derivative(history, tau, 4);
    CHECK((est - flow.derivative(t)).norm() <= 1e-8);
  }
}

TEST_CASE("guarded flows refuse future samples") {
  const MatrixFlow inner = make_flow(parse_flow_spec("sym2"));
  auto ceiling = std::make_shared<double>(0.5);
  const MatrixFlow guarded = guarded_flow(inner, ceiling);
  CHECK_NOTHROW(guarded.sample(0.5));
  CHECK_NOTHROW(guarded.derivative(0.3));
  CHECK_THROWS_AS(guarded.sample(0.6), Error);
  *ceiling = 1.0;
  CHECK_NOTHROW(guarded.sample(0.6));

  auto high_water = std::make_shared<double>(-1.0);
  const MatrixFlow recorded = recording_flow(inner, high_water);
  recorded.sample(0.2);
  recorded.sample(0.9);
  recorded.sample(0.4);
  CHECK(*high_water == 0.9);
}

TEST_CASE("flow specs parse names, parameters, and replay paths") {
  const FlowSpec plain = parse_flow_spec("sym2");
  CHECK(plain.name == "sym2");
  CHECK(plain.params.empty());

  const FlowSpec with_param = parse_flow_spec("spd2-sqrt(3)");
  CHECK(with_param.name == "spd2-sqrt");
  REQUIRE(with_param.params.size() == 1);
  CHECK(with_param.params[0] == 3.0);

  const FlowSpec fov = parse_flow_spec("fov(0,1,0,0)");
  REQUIRE(fov.params.size() == 4);

  const FlowSpec replay = parse_flow_spec("replay:/some/file.txt");
  CHECK(replay.name == "replay");
  CHECK(replay.replay_path == "/some/file.txt");

  CHECK_THROWS_AS(parse_flow_spec("sym2(1"), Error);
  CHECK_THROWS_AS(parse_flow_spec("sym2(1;2)"), Error);
  CHECK_THROWS_AS(parse_flow_spec("replay:"), Error);
  CHECK_THROWS_AS(parse_flow_spec(""), Error);
  CHECK_THROWS_AS(make_flow(parse_flow_spec("nonesuch")), Error);
  CHECK_THROWS_AS(make_flow(parse_flow_spec("sym2(4)")), Error);
  CHECK_THROWS_AS(make_flow(parse_flow_spec("fov(1,2,3)")), Error);
}

TEST_CASE("registry flows have the advertised shapes") {
  CHECK(make_flow(parse_flow_spec("const-id")).rows() == 2);
  CHECK(make_flow(parse_flow_spec("const-id(3)")).cols() == 3);
  CHECK(make_flow(parse_flow_spec("herm3")).rows() == 3);
  CHECK(make_flow(parse_flow_spec("wide23")).cols() == 3);
  CHECK(make_flow(parse_flow_spec("tall32")).rows() == 3);
  const MatrixFlow wide = make_flow(parse_flow_spec("wide23"));
  const MatrixFlow tall = make_flow(parse_flow_spec("tall32"));
  CHECK((wide.sample(0.4).transpose() - tall.sample(0.4)).norm() == 0.0);
}

}  // namespace
}  // namespace znn
