#ifndef ZNN_NELDER_MEAD_HPP_
#define ZNN_NELDER_MEAD_HPP_

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "znn/types.hpp"

namespace znn {

struct NelderMeadOptions {
  double reflection = 1.0;
  double expansion = 2.0;
  double contraction = 0.5;
  double shrink = 0.5;
  double tolerance = 1e-12;  // stop once the simplex value spread is this flat
  int max_iterations = 2000;
};

struct NelderMeadResult {
  RealVector x;
  double value = 0.0;
  int iterations = 0;
};

// Derivative-free downhill-simplex minimization (Lagarias variant).  The
// objective is any callable RealVector -> double; it may be discontinuous
// or return large penalty values, which is how infeasible formula weights
// are handled upstream.
template <typename Objective>
NelderMeadResult nelder_mead(Objective&& objective, const RealVector& start,
                             const NelderMeadOptions& opts = {}) {
  const int dim = static_cast<int>(start.size());
  NelderMeadResult result;
  if (dim == 0) {
    result.x = start;
    result.value = objective(start);
    return result;
  }

  using Vertex = std::pair<double, RealVector>;
  std::vector<Vertex> simplex;
  simplex.reserve(dim + 1);
  simplex.emplace_back(objective(start), start);
  for (int i = 0; i < dim; ++i) {
    RealVector v = start;
    v(i) += v(i) != 0.0 ? 0.05 * v(i) : 0.00025;
    simplex.emplace_back(objective(v), v);
  }
  const auto by_value = [](const Vertex& a, const Vertex& b) {
    return a.first < b.first;
  };

  int iter = 0;
  for (; iter < opts.max_iterations; ++iter) {
    std::sort(simplex.begin(), simplex.end(), by_value);
    if (simplex.back().first - simplex.front().first <=
        opts.tolerance * (std::abs(simplex.front().first) + opts.tolerance))
      break;

    RealVector centroid = RealVector::Zero(dim);
    for (int i = 0; i < dim; ++i) centroid += simplex[i].second;
    centroid /= dim;
    const RealVector worst = simplex.back().second;

    const RealVector reflected =
        centroid + opts.reflection * (centroid - worst);
    const double fr = objective(reflected);
    if (fr < simplex.front().first) {
      const RealVector expanded =
          centroid + opts.expansion * (reflected - centroid);
      const double fe = objective(expanded);
      simplex.back() = fe < fr ? Vertex{fe, expanded} : Vertex{fr, reflected};
      continue;
    }
    if (fr < simplex[dim - 1].first) {
      simplex.back() = {fr, reflected};
      continue;
    }
    const bool outside = fr < simplex.back().first;
    const RealVector contracted =
        outside ? RealVector(centroid + opts.contraction * (reflected - centroid))
                : RealVector(centroid - opts.contraction * (centroid - worst));
    const double fc = objective(contracted);
    if (fc < (outside ? fr : simplex.back().first)) {
      simplex.back() = {fc, contracted};
      continue;
    }
    for (int i = 1; i <= dim; ++i) {
      simplex[i].second =
          simplex[0].second + opts.shrink * (simplex[i].second - simplex[0].second);
      simplex[i].first = objective(simplex[i].second);
    }
  }

  std::sort(simplex.begin(), simplex.end(), by_value);
  result.x = simplex.front().second;
  result.value = simplex.front().first;
  result.iterations = iter;
  return result;
}

}  // namespace znn

#endif  // ZNN_NELDER_MEAD_HPP_
