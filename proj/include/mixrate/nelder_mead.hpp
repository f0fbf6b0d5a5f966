#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

namespace mixrate::detail {

struct NelderMeadResult {
  std::vector<double> x;
  double f;
  int iterations;
  int evaluations;
};

/// Derivative-free simplex minimization with the dimension-adaptive
/// coefficients of Gao and Han (2012). Stops after `max_iter` iterations or
/// when both the spread of simplex values is below `ftol` and the simplex
/// diameter is below `xtol`.
inline NelderMeadResult nelder_mead(const std::function<double(const std::vector<double> &)> &f,
                                    std::vector<double> x0, const std::vector<double> &steps,
                                    int max_iter, double ftol, double xtol) {
  const std::size_t dim = x0.size();
  const double nd = static_cast<double>(dim);
  const double alpha = 1.0;
  // Standard coefficients for dim <= 2 (Gao-Han degenerates at dim 1).
  const double beta = dim <= 2 ? 2.0 : 1.0 + 2.0 / nd;
  const double gamma = dim <= 2 ? 0.5 : 0.75 - 1.0 / (2.0 * nd);
  const double delta = dim <= 2 ? 0.5 : 1.0 - 1.0 / nd;

  std::vector<std::vector<double>> simplex(dim + 1, x0);
  for (std::size_t i = 0; i < dim; ++i) simplex[i + 1][i] += steps[i];
  std::vector<double> values(dim + 1);
  int evals = 0;
  auto eval = [&](const std::vector<double> &x) {
    ++evals;
    return f(x);
  };
  for (std::size_t i = 0; i <= dim; ++i) values[i] = eval(simplex[i]);

  std::vector<std::size_t> order(dim + 1);
  std::vector<double> centroid(dim), trial(dim), trial2(dim);
  int iter = 0;
  for (; iter < max_iter; ++iter) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second_worst = order[dim - 1];

    double diameter = 0.0;
    for (std::size_t i = 0; i <= dim; ++i)
      for (std::size_t k = 0; k < dim; ++k)
        diameter = std::max(diameter, std::abs(simplex[i][k] - simplex[best][k]));
    if (values[worst] - values[best] <= ftol && diameter <= xtol) break;

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i <= dim; ++i)
      if (i != worst)
        for (std::size_t k = 0; k < dim; ++k) centroid[k] += simplex[i][k] / nd;

    for (std::size_t k = 0; k < dim; ++k)
      trial[k] = centroid[k] + alpha * (centroid[k] - simplex[worst][k]);
    const double fr = eval(trial);

    if (fr < values[best]) {
      for (std::size_t k = 0; k < dim; ++k)
        trial2[k] = centroid[k] + beta * (trial[k] - centroid[k]);
      const double fe = eval(trial2);
      if (fe < fr) {
        simplex[worst] = trial2;
        values[worst] = fe;
      } else {
        simplex[worst] = trial;
        values[worst] = fr;
      }
      continue;
    }
    if (fr < values[second_worst]) {
      simplex[worst] = trial;
      values[worst] = fr;
      continue;
    }
    const bool outside = fr < values[worst];
    for (std::size_t k = 0; k < dim; ++k)
      trial2[k] = outside ? centroid[k] + gamma * (trial[k] - centroid[k])
                          : centroid[k] - gamma * (centroid[k] - simplex[worst][k]);
    const double fc = eval(trial2);
    if (fc < (outside ? fr : values[worst])) {
      simplex[worst] = trial2;
      values[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i <= dim; ++i) {
      if (i == best) continue;
      for (std::size_t k = 0; k < dim; ++k)
        simplex[i][k] = simplex[best][k] + delta * (simplex[i][k] - simplex[best][k]);
      values[i] = eval(simplex[i]);
    }
  }
  const auto best = static_cast<std::size_t>(
      std::min_element(values.begin(), values.end()) - values.begin());
  return {simplex[best], values[best], iter, evals};
}

} // namespace mixrate::detail
