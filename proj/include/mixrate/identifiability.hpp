#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "mixrate/measures.hpp"
#include "mixrate/mixture_model.hpp"
#include "mixrate/parallel.hpp"

namespace mixrate {

struct MarginQuery {
  const ComponentFamily *family = nullptr;
  std::vector<double> support;
  int order = 2;
  std::vector<double> x_grid;
  int search_budget = 10000;
  std::uint64_t seed = 0;
};

struct MarginResult {
  double margin;
  /// Unit vector ordered atom-major: alpha[j * (order + 1) + p] multiplies
  /// F^{(p)}(x, theta_j).
  Eigen::VectorXd argmin_alpha;
  int evaluations;
};

/// support range +- 8 * scale with step 0.05 * scale.
std::vector<double> default_margin_grid(const ComponentFamily &family,
                                        const std::vector<double> &support, double step_frac = 0.05);

/// Columns F^{(p)}(x_i, theta_j), atom-major; no distinctness check.
Eigen::MatrixXd margin_matrix(const ComponentFamily &family, const std::vector<double> &support,
                              int order, const std::vector<double> &x_grid);

/// max_i |(A alpha)_i| / ||alpha||.
double margin_objective(const Eigen::MatrixXd &a, const Eigen::VectorXd &alpha);

/// Multistart search for inf_{||alpha|| = 1} max_i |(A alpha)_i|.
///
/// Start s is the s-th right singular vector of A (ascending singular value)
/// and then seeded random unit vectors. Each start runs an iteratively
/// reweighted eigenvector descent (Lawson-style weights on the grid rows)
/// followed by a pattern search on the sphere, capped at a fixed number of
/// objective evaluations. Starts are independent and reduced by minimum, so
/// the result does not depend on the schedule and is nonincreasing in
/// `budget`.
MarginResult minimize_margin(const Eigen::MatrixXd &a, int budget, std::uint64_t seed,
                             Execution exec = Execution::parallel);

/// Upper estimate of the strong-identifiability margin at a support. A
/// positive value is evidence, not proof. Throws ArgumentError for
/// coincident support points.
MarginResult identifiability_margin(const MarginQuery &q, Execution exec = Execution::parallel);

/// sup_x |F(x, g1) - F(x, g2)| on a grid refined near atoms (spacing 1e-3
/// scale within one scale of an atom) with golden-section polishing.
double sup_cdf_difference(const ComponentFamily &family, const MixingDistribution &g1,
                          const MixingDistribution &g2);

struct SeparationRatio {
  double ks;
  double w1;
  int exponent;
  double ratio;
};

/// ||F(., g1) - F(., g2)||_inf / W(g1, g2)^{2m - 2m0 + 1}.
SeparationRatio separation_ratio(const ComponentFamily &family, const MixingDistribution &g1,
                                 const MixingDistribution &g2, int m, int m0);

} // namespace mixrate
