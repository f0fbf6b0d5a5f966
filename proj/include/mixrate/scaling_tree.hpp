#pragma once

#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "mixrate/measures.hpp"

namespace mixrate {

/// Sentinel exponent for quantities that vanish identically (epsilon_0 = 0).
inline constexpr double kZeroScale = -std::numeric_limits<double>::infinity();

/// n -> (G_{1,n}, G_{2,n}) with power-law scales. Atom i of the signed
/// measure G_{1,n} - G_{2,n} is atom i of G_1 for i < |G_1| and atom
/// i - |G_1| of G_2 (negated) otherwise.
struct ScaledPairFamily {
  std::string name;
  std::function<std::pair<MixingDistribution, MixingDistribution>(double n)> generator;
  std::vector<double> n_grid;
  /// Exponents are snapped to multiples of this step when within snap_tol.
  double ladder_step = 1.0 / 6.0;
};

struct ScwOptions {
  double snap_tol = 0.02;
  double bound = 10.0;
};

/// Paper pair G_n(0), G_n(12) of the default hard instance.
ScaledPairFamily example_pair_family(std::vector<double> n_grid);
/// Locations {0, n^{-1/4}, 1, 1 + n^{-1/4}} carried by both measures, with a
/// weight imbalance n^{-1/4} across the fine pair near 0. Both sides of the
/// order formula scale as n^{-1/2}.
ScaledPairFamily three_level_family(std::vector<double> n_grid);
/// Same order-1 support, G_2 shifts a fixed weight: no n-dependence.
ScaledPairFamily constant_family(std::vector<double> n_grid);

struct PairExponents {
  std::size_t atoms = 0;
  /// a[j][k]: snapped log-log slope of |theta_j - theta_k|; kZeroScale on
  /// the diagonal and for identically coincident atoms.
  std::vector<std::vector<double>> a;
  /// Per-n signed weights and locations, indexed [grid point][atom].
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> locations;
  std::vector<double> n_grid;
  double ladder_step = 1.0 / 6.0;
};

PairExponents fit_exponents(const ScaledPairFamily &fam, const ScwOptions &opts = {});

/// Snapped log-log slope of |sum_{j in J} pi_j| (kZeroScale if identically 0).
double weight_exponent(const PairExponents &ex, const std::vector<std::size_t> &subset,
                       const ScwOptions &opts = {});

/// Least-squares slope of log|y| against log n over the upper half of the
/// grid (at least three points); throws DiagnosticError when fewer than three
/// nonzero points exist and the values are not all zero. n_grid must be
/// increasing.
double fit_log_slope(const std::vector<double> &n_grid, const std::vector<double> &values,
                     double ladder_step, double snap_tol);

struct TreeNode {
  std::vector<std::size_t> members; // sorted atom indices
  int parent = -1;                  // -1 for the root
  std::vector<int> children;
  double diameter_exponent = kZeroScale; // s(J)
  double weight_exponent = kZeroScale;   // v(J)
};

/// Ultrametric ball tree of the exponent matrix. Node 0 is the root.
std::vector<TreeNode> build_tree(const std::vector<std::vector<double>> &a, double snap_tol = 0.02);

struct ScalingTreeReport {
  std::string name;
  std::vector<std::vector<double>> pairwise_exponents;
  std::vector<TreeNode> tree;
  std::vector<double> n_grid;
  std::vector<double> lhs;
  std::vector<double> rhs;
  std::pair<double, double> ratio_range;
  bool pass = false;
};

/// Both sides of W(G_1n, G_2n) ~ max_{J below root} eps_{v(J)} eps_{s(parent J)},
/// PASS iff lhs/rhs stays within [1/bound, bound] and max/min ratio <= bound.
ScalingTreeReport check_scw(const ScaledPairFamily &fam, const ScwOptions &opts = {});

/// "a:b:k" -> k log-spaced points from a to b (e.g. "1e2:1e6:5").
std::vector<double> parse_log_grid(const std::string &spec);

} // namespace mixrate
