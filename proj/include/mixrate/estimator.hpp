#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mixrate/measures.hpp"
#include "mixrate/mixture_model.hpp"
#include "mixrate/parallel.hpp"

namespace mixrate {

/// Sorted sample with step-function evaluation F_n(x) = #{x_i <= x} / n.
class EmpiricalCDF {
public:
  explicit EmpiricalCDF(std::vector<double> samples);

  std::span<const double> sorted_samples() const noexcept { return sorted_; }
  std::size_t size() const noexcept { return sorted_.size(); }
  double operator()(double x) const;

private:
  std::vector<double> sorted_;
};

/// Exact sup_x |F(x, atoms) - F_n(x)|. Between jumps of F_n the mixture CDF is
/// continuous and monotone, so the sup is attained at a jump: each order
/// statistic is compared against both i/n and (i-1)/n. Atoms need not be
/// canonical (the estimator evaluates raw candidates).
double ks_distance(const ComponentFamily &family, std::span<const Atom> atoms,
                   const EmpiricalCDF &ecdf, Execution exec = Execution::parallel);

double ks_distance(const ComponentFamily &family, const MixingDistribution &g,
                   const EmpiricalCDF &ecdf, Execution exec = Execution::parallel);

struct EstimatorOptions {
  int restarts = 16;
  int max_iter = 600;
  std::uint64_t seed = 0;
  /// Candidates with weights below this are pruned.
  double weight_floor = 1e-6;
  /// Atoms closer than this are merged.
  double merge_radius = 1e-6;
  /// Stop once two successive restarts improve the best objective by less
  /// than 1/(2n). Disable to run every restart.
  bool early_stop = true;
};

struct FitResult {
  MixingDistribution g_hat;
  double achieved_ks;
  int restarts_used;
  /// Best objective after each restart (nonincreasing).
  std::vector<double> best_objective_trace;
};

/// Minimum-KS-distance fit over mixing distributions with at most m atoms.
///
/// Multistart Nelder-Mead over 2m-1 coordinates: m-1 softmax logits (the
/// last logit is pinned at 0) and m locations clamped to the family's theta
/// bounds. Restart r starts from: r = 0 the family's moment-method solution
/// when available, r = 1 sample quantiles, otherwise a random draw seeded by
/// seed + r.
FitResult fit_min_distance(std::span<const double> samples, const ComponentFamily &family, int m,
                           const EstimatorOptions &opts = {});

/// Single local search from a given starting mixture (atoms are sorted by
/// location before use, so relabeling the start changes nothing).
FitResult fit_from_initial(std::span<const double> samples, const ComponentFamily &family,
                           std::vector<Atom> initial, const EstimatorOptions &opts = {});

/// W(fit.g_hat, g_true).
double wasserstein_error(const FitResult &fit, const MixingDistribution &g_true);

/// Prunes small weights, merges close atoms and renormalizes.
MixingDistribution canonical_candidate(std::vector<Atom> atoms, const ThetaBounds &bounds,
                                       double weight_floor, double merge_radius);

namespace serial {
/// Reference implementation of ks_distance kept for tests and benchmarks.
double ks_distance(const ComponentFamily &family, std::span<const Atom> atoms,
                   const EmpiricalCDF &ecdf);
} // namespace serial

} // namespace mixrate
