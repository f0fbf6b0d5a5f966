#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "mixrate/estimator.hpp"
#include "mixrate/hard_instances.hpp"
#include "mixrate/mixture_model.hpp"
#include "mixrate/parallel.hpp"

namespace mixrate {

/// Which truth a rate sweep samples from at grid point n.
struct TruthSpec {
  enum class Kind { fixed, hard_instance };
  Kind kind = Kind::fixed;
  /// Kind::fixed.
  std::optional<MixingDistribution> distribution;
  /// Kind::hard_instance: G_n(u) rebuilt at every grid n (the local minimax
  /// sequence), or at `scale_n` when set.
  HardInstanceSpec instance;
  std::optional<double> scale_n;

  MixingDistribution at(double n) const;
};

struct RateSweepConfig {
  std::shared_ptr<const ComponentFamily> family;
  TruthSpec truth;
  int m = 1;
  int m0 = 1;
  std::vector<std::size_t> n_grid;
  int reps = 20;
  std::uint64_t seed = 0;
  EstimatorOptions estimator;
};

struct RateSweepReport {
  std::vector<std::size_t> n_grid;
  /// errors[i][r] = W(G_hat, G_true) for grid point i, replicate r; NaN marks
  /// a failed fit.
  std::vector<std::vector<double>> errors;
  std::vector<double> mean, median, q25, q75;
  std::vector<int> failures;
  double fitted_slope = 0.0;
  double slope_stderr = 0.0;
  /// -1 / (4 (m - m0) + 2).
  double theory_slope = 0.0;
};

RateSweepReport rate_sweep(const RateSweepConfig &cfg, Execution exec = Execution::parallel);

struct DkwReport {
  std::size_t n = 0;
  int reps = 0;
  std::vector<double> scaled_ks; // sqrt(n) * sup |F_n - F|, one per replicate
  double q50 = 0.0, q95 = 0.0, q99 = 0.0;
};

/// Quantiles of sqrt(n) * KS between the empirical and true CDF of a fixed
/// mixture (default 0.8 delta_{-1} + 0.2 delta_4, Gaussian sigma = 1).
DkwReport dkw_calibration(std::size_t n, int reps, std::uint64_t seed,
                          std::shared_ptr<const ComponentFamily> family = nullptr,
                          std::optional<MixingDistribution> truth = std::nullopt,
                          Execution exec = Execution::parallel);

struct LanConfig {
  std::shared_ptr<const ComponentFamily> family;
  HardInstanceSpec spec = default_hard_instance();
  double u = 12.0;
  double n = 4096;
  int reps = 500;
  std::uint64_t seed = 1;
};

struct LanReport {
  double u = 0.0;
  std::size_t n = 0;
  int reps = 0;
  std::vector<double> log_lr; // Z_{n,0}(u), accepted replicates only
  int rejected = 0;
  double sample_mean = 0.0;
  double sample_var = 0.0;
  double gamma_hat = 0.0;
  double gamma_stderr = 0.0;
  /// |mean + u^2 gamma / 2| / (u^2 gamma).
  double signature_gap = 0.0;
  /// sample_var / (u^2 gamma).
  double variance_ratio = 0.0;
  /// Mean and standard error of the per-observation Y_{i,n}(u) under G_n(0).
  double y_mean = 0.0;
  double y_stderr = 0.0;
};

/// Log-likelihood ratios of G_n(u) against G_n(0) on samples from G_n(0).
/// Gamma is estimated as pi^2 E[(f^{(2d-1)}(X, theta) / ((2d-1)! f(X, G_n(0))))^2].
LanReport lan_simulate(const LanConfig &cfg, Execution exec = Execution::parallel);

struct PowerRow {
  std::size_t n = 0;
  double critical = 0.0; // (1 - level) quantile of Z under G_n(0)
  double power = 0.0;    // P(Z > critical) under G_n(u)
};

/// Likelihood-ratio test of G_n(0) against G_n(u) at the given level, per n.
/// Null and alternative replicates share random numbers.
std::vector<PowerRow> contiguity_demo(const LanConfig &cfg, const std::vector<std::size_t> &n_grid,
                                      double level = 0.25, Execution exec = Execution::parallel);

/// Log-likelihood ratio sum_i log f(x_i, alt) / f(x_i, null); returns nullopt
/// when a null density underflows below 1e-300.
std::optional<double> log_likelihood_ratio(const ComponentFamily &family,
                                           const MixingDistribution &alt,
                                           const MixingDistribution &null,
                                           const std::vector<double> &xs);

struct SlopeFit {
  double slope;
  double stderr;
};
/// Least squares of log y on log x.
SlopeFit loglog_slope(const std::vector<double> &x, const std::vector<double> &y);

double empirical_quantile(std::vector<double> values, double q);

} // namespace mixrate
