#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace mixrate {

/// Closed interval [lo, hi] playing the role of the compact parameter set.
struct ThetaBounds {
  double lo = -10.0;
  double hi = 10.0;

  bool contains(double theta) const noexcept { return lo <= theta && theta <= hi; }
  bool interior(double theta) const noexcept { return lo < theta && theta < hi; }

  /// Effectively unconstrained bounds, still finite so they serialize.
  static ThetaBounds whole_line() noexcept {
    return {-std::numeric_limits<double>::max(), std::numeric_limits<double>::max()};
  }
};

struct Atom {
  double weight;
  double theta;
};

/// A finitely supported probability measure on Theta.
///
/// Construction sorts atoms by location, merges atoms closer than
/// `kMergeRadius`, and checks that weights are positive and sum to one
/// within `kMassTolerance`. Instances are immutable afterwards.
class MixingDistribution {
public:
  static constexpr double kMergeRadius = 1e-12;
  static constexpr double kMassTolerance = 1e-12;

  MixingDistribution(std::vector<Atom> atoms, ThetaBounds bounds = {});

  /// Like the constructor, but rescales weights to unit mass first.
  static MixingDistribution normalized(std::vector<Atom> atoms, ThetaBounds bounds = {});

  static MixingDistribution dirac(double theta, ThetaBounds bounds = {});

  std::span<const Atom> atoms() const noexcept { return atoms_; }
  std::size_t size() const noexcept { return atoms_.size(); }
  const ThetaBounds &bounds() const noexcept { return bounds_; }

  std::vector<double> weights() const;
  std::vector<double> locations() const;

  friend bool operator==(const MixingDistribution &a, const MixingDistribution &b);

private:
  std::vector<Atom> atoms_;
  ThetaBounds bounds_;
};

/// Finite signed measure; built from a difference of mixing distributions it
/// has zero total mass.
class SignedAtomicMeasure {
public:
  explicit SignedAtomicMeasure(std::vector<Atom> atoms);

  static SignedAtomicMeasure difference(const MixingDistribution &g1,
                                        const MixingDistribution &g2);

  std::span<const Atom> atoms() const noexcept { return atoms_; }
  double total_mass() const noexcept;

  /// Signed mass of the atoms with the given indices.
  double mass_of(std::span<const std::size_t> indices) const;

  /// Atoms at identical locations folded together, zero net weights dropped,
  /// sorted by location.
  std::vector<Atom> merged() const;

  /// Integral over the real line of the absolute cumulative mass.
  double cdf_l1_norm() const;

private:
  std::vector<Atom> atoms_;
};

/// L1-Wasserstein distance, computed exactly as the integral of
/// |G1(-inf,t] - G2(-inf,t]| over the merged atom locations.
double wasserstein_w1(const MixingDistribution &g1, const MixingDistribution &g2);

/// Kantorovich-Rubinstein lower bound restricted to 1-Lipschitz functions that
/// are piecewise linear with slopes +-1 and kinks only at `test_points`.
/// Attains the primal value when the kinks cover every atom location.
double wasserstein_dual_lb(const MixingDistribution &g1, const MixingDistribution &g2,
                           std::span<const double> test_points);

inline constexpr int kDefaultMaxMomentOrder = 20;

/// sum_j w_j theta_j^k.
double moment(const MixingDistribution &g, int k, int max_order = kDefaultMaxMomentOrder);

/// theta -> center + scale (theta - center) applied to every atom.
MixingDistribution homothety(const MixingDistribution &g, double center, double scale);

} // namespace mixrate
