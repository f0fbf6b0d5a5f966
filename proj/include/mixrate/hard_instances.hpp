#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "mixrate/measures.hpp"

namespace mixrate {

/// Least-favourable perturbation of a limit distribution g0.
///
/// One atom of g0 (the "perturbed" atom) is replaced by a d-atom block,
/// d = m - m0 + 1, whose shape G(u) has moments (1, base_moments..., u) and
/// which is shrunk towards the perturbed atom by n^{-1/(4d-2)}.
struct HardInstanceSpec {
  MixingDistribution g0 = MixingDistribution::dirac(0.0);
  int m = 2;
  /// Moments m_1..m_{2d-2} of the block shape; default (0, 4) for d = 2.
  std::vector<double> base_moments = {0.0, 4.0};
  double u = 0.0;
  double n = 1.0;
  /// Index (in sorted order) of the g0 atom being split; defaults to the last.
  std::optional<std::size_t> perturbed;

  int m0() const noexcept { return static_cast<int>(g0.size()); }
  int d() const noexcept { return m - m0() + 1; }
  std::size_t perturbed_index() const noexcept { return perturbed.value_or(g0.size() - 1); }
  /// n^{-1/(4d-2)}.
  double shrink() const;

  /// Checks the structural invariants; throws ArgumentError / InfeasibleError.
  void validate() const;
};

/// The paper-style default instance: g0 = delta_0, m = 2, base (0, 4),
/// Theta = [-10, 10].
HardInstanceSpec default_hard_instance(double u = 0.0, double n = 1.0);

/// Block shape G(u) = sum_j pi_j(u) delta_{h_j(u)}, unscaled.
MixingDistribution block_shape(const HardInstanceSpec &spec);

/// G_n(u).
MixingDistribution build_gn(const HardInstanceSpec &spec);

/// Default u_max schedule log(1 + n).
double default_u_max(double n);

struct ConvergenceReport {
  std::vector<std::pair<double, double>> rows; // (n, W(G_n(u), g0))
  double c_u = 0.0;                            // max_n W n^{1/(4d-2)}
};

ConvergenceReport convergence_to_g0(const HardInstanceSpec &spec, double u,
                                    const std::vector<double> &n_grid);

struct SeparationReport {
  std::vector<std::pair<double, double>> rows; // (n, W(G_n(u1), G_n(u2)))
  double c = 0.0;                              // W(G_1(u1), G_1(u2))
};

SeparationReport separation_rate(const HardInstanceSpec &spec, double u1, double u2,
                                 const std::vector<double> &n_grid);

} // namespace mixrate
