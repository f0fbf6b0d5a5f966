#pragma once

#include <optional>
#include <vector>

#include "mixrate/measures.hpp"

namespace mixrate {

/// Power moments (m_0 = 1, m_1, ..., m_K).
class MomentSequence {
public:
  explicit MomentSequence(std::vector<double> values);

  int order() const noexcept { return static_cast<int>(values_.size()) - 1; }
  double operator[](int k) const { return values_.at(static_cast<std::size_t>(k)); }
  const std::vector<double> &values() const noexcept { return values_; }

private:
  std::vector<double> values_;
};

struct HankelReport {
  /// dets[k-1] = det M_k for k = 1..floor(K/2); M_k is (k+1)x(k+1).
  std::vector<double> dets;
  /// Smallest p with det M_1..M_{p-1} > 0 and det M_p numerically zero.
  std::optional<int> realizable_order;
};

/// Relative positivity threshold: det M_k counts as positive when it exceeds
/// this fraction of the product of |diagonal| entries of M_k.
inline constexpr double kHankelTolerance = 1e-9;

HankelReport hankel_determinants(const MomentSequence &ms);

/// Unique d-atom distribution whose moments 0..2d-1 equal `ms`.
///
/// Moments are standardized (centered by m_1, scaled by the standard
/// deviation) before the monic orthogonal polynomial of degree d is solved
/// from the Hankel system. Its companion-matrix eigenvalues give the atoms,
/// a Vandermonde solve gives the weights, and the result is mapped back.
MixingDistribution solve_moment_problem(const MomentSequence &ms, int d,
                                        ThetaBounds bounds = ThetaBounds::whole_line());

/// (sum w, sum w theta, ..., sum w theta^{2d-1}) for a d-atom distribution.
MomentSequence phi_map(const MixingDistribution &g);

/// Closed-form Jacobian determinant of phi_map with respect to
/// (w_1..w_d, theta_1..theta_d):
/// (-1)^{d(d-1)/2} w_1...w_d prod_{j<k} (theta_j - theta_k)^4.
double phi_jacobian_det(const MixingDistribution &g);

} // namespace mixrate
